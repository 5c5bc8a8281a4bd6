use std::process::{Command, Output};

use serde_json::Value;

fn lab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_takagi-lab"))
        .args(args)
        .env_remove("TAKAGI_DEPTH_CAP")
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("valid json")
}

fn corpus() -> String {
    format!("{}/tests/data/corpus.txt", env!("CARGO_MANIFEST_DIR"))
}

fn assert_no_floats(v: &Value) {
    match v {
        Value::Number(n) => assert!(n.is_i64() || n.is_u64(), "float in output: {n}"),
        Value::Array(items) => items.iter().for_each(assert_no_floats),
        Value::Object(map) => map.values().for_each(assert_no_floats),
        _ => {}
    }
}

#[test]
fn eval_dyadic_is_exact() {
    let out = lab(&["eval", "--x", "1/4"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout(&out).trim(), "1/4");

    let out = lab(&["eval", "--x", "1/4", "--classical"]);
    assert_eq!(stdout(&out).trim(), "1/2");
}

#[test]
fn eval_non_dyadic_needs_depth() {
    let out = lab(&["eval", "--x", "1/3"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("Usage"));

    let out = lab(&["eval", "--x", "1/3", "--n", "2"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout(&out).trim(), "1/4");
}

#[test]
fn enclose_brackets_periodic_value() {
    // T(1/3) = 2/3 in this convention.
    let out = lab(&["enclose", "--x", "1/3", "--depth", "10", "--format", "json"]);
    let v = json(&out);
    assert_eq!(v["report"]["lo"], "341/1024");
    assert_eq!(v["report"]["hi"], "683/2048");
    assert_eq!(v["report"]["width"], "1/2048");
}

#[test]
fn lemma_certifies_and_json_is_exact() {
    let out = lab(&["lemma", "--x", "1/3", "--n", "2", "--format", "json"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["schema"], "takagi-lab/1");
    assert_eq!(v["command"], "lemma");
    assert_eq!(v["report"]["status"], "certified");
    assert_eq!(v["report"]["bound_required"], "1/128");
    assert_no_floats(&v);
}

#[test]
fn measure_at_half() {
    let out = lab(&["measure", "--x", "1/2", "--r", "1/16", "--alpha", "3", "--dir", "ge", "--depth", "12"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["report"]["total"]["lo"], "1/16");
    assert_eq!(v["report"]["left"]["hi"], "0");
    assert_no_floats(&v);
}

#[test]
fn negative_alpha_parses() {
    let out = lab(&["measure", "--x", "1/3", "--r", "1/8", "--alpha", "-1000", "--dir", "ge", "--depth", "8"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    // Only a sliver of width ~2^-9/1000 beside x stays uncertified.
    assert_eq!(v["report"]["total"]["lo"], "63999/256000");
    assert_eq!(v["report"]["total"]["hi"], "1/4");
}

#[test]
fn undecided_exits_two() {
    let out = Command::new(env!("CARGO_BIN_EXE_takagi-lab"))
        .args(["lemma", "--x", "1/3", "--n", "8"])
        .env("TAKAGI_DEPTH_CAP", "2")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(json(&out)["report"]["status"], "undecided");
}

#[test]
fn sample_rows_are_exact_at_dyadics() {
    let out = lab(&["sample", "--a", "1/4", "--b", "1/2", "--count", "5", "--depth", "20"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    let rows: Vec<&str> = text.lines().collect();
    assert_eq!(rows[0], "y,lo,hi");
    assert_eq!(&rows[1..], ["1/4,1/4,1/4", "5/16,5/16,5/16", "3/8,1/4,1/4", "7/16,3/16,3/16", "1/2,0,0"]);
}

#[test]
fn sample_enclosures_at_non_dyadic_points() {
    let out = lab(&["sample", "--a", "0", "--b", "1", "--count", "4", "--depth", "20"]);
    let text = stdout(&out);
    let row: Vec<&str> = text.lines().nth(2).unwrap().split(',').collect();
    assert_eq!(row[0], "1/3");
    assert_ne!(row[1], row[2]);
}

#[test]
fn sample_rejects_bad_range() {
    assert_eq!(lab(&["sample", "--a", "1/2", "--b", "1/4", "--count", "3"]).status.code(), Some(1));
    assert_eq!(lab(&["sample", "--a", "0", "--b", "1", "--count", "1"]).status.code(), Some(1));
}

#[test]
fn verify_all_certifies_corpus() {
    let path = corpus();
    let out = lab(&["verify-all", "--corpus", &path, "--jobs", "2"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    let v = json(&out);
    assert_eq!(v["report"]["total"], 7);
    assert_eq!(v["report"]["certified"], 7);
    let indices: Vec<u64> = v["report"]["entries"].as_array().unwrap().iter().map(|e| e["index"].as_u64().unwrap()).collect();
    assert_eq!(indices, (0..7).collect::<Vec<_>>());
    assert_no_floats(&v);
}

#[test]
fn verify_all_reports_undecided() {
    let out = Command::new(env!("CARGO_BIN_EXE_takagi-lab"))
        .args(["verify-all", "--corpus", &corpus()])
        .env("TAKAGI_DEPTH_CAP", "1")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn verify_all_missing_file_fails() {
    assert_eq!(lab(&["verify-all", "--corpus", "/nonexistent/corpus.txt"]).status.code(), Some(1));
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(lab(&[]).status.code(), Some(1));
    assert_eq!(lab(&["eval", "--x", "0.5"]).status.code(), Some(1));
    assert_eq!(lab(&["measure", "--x", "1/2", "--r", "1/3", "--alpha", "0", "--dir", "ge"]).status.code(), Some(1));
    assert_eq!(lab(&["--help"]).status.code(), Some(0));
}

#[test]
fn slopes_and_neighbors() {
    assert_eq!(stdout(&lab(&["slopes", "--x", "1/3", "--n", "4"])).trim(), "-1 0 -1 0");
    assert_eq!(stdout(&lab(&["neighbors", "--x", "1/3", "--n", "2"])).trim(), "1/4 1/2");
    assert_eq!(lab(&["neighbors", "--x", "1/4", "--n", "2"]).status.code(), Some(1));
}

#[test]
fn refute_reports_pairs() {
    let out = lab(&["refute", "--x", "1/3", "--horizon", "8"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["report"]["evidence"]["kind"], "paired");
    assert_eq!(v["report"]["evidence"]["pairs"].as_array().unwrap().len(), 4);
}

#[test]
fn sample_small_grids() {
    let text = stdout(&lab(&["sample", "--a", "0", "--b", "1", "--count", "3", "--depth", "8"]));
    assert_eq!(text.lines().collect::<Vec<_>>(), ["y,lo,hi", "0,0,0", "1/2,0,0", "1,0,0"]);
    let text = stdout(&lab(&["sample", "--a", "0", "--b", "1/2", "--count", "2", "--depth", "4"]));
    assert_eq!(text.lines().count(), 3);
}

#[test]
fn json_reports_round_trip() {
    use takagi_core::analysis::{blowup_check, verify_lemma, BlowupReport, LemmaReport};
    use takagi_core::measure::{quotient_set_breakdown, Direction, EngineConfig, QuotientBreakdown, QuotientQuery};
    use takagi_core::{parse_rat, Dyadic};

    let v = json(&lab(&["lemma", "--x", "2/7", "--n", "5"]));
    let parsed: LemmaReport = serde_json::from_value(v["report"].clone()).unwrap();
    assert_eq!(parsed, verify_lemma(&parse_rat("2/7").unwrap(), 5).unwrap());

    let v = json(&lab(&["blowup", "--x", "3/8", "--n", "9"]));
    let parsed: BlowupReport = serde_json::from_value(v["report"].clone()).unwrap();
    assert_eq!(parsed, blowup_check(&"3/8".parse::<Dyadic>().unwrap(), 9).unwrap());

    let v = json(&lab(&["measure", "--x", "1/5", "--r", "1/32", "--alpha", "1/3", "--dir", "le", "--depth", "10"]));
    let parsed: QuotientBreakdown = serde_json::from_value(v["report"].clone()).unwrap();
    let q = QuotientQuery::new(
        parse_rat("1/5").unwrap(),
        "1/32".parse().unwrap(),
        parse_rat("1/3").unwrap(),
        Direction::Le,
        10,
    )
    .unwrap();
    assert_eq!(parsed, quotient_set_breakdown(&q, &EngineConfig::default()).unwrap());
}
