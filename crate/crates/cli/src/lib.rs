//! `takagi-lab`: evaluations, measure bounds and certificate runs from the
//! command line. All numeric output is exact rational text; JSON reports are
//! wrapped in a `{"schema": "takagi-lab/1", ...}` envelope.

use std::fmt::Write as _;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_traits::ToPrimitive;
use serde::Serialize;

use takagi_core::analysis::{
    blowup_check_with, classify, parse_corpus, refute_with, verify_lemma_with, CorpusResult, Evidence,
};
use takagi_core::exactnum::dyadic_neighbors;
use takagi_core::measure::{quotient_set_breakdown, Direction, EngineConfig, Outcome, QuotientQuery};
use takagi_core::report::Envelope;
use takagi_core::takagi::{
    partial_sum_with, slope_seq, takagi_enclosure_with, takagi_exact_with, takagi_value, Convention, DEFAULT_DEPTH,
};
use takagi_core::{parse_rat, Dyadic, Error as CoreError, Rat};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_UNDECIDED: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "takagi-lab", version, about = "Exact Takagi-function evaluation and certified quotient-set measures")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Output format; each command picks a sensible default.
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,

    /// Deepest series depth that escalation may reach.
    #[arg(long, global = true, env = "TAKAGI_DEPTH_CAP", default_value_t = DEFAULT_DEPTH)]
    pub depth_cap: u32,

    /// Add decimal approximations (non-authoritative) to text and CSV output.
    #[arg(long, global = true)]
    pub approx: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Text,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// T(x) at a dyadic x, or the partial sum G_n(x) with --n.
    Eval {
        #[arg(long, value_parser = rat)]
        x: Rat,
        #[arg(long)]
        n: Option<u32>,
        /// Include the k = 0 term (distance to the integers).
        #[arg(long)]
        classical: bool,
    },
    /// Certified enclosure [G_depth(x), G_depth(x) + 2^-(depth+1)] of T(x).
    Enclose {
        #[arg(long, value_parser = rat)]
        x: Rat,
        #[arg(long, default_value_t = DEFAULT_DEPTH)]
        depth: u32,
        #[arg(long)]
        classical: bool,
    },
    /// Slope sequence G'_1(x), ..., G'_N(x).
    Slopes {
        #[arg(long, value_parser = rat)]
        x: Rat,
        #[arg(long = "n", visible_alias = "horizon")]
        horizon: usize,
    },
    /// Grid neighbours x_n < x < y_n in D_n.
    Neighbors {
        #[arg(long, value_parser = rat)]
        x: Rat,
        #[arg(long)]
        n: u32,
    },
    /// Certified bounds on the measure of a quotient level set.
    Measure(MeasureArgs),
    /// One instance of the measure lemma at (x, n).
    Lemma {
        #[arg(long, value_parser = rat)]
        x: Rat,
        #[arg(long)]
        n: u32,
    },
    /// Blow-up check at a dyadic point.
    Blowup {
        #[arg(long)]
        x: Dyadic,
        #[arg(long)]
        n: u32,
    },
    /// Finite-horizon classification of the slope sequence.
    Classify {
        #[arg(long, value_parser = rat)]
        x: Rat,
        #[arg(long = "n", visible_alias = "horizon")]
        horizon: usize,
    },
    /// Density certificates that rule out an approximate derivative at x.
    Refute {
        #[arg(long, value_parser = rat)]
        x: Rat,
        #[arg(long = "horizon", visible_alias = "n")]
        horizon: usize,
    },
    /// CSV samples `y,lo,hi` of T at equally spaced points of [a, b].
    Sample {
        #[arg(long)]
        a: Dyadic,
        #[arg(long)]
        b: Dyadic,
        #[arg(long)]
        count: usize,
        #[arg(long, default_value_t = DEFAULT_DEPTH)]
        depth: u32,
    },
    /// Run every lemma/blow-up query of a corpus file.
    VerifyAll {
        #[arg(long)]
        corpus: PathBuf,
        /// Worker threads (defaults to the number of CPUs).
        #[arg(long)]
        jobs: Option<usize>,
    },
}

#[derive(Debug, Args)]
pub struct MeasureArgs {
    #[arg(long, value_parser = rat)]
    pub x: Rat,
    #[arg(long)]
    pub r: Dyadic,
    #[arg(long, value_parser = rat, allow_hyphen_values = true)]
    pub alpha: Rat,
    #[arg(long)]
    pub dir: Direction,
    #[arg(long, default_value_t = 16)]
    pub depth: u32,
}

fn rat(text: &str) -> Result<Rat, String> {
    parse_rat(text).map_err(|e| e.to_string())
}

/// Failure modes that map onto exit codes.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] CoreError),
    #[error("{0}")]
    Usage(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

struct Output<'a> {
    out: &'a mut dyn Write,
    format: Format,
    approx: bool,
    command: &'static str,
}

impl Output<'_> {
    fn json<T: Serialize>(&mut self, report: &T) -> Result<(), CliError> {
        let envelope = Envelope::new(self.command, report);
        serde_json::to_writer_pretty(&mut *self.out, &envelope)?;
        writeln!(self.out)?;
        Ok(())
    }

    fn line(&mut self, text: impl AsRef<str>) -> Result<(), CliError> {
        writeln!(self.out, "{}", text.as_ref())?;
        Ok(())
    }

    fn unsupported(&self) -> CliError {
        CliError::Usage(format!("--format {:?} is not available for `{}`", self.format, self.command).to_lowercase())
    }
}

fn approx(value: &Rat) -> String {
    value.to_f64().map_or_else(|| "nan".to_string(), |v| format!("{v:.12}"))
}

fn convention(classical: bool) -> Convention {
    if classical {
        Convention::Classical
    } else {
        Convention::Paper
    }
}

fn status_code(outcome: Outcome) -> i32 {
    match outcome {
        Outcome::Certified => EXIT_OK,
        Outcome::Undecided => EXIT_UNDECIDED,
    }
}

#[derive(Serialize)]
struct ValueReport {
    #[serde(with = "takagi_core::serde_exact")]
    x: Rat,
    /// Present for partial sums.
    n: Option<u32>,
    convention: Convention,
    #[serde(with = "takagi_core::serde_exact")]
    value: Rat,
}

#[derive(Serialize)]
struct EnclosureReport {
    #[serde(with = "takagi_core::serde_exact")]
    x: Rat,
    depth: u32,
    convention: Convention,
    #[serde(with = "takagi_core::serde_exact")]
    lo: Rat,
    #[serde(with = "takagi_core::serde_exact")]
    hi: Rat,
    #[serde(with = "takagi_core::serde_exact")]
    width: Rat,
}

#[derive(Serialize)]
struct NeighborReport {
    #[serde(with = "takagi_core::serde_exact")]
    x: Rat,
    n: u32,
    lo: Dyadic,
    hi: Dyadic,
}

#[derive(Serialize)]
struct SampleRow {
    #[serde(with = "takagi_core::serde_exact")]
    y: Rat,
    #[serde(with = "takagi_core::serde_exact")]
    lo: Rat,
    #[serde(with = "takagi_core::serde_exact")]
    hi: Rat,
}

#[derive(Serialize)]
struct VerifyEntry {
    index: usize,
    line: String,
    result: Option<CorpusResult>,
    error: Option<String>,
}

#[derive(Serialize)]
struct VerifySummary {
    total: usize,
    certified: usize,
    undecided: usize,
    errors: usize,
    entries: Vec<VerifyEntry>,
}

/// Parses `argv` and runs the command, writing results to `out` and
/// diagnostics to `err`. Returns the process exit code.
pub fn run<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_FAILURE } else { EXIT_OK };
            let rendered = e.render().to_string();
            if e.use_stderr() {
                let _ = write!(err, "{rendered}");
            } else {
                let _ = write!(out, "{rendered}");
            }
            return code;
        }
    };
    match execute(&cli, out) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            if matches!(e, CliError::Usage(_)) {
                let _ = writeln!(err, "\n{}", <Cli as clap::CommandFactory>::command().render_usage());
            }
            EXIT_FAILURE
        }
    }
}

fn engine(cli: &Cli) -> EngineConfig {
    EngineConfig {
        depth_cap: cli.depth_cap,
        ..EngineConfig::default()
    }
}

pub fn execute(cli: &Cli, out: &mut dyn Write) -> Result<i32, CliError> {
    let (command, default_format) = match &cli.command {
        Command::Eval { .. } => ("eval", Format::Text),
        Command::Enclose { .. } => ("enclose", Format::Text),
        Command::Slopes { .. } => ("slopes", Format::Text),
        Command::Neighbors { .. } => ("neighbors", Format::Text),
        Command::Measure(_) => ("measure", Format::Json),
        Command::Lemma { .. } => ("lemma", Format::Json),
        Command::Blowup { .. } => ("blowup", Format::Json),
        Command::Classify { .. } => ("classify", Format::Json),
        Command::Refute { .. } => ("refute", Format::Json),
        Command::Sample { .. } => ("sample", Format::Csv),
        Command::VerifyAll { .. } => ("verify-all", Format::Json),
    };
    let mut o = Output {
        out,
        format: cli.format.unwrap_or(default_format),
        approx: cli.approx,
        command,
    };
    let config = engine(cli);

    match &cli.command {
        Command::Eval { x, n, classical } => {
            let conv = convention(*classical);
            let value = match (n, Dyadic::from_scalar(x)) {
                (Some(n), _) => partial_sum_with(*n, x, conv),
                (None, Some(d)) => takagi_exact_with(&d, conv).to_rat(),
                (None, None) => {
                    return Err(CliError::Usage(format!(
                        "{x} is not dyadic, so T(x) has no finite expansion; pass --n for G_n(x) or use `enclose`"
                    )))
                }
            };
            match o.format {
                Format::Json => o.json(&ValueReport {
                    x: x.clone(),
                    n: *n,
                    convention: conv,
                    value,
                })?,
                Format::Text if o.approx => o.line(format!("{value}  (approx {})", approx(&value)))?,
                Format::Text => o.line(value.to_string())?,
                Format::Csv => return Err(o.unsupported()),
            }
            Ok(EXIT_OK)
        }
        Command::Enclose { x, depth, classical } => {
            let conv = convention(*classical);
            let e = takagi_enclosure_with(x, *depth, conv);
            let width = e.width();
            match o.format {
                Format::Json => o.json(&EnclosureReport {
                    x: x.clone(),
                    depth: *depth,
                    convention: conv,
                    lo: e.lo,
                    hi: e.hi,
                    width,
                })?,
                Format::Text => {
                    let mut text = format!("[{}, {}]", e.lo, e.hi);
                    if o.approx {
                        let _ = write!(text, "  (approx [{}, {}])", approx(&e.lo), approx(&e.hi));
                    }
                    o.line(text)?
                }
                Format::Csv => {
                    o.line("x,depth,lo,hi")?;
                    o.line(format!("{x},{depth},{},{}", e.lo, e.hi))?
                }
            }
            Ok(EXIT_OK)
        }
        Command::Slopes { x, horizon } => {
            let seq = slope_seq(x, *horizon)?;
            match o.format {
                Format::Json => o.json(&seq)?,
                Format::Text => o.line(
                    seq.values
                        .iter()
                        .map(i64::to_string)
                        .collect::<Vec<_>>()
                        .join(" "),
                )?,
                Format::Csv => {
                    o.line("n,g_slope,G_slope")?;
                    for n in 1..=seq.horizon {
                        o.line(format!("{n},{},{}", seq.increment(n), seq.cumulative(n)))?;
                    }
                }
            }
            Ok(EXIT_OK)
        }
        Command::Neighbors { x, n } => {
            let (lo, hi) = dyadic_neighbors(x, *n)?;
            match o.format {
                Format::Json => o.json(&NeighborReport {
                    x: x.clone(),
                    n: *n,
                    lo,
                    hi,
                })?,
                Format::Text => o.line(format!("{lo} {hi}"))?,
                Format::Csv => {
                    o.line("x,n,lo,hi")?;
                    o.line(format!("{x},{n},{lo},{hi}"))?
                }
            }
            Ok(EXIT_OK)
        }
        Command::Measure(args) => {
            let query = QuotientQuery::new(args.x.clone(), args.r.clone(), args.alpha.clone(), args.dir, args.depth)?;
            let breakdown = quotient_set_breakdown(&query, &config)?;
            match o.format {
                Format::Json => o.json(&breakdown)?,
                Format::Text => {
                    o.line(format!("lo = {}", breakdown.total.lo))?;
                    o.line(format!("hi = {}", breakdown.total.hi))?;
                    o.line(format!("left  [{}, {}]", breakdown.left.lo, breakdown.left.hi))?;
                    o.line(format!("right [{}, {}]", breakdown.right.lo, breakdown.right.hi))?;
                }
                Format::Csv => {
                    o.line("side,lo,hi")?;
                    o.line(format!("left,{},{}", breakdown.left.lo, breakdown.left.hi))?;
                    o.line(format!("right,{},{}", breakdown.right.lo, breakdown.right.hi))?;
                    o.line(format!("total,{},{}", breakdown.total.lo, breakdown.total.hi))?;
                }
            }
            Ok(EXIT_OK)
        }
        Command::Lemma { x, n } => {
            let report = verify_lemma_with(x, *n, &config)?;
            match o.format {
                Format::Json => o.json(&report)?,
                Format::Text => o.line(format!(
                    "x={} n={} sign={:+} dir={} alpha={} required={} certified={} depth={} status={:?}",
                    report.x,
                    report.n,
                    report.sign,
                    report.dir,
                    report.alpha,
                    report.bound_required,
                    report.bound_certified,
                    report.depth_used,
                    report.status
                ))?,
                Format::Csv => return Err(o.unsupported()),
            }
            Ok(status_code(report.status))
        }
        Command::Blowup { x, n } => {
            let report = blowup_check_with(x, *n, &config)?;
            match o.format {
                Format::Json => o.json(&report)?,
                Format::Text => o.line(format!(
                    "x={} n={} n0={} threshold={} required={} certified={} (left {}, right {}) depth={} status={:?}",
                    report.x,
                    report.n,
                    report.n0,
                    report.threshold,
                    report.bound_required,
                    report.bound_certified,
                    report.left_certified,
                    report.right_certified,
                    report.depth_used,
                    report.status
                ))?,
                Format::Csv => return Err(o.unsupported()),
            }
            Ok(status_code(report.status))
        }
        Command::Classify { x, horizon } => {
            let report = classify(x, *horizon)?;
            match o.format {
                Format::Json => o.json(&report)?,
                Format::Text => {
                    o.line(format!("case hint at horizon {}: {}", report.horizon, report.case_hint))?;
                    if let (Some(min), Some(max)) = (report.running_min, report.running_max) {
                        o.line(format!("running min {min} at {:?}", report.min_hits))?;
                        o.line(format!("running max {max} at {:?}", report.max_hits))?;
                    }
                }
                Format::Csv => {
                    let seq = report.seq.as_ref().ok_or_else(|| CliError::Usage(format!("{x} is dyadic; no slope sequence")))?;
                    o.line("n,G_slope")?;
                    for (i, v) in seq.values.iter().enumerate() {
                        o.line(format!("{},{v}", i + 1))?;
                    }
                }
            }
            Ok(EXIT_OK)
        }
        Command::Refute { x, horizon } => {
            let refutation = match refute_with(x, *horizon, &config) {
                Ok(r) => r,
                Err(CoreError::InsufficientHorizon { horizon }) => {
                    let message = format!("no certificates found up to horizon {horizon}");
                    match o.format {
                        Format::Json => o.json(&serde_json::json!({
                            "x": x.to_string(),
                            "horizon": horizon,
                            "status": "insufficient-horizon",
                        }))?,
                        _ => o.line(message)?,
                    }
                    return Ok(EXIT_UNDECIDED);
                }
                Err(e) => return Err(e.into()),
            };
            match o.format {
                Format::Json => o.json(&refutation)?,
                Format::Text => {
                    o.line(format!("x={} horizon={} case hint: {}", refutation.x, refutation.horizon, refutation.case_hint))?;
                    match &refutation.evidence {
                        Evidence::Paired { anchor, extreme, pairs } => {
                            o.line(format!("{} pairs anchored at running {anchor:?} {extreme}", pairs.len()))?;
                            for p in pairs {
                                o.line(format!(
                                    "  n_k={}: le α={} r={} density≥{} | ge α={} r={} density≥{}",
                                    p.index, p.le.alpha, p.le.r, p.le.density_lo, p.ge.alpha, p.ge.r, p.ge.density_lo
                                ))?;
                            }
                        }
                        Evidence::Divergent { certificates, .. } | Evidence::Blowup { certificates } => {
                            for c in certificates {
                                o.line(format!("  {} α={} r={} density≥{}", c.dir, c.alpha, c.r, c.density_lo))?;
                            }
                        }
                    }
                }
                Format::Csv => return Err(o.unsupported()),
            }
            Ok(EXIT_OK)
        }
        Command::Sample { a, b, count, depth } => {
            if a >= b {
                return Err(CliError::Usage(format!("need a < b, got a = {a}, b = {b}")));
            }
            if *count < 2 {
                return Err(CliError::Usage("--count must be at least 2".into()));
            }
            let start = a.to_rat();
            let step = (b.to_rat() - &start) / Rat::from_integer((*count as i64 - 1).into());
            let rows: Vec<SampleRow> = (0..*count)
                .map(|i| {
                    let y = &start + &step * Rat::from_integer((i as i64).into());
                    let e = takagi_value(&y, *depth);
                    SampleRow { y, lo: e.lo, hi: e.hi }
                })
                .collect();
            match o.format {
                Format::Csv => {
                    o.line(if o.approx { "y,lo,hi,approx_y,approx_lo,approx_hi" } else { "y,lo,hi" })?;
                    for row in &rows {
                        let mut line = format!("{},{},{}", row.y, row.lo, row.hi);
                        if o.approx {
                            let _ = write!(line, ",{},{},{}", approx(&row.y), approx(&row.lo), approx(&row.hi));
                        }
                        o.line(line)?;
                    }
                }
                Format::Json => o.json(&rows)?,
                Format::Text => {
                    for row in &rows {
                        o.line(format!("{}: [{}, {}]", row.y, row.lo, row.hi))?;
                    }
                }
            }
            Ok(EXIT_OK)
        }
        Command::VerifyAll { corpus, jobs } => {
            let text = std::fs::read_to_string(corpus)?;
            let entries = parse_corpus(&text)?;
            let mut builder = rayon::ThreadPoolBuilder::new();
            if let Some(jobs) = jobs {
                builder = builder.num_threads(*jobs);
            }
            let pool = builder
                .build()
                .map_err(|e| CliError::Usage(format!("cannot start worker pool: {e}")))?;
            let results = pool.install(|| takagi_core::analysis::verify_batch(&entries, &config));
            let mut summary = VerifySummary {
                total: entries.len(),
                certified: 0,
                undecided: 0,
                errors: 0,
                entries: Vec::with_capacity(entries.len()),
            };
            for (index, (entry, result)) in entries.iter().zip(results).enumerate() {
                let line = format!("{} {} {}", kind_name(entry), entry.x, entry.n);
                match result {
                    Ok(r) => {
                        if r.is_certified() {
                            summary.certified += 1;
                        } else {
                            summary.undecided += 1;
                        }
                        summary.entries.push(VerifyEntry { index, line, result: Some(r), error: None });
                    }
                    Err(e) => {
                        summary.errors += 1;
                        summary.entries.push(VerifyEntry { index, line, result: None, error: Some(e.to_string()) });
                    }
                }
            }
            match o.format {
                Format::Json => o.json(&summary)?,
                Format::Text | Format::Csv => {
                    o.line("index,query,status")?;
                    for e in &summary.entries {
                        let status = match (&e.result, &e.error) {
                            (Some(r), _) if r.is_certified() => "certified".to_string(),
                            (Some(_), _) => "undecided".to_string(),
                            (None, Some(err)) => format!("error: {err}"),
                            (None, None) => unreachable!(),
                        };
                        o.line(format!("{},{},{}", e.index, e.line, status))?;
                    }
                }
            }
            Ok(if summary.errors > 0 {
                EXIT_FAILURE
            } else if summary.undecided > 0 {
                EXIT_UNDECIDED
            } else {
                EXIT_OK
            })
        }
    }
}

fn kind_name(entry: &takagi_core::analysis::CorpusEntry) -> &'static str {
    match entry.kind {
        takagi_core::analysis::CorpusKind::Lemma => "lemma",
        takagi_core::analysis::CorpusKind::Blowup => "blowup",
    }
}
