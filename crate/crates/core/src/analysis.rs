//! Pointwise certificates against approximate derivability.
//!
//! A function approximately derivable at `x` with derivative `c` has, for every
//! `α > c`, vanishing density of `{quotient ≥ α}` as the window shrinks, and the
//! same for `{quotient ≤ β}` with `β < c`. Each certificate here is a concrete
//! scale, threshold and direction together with a certified lower bound on
//! that density. Infinite statements (liminf, limsup, limits as `r → 0`) are
//! never claimed: the slope sequence is only inspected up to a finite horizon.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exactnum::{dyadic_level, is_dyadic, Dyadic};
use crate::measure::{certify_lower, Direction, EngineConfig, Outcome, QuotientQuery};
use crate::scalar::ExactScalar;
use crate::takagi::slope_seq;
use crate::{Rat, SlopeSeq};

/// Depth at which lemma and blow-up queries start escalating, above `n`.
pub const START_DEPTH_OFFSET: u32 = 4;

fn two_fifths() -> Rat {
    Rat::new(2.into(), 5.into())
}

fn non_dyadic(x: &Rat) -> Result<()> {
    if is_dyadic(x) {
        Err(Error::IsDyadic { value: x.to_string() })
    } else {
        Ok(())
    }
}

/// One instance of the quantitative lemma: on the punctured ball of radius
/// `2^-n`, the quotient stays on one side of `G'_{n-1}(x) ± 2/5` on a set of
/// measure at least `2^-(n+5)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LemmaReport {
    #[serde(with = "crate::serde_exact")]
    pub x: Rat,
    pub n: u32,
    /// `g'_n(x)`.
    pub sign: i8,
    pub dir: Direction,
    #[serde(with = "crate::serde_exact")]
    pub alpha: Rat,
    pub radius: Dyadic,
    #[serde(with = "crate::serde_exact")]
    pub bound_required: Rat,
    #[serde(with = "crate::serde_exact")]
    pub bound_certified: Rat,
    #[serde(with = "crate::serde_exact")]
    pub bound_upper: Rat,
    pub depth_used: u32,
    pub status: Outcome,
}

impl LemmaReport {
    pub fn is_certified(&self) -> bool {
        self.status == Outcome::Certified
    }
}

pub fn verify_lemma(x: &Rat, n: u32) -> Result<LemmaReport> {
    verify_lemma_with(x, n, &EngineConfig::default())
}

pub fn verify_lemma_with(x: &Rat, n: u32, config: &EngineConfig) -> Result<LemmaReport> {
    non_dyadic(x)?;
    if n == 0 {
        return Err(Error::Precondition("lemma index n must be at least 1".into()));
    }
    let seq = slope_seq(x, n as usize)?;
    let sign = seq.increment(n as usize) as i8;
    let previous = Rat::from_int(seq.cumulative(n as usize - 1));
    let (dir, alpha) = if sign > 0 {
        (Direction::Le, previous + two_fifths())
    } else {
        (Direction::Ge, previous - two_fifths())
    };
    let radius = Dyadic::unit(n);
    let required = Rat::pow2(-(i64::from(n) + 5));
    let start = (n + START_DEPTH_OFFSET).min(config.depth_cap.max(1));
    let query = QuotientQuery::new(x.clone(), radius.clone(), alpha.clone(), dir, start)?;
    let escalation = certify_lower(&query, &required, config)?;
    Ok(LemmaReport {
        x: x.clone(),
        n,
        sign,
        dir,
        alpha,
        radius,
        bound_required: required,
        bound_certified: escalation.breakdown.total.lo,
        bound_upper: escalation.breakdown.total.hi,
        depth_used: escalation.depth_used,
        status: escalation.outcome,
    })
}

/// Finite-horizon evidence about the shape of the slope sequence.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CaseHint {
    /// A running extreme keeps recurring: the liminf or limsup looks finite.
    BoundedOscillation,
    /// Neither extreme recurs: the sequence looks like it drifts off.
    Divergent,
    /// `x` is dyadic, so the slope sequence is not defined.
    Dyadic,
}

impl fmt::Display for CaseHint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CaseHint::BoundedOscillation => "bounded-oscillation",
            CaseHint::Divergent => "divergent",
            CaseHint::Dyadic => "dyadic",
        })
    }
}

/// The slope sequence up to `horizon` with its running extremes.
///
/// `case_hint` describes only what the first `horizon` terms look like.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassificationReport {
    #[serde(with = "crate::serde_exact")]
    pub x: Rat,
    pub horizon: usize,
    pub seq: Option<SlopeSeq>,
    pub running_min: Option<i64>,
    pub running_max: Option<i64>,
    /// Indices `n` (1-based) with `G'_n(x) = running_min`.
    pub min_hits: Vec<usize>,
    /// Indices `n` (1-based) with `G'_n(x) = running_max`.
    pub max_hits: Vec<usize>,
    pub case_hint: CaseHint,
}

/// An extreme recurs if it is attained in both halves of the horizon.
fn recurs(hits: &[usize], horizon: usize) -> bool {
    let half = horizon / 2;
    hits.iter().any(|&n| n <= half) && hits.iter().any(|&n| n > half)
}

pub fn classify(x: &Rat, horizon: usize) -> Result<ClassificationReport> {
    if is_dyadic(x) || horizon == 0 {
        let case_hint = if is_dyadic(x) { CaseHint::Dyadic } else { CaseHint::Divergent };
        if horizon == 0 && case_hint != CaseHint::Dyadic {
            return Err(Error::Precondition("horizon must be at least 1".into()));
        }
        return Ok(ClassificationReport {
            x: x.clone(),
            horizon,
            seq: None,
            running_min: None,
            running_max: None,
            min_hits: Vec::new(),
            max_hits: Vec::new(),
            case_hint,
        });
    }
    let seq = slope_seq(x, horizon)?;
    let min = *seq.values.iter().min().expect("horizon ≥ 1");
    let max = *seq.values.iter().max().expect("horizon ≥ 1");
    let hits = |target: i64| -> Vec<usize> {
        seq.values
            .iter()
            .enumerate()
            .filter(|(_, v)| **v == target)
            .map(|(i, _)| i + 1)
            .collect()
    };
    let min_hits = hits(min);
    let max_hits = hits(max);
    let case_hint = if recurs(&min_hits, horizon) || recurs(&max_hits, horizon) {
        CaseHint::BoundedOscillation
    } else {
        CaseHint::Divergent
    };
    Ok(ClassificationReport {
        x: x.clone(),
        horizon,
        seq: Some(seq),
        running_min: Some(min),
        running_max: Some(max),
        min_hits,
        max_hits,
        case_hint,
    })
}

/// Blow-up at a dyadic point: for `|h| < 2^-(n+1)`, `T(x+h) - T(x) ≥ (n - 2n₀)|h|`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlowupReport {
    pub x: Dyadic,
    pub n: u32,
    /// `dyadic_level(x)`; `-1` at integers.
    pub level: i64,
    /// The `n₀` used in the threshold: the level, floored at 0.
    pub n0: i64,
    #[serde(with = "crate::serde_exact")]
    pub threshold: Rat,
    pub radius: Dyadic,
    /// `2^-(n+2)`.
    #[serde(with = "crate::serde_exact")]
    pub bound_required: Rat,
    #[serde(with = "crate::serde_exact")]
    pub bound_certified: Rat,
    #[serde(with = "crate::serde_exact")]
    pub bound_upper: Rat,
    /// Certified measure to the right of `x`.
    #[serde(with = "crate::serde_exact")]
    pub right_certified: Rat,
    /// Certified measure to the left of `x`.
    #[serde(with = "crate::serde_exact")]
    pub left_certified: Rat,
    pub depth_used: u32,
    pub status: Outcome,
}

impl BlowupReport {
    pub fn is_certified(&self) -> bool {
        self.status == Outcome::Certified
    }
}

pub fn blowup_check(x: &Dyadic, n: u32) -> Result<BlowupReport> {
    blowup_check_with(x, n, &EngineConfig::default())
}

pub fn blowup_check_with(x: &Dyadic, n: u32, config: &EngineConfig) -> Result<BlowupReport> {
    let level = dyadic_level(x);
    // x ∈ D_1 already holds at integers, and the series has no k = 0 term.
    let n0 = level.max(0);
    if i64::from(n) <= 2 * n0 {
        return Err(Error::Precondition(format!(
            "blow-up index n = {n} must exceed 2·n₀ = {}",
            2 * n0
        )));
    }
    let threshold = Rat::from_int(i64::from(n) - 2 * n0);
    let radius = Dyadic::unit(n + 1);
    let required = Rat::pow2(-(i64::from(n) + 2));
    let start = (n + START_DEPTH_OFFSET).min(config.depth_cap.max(1));
    let query = QuotientQuery::new(x.to_rat(), radius.clone(), threshold.clone(), Direction::Ge, start)?;
    let escalation = certify_lower(&query, &required, config)?;
    let breakdown = escalation.breakdown;
    Ok(BlowupReport {
        x: x.clone(),
        n,
        level,
        n0,
        threshold,
        radius,
        bound_required: required,
        bound_certified: breakdown.total.lo,
        bound_upper: breakdown.total.hi,
        right_certified: breakdown.right.lo,
        left_certified: breakdown.left.lo,
        depth_used: escalation.depth_used,
        status: escalation.outcome,
    })
}

/// A certified lower bound on the density of a quotient level set at one scale.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DensityCertificate {
    #[serde(with = "crate::serde_exact")]
    pub x: Rat,
    pub r: Dyadic,
    #[serde(with = "crate::serde_exact")]
    pub alpha: Rat,
    pub dir: Direction,
    #[serde(with = "crate::serde_exact")]
    pub density_lo: Rat,
    /// Whether the underlying lemma or blow-up bound was reached.
    pub status: Outcome,
}

fn density(measure: &Rat, radius: &Dyadic) -> Rat {
    measure / (radius.to_rat() * Rat::from_int(2))
}

/// The lemma instance at `(x, n)` as a density certificate on radius `2^-n`.
pub fn certificate(x: &Rat, n: u32) -> Result<DensityCertificate> {
    certificate_with(x, n, &EngineConfig::default())
}

pub fn certificate_with(x: &Rat, n: u32, config: &EngineConfig) -> Result<DensityCertificate> {
    let report = verify_lemma_with(x, n, config)?;
    Ok(lemma_certificate(&report))
}

fn lemma_certificate(report: &LemmaReport) -> DensityCertificate {
    DensityCertificate {
        x: report.x.clone(),
        r: report.radius.clone(),
        alpha: report.alpha.clone(),
        dir: report.dir,
        density_lo: density(&report.bound_certified, &report.radius),
        status: report.status,
    }
}

fn blowup_certificate(report: &BlowupReport) -> DensityCertificate {
    DensityCertificate {
        x: report.x.to_rat(),
        r: report.radius.clone(),
        alpha: report.threshold.clone(),
        dir: Direction::Ge,
        density_lo: density(&report.bound_certified, &report.radius),
        status: report.status,
    }
}

/// Which running extreme anchors a refutation pair.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Anchor {
    Minimum,
    Maximum,
}

/// Two certificates at neighbouring dyadic scales whose thresholds differ by
/// exactly `1/5`, with the `≤` threshold below the `≥` one. No single value
/// can be the approximate derivative if both densities stay positive.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CertificatePair {
    /// `n_k`: the `≤`/`≥` certificates sit at radii `2^-n_k` and `2^-(n_k-1)`
    /// when anchored at the minimum (the other way round at the maximum).
    pub index: usize,
    pub le: DensityCertificate,
    pub ge: DensityCertificate,
}

impl CertificatePair {
    pub fn gap(&self) -> Rat {
        &self.ge.alpha - &self.le.alpha
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Evidence {
    Paired {
        anchor: Anchor,
        extreme: i64,
        pairs: Vec<CertificatePair>,
    },
    /// Single-sided certificates with thresholds that keep growing (or
    /// falling) along the horizon; each covers at least `r/32` of its ball.
    Divergent {
        upward: bool,
        certificates: Vec<DensityCertificate>,
    },
    /// Blow-up certificates at a dyadic point with thresholds `n - 2n₀`.
    Blowup {
        certificates: Vec<DensityCertificate>,
    },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Refutation {
    #[serde(with = "crate::serde_exact")]
    pub x: Rat,
    pub horizon: usize,
    pub case_hint: CaseHint,
    pub evidence: Evidence,
    /// Candidate indices where the expected slope pattern around an extreme
    /// did not hold; they are reported and skipped, never silently assumed.
    pub pattern_violations: Vec<usize>,
    /// Candidate indices whose certificates stayed undecided.
    pub undecided: Vec<usize>,
}

pub fn refute(x: &Rat, horizon: usize) -> Result<Refutation> {
    refute_with(x, horizon, &EngineConfig::default())
}

pub fn refute_with(x: &Rat, horizon: usize, config: &EngineConfig) -> Result<Refutation> {
    let report = classify(x, horizon)?;
    match report.case_hint {
        CaseHint::Dyadic => refute_dyadic(x, horizon, config),
        CaseHint::BoundedOscillation => refute_bounded(&report, config),
        CaseHint::Divergent => refute_divergent(&report, config),
    }
}

fn refute_dyadic(x: &Rat, horizon: usize, config: &EngineConfig) -> Result<Refutation> {
    let point = Dyadic::from_scalar(x).expect("classified as dyadic");
    let first = (2 * dyadic_level(&point).max(0) + 1) as usize;
    let reports: Vec<BlowupReport> = (first..=horizon)
        .into_par_iter()
        .map(|n| blowup_check_with(&point, n as u32, config))
        .collect::<Result<_>>()?;
    let undecided = reports.iter().filter(|r| !r.is_certified()).map(|r| r.n as usize).collect();
    let certificates: Vec<_> = reports.iter().filter(|r| r.is_certified()).map(blowup_certificate).collect();
    if certificates.is_empty() {
        return Err(Error::InsufficientHorizon { horizon });
    }
    Ok(Refutation {
        x: x.clone(),
        horizon,
        case_hint: CaseHint::Dyadic,
        evidence: Evidence::Blowup { certificates },
        pattern_violations: Vec::new(),
        undecided,
    })
}

fn refute_bounded(report: &ClassificationReport, config: &EngineConfig) -> Result<Refutation> {
    let seq = report.seq.as_ref().expect("non-dyadic");
    let horizon = report.horizon;
    let min = report.running_min.expect("non-dyadic");
    let max = report.running_max.expect("non-dyadic");
    let anchor = if recurs(&report.min_hits, horizon) || !recurs(&report.max_hits, horizon) {
        Anchor::Minimum
    } else {
        Anchor::Maximum
    };
    let (extreme, hits, expected_turn) = match anchor {
        // G'_{n_k-1} = I: the sequence came down (g'_{n_k-1} = -1) and turns up (g'_{n_k} = +1).
        Anchor::Minimum => (min, &report.min_hits, 1),
        Anchor::Maximum => (max, &report.max_hits, -1),
    };

    let mut candidates = Vec::new();
    let mut pattern_violations = Vec::new();
    for &hit in hits {
        let index = hit + 1;
        if index > horizon || index < 2 {
            continue;
        }
        if seq.increment(index) == expected_turn && seq.increment(index - 1) == -expected_turn {
            candidates.push(index);
        } else {
            pattern_violations.push(index);
        }
    }

    let x = &seq.point;
    let outcomes: Vec<(usize, DensityCertificate, DensityCertificate)> = candidates
        .par_iter()
        .map(|&index| {
            let inner = certificate_with(x, index as u32, config)?;
            let outer = certificate_with(x, index as u32 - 1, config)?;
            Ok((index, inner, outer))
        })
        .collect::<Result<_>>()?;

    let mut pairs = Vec::new();
    let mut undecided = Vec::new();
    for (index, inner, outer) in outcomes {
        let (le, ge) = match anchor {
            Anchor::Minimum => (inner, outer),
            Anchor::Maximum => (outer, inner),
        };
        if le.dir != Direction::Le || ge.dir != Direction::Ge {
            pattern_violations.push(index);
        } else if le.status == Outcome::Certified && ge.status == Outcome::Certified {
            pairs.push(CertificatePair { index, le, ge });
        } else {
            undecided.push(index);
        }
    }
    if pairs.is_empty() {
        return Err(Error::InsufficientHorizon { horizon });
    }
    Ok(Refutation {
        x: x.clone(),
        horizon,
        case_hint: report.case_hint,
        evidence: Evidence::Paired { anchor, extreme, pairs },
        pattern_violations,
        undecided,
    })
}

fn refute_divergent(report: &ClassificationReport, config: &EngineConfig) -> Result<Refutation> {
    let seq = report.seq.as_ref().expect("non-dyadic");
    let horizon = report.horizon;
    let upward = seq.cumulative(horizon) >= 0;
    // Indices n where G'_{n-1} sets a new record in the drift direction and the
    // next step turns back; the lemma's certificate there uses threshold
    // G'_{n-1} ∓ 2/5, which follows the drift.
    let mut record = 0i64;
    let mut candidates = Vec::new();
    for n in 2..=horizon {
        let previous = seq.cumulative(n - 1);
        let is_record = if upward { previous > record } else { previous < record };
        if is_record {
            record = previous;
            let turn = if upward { -1 } else { 1 };
            if seq.increment(n) == turn {
                candidates.push(n);
            }
        }
    }
    let certs: Vec<(usize, DensityCertificate)> = candidates
        .par_iter()
        .map(|&n| Ok((n, certificate_with(&seq.point, n as u32, config)?)))
        .collect::<Result<_>>()?;
    let undecided = certs
        .iter()
        .filter(|(_, c)| c.status != Outcome::Certified)
        .map(|(n, _)| *n)
        .collect();
    let certificates: Vec<_> = certs
        .into_iter()
        .filter(|(_, c)| c.status == Outcome::Certified)
        .map(|(_, c)| c)
        .collect();
    if certificates.is_empty() {
        return Err(Error::InsufficientHorizon { horizon });
    }
    Ok(Refutation {
        x: seq.point.clone(),
        horizon,
        case_hint: report.case_hint,
        evidence: Evidence::Divergent { upward, certificates },
        pattern_violations: Vec::new(),
        undecided,
    })
}

/// What a corpus line asks for.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CorpusKind {
    Lemma,
    Blowup,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusEntry {
    pub kind: CorpusKind,
    #[serde(with = "crate::serde_exact")]
    pub x: Rat,
    pub n: u32,
}

impl FromStr for CorpusEntry {
    type Err = Error;

    /// `<kind> <x> <n>`, e.g. `lemma 1/3 2`.
    fn from_str(line: &str) -> Result<Self> {
        let fields: Vec<&str> = line.split_whitespace().collect();
        let [kind, x, n] = fields[..] else {
            return Err(Error::Precondition(format!("corpus line `{line}` must read `<kind> <x> <n>`")));
        };
        let kind = match kind {
            "lemma" => CorpusKind::Lemma,
            "blowup" => CorpusKind::Blowup,
            other => return Err(Error::Precondition(format!("unknown corpus kind `{other}`"))),
        };
        let x = crate::parse_rat(x)?;
        let n = n
            .parse()
            .map_err(|_| Error::Precondition(format!("corpus index `{n}` is not a non-negative integer")))?;
        Ok(Self { kind, x, n })
    }
}

/// Parses a corpus file; blank lines and `#` comments are skipped.
pub fn parse_corpus(text: &str) -> Result<Vec<CorpusEntry>> {
    text.lines()
        .map(|line| line.split('#').next().unwrap_or("").trim())
        .filter(|line| !line.is_empty())
        .map(str::parse)
        .collect()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum CorpusResult {
    Lemma(LemmaReport),
    Blowup(BlowupReport),
}

impl CorpusResult {
    pub fn is_certified(&self) -> bool {
        match self {
            CorpusResult::Lemma(r) => r.is_certified(),
            CorpusResult::Blowup(r) => r.is_certified(),
        }
    }
}

pub fn run_entry(entry: &CorpusEntry, config: &EngineConfig) -> Result<CorpusResult> {
    match entry.kind {
        CorpusKind::Lemma => verify_lemma_with(&entry.x, entry.n, config).map(CorpusResult::Lemma),
        CorpusKind::Blowup => {
            let point = Dyadic::from_scalar(&entry.x).ok_or_else(|| Error::NotDyadic {
                value: entry.x.to_string(),
            })?;
            blowup_check_with(&point, entry.n, config).map(CorpusResult::Blowup)
        }
    }
}

/// Runs every entry on the rayon pool; results come back in input order.
pub fn verify_batch(entries: &[CorpusEntry], config: &EngineConfig) -> Vec<Result<CorpusResult>> {
    entries.par_iter().map(|entry| run_entry(entry, config)).collect()
}
