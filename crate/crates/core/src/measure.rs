//! Certified Lebesgue-measure bounds on difference-quotient level sets
//!
//! ```text
//! {y : 0 < |y - x| < r, (T(y) - T(x)) / (y - x) ≥ α}      (Direction::Ge)
//! {y : 0 < |y - x| < r, (T(y) - T(x)) / (y - x) ≤ α}      (Direction::Le)
//! ```
//!
//! `T` is replaced by the exact partial sum `G_n` plus the tail band
//! `0 ≤ T - G_n ≤ 2^-(n+1)`, and `T(x)` by its enclosure. A point is
//! certified-in when the condition holds for every admissible value of the
//! tail, and possibly-in unless it fails for every admissible value. Both
//! sets are finite unions of intervals, so their lengths bound the true
//! measure from below and above.

use std::fmt;
use std::str::FromStr;

use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exactnum::Dyadic;
use crate::plf::{build_gn, Interval, PiecewiseLinear, DEFAULT_BREAKPOINT_CAP};
use crate::scalar::ExactScalar;
use crate::takagi::{tail_bound, takagi_value, DEFAULT_DEPTH};
use crate::{IntervalSet, Rat};

/// Which side of the threshold the quotient must fall on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Ge,
    Le,
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Direction::Ge => "ge",
            Direction::Le => "le",
        })
    }
}

impl FromStr for Direction {
    type Err = Error;
    fn from_str(text: &str) -> Result<Self> {
        match text.to_ascii_lowercase().as_str() {
            "ge" | ">=" => Ok(Direction::Ge),
            "le" | "<=" => Ok(Direction::Le),
            _ => Err(Error::Precondition(format!("unknown direction `{text}` (expected ge or le)"))),
        }
    }
}

/// Limits shared by every engine call.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EngineConfig {
    pub breakpoint_cap: usize,
    /// Deepest series depth escalation may reach.
    pub depth_cap: u32,
    /// Depth increment between escalation attempts.
    pub depth_step: u32,
}

impl Default for EngineConfig {
    fn default() -> Self {
        Self {
            breakpoint_cap: DEFAULT_BREAKPOINT_CAP,
            depth_cap: DEFAULT_DEPTH,
            depth_step: 4,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuotientQuery {
    #[serde(with = "crate::serde_exact")]
    pub x: Rat,
    pub r: Dyadic,
    #[serde(with = "crate::serde_exact")]
    pub alpha: Rat,
    pub dir: Direction,
    pub depth: u32,
}

impl QuotientQuery {
    pub fn new(x: Rat, r: Dyadic, alpha: Rat, dir: Direction, depth: u32) -> Result<Self> {
        if !r.is_positive() {
            return Err(Error::Precondition(format!("radius {r} must be positive")));
        }
        if depth == 0 {
            return Err(Error::Precondition("depth must be at least 1".into()));
        }
        Ok(Self { x, r, alpha, dir, depth })
    }

    pub fn at_depth(&self, depth: u32) -> Self {
        Self { depth, ..self.clone() }
    }

    /// Measure of the punctured ball, `2r`.
    pub fn ball_measure(&self) -> Rat {
        self.r.to_rat() * Rat::from_int(2)
    }
}

/// Certified `lo ≤ measure ≤ hi`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MeasureBound {
    #[serde(with = "crate::serde_exact")]
    pub lo: Rat,
    #[serde(with = "crate::serde_exact")]
    pub hi: Rat,
}

impl MeasureBound {
    pub fn contains(&self, value: &Rat) -> bool {
        self.lo <= *value && *value <= self.hi
    }

    /// `0 ≤ lo ≤ hi ≤ ball`.
    pub fn is_consistent(&self, ball: &Rat) -> bool {
        !self.lo.is_negative() && self.lo <= self.hi && self.hi <= *ball && !ball.is_zero()
    }
}

/// Certified-in and possibly-in sets on one half of the punctured ball.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HalfSets {
    pub certified: IntervalSet,
    pub possible: IntervalSet,
}

impl HalfSets {
    pub fn bound(&self) -> MeasureBound {
        MeasureBound {
            lo: self.certified.length(),
            hi: self.possible.length(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QuotientSets {
    pub left: HalfSets,
    pub right: HalfSets,
}

/// Per-side breakdown of a query's bounds.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuotientBreakdown {
    pub query: QuotientQuery,
    pub total: MeasureBound,
    pub left: MeasureBound,
    pub right: MeasureBound,
}

impl QuotientSets {
    pub fn breakdown(&self, query: &QuotientQuery) -> QuotientBreakdown {
        let left = self.left.bound();
        let right = self.right.bound();
        QuotientBreakdown {
            query: query.clone(),
            total: MeasureBound {
                lo: &left.lo + &right.lo,
                hi: &left.hi + &right.hi,
            },
            left,
            right,
        }
    }
}

/// The smallest grid-aligned window `[a, b] ⊇ [lo, hi]` on `D_level`.
fn grid_hull(lo: &Rat, hi: &Rat, level: u32) -> (Dyadic, Dyadic) {
    let scale = Rat::pow2(i64::from(level));
    let a = Dyadic::canonicalize((lo * &scale).floor_bigint(), level);
    let b = Dyadic::canonicalize(ExactScalar::ceil(&(hi * &scale)).floor_bigint(), level);
    (a, b)
}

/// Sets where `T(y) ≥ T(x) + α(y - x)` is certain / possible.
fn above_line(f: &PiecewiseLinear<Rat>, tx_lo: &Rat, tx_hi: &Rat, tail: &Rat, q: &QuotientQuery) -> (IntervalSet, IntervalSet) {
    let shift = &q.alpha * &q.x;
    // G(y) ≥ T(x)_hi + α(y - x) forces T(y) ≥ G(y) to clear the line.
    let certain = f.solve_affine_ge(&(tx_hi - &shift), &q.alpha);
    let possible = f.solve_affine_ge(&(tx_lo - tail - &shift), &q.alpha);
    (certain, possible)
}

/// Sets where `T(y) ≤ T(x) + α(y - x)` is certain / possible.
fn below_line(f: &PiecewiseLinear<Rat>, tx_lo: &Rat, tx_hi: &Rat, tail: &Rat, q: &QuotientQuery) -> (IntervalSet, IntervalSet) {
    let shift = &q.alpha * &q.x;
    let certain = f.solve_affine_le(&(tx_lo - tail - &shift), &q.alpha);
    let possible = f.solve_affine_le(&(tx_hi - &shift), &q.alpha);
    (certain, possible)
}

/// The certified and possible sets for a query, side by side.
pub fn quotient_sets(q: &QuotientQuery, config: &EngineConfig) -> Result<QuotientSets> {
    let depth = q.depth;
    let r = q.r.to_rat();
    let (a, b) = grid_hull(&(&q.x - &r), &(&q.x + &r), depth + 1);
    let f = build_gn::<Rat>(&a, &b, depth, config.breakpoint_cap)?;
    let tail: Rat = tail_bound(depth);
    let tx = takagi_value(&q.x, depth);

    let above = above_line(&f, &tx.lo, &tx.hi, &tail, q);
    let below = below_line(&f, &tx.lo, &tx.hi, &tail, q);
    // Dividing by y - x < 0 on the left flips the comparison.
    let (right, left) = match q.dir {
        Direction::Ge => (above, below),
        Direction::Le => (below, above),
    };
    let right_window = Interval::open(q.x.clone(), &q.x + &r);
    let left_window = Interval::open(&q.x - &r, q.x.clone());
    Ok(QuotientSets {
        left: HalfSets {
            certified: left.0.intersect(&left_window),
            possible: left.1.intersect(&left_window),
        },
        right: HalfSets {
            certified: right.0.intersect(&right_window),
            possible: right.1.intersect(&right_window),
        },
    })
}

pub fn quotient_set_breakdown(q: &QuotientQuery, config: &EngineConfig) -> Result<QuotientBreakdown> {
    Ok(quotient_sets(q, config)?.breakdown(q))
}

pub fn quotient_set_bounds(q: &QuotientQuery) -> Result<MeasureBound> {
    quotient_set_bounds_with(q, &EngineConfig::default())
}

pub fn quotient_set_bounds_with(q: &QuotientQuery, config: &EngineConfig) -> Result<MeasureBound> {
    Ok(quotient_set_breakdown(q, config)?.total)
}

/// `(lo / 2r, hi / 2r)`.
pub fn density_bounds(q: &QuotientQuery) -> Result<(Rat, Rat)> {
    density_bounds_with(q, &EngineConfig::default())
}

pub fn density_bounds_with(q: &QuotientQuery, config: &EngineConfig) -> Result<(Rat, Rat)> {
    let bound = quotient_set_bounds_with(q, config)?;
    let ball = q.ball_measure();
    Ok((bound.lo / &ball, bound.hi / ball))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Outcome {
    Certified,
    Undecided,
}

/// Result of pushing a query deeper until its lower bound reaches a target.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Escalation {
    pub breakdown: QuotientBreakdown,
    pub depth_used: u32,
    pub outcome: Outcome,
}

/// Re-runs `q` at depths `q.depth, q.depth + step, ...` until the certified
/// lower bound reaches `target`. Running past the depth cap or the breakpoint
/// cap ends the search as [`Outcome::Undecided`] with the best bound seen.
pub fn certify_lower(q: &QuotientQuery, target: &Rat, config: &EngineConfig) -> Result<Escalation> {
    let mut depth = q.depth;
    let mut best: Option<(QuotientBreakdown, u32)> = None;
    loop {
        let attempt = match quotient_set_breakdown(&q.at_depth(depth), config) {
            Ok(b) => b,
            Err(Error::TooManyBreakpoints { .. }) if best.is_some() => break,
            Err(e) => return Err(e),
        };
        let reached = attempt.total.lo >= *target;
        best = Some((attempt, depth));
        if reached {
            let (breakdown, depth_used) = best.expect("just set");
            return Ok(Escalation {
                breakdown,
                depth_used,
                outcome: Outcome::Certified,
            });
        }
        if depth >= config.depth_cap || config.depth_step == 0 {
            break;
        }
        depth = (depth + config.depth_step).min(config.depth_cap);
    }
    let (breakdown, depth_used) = best.expect("at least one attempt ran");
    Ok(Escalation {
        breakdown,
        depth_used,
        outcome: Outcome::Undecided,
    })
}
