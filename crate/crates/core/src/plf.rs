//! Exact piecewise-linear functions with integer slopes, and the solution sets
//! of affine inequalities against them.

use std::fmt::Display;
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, ToPrimitive};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exactnum::Dyadic;
use crate::scalar::ExactScalar;
use crate::takagi::partial_sum;

/// Default upper limit on the number of breakpoints a builder may allocate.
pub const DEFAULT_BREAKPOINT_CAP: usize = 1 << 24;

/// A continuous piecewise-linear function on `[breakpoints[0], breakpoints[last]]`.
///
/// `slopes[i]` is the slope on `[breakpoints[i], breakpoints[i + 1]]` and
/// `values[i + 1] = values[i] + slopes[i] * (breakpoints[i + 1] - breakpoints[i])`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PiecewiseLinear<S> {
    breakpoints: Vec<S>,
    values: Vec<S>,
    slopes: Vec<i64>,
}

impl<S: ExactScalar> PiecewiseLinear<S> {
    /// Builds a function from its left value and per-segment slopes.
    pub fn from_slopes(breakpoints: Vec<S>, start: S, slopes: Vec<i64>) -> Result<Self> {
        if breakpoints.len() < 2 || slopes.len() + 1 != breakpoints.len() {
            return Err(Error::Precondition(format!(
                "{} breakpoints need {} slopes, got {}",
                breakpoints.len(),
                breakpoints.len().saturating_sub(1),
                slopes.len()
            )));
        }
        if let Some(w) = breakpoints.windows(2).find(|w| w[0] >= w[1]) {
            return Err(Error::EmptyInterval {
                lo: w[0].to_string(),
                hi: w[1].to_string(),
            });
        }
        let mut values = Vec::with_capacity(breakpoints.len());
        values.push(start);
        for (w, s) in breakpoints.windows(2).zip(&slopes) {
            let last = values.last().expect("seeded").clone();
            values.push(last + S::from_int(*s) * (w[1].clone() - w[0].clone()));
        }
        Ok(Self {
            breakpoints,
            values,
            slopes,
        })
    }

    pub fn breakpoints(&self) -> &[S] {
        &self.breakpoints
    }

    pub fn values(&self) -> &[S] {
        &self.values
    }

    pub fn slopes(&self) -> &[i64] {
        &self.slopes
    }

    pub fn domain(&self) -> (&S, &S) {
        (&self.breakpoints[0], self.breakpoints.last().expect("non-empty"))
    }

    pub fn segment_count(&self) -> usize {
        self.slopes.len()
    }

    /// Index of the segment containing `y` (the left one at an interior breakpoint).
    fn segment_of(&self, y: &S) -> usize {
        let right = self.breakpoints.partition_point(|b| b < y);
        right.saturating_sub(1).min(self.slopes.len() - 1)
    }

    pub fn eval(&self, y: &S) -> Result<S> {
        let (lo, hi) = self.domain();
        if y < lo || y > hi {
            return Err(Error::OutsideDomain {
                value: y.to_string(),
                lo: lo.to_string(),
                hi: hi.to_string(),
            });
        }
        let i = self.segment_of(y);
        Ok(self.values[i].clone() + S::from_int(self.slopes[i]) * (y.clone() - self.breakpoints[i].clone()))
    }

    pub fn negated(&self) -> Self {
        Self {
            breakpoints: self.breakpoints.clone(),
            values: self.values.iter().map(|v| -v.clone()).collect(),
            slopes: self.slopes.iter().map(|s| -s).collect(),
        }
    }

    /// `{y in the domain : f(y) ≥ c0 + c1 * y}`, as closed intervals.
    pub fn solve_affine_ge(&self, c0: &S, c1: &S) -> IntervalSet<S> {
        let mut set = IntervalSet::new();
        for (i, slope) in self.slopes.iter().enumerate() {
            let (p, q) = (&self.breakpoints[i], &self.breakpoints[i + 1]);
            // h(y) = f(y) - c0 - c1 y is affine on [p, q] with slope s - c1.
            let h_at_p = self.values[i].clone() - c0.clone() - c1.clone() * p.clone();
            let rate = S::from_int(*slope) - c1.clone();
            if rate.is_zero() {
                if !h_at_p.is_negative() {
                    set.push(Interval::closed(p.clone(), q.clone()));
                }
                continue;
            }
            let crossing = p.clone() - h_at_p / rate.clone();
            if rate.is_positive() {
                if crossing <= *q {
                    set.push(Interval::closed(crossing.max(p.clone()), q.clone()));
                }
            } else if crossing >= *p {
                set.push(Interval::closed(p.clone(), crossing.min(q.clone())));
            }
        }
        set
    }

    /// `{y in the domain : f(y) ≤ c0 + c1 * y}`, via [`Self::solve_affine_ge`] on `-f`.
    pub fn solve_affine_le(&self, c0: &S, c1: &S) -> IntervalSet<S> {
        self.negated().solve_affine_ge(&-c0.clone(), &-c1.clone())
    }
}

/// `G_n` restricted to `[a, b]`.
///
/// Interior breakpoints are the points of `D_{n+1}` inside `(a, b)`. On the grid
/// cell `[j, j+1] / 2^(n+1)` the slope of `g_k` is `1 - 2 b_{k+1}`, and `b_{k+1}`
/// is bit `n - k` of `j`, so the slope of `G_n` there is `n - 2 popcount(j mod 2^n)`.
pub fn build_gn<S: ExactScalar>(a: &Dyadic, b: &Dyadic, n: u32, cap: usize) -> Result<PiecewiseLinear<S>> {
    if a >= b {
        return Err(Error::EmptyInterval {
            lo: a.to_string(),
            hi: b.to_string(),
        });
    }
    let level = n + 1;
    let first_cell = a.floor_scaled(level);
    let end_cell = b.ceil_scaled(level);
    let cells = &end_cell - &first_cell;
    let needed = &cells + BigInt::one();
    let count = needed.to_usize().filter(|c| *c <= cap).ok_or_else(|| Error::TooManyBreakpoints {
        needed: needed.to_string(),
        cap,
    })?;

    let step = S::pow2(-i64::from(level));
    let mut breakpoints = Vec::with_capacity(count);
    breakpoints.push(a.to_scalar::<S>());
    let mut slopes = Vec::with_capacity(count - 1);
    let modulus = BigInt::one() << n;
    let mut cell = first_cell;
    let mut grid = S::from_bigint(&cell) * step.clone();
    while cell < end_cell {
        let ones = cell.mod_floor(&modulus).magnitude().count_ones();
        slopes.push(i64::from(n) - 2 * ones as i64);
        grid = grid + step.clone();
        cell += 1;
        if cell < end_cell {
            breakpoints.push(grid.clone());
        }
    }
    breakpoints.push(b.to_scalar());
    let start = partial_sum(n, &breakpoints[0]);
    PiecewiseLinear::from_slopes(breakpoints, start, slopes)
}

/// An interval with rational endpoints and open/closed ends.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(bound(serialize = "S: Display", deserialize = "S: FromStr"))]
pub struct Interval<S> {
    #[serde(with = "crate::serde_exact")]
    pub lo: S,
    #[serde(with = "crate::serde_exact")]
    pub hi: S,
    pub lo_closed: bool,
    pub hi_closed: bool,
}

impl<S: ExactScalar> Interval<S> {
    pub fn closed(lo: S, hi: S) -> Self {
        Self {
            lo,
            hi,
            lo_closed: true,
            hi_closed: true,
        }
    }

    pub fn open(lo: S, hi: S) -> Self {
        Self {
            lo,
            hi,
            lo_closed: false,
            hi_closed: false,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.lo > self.hi || (self.lo == self.hi && !(self.lo_closed && self.hi_closed))
    }

    pub fn length(&self) -> S {
        if self.lo < self.hi {
            self.hi.clone() - self.lo.clone()
        } else {
            S::zero()
        }
    }

    pub fn contains(&self, y: &S) -> bool {
        let above = if self.lo_closed { *y >= self.lo } else { *y > self.lo };
        let below = if self.hi_closed { *y <= self.hi } else { *y < self.hi };
        above && below
    }

    pub fn intersect(&self, other: &Self) -> Self {
        let (lo, lo_closed) = match self.lo.cmp(&other.lo) {
            std::cmp::Ordering::Less => (other.lo.clone(), other.lo_closed),
            std::cmp::Ordering::Greater => (self.lo.clone(), self.lo_closed),
            std::cmp::Ordering::Equal => (self.lo.clone(), self.lo_closed && other.lo_closed),
        };
        let (hi, hi_closed) = match self.hi.cmp(&other.hi) {
            std::cmp::Ordering::Less => (self.hi.clone(), self.hi_closed),
            std::cmp::Ordering::Greater => (other.hi.clone(), other.hi_closed),
            std::cmp::Ordering::Equal => (self.hi.clone(), self.hi_closed && other.hi_closed),
        };
        Self {
            lo,
            hi,
            lo_closed,
            hi_closed,
        }
    }
}

/// Pairwise-disjoint intervals sorted by left endpoint.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(bound(serialize = "S: Display", deserialize = "S: FromStr"))]
pub struct IntervalSet<S> {
    intervals: Vec<Interval<S>>,
}

impl<S: ExactScalar> Default for IntervalSet<S> {
    fn default() -> Self {
        Self::new()
    }
}

impl<S: ExactScalar> IntervalSet<S> {
    pub fn new() -> Self {
        Self { intervals: Vec::new() }
    }

    /// Appends an interval lying at or to the right of everything already in the
    /// set, merging when the two touch.
    pub fn push(&mut self, interval: Interval<S>) {
        if interval.is_empty() {
            return;
        }
        if let Some(last) = self.intervals.last_mut() {
            assert!(interval.lo >= last.lo, "intervals must be pushed in order");
            let touches = interval.lo < last.hi
                || (interval.lo == last.hi && (last.hi_closed || interval.lo_closed));
            if touches {
                match interval.hi.cmp(&last.hi) {
                    std::cmp::Ordering::Greater => {
                        last.hi = interval.hi;
                        last.hi_closed = interval.hi_closed;
                    }
                    std::cmp::Ordering::Equal => last.hi_closed |= interval.hi_closed,
                    std::cmp::Ordering::Less => {}
                }
                return;
            }
        }
        self.intervals.push(interval);
    }

    pub fn intervals(&self) -> &[Interval<S>] {
        &self.intervals
    }

    pub fn len(&self) -> usize {
        self.intervals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    pub fn length(&self) -> S {
        self.intervals.iter().fold(S::zero(), |acc, i| acc + i.length())
    }

    pub fn contains(&self, y: &S) -> bool {
        let idx = self.intervals.partition_point(|i| i.hi < *y);
        self.intervals[idx..].iter().take(2).any(|i| i.contains(y))
    }

    pub fn intersect(&self, window: &Interval<S>) -> Self {
        let mut out = Self::new();
        for interval in &self.intervals {
            out.push(interval.intersect(window));
        }
        out
    }

    /// `window \ self`.
    pub fn complement_within(&self, window: &Interval<S>) -> Self {
        let mut out = Self::new();
        let mut cursor = window.lo.clone();
        let mut cursor_closed = window.lo_closed;
        for interval in self.intersect(window).intervals {
            out.push(Interval {
                lo: cursor,
                hi: interval.lo.clone(),
                lo_closed: cursor_closed,
                hi_closed: !interval.lo_closed,
            });
            cursor = interval.hi;
            cursor_closed = !interval.hi_closed;
        }
        out.push(Interval {
            lo: cursor,
            hi: window.hi.clone(),
            lo_closed: cursor_closed,
            hi_closed: window.hi_closed,
        });
        out
    }
}
