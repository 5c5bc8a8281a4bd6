//! The grid-distance terms `g_k`, their partial sums `G_n`, the Takagi
//! function itself and the slope sequences `g'_k(x)`, `G'_n(x)`.
//!
//! The series starts at `k = 1`: `T = g_1 + g_2 + ...`. The classical variant
//! that also includes the distance to the integers (`g_0`) is available
//! through [`Convention::Classical`].

use std::fmt::Display;
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exactnum::{bit_at, in_grid, is_dyadic, reduce_mod1, Dyadic};
use crate::scalar::ExactScalar;

/// Default series depth for enclosures when the caller does not pick one.
pub const DEFAULT_DEPTH: u32 = 64;

/// Which terms the series contains.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Convention {
    /// `Σ_{k≥1} g_k`.
    #[default]
    Paper,
    /// `Σ_{k≥0} g_k`, the form most of the literature tabulates.
    Classical,
}

impl Convention {
    fn first_term(self) -> u32 {
        match self {
            Convention::Paper => 1,
            Convention::Classical => 0,
        }
    }
}

/// A closed rational interval `[lo, hi]` known to contain some real value.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(bound(serialize = "S: Display", deserialize = "S: FromStr"))]
pub struct Enclosure<S> {
    #[serde(with = "crate::serde_exact")]
    pub lo: S,
    #[serde(with = "crate::serde_exact")]
    pub hi: S,
}

impl<S: ExactScalar> Enclosure<S> {
    pub fn new(lo: S, hi: S) -> Self {
        assert!(lo <= hi, "enclosure bounds out of order: {lo} > {hi}");
        Self { lo, hi }
    }

    pub fn point(value: S) -> Self {
        Self {
            lo: value.clone(),
            hi: value,
        }
    }

    pub fn width(&self) -> S {
        self.hi.clone() - self.lo.clone()
    }

    pub fn contains(&self, value: &S) -> bool {
        self.lo <= *value && *value <= self.hi
    }

    pub fn is_subset_of(&self, other: &Self) -> bool {
        other.lo <= self.lo && self.hi <= other.hi
    }

    pub fn is_point(&self) -> bool {
        self.lo == self.hi
    }
}

/// `g_k(x)`, the distance from `x` to `D_k`. `k = 0` gives the distance to
/// the integers.
pub fn grid_distance<S: ExactScalar>(k: u32, x: &S) -> S {
    let scale = S::pow2(i64::from(k));
    let frac = (x.clone() * scale.clone()).fract_part();
    let complement = S::one() - frac.clone();
    frac.min(complement) / scale
}

/// `G_n(x) = g_1(x) + ... + g_n(x)`; `G_0 = 0`.
pub fn partial_sum<S: ExactScalar>(n: u32, x: &S) -> S {
    partial_sum_with(n, x, Convention::Paper)
}

pub fn partial_sum_with<S: ExactScalar>(n: u32, x: &S, convention: Convention) -> S {
    // Walk the doubling orbit u_k = frac(2^k x) so each term costs O(1) ops.
    let two = S::from_int(2);
    let mut orbit = reduce_mod1(x);
    let mut scale = S::one();
    let mut sum = S::zero();
    for k in 0..=n {
        if k > 0 {
            orbit = (orbit * two.clone()).fract_part();
            scale = scale / two.clone();
        }
        if k < convention.first_term() {
            continue;
        }
        let complement = S::one() - orbit.clone();
        sum = sum + orbit.clone().min(complement) * scale.clone();
    }
    sum
}

/// `T(x)` at a dyadic point. The series is finite there: `g_k(x) = 0` as soon
/// as `x ∈ D_k`.
pub fn takagi_exact(x: &Dyadic) -> Dyadic {
    takagi_exact_with(x, Convention::Paper)
}

pub fn takagi_exact_with(x: &Dyadic, convention: Convention) -> Dyadic {
    // With x = a / 2^e, g_k(x) = min(r, 2^(e-k) - r) / 2^e where r = a mod 2^(e-k).
    let exp = x.exp();
    let mut total = BigInt::zero();
    for k in convention.first_term()..=exp {
        let modulus = BigInt::one() << (exp - k);
        let rem = x.num().mod_floor(&modulus);
        let other = &modulus - &rem;
        total += rem.min(other);
    }
    Dyadic::canonicalize(total, exp)
}

/// `[G_depth(x), G_depth(x) + 2^-(depth+1)]`, which contains `T(x)` because the
/// omitted terms satisfy `0 ≤ g_k ≤ 2^-(k+1)`.
pub fn takagi_enclosure<S: ExactScalar>(x: &S, depth: u32) -> Enclosure<S> {
    takagi_enclosure_with(x, depth, Convention::Paper)
}

pub fn takagi_enclosure_with<S: ExactScalar>(x: &S, depth: u32, convention: Convention) -> Enclosure<S> {
    let lo = partial_sum_with(depth, x, convention);
    let hi = lo.clone() + tail_bound(depth);
    Enclosure { lo, hi }
}

/// `Σ_{k>depth} 2^-(k+1) = 2^-(depth+1)`.
pub fn tail_bound<S: ExactScalar>(depth: u32) -> S {
    S::pow2(-(i64::from(depth) + 1))
}

/// `T(x)` as an enclosure: exact when `x` is dyadic, otherwise the depth-`depth`
/// tail enclosure.
pub fn takagi_value<S: ExactScalar>(x: &S, depth: u32) -> Enclosure<S> {
    match Dyadic::from_scalar(x) {
        Some(d) => Enclosure::point(takagi_exact(&d).to_scalar()),
        None => takagi_enclosure(x, depth),
    }
}

/// `g'_k(x) = 1 - 2 b_{k+1}(x)`, defined off `D_{k+1}`.
pub fn slope<S: ExactScalar>(k: u32, x: &S) -> Result<i8> {
    if in_grid(x, k + 1) {
        return Err(Error::OnGrid {
            value: x.to_string(),
            level: k + 1,
        });
    }
    let bit = bit_at(&reduce_mod1(x), k + 1)?;
    Ok(1 - 2 * bit as i8)
}

/// `G'_1(x), ..., G'_N(x)` at a non-dyadic point.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(bound(serialize = "S: Display", deserialize = "S: FromStr"))]
pub struct SlopeSeq<S> {
    #[serde(with = "crate::serde_exact")]
    pub point: S,
    pub values: Vec<i64>,
    pub horizon: usize,
}

impl<S> SlopeSeq<S> {
    /// `G'_n(x)` for `0 ≤ n ≤ horizon`, with `G'_0 = 0`.
    pub fn cumulative(&self, n: usize) -> i64 {
        if n == 0 {
            0
        } else {
            self.values[n - 1]
        }
    }

    /// `g'_n(x)` for `1 ≤ n ≤ horizon`.
    pub fn increment(&self, n: usize) -> i64 {
        self.cumulative(n) - self.cumulative(n - 1)
    }
}

pub fn slope_seq<S: ExactScalar>(x: &S, horizon: usize) -> Result<SlopeSeq<S>> {
    if is_dyadic(x) {
        return Err(Error::IsDyadic { value: x.to_string() });
    }
    let two = S::from_int(2);
    // After the shift loop `orbit` is frac(2^k x); its next doubling yields b_{k+1}.
    let mut orbit = (reduce_mod1(x) * two.clone()).fract_part();
    let mut values = Vec::with_capacity(horizon);
    let mut running = 0i64;
    for _ in 0..horizon {
        let doubled = orbit * two.clone();
        let bit = doubled >= S::one();
        running += if bit { -1 } else { 1 };
        values.push(running);
        orbit = doubled.fract_part();
    }
    Ok(SlopeSeq {
        point: x.clone(),
        values,
        horizon,
    })
}
