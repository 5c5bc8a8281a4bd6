//! Reference computations that never touch the library's evaluation paths.

#![allow(dead_code)]

use std::collections::HashMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

pub fn q(p: i64, d: i64) -> BigRational {
    BigRational::new(p.into(), d.into())
}

pub fn pow2(e: i64) -> BigRational {
    let m = BigRational::from_integer(BigInt::one() << e.unsigned_abs());
    if e >= 0 {
        m
    } else {
        m.recip()
    }
}

/// `min |x - y|` over `y ∈ D_k`, by comparing the two grid points around `x`.
pub fn brute_grid_distance(k: u32, x: &BigRational) -> BigRational {
    let step = pow2(-i64::from(k));
    let below = (x / &step).floor() * &step;
    let above = &below + &step;
    let candidates = [below.clone() - &step, below, above.clone(), above + &step];
    candidates
        .iter()
        .map(|y| (x - y).abs())
        .min()
        .expect("non-empty")
}

/// `Σ_{k=1}^{terms} g_k(x)` term by term.
pub fn brute_partial_sum(terms: u32, x: &BigRational) -> BigRational {
    (1..=terms).map(|k| brute_grid_distance(k, x)).sum()
}

/// `T(x)` for any rational, from the eventually periodic doubling orbit
/// `u_k = frac(2^k x)` and `T = Σ 2^-k min(u_k, 1 - u_k)` summed as a
/// geometric series over the period.
pub fn periodic_series_value(x: &BigRational) -> BigRational {
    let frac = |v: BigRational| &v - v.floor();
    let dist = |u: &BigRational| u.clone().min(BigRational::one() - u);
    let mut seen: HashMap<BigRational, usize> = HashMap::new();
    let mut orbit = Vec::new();
    let mut u = frac(x.clone());
    loop {
        u = frac(u * q(2, 1));
        if let Some(&start) = seen.get(&u) {
            // orbit[i] holds u_{i+1}; u_{start+1} repeats with period len - start.
            let period = orbit.len() - start;
            let mut total = BigRational::zero();
            for (i, v) in orbit.iter().enumerate() {
                total += dist(v) * pow2(-(i as i64 + 1));
            }
            let head: BigRational = orbit[..start]
                .iter()
                .enumerate()
                .map(|(i, v)| dist(v) * pow2(-(i as i64 + 1)))
                .sum();
            let cycle = total - &head;
            return head + cycle / (BigRational::one() - pow2(-(period as i64)));
        }
        seen.insert(u.clone(), orbit.len());
        orbit.push(u.clone());
    }
}

/// `2^K · T(j / 2^K)` in machine integers, for `K < 62`.
pub fn scaled_takagi_at_grid(j: i64, level: u32) -> i64 {
    (1..=level)
        .map(|k| {
            let modulus = 1i64 << (level - k);
            let r = j.rem_euclid(modulus);
            r.min(modulus - r)
        })
        .sum()
}

pub fn is_power_of_two(value: &BigInt) -> bool {
    value.is_positive() && (value & (value - BigInt::one())).is_zero()
}

pub fn is_dyadic(x: &BigRational) -> bool {
    is_power_of_two(x.denom())
}

/// Slope of `g_k` at `x` from two exact samples taken inside `(lo, hi)`.
pub fn finite_difference(k: u32, x: &BigRational, probe: &BigRational) -> BigRational {
    (brute_grid_distance(k, probe) - brute_grid_distance(k, x)) / (probe - x)
}

pub fn is_even(value: &BigInt) -> bool {
    value.is_even()
}
