//! Dyadic rationals, binary digits and dyadic-grid geometry.
//!
//! `D_n` is the grid `{k / 2^n : k ∈ Z}`. A rational lies in `D_n` exactly
//! when its reduced denominator divides `2^n`.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::scalar::{parse_exact, ExactScalar};
use crate::Rat;

/// An exact dyadic rational `num / 2^exp` in canonical form: either `exp == 0`
/// or `num` is odd.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Dyadic {
    num: BigInt,
    exp: u32,
}

impl Dyadic {
    /// Builds the canonical dyadic equal to `num / 2^exp`.
    pub fn canonicalize(num: impl Into<BigInt>, exp: u32) -> Self {
        let num = num.into();
        if num.is_zero() {
            return Self { num, exp: 0 };
        }
        let twos = num.trailing_zeros().unwrap_or(0).min(u64::from(exp));
        Self {
            num: num >> twos,
            exp: exp - twos as u32,
        }
    }

    pub fn zero() -> Self {
        Self::canonicalize(0, 0)
    }

    pub fn from_int(value: impl Into<BigInt>) -> Self {
        Self::canonicalize(value, 0)
    }

    /// `2^-n`.
    pub fn unit(n: u32) -> Self {
        Self::canonicalize(1, n)
    }

    pub fn num(&self) -> &BigInt {
        &self.num
    }

    pub fn exp(&self) -> u32 {
        self.exp
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn is_positive(&self) -> bool {
        self.num.is_positive()
    }

    pub fn is_integer(&self) -> bool {
        self.exp == 0
    }

    /// Whether the value lies on `D_n`.
    pub fn in_grid(&self, n: u32) -> bool {
        self.exp <= n
    }

    pub fn to_rat(&self) -> Rat {
        self.to_scalar()
    }

    pub fn to_scalar<S: ExactScalar>(&self) -> S {
        S::from_bigint(&self.num) * S::pow2(-i64::from(self.exp))
    }

    /// The dyadic equal to `value`, if its denominator is a power of two.
    pub fn from_scalar<S: ExactScalar>(value: &S) -> Option<Self> {
        let exp = value.dyadic_exponent()?;
        let big = value.to_bigrational();
        Some(Self::canonicalize(big.numer().clone(), exp))
    }

    /// Rewrites the numerator over `2^exp`; `exp` must be at least `self.exp`.
    fn numerator_at(&self, exp: u32) -> BigInt {
        debug_assert!(exp >= self.exp);
        &self.num << (exp - self.exp)
    }

    /// `floor(self * 2^n)`.
    pub fn floor_scaled(&self, n: u32) -> BigInt {
        if n >= self.exp {
            self.numerator_at(n)
        } else {
            self.num.div_floor(&(BigInt::one() << (self.exp - n)))
        }
    }

    /// `ceil(self * 2^n)`.
    pub fn ceil_scaled(&self, n: u32) -> BigInt {
        if n >= self.exp {
            self.numerator_at(n)
        } else {
            self.num.div_ceil(&(BigInt::one() << (self.exp - n)))
        }
    }
}

impl Default for Dyadic {
    fn default() -> Self {
        Self::zero()
    }
}

impl Ord for Dyadic {
    fn cmp(&self, other: &Self) -> Ordering {
        let exp = self.exp.max(other.exp);
        self.numerator_at(exp).cmp(&other.numerator_at(exp))
    }
}

impl PartialOrd for Dyadic {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Add for &Dyadic {
    type Output = Dyadic;
    fn add(self, rhs: &Dyadic) -> Dyadic {
        let exp = self.exp.max(rhs.exp);
        Dyadic::canonicalize(self.numerator_at(exp) + rhs.numerator_at(exp), exp)
    }
}

impl Sub for &Dyadic {
    type Output = Dyadic;
    fn sub(self, rhs: &Dyadic) -> Dyadic {
        let exp = self.exp.max(rhs.exp);
        Dyadic::canonicalize(self.numerator_at(exp) - rhs.numerator_at(exp), exp)
    }
}

impl Mul for &Dyadic {
    type Output = Dyadic;
    fn mul(self, rhs: &Dyadic) -> Dyadic {
        Dyadic::canonicalize(&self.num * &rhs.num, self.exp + rhs.exp)
    }
}

impl Neg for &Dyadic {
    type Output = Dyadic;
    fn neg(self) -> Dyadic {
        Dyadic {
            num: -&self.num,
            exp: self.exp,
        }
    }
}

macro_rules! forward_owned {
    ($($imp:ident $method:ident),*) => {$(
        impl $imp for Dyadic {
            type Output = Dyadic;
            fn $method(self, rhs: Dyadic) -> Dyadic {
                (&self).$method(&rhs)
            }
        }
    )*};
}
forward_owned!(Add add, Sub sub, Mul mul);

impl Neg for Dyadic {
    type Output = Dyadic;
    fn neg(self) -> Dyadic {
        -&self
    }
}

impl From<&Dyadic> for Rat {
    fn from(value: &Dyadic) -> Rat {
        value.to_rat()
    }
}

impl fmt::Display for Dyadic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.exp == 0 {
            write!(f, "{}", self.num)
        } else {
            write!(f, "{}/{}", self.num, BigInt::one() << self.exp)
        }
    }
}

impl FromStr for Dyadic {
    type Err = Error;
    fn from_str(text: &str) -> Result<Self> {
        let value: Rat = parse_exact(text)?;
        Dyadic::from_scalar(&value).ok_or_else(|| Error::NotDyadic {
            value: value.to_string(),
        })
    }
}

impl Serialize for Dyadic {
    fn serialize<Ser: Serializer>(&self, serializer: Ser) -> std::result::Result<Ser::Ok, Ser::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Dyadic {
    fn deserialize<De: Deserializer<'de>>(deserializer: De) -> std::result::Result<Self, De::Error> {
        let text = String::deserialize(deserializer)?;
        text.parse().map_err(serde::de::Error::custom)
    }
}

/// Whether `x` is a dyadic rational (lies in some `D_n`).
pub fn is_dyadic<S: ExactScalar>(x: &S) -> bool {
    x.dyadic_exponent().is_some()
}

/// Whether `x` lies on `D_n`.
pub fn in_grid<S: ExactScalar>(x: &S, n: u32) -> bool {
    x.dyadic_exponent().is_some_and(|e| e <= n)
}

/// `x mod 1`, in `[0, 1)`.
pub fn reduce_mod1<S: ExactScalar>(x: &S) -> S {
    x.fract_part()
}

/// The `k`-th binary digit of `x ∈ [0, 1)`, i.e. `floor(2^k x) mod 2`.
pub fn bit_at<S: ExactScalar>(x: &S, k: u32) -> Result<u8> {
    if x.is_negative() || *x >= S::one() {
        return Err(Error::OutsideUnitInterval {
            value: x.to_string(),
        });
    }
    let scaled = x.clone() * S::pow2(i64::from(k));
    Ok(u8::from(scaled.floor_bigint().is_odd()))
}

/// The grid neighbours `x_n < x < y_n` of `x` in `D_n`, with `y_n - x_n = 2^-n`.
pub fn dyadic_neighbors<S: ExactScalar>(x: &S, n: u32) -> Result<(Dyadic, Dyadic)> {
    let scaled = x.clone() * S::pow2(i64::from(n));
    if scaled.is_integer() {
        return Err(Error::OnGrid {
            value: x.to_string(),
            level: n,
        });
    }
    let floor = scaled.floor_bigint();
    Ok((
        Dyadic::canonicalize(floor.clone(), n),
        Dyadic::canonicalize(floor + 1, n),
    ))
}

/// `n₀` such that `x ∈ D_{n₀+1}` minimally; integers give `-1`.
pub fn dyadic_level(x: &Dyadic) -> i64 {
    i64::from(x.exp) - 1
}
