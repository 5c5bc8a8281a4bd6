use std::fmt::{Debug, Display};
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::{BigRational, Ratio};
use num_traits::{FromPrimitive, Num, One, Signed};

use crate::error::{Error, Result};

/// An exact ordered field with the floor and power-of-two operations the
/// dyadic-grid code needs.
///
/// Implemented for every `Ratio<T>` over a signed integer type. Fixed-width
/// integers panic on overflow (in debug builds) once grids get deep; use
/// [`crate::Rat`] for anything beyond small exploratory depths.
pub trait ExactScalar:
    Clone + Ord + Debug + Display + FromStr + Num + Signed + Send + Sync + 'static
{
    fn from_int(value: i64) -> Self;
    fn from_bigint(value: &BigInt) -> Self;
    /// `2^exp`, for any sign of `exp`.
    fn pow2(exp: i64) -> Self;
    fn floor(&self) -> Self;
    fn ceil(&self) -> Self;
    fn floor_bigint(&self) -> BigInt;
    fn is_integer(&self) -> bool;
    fn to_bigrational(&self) -> BigRational;
    /// `e` such that the reduced denominator is `2^e`, or `None` if it is not
    /// a power of two.
    fn dyadic_exponent(&self) -> Option<u32>;

    /// `self - floor(self)`, in `[0, 1)`.
    fn fract_part(&self) -> Self {
        self.clone() - self.floor()
    }
}

impl<T> ExactScalar for Ratio<T>
where
    T: Integer
        + Signed
        + Clone
        + FromPrimitive
        + FromStr
        + Debug
        + Display
        + Send
        + Sync
        + Into<BigInt>
        + TryFrom<BigInt>
        + 'static,
    <T as TryFrom<BigInt>>::Error: Debug,
{
    fn from_int(value: i64) -> Self {
        Ratio::from_integer(T::from_i64(value).expect("integer does not fit the scalar type"))
    }

    fn from_bigint(value: &BigInt) -> Self {
        let int = T::try_from(value.clone()).expect("integer does not fit the scalar type");
        Ratio::from_integer(int)
    }

    fn pow2(exp: i64) -> Self {
        let two = T::one() + T::one();
        let magnitude = num_traits::pow(two, exp.unsigned_abs() as usize);
        if exp >= 0 {
            Ratio::from_integer(magnitude)
        } else {
            Ratio::new_raw(T::one(), magnitude)
        }
    }

    fn floor(&self) -> Self {
        Ratio::floor(self)
    }

    fn ceil(&self) -> Self {
        Ratio::ceil(self)
    }

    fn floor_bigint(&self) -> BigInt {
        Ratio::floor(self).to_integer().into()
    }

    fn is_integer(&self) -> bool {
        Ratio::is_integer(self)
    }

    fn to_bigrational(&self) -> BigRational {
        BigRational::new_raw(self.numer().clone().into(), self.denom().clone().into())
    }

    fn dyadic_exponent(&self) -> Option<u32> {
        let mut den: BigInt = self.denom().clone().into();
        let mut exp = 0;
        if let Some(tz) = den.trailing_zeros() {
            den >>= tz;
            exp = u32::try_from(tz).ok()?;
        }
        den.is_one().then_some(exp)
    }
}

/// Parses `p/q` or `p`; anything with a decimal point or exponent is refused.
pub fn parse_exact<S: ExactScalar>(text: &str) -> Result<S> {
    check_exact_syntax(text)?;
    S::from_str(text.trim()).map_err(|_| Error::Parse(text.to_string()))
}

pub(crate) fn check_exact_syntax(text: &str) -> Result<()> {
    let trimmed = text.trim();
    let ok = !trimmed.is_empty()
        && trimmed
            .chars()
            .all(|c| c.is_ascii_digit() || matches!(c, '-' | '+' | '/'));
    if ok {
        Ok(())
    } else {
        Err(Error::Parse(text.to_string()))
    }
}

/// Converts an exact big rational into any scalar (panics on fixed-width
/// overflow).
pub fn from_bigrational<S: ExactScalar>(value: &BigRational) -> S {
    S::from_bigint(value.numer()) / S::from_bigint(value.denom())
}
