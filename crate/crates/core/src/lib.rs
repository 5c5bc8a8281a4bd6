//! Exact evaluation of the Takagi function `T(x) = Σ_{k≥1} dist(x, D_k)` and
//! certified Lebesgue-measure bounds on the level sets of its difference
//! quotients.
//!
//! Everything is exact rational arithmetic. Real quantities that cannot be
//! computed exactly (such as `T(x)` at a non-dyadic point) are carried as
//! rational enclosures with a rigorous tail bound, so every measure bound the
//! crate reports is a proof, not an estimate.
//!
//! The grid, series and piecewise-linear layers are generic over
//! [`ExactScalar`]; the aliases below fix them to arbitrary-precision
//! rationals, which is what the measure engine and the reports use.

pub mod analysis;
pub mod error;
pub mod exactnum;
pub mod measure;
pub mod plf;
pub mod report;
pub mod scalar;
pub mod serde_exact;
pub mod takagi;

use num_rational::Ratio;

pub use error::{Error, Result};
pub use exactnum::Dyadic;
pub use scalar::ExactScalar;

/// Arbitrary-precision rational; the default scalar.
pub type Rat = num_rational::BigRational;
/// Fixed-width rational, only safe for shallow grids (denominators up to 2^62).
pub type Rat64 = Ratio<i64>;
/// Fixed-width rational, only safe for moderately deep grids.
pub type Rat128 = Ratio<i128>;

pub type Enclosure = takagi::Enclosure<Rat>;
pub type SlopeSeq = takagi::SlopeSeq<Rat>;
pub type Plf = plf::PiecewiseLinear<Rat>;
pub type IntervalSet = plf::IntervalSet<Rat>;
pub type Interval = plf::Interval<Rat>;

/// Parses an exact rational written as `p/q` or `p`. Decimal notation is
/// rejected.
pub fn parse_rat(text: &str) -> Result<Rat> {
    scalar::parse_exact(text)
}
