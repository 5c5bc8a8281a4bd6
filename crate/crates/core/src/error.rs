use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("{value} lies outside [0, 1)")]
    OutsideUnitInterval { value: String },
    #[error("{value} lies on the dyadic grid D_{level}")]
    OnGrid { value: String, level: u32 },
    #[error("{value} is a dyadic rational")]
    IsDyadic { value: String },
    #[error("{value} is not a dyadic rational")]
    NotDyadic { value: String },
    #[error("{value} lies outside the domain [{lo}, {hi}]")]
    OutsideDomain { value: String, lo: String, hi: String },
    #[error("empty interval: {lo} is not below {hi}")]
    EmptyInterval { lo: String, hi: String },
    #[error("{needed} breakpoints exceed the cap of {cap}")]
    TooManyBreakpoints { needed: String, cap: usize },
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("cannot parse `{0}` as an exact rational (expected `p/q` or `p`)")]
    Parse(String),
    #[error("no qualifying indices found up to horizon {horizon}")]
    InsufficientHorizon { horizon: usize },
}
