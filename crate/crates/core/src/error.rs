//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("signal length {0} is below the minimum of 4")]
    SignalTooShort(usize),

    #[error("signal contains a non-finite entry at index {0}")]
    NonFiniteEntry(usize),

    #[error("signal lengths differ: {0} vs {1}")]
    LengthMismatch(usize, usize),

    #[error("window width {0} must be positive and at most L")]
    BadWindowWidth(f64),

    #[error("custom window has {got} samples, expected {expected}")]
    BadCustomWindow { got: usize, expected: usize },

    #[error("lattice step {step}={value} does not divide L={l}")]
    LatticeMismatch { step: char, value: usize, l: usize },

    #[error("coefficient grid shape (a={a}, b={b}, L={l}) does not match the system")]
    GridShapeMismatch { a: usize, b: usize, l: usize },

    #[error("dense frame computations are limited to L <= 1024, got L={0}")]
    DenseLimitExceeded(usize),

    #[error("not a frame: A/B = {ratio:.3e} is below the 1e-10 rank threshold")]
    NotAFrame { ratio: f64 },

    #[error("no dual window attached; compute the canonical dual first")]
    DualMissing,

    #[error("no frame bounds attached; compute the canonical dual or bounds first")]
    BoundsMissing,

    #[error("norm exponent {0} is outside [1, inf]")]
    BadExponent(f64),

    #[error("weight order s={0} must be nonnegative and finite")]
    BadWeightOrder(f64),

    #[error("cannot parse {what}: {input:?}")]
    Parse { what: &'static str, input: String },

    #[error("N={n} is outside 0..={max}")]
    NOutOfRange { n: usize, max: usize },

    #[error("support is empty")]
    EmptySupport,

    #[error("support index ({k}, {n}) is outside the {kk}x{mm} grid")]
    SupportOutOfBounds { k: usize, n: usize, kk: usize, mm: usize },

    #[error("duplicate support index ({0}, {1})")]
    DuplicateSupportIndex(usize, usize),

    #[error("exhaustive search needs binomial({atoms}, {n}) = {count} <= 2e6 supports")]
    CombinatorialBudget { atoms: usize, n: usize, count: u128 },

    #[error("N list must be strictly increasing")]
    NsNotIncreasing,

    #[error("sigma table is empty")]
    EmptyTable,

    #[error("rate fit needs at least 4 points above the noise floor, found {0}")]
    TooFewFitPoints(usize),

    #[error("index ordering violates the hypothesis: need 1 <= {0} <= {1} < inf")]
    BadIndexOrdering(f64, f64),

    #[error("{0}")]
    InvalidArgument(String),

    #[error("test-signal generator {kind:?} requires a Gabor system")]
    SystemRequired { kind: String },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
