//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dilation factor must be at least 2, got {0}")]
    InvalidDilation(i64),

    #[error("digit {digit} out of range for alphabet of size {radix}")]
    DigitOutOfRange { digit: usize, radix: usize },

    #[error("radix mismatch: expected {expected}, got {got}")]
    RadixMismatch { expected: usize, got: usize },

    #[error("a filter system needs at least 2 subbands, got {0}")]
    TooFewBands(usize),

    #[error("expected {expected} filters, got {got}")]
    FilterCount { expected: usize, got: usize },

    #[error("tolerance must be positive, got {0}")]
    InvalidTolerance(f64),

    #[error("low-pass quadrature condition fails with defect {defect:.3e}")]
    QuadratureCondition { defect: f64 },

    #[error("low-pass normalization violated: |m0(1)| = {got:.6}, want {want:.6}")]
    LowPassNormalization { got: f64, want: f64 },

    #[error("level {level} with {radix} subbands exceeds the cell cap of {cap}")]
    LevelCapExceeded { radix: usize, level: u32, cap: u64 },

    #[error("interval level {0} exceeds the exact-endpoint cap of 40")]
    IntervalLevelCap(u32),

    #[error("zero vector where a nonzero vector is required")]
    ZeroVector,

    #[error("vector norm {0} is not 1 within 1e-9")]
    NotUnitNorm(f64),

    #[error("measure value {0:.3e} is below the negativity tolerance -1e-12")]
    NegativeMeasure(f64),

    #[error("measure table invariant violated: {0}")]
    TableInvariant(String),

    #[error("tables have different shapes: {left_radix}^{left_level} vs {right_radix}^{right_level}")]
    ShapeMismatch {
        left_radix: usize,
        left_level: u32,
        right_radix: usize,
        right_level: u32,
    },

    #[error("band count mismatch: expected {expected}, got {got}")]
    BandCount { expected: usize, got: usize },

    #[error("duplicate word in coefficient list")]
    DuplicateWord,

    #[error("all words must have length {0}")]
    MixedWordLength(usize),

    #[error("probabilities must be nonnegative and sum to 1 (sum = {0})")]
    BadProbabilities(f64),

    #[error("step-function grids cannot be refined to a common denominator in range")]
    GridOverflow,

    #[error("exact packet construction requires 2 subbands, got {0}")]
    PacketRadix(usize),

    #[error("index intervals overlap near {0}")]
    TilingOverlap(String),

    #[error("index intervals leave a gap near {0}")]
    TilingGap(String),

    #[error("point {0} outside [0,1)")]
    PointOutOfRange(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
