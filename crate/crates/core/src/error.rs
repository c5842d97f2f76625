use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("non-finite value {value} at flat index {index}")]
    NonFinite { index: usize, value: f64 },

    #[error("shape mismatch: expected {expected} values, got {got}")]
    Shape { expected: usize, got: usize },

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("axis {axis} out of range for d = {d}")]
    AxisOutOfRange { axis: usize, d: usize },

    #[error("invalid exponent p = {0}")]
    InvalidExponent(f64),

    #[error("annulus B_{outer} \\ B_{inner} does not fit inside the box of half-width {half_width}")]
    AnnulusOutsideBox {
        inner: f64,
        outer: f64,
        half_width: f64,
    },

    #[error("degenerate interval ({a}, {b})")]
    DegenerateInterval { a: f64, b: f64 },

    #[error("operation requires d = {expected}, got d = {got}")]
    WrongDimension { expected: usize, got: usize },

    #[error("operation requires m = {expected}, got m = {got}")]
    WrongComponents { expected: usize, got: usize },

    #[error("invalid mollifier: {0}")]
    Mollifier(String),

    #[error("shell at radius {radius} contains no grid points")]
    EmptyShell { radius: f64 },

    #[error("radius {radius} outside (0, {half_width})")]
    RadiusOutOfRange { radius: f64, half_width: f64 },

    #[error("profile fit needs at least {needed} points, got {got}")]
    TooFewPoints { needed: usize, got: usize },

    #[error("profile value {value} at r = {radius} is not positive")]
    NonPositiveProfile { radius: f64, value: f64 },

    #[error("cube {index} (center {center:?}, side {side}) leaves the box")]
    CubeOutsideBox {
        index: usize,
        center: Vec<f64>,
        side: f64,
    },

    #[error("cube {index} of side {side} is smaller than 4 grid spacings ({spacing})")]
    CubeUnresolved {
        index: usize,
        side: f64,
        spacing: f64,
    },

    #[error("tensor must be constant for this operation")]
    NotConstant,

    #[error("Legendre-Hadamard condition fails: c0 = {c0}")]
    LegendreHadamard { c0: f64 },

    #[error("symbol is singular at wavevector {k:?}")]
    SingularSymbol { k: Vec<f64> },

    #[error("right-hand side has nonzero mean (relative {relative:e})")]
    NonzeroMean { relative: f64 },

    #[error("coercivity not certified: c0 = {c0}")]
    NotCertified { c0: f64 },

    #[error("iteration cap {cap} reached with relative residual {residual:e}")]
    IterationCap { cap: usize, residual: f64 },

    #[error("coefficient derivatives unresolved: spectral tail fraction {tail:e}")]
    Unresolved { tail: f64 },

    #[error("bad field file: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
