use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("axis {axis} has {count} nodes, at least 3 are required")]
    TooFewNodes { axis: usize, count: usize },

    #[error("non-finite value: {0}")]
    NonFinite(String),

    #[error("trajectory left the domain at t = {time}")]
    ExitedDomain { time: f64, state: Vec<f64> },

    #[error("step size underflow at t = {time} (step {step:e})")]
    StepUnderflow { time: f64, step: f64 },

    #[error("integration region lies outside the grid")]
    RegionOutsideGrid,

    #[error("operator dimension {0} must be odd")]
    EvenDimension(usize),

    #[error("polynomial degree {degree} exceeds the limit {limit}")]
    DegreeTooHigh { degree: usize, limit: usize },

    #[error("kernel violates {0}")]
    KernelInvariant(String),

    #[error("time {t} is not resolved: domega*|t|/hbar = {ratio:.4} > pi/4")]
    Unresolved { t: f64, ratio: f64 },

    #[error("regular part does not decay below the threshold before t = {horizon}")]
    NoDecay { horizon: f64 },

    #[error("regular part is identically zero")]
    NoRegularPart,

    #[error("matrix is not Hermitian (defect {0:e})")]
    NotHermitian(f64),

    #[error("flow is tangent to the hypersurface at {0:?}")]
    Transversality(Vec<f64>),

    #[error("constants {i} and {j} fail to commute: |bracket| = {value:e} at {location:?}")]
    NotInvolutive { i: usize, j: usize, value: f64, location: Vec<f64> },

    #[error("charts {0} and {1} have overlapping interiors")]
    OverlappingCharts(usize, usize),

    #[error("chart {0} is thinner than the frontier width, frontiers would stack")]
    StackedFrontiers(usize),

    #[error("scale ordering violated: hbar/eps^2 = {hbar_ratio:.3e}, eps^2/S = {action_ratio:.3e} (both must be < 0.1)")]
    ScaleOrdering { hbar_ratio: f64, action_ratio: f64 },

    #[error("unknown chart id {0}")]
    UnknownChart(usize),

    #[error("missing microcanonical volume for chart {0}")]
    MissingVolume(usize),

    #[error("Monte Carlo relative error {0:.3} exceeds 0.05; use more samples")]
    MonteCarloPrecision(f64),

    #[error("level set is empty: {0}")]
    EmptyLevelSet(String),

    #[error("smoothing width {eta:e} is below twice the value-space spacing {spacing:e}")]
    UnderResolved { eta: f64, spacing: f64 },

    #[error("rejection sampling efficiency {0:e} is below 1e-4")]
    SamplingEfficiency(f64),

    #[error("function is not conserved in any chart")]
    NotLocallyConserved,

    #[error("function {0} is only locally conserved")]
    LocalFunction(usize),

    #[error("wall interaction not completed within t = {0}")]
    Incomplete(f64),

    #[error("invalid billiard geometry: {0}")]
    Geometry(String),

    #[error("particle escaped the billiard at t = {0}")]
    Escaped(f64),

    #[error("relative energy drift {drift:e} exceeded {limit:e} at t = {time}")]
    EnergyDrift { drift: f64, limit: f64, time: f64 },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("format error: {0}")]
    Format(String),
}

impl Error {
    /// True for failures caused by malformed input rather than numerics or I/O.
    pub fn is_schema(&self) -> bool {
        matches!(self, Error::Invalid(_) | Error::Format(_) | Error::EvenDimension(_) | Error::GridMismatch(_) | Error::TooFewNodes { .. } | Error::UnknownChart(_))
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Format(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Format(e.to_string())
    }
}

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::Invalid(msg.into())
}
