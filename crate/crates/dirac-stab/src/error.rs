use thiserror::Error;

/// Failure modes surfaced by every module of the crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("inadmissible (n, k) = ({n}, {k}): need n <= 3, and k = 1 when n = 3")]
    InadmissiblePair { n: usize, k: u32 },

    #[error("no convergence in {stage}: last residual {residual:e}")]
    NoConvergence { stage: String, residual: f64 },

    #[error("omega = {omega} lies outside the gap (-{m}, {m})")]
    OutsideGap { omega: f64, m: f64 },

    #[error("tail underflow: {points} usable tail points (need 10); profile decays super-exponentially or is zero")]
    TailUnderflow { points: usize },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("eigenvalue iteration failed to converge (index {index})")]
    NoConvergenceQR { index: usize },

    #[error("representation carries no alpha0 matrix")]
    MissingAlpha0,

    #[error("not an embedding: {0}")]
    NotAnEmbedding(String),

    #[error("family has {len} members; need at least 3")]
    InsufficientFamily { len: usize },

    #[error("lambda = {re}{im:+}i is not hyperbolic (rates n-={n_minus}, n0={n_zero}, n+={n_plus})")]
    NotHyperbolic { re: f64, im: f64, n_minus: usize, n_zero: usize, n_plus: usize },

    #[error("integration failed at x = {x}: {reason}")]
    IntegrationFailure { x: f64, reason: String },

    #[error("contour passes within {distance:e} of the essential spectrum (margin {margin:e})")]
    ContourTouchesEssential { distance: f64, margin: f64 },

    #[error("branch is not O(m^2 - omega^2): |Lambda| grows with log-slope {slope:.3}")]
    NotSmallBranch { slope: f64 },

    #[error("weight derivative is not positive at x = {x}")]
    NonmonotoneWeight { x: f64 },

    #[error("Carleman hypothesis fails at r = {r}: {reason}")]
    HypothesisFails { r: f64, reason: String },

    #[error("lambda = {lambda} sits at a threshold +-m")]
    ThresholdLambda { lambda: f64 },

    #[error("invalid configuration at `{path}`: {message}")]
    ConfigInvalid { path: String, message: String },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("io: {0}")]
    Io(String),
}

impl Error {
    /// Stable machine-readable tag for structured reports.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InadmissiblePair { .. } => "InadmissiblePair",
            Error::NoConvergence { .. } => "NoConvergence",
            Error::OutsideGap { .. } => "OutsideGap",
            Error::TailUnderflow { .. } => "TailUnderflow",
            Error::DimensionMismatch(_) => "DimensionMismatch",
            Error::NoConvergenceQR { .. } => "NoConvergenceQR",
            Error::MissingAlpha0 => "MissingAlpha0",
            Error::NotAnEmbedding(_) => "NotAnEmbedding",
            Error::InsufficientFamily { .. } => "InsufficientFamily",
            Error::NotHyperbolic { .. } => "NotHyperbolic",
            Error::IntegrationFailure { .. } => "IntegrationFailure",
            Error::ContourTouchesEssential { .. } => "ContourTouchesEssential",
            Error::NotSmallBranch { .. } => "NotSmallBranch",
            Error::NonmonotoneWeight { .. } => "NonmonotoneWeight",
            Error::HypothesisFails { .. } => "HypothesisFails",
            Error::ThresholdLambda { .. } => "ThresholdLambda",
            Error::ConfigInvalid { .. } => "ConfigInvalid",
            Error::InvalidInput(_) => "InvalidInput",
            Error::Io(_) => "Io",
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
