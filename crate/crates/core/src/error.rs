use thiserror::Error;

/// Errors produced by the numerical laboratory.
///
/// Every variant maps to a stable machine-readable code (see [`Error::code`])
/// which the command-line driver surfaces alongside the message.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("element is not in the open cone: x1 = {x1}, x1^2 - x'.x' = {gap}")]
    ConeViolation { x1: f64, gap: f64 },

    #[error("point is not in the domain: {violated}")]
    NotInDomain { violated: String },

    #[error("kernel base {re} + {im}i lies on the closed negative real axis")]
    BranchFailure { re: f64, im: f64 },

    #[error("finite-difference step leaves the domain")]
    StepExitsDomain,

    #[error("exact linear solve failed: {0}")]
    SolveFailure(String),

    #[error("polynomial is not a weight vector: {0}")]
    NotAWeightVector(String),

    #[error("parse error at position {position}: {message}")]
    Parse { position: usize, message: String },

    #[error("variable '{variable}' is not allowed in {kind} expressions")]
    Variable { variable: String, kind: String },

    #[error("phase term {index} is not SO(2)-invariant: |alpha| = {alpha}, |beta| = {beta}")]
    PhaseWeight { index: usize, alpha: u32, beta: u32 },

    #[error("evaluation failed in '{subexpr}': {reason}")]
    EvalDomain { subexpr: String, reason: String },

    #[error("symbol kind not supported here: {0}")]
    Kind(String),

    #[error("rejection sampler stalled after {attempts} attempts")]
    SamplingStall { attempts: u64 },

    #[error("ill-conditioned Gram matrix: pivot ratio {ratio:e} below {threshold:e}")]
    IllConditioned { ratio: f64, threshold: f64 },

    #[error("lambda = {lambda} unsupported for n = {n}: {reason}")]
    UnsupportedLambda { lambda: f64, n: usize, reason: String },

    #[error("Jacobi exponents must exceed -1 (a = {a}, b = {b})")]
    ExponentRange { a: f64, b: f64 },

    #[error("cache error: {0}")]
    Cache(String),
}

impl Error {
    /// Stable upper-case code for reports and exit-code mapping.
    pub fn code(&self) -> &'static str {
        match self {
            Error::DimensionMismatch { .. } => "DIMENSION_MISMATCH",
            Error::InvalidArgument(_) => "INVALID_ARGUMENT",
            Error::ConeViolation { .. } => "CONE_VIOLATION",
            Error::NotInDomain { .. } => "POINT_NOT_IN_DOMAIN",
            Error::BranchFailure { .. } => "BRANCH_FAILURE",
            Error::StepExitsDomain => "STEP_EXITS_DOMAIN",
            Error::SolveFailure(_) => "SOLVE_FAILURE",
            Error::NotAWeightVector(_) => "NOT_A_WEIGHT_VECTOR",
            Error::Parse { .. } => "PARSE_ERROR",
            Error::Variable { .. } => "VARIABLE_ERROR",
            Error::PhaseWeight { .. } => "PHASE_WEIGHT_ERROR",
            Error::EvalDomain { .. } => "EVAL_DOMAIN_ERROR",
            Error::Kind(_) => "KIND_ERROR",
            Error::SamplingStall { .. } => "SAMPLING_STALL",
            Error::IllConditioned { .. } => "ILL_CONDITIONED",
            Error::UnsupportedLambda { .. } => "UNSUPPORTED_LAMBDA",
            Error::ExponentRange { .. } => "EXPONENT_RANGE",
            Error::Cache(_) => "CACHE_ERROR",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}
