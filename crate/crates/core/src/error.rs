use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("no finite maximiser bracket for y = {y} below the overflow cap (function grows sub-linearly)")]
    BracketFailure { y: f64 },

    #[error("value vanishes at positive argument {lambda}; λM'(λ)/M(λ) is undefined")]
    DegenerateRatio { lambda: f64 },

    #[error("(MF) hypothesis fails: {reason}")]
    NotEligible { reason: String },

    #[error("quadrature did not converge on ({lo}, {hi}): value {value:e}, error {error:e} after {subdivisions} subdivisions")]
    NonConvergent {
        lo: f64,
        hi: f64,
        value: f64,
        error: f64,
        subdivisions: usize,
    },

    #[error("point {x} lies outside the domain ({lo}, {hi})")]
    OutOfDomain { x: f64, lo: f64, hi: f64 },

    #[error("no K <= {cap:e} brings the modular below 1")]
    NotInSpace { cap: f64 },

    #[error("right-hand side vanishes while the left-hand side is {lhs:e} for `{function}`")]
    DivisionByZero { function: String, lhs: f64 },

    #[error("hardy fit is missing: {0}")]
    MissingFit(String),

    #[error("norm inequality needs P and Q to be N-functions ({0})")]
    NotNFunctions(String),

    #[error("degenerate calibration: {0}")]
    Degenerate(String),

    #[error("bad parameters: {0}")]
    BadParams(String),

    #[error("cannot parse `{input}`: {reason}")]
    Spec { input: String, reason: String },
}
