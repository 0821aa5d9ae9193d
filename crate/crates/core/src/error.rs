use thiserror::Error;

/// Errors raised by the change point toolkit.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid instance: n = {n}, c = {c} (need n >= 2 and 0 <= c <= 1)")]
    InvalidInstance { n: usize, c: f64 },

    #[error("Gram matrix is singular at c = 1 (all hypotheses coincide) for n = {n}")]
    SingularGram { n: usize },

    #[error("triangular factorization broke down at pivot {index}: {pivot:e} is below {floor:e}")]
    IllConditioned { index: usize, pivot: f64, floor: f64 },

    #[error("efficiency profile is infeasible: inconclusive element has eigenvalue {min_eigenvalue:e}")]
    InfeasibleProfile { min_eigenvalue: f64 },

    #[error("efficiency {value} at position {index} lies outside [0, 1]")]
    EfficiencyOutOfRange { index: usize, value: f64 },

    #[error("expected a vector of length {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("overlap c = {c} is in the wrong regime for n = {n} (critical overlap {critical}): {reason}")]
    WrongRegime {
        n: usize,
        c: f64,
        critical: f64,
        reason: &'static str,
    },

    #[error("degenerate instance n = {n}, c = {c}: {reason}")]
    Degenerate { n: usize, c: f64, reason: &'static str },

    #[error("index {k} is outside [{lo}, {hi}]")]
    IndexOutOfRange { k: usize, lo: usize, hi: usize },

    #[error("kernel check failed: |A' {vector}| = {residual:e} exceeds {tolerance:e}")]
    KernelResidual {
        vector: &'static str,
        residual: f64,
        tolerance: f64,
    },

    #[error("numeric oracle did not converge after {iterations} iterations (residual {residual:e})")]
    OracleNonConvergence { iterations: usize, residual: f64 },

    #[error("numeric oracle supports n <= {max}, got n = {n}")]
    OracleTooLarge { n: usize, max: usize },

    #[error("no crossing of the local strategies in [{lo}, {hi}] for n = {n}: differences {f_lo:e} and {f_hi:e} share a sign")]
    NoCrossing {
        n: usize,
        lo: f64,
        hi: f64,
        f_lo: f64,
        f_hi: f64,
    },

    #[error("local weight x_{index} = {value} lies outside [{lo}, {hi}]")]
    WeightOutOfBox {
        index: usize,
        value: f64,
        lo: f64,
        hi: f64,
    },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

pub type Result<T> = std::result::Result<T, Error>;
