use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("{name} = {value} is outside its domain ({expected})")]
    Domain {
        name: &'static str,
        value: f64,
        expected: &'static str,
    },

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("conditioning event has zero probability (n = {n}, k_min = {k_min}, q = {q})")]
    ConditioningOnNull { n: u32, k_min: u32, q: f64 },

    #[error("iteration did not converge after {iterations} steps (last = {last}, residual = {residual:e})")]
    NonConvergence {
        iterations: usize,
        last: f64,
        residual: f64,
    },

    #[error("cutoff profile did not converge after {iterations} steps (residual = {residual:e})")]
    ProfileNonConvergence { iterations: usize, residual: f64 },

    #[error("degenerate belief update: marginal success probability is {marginal}")]
    DegenerateUpdate { marginal: f64 },

    #[error("parameters lie in region {actual}, operation requires {required}")]
    RegionMismatch {
        actual: &'static str,
        required: &'static str,
    },

    #[error("assurance interval is empty: ({lower}, {upper}] contains no integer")]
    EmptyInterval { lower: f64, upper: f64 },

    #[error("H(x) does not change sign on [{lo}, {hi}]")]
    NoSignChange { lo: f64, hi: f64 },

    #[error("stability condition fails at x* = {x}: dH/dx = {slope}")]
    Unstable { x: f64, slope: f64 },
}

pub(crate) fn check_unit(name: &'static str, value: f64) -> Result<()> {
    if (0.0..=1.0).contains(&value) {
        Ok(())
    } else {
        Err(Error::Domain {
            name,
            value,
            expected: "[0, 1]",
        })
    }
}

pub(crate) fn check_nonneg(name: &'static str, value: f64) -> Result<()> {
    if value >= 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain {
            name,
            value,
            expected: "finite and >= 0",
        })
    }
}
