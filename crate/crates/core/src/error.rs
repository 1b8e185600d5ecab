use thiserror::Error;

/// Errors raised by the potential, orbit, matter and solver layers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ShellError {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid support box: {0}")]
    InvalidBox(String),

    #[error("inadmissible initial radius r = {r}: E^2 = {e_sq} < E_l(r) = {potential}")]
    Inadmissible { r: f64, e_sq: f64, potential: f64 },

    #[error("metric too far from Schwarzschild: no sign change for root {index} near r = {near} (E = {e}, l = {ell})")]
    MetricTooFar {
        index: usize,
        near: f64,
        e: f64,
        ell: f64,
    },

    #[error("horizon condition violated at node {node} (r = {r}): 2m/r = {ratio}")]
    HorizonViolation { node: usize, r: f64, ratio: f64 },

    #[error("fixed-point iteration did not converge after {iterations} iterations (last update norm {last_norm:e})")]
    NonConvergence { iterations: usize, last_norm: f64 },

    #[error("config error: {0}")]
    Config(String),

    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for ShellError {
    fn from(err: std::io::Error) -> Self {
        ShellError::Io(err.to_string())
    }
}

impl ShellError {
    /// Short machine-readable name of the failure class.
    pub fn kind(&self) -> &'static str {
        match self {
            ShellError::Domain(_) => "domain",
            ShellError::InvalidBox(_) => "invalid_box",
            ShellError::Inadmissible { .. } => "inadmissible",
            ShellError::MetricTooFar { .. } => "metric_too_far",
            ShellError::HorizonViolation { .. } => "horizon_violation",
            ShellError::NonConvergence { .. } => "non_convergence",
            ShellError::Config(_) => "config",
            ShellError::Io(_) => "io",
        }
    }
}

pub type Result<T> = std::result::Result<T, ShellError>;
