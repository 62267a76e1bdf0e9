use thiserror::Error;

/// Errors raised by the analytic, oracle and simulation layers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid rate `{name}` = {value}")]
    InvalidRate { name: &'static str, value: f64 },

    #[error("system is unstable (stability margin {margin})")]
    UnstableSystem { margin: f64 },

    #[error("stability margin {margin} is too close to the boundary for closed-form evaluation")]
    NearBoundary { margin: f64 },

    #[error("argument {s} is outside the convergence domain (must be below {bound})")]
    OutOfDomain { s: f64, bound: f64 },

    #[error("singular denominator in detour generating function")]
    SingularDenominator,

    #[error("spectral decomposition is degenerate (repeated eigenvalue)")]
    DegenerateSpectrum,

    #[error("linear system is singular at pivot {pivot}")]
    SingularSystem { pivot: usize },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
