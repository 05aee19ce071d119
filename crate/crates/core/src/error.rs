use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Coarse classification used for process exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    Config,
    Numerical,
    Validation,
}

impl ErrorClass {
    pub fn exit_code(self) -> i32 {
        match self {
            ErrorClass::Config => 2,
            ErrorClass::Numerical => 3,
            ErrorClass::Validation => 4,
        }
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid device parameters: {0}")]
    InvalidParams(String),

    #[error("overcoupled mutual inductance: K = {0} (must satisfy 0 <= K < 1)")]
    Overcoupled(f64),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("wavefunction leaks to the domain boundary (|psi| = {leak:.3e} at the edge of [{phi_min}, {phi_max}])")]
    BoundaryLeak { leak: f64, phi_min: f64, phi_max: f64 },

    #[error("nested-grid estimate {estimate:.3e} exceeds tolerance {tolerance:.3e}")]
    NotConverged { estimate: f64, tolerance: f64 },

    #[error("{what} failed to converge after {doublings} doublings")]
    FailedToConverge { what: &'static str, doublings: usize },

    #[error("splitting must be extracted at the symmetry point, got phi0 = {0}")]
    NotSymmetric(f64),

    #[error("two-level window collapsed: third level margin {margin:.3} at phi0 = {phi0:.3e}")]
    WindowCollapse { margin: f64, phi0: f64 },

    #[error("Kerr coefficient Omega_04 is zero: critical photon number is unbounded")]
    DivergentCritical,

    #[error("photon number must be positive, got {0}")]
    InvalidPhotonNumber(f64),

    #[error("ill-conditioned fit: {0}")]
    IllConditionedFit(String),

    #[error("phi0 = {phi0:.3e} lies outside the two-level window (|phi0| <= {limit:.3e})")]
    WindowViolation { phi0: f64, limit: f64 },

    #[error("Fock truncation too small: top level population {population:.3e} exceeds {limit:.1e}")]
    Truncation { population: f64, limit: f64 },

    #[error("Liouvillian is singular")]
    SingularLiouvillian,

    #[error("integration unstable: relative energy drift {drift:.3e}")]
    Unstable { drift: f64 },

    #[error("config error{}: {msg}", line.map(|l| format!(" at line {l}")).unwrap_or_default())]
    Config { line: Option<usize>, msg: String },

    #[error("validation failed: {0}")]
    Validation(String),

    #[error("{stage}: {message}")]
    Stage {
        stage: &'static str,
        message: String,
        class: ErrorClass,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn config(line: Option<usize>, msg: impl Into<String>) -> Self {
        Error::Config {
            line,
            msg: msg.into(),
        }
    }

    pub fn class(&self) -> ErrorClass {
        match self {
            Error::Config { .. } | Error::InvalidParams(_) | Error::Overcoupled(_) | Error::Io(_) => {
                ErrorClass::Config
            }
            Error::Validation(_) => ErrorClass::Validation,
            Error::Stage { class, .. } => *class,
            _ => ErrorClass::Numerical,
        }
    }
}
