use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("ellipticity {0} outside [0, 1); only closed orbits are modeled")]
    InvalidEllipticity(f64),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("propagation failed at t = {t} s: {reason}")]
    Propagation { t: f64, reason: &'static str },

    /// The phase is not affine in the initial conditions, or the configuration
    /// leaves the in-plane model (non-null y coefficients).
    #[error("model violation: {0}")]
    ModelViolation(String),

    #[error("shift solver did not converge after {iterations} iterations; last residual {residual:?}")]
    NoConvergence { iterations: usize, residual: [f64; 4] },

    #[error("shift solver failed at chi = {chi} rad: {source}")]
    SweepPoint { chi: f64, source: Box<Error> },

    #[error("degenerate wave vector: 1 + dz = {0} must be positive")]
    DegenerateWaveVector(f64),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    /// True for failures of the numerical machinery (as opposed to bad inputs).
    pub fn is_solver_failure(&self) -> bool {
        match self {
            Error::Propagation { .. } | Error::ModelViolation(_) | Error::NoConvergence { .. } => {
                true
            }
            Error::SweepPoint { source, .. } => source.is_solver_failure(),
            _ => false,
        }
    }
}
