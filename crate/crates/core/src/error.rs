use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Invalid physical or reduced parameters.
    #[error("parameter error: {0}")]
    Parameter(String),

    /// A point or argument outside the domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// The point lies within the boundary margin where the phase equation diverges.
    #[error("singular point: x = {x} is within {margin} of the boundary")]
    Singularity { x: f64, margin: f64 },

    /// A configuration combination that an operation does not accept.
    #[error("configuration error: {0}")]
    Configuration(String),

    /// The fixed point is not an oscillator center (E_J / E_C <= 0 or unstable).
    #[error("not a center: {0}")]
    NotACenter(String),

    #[error("capacity error: N = {n} exceeds the cap of {cap}")]
    Capacity { n: usize, cap: usize },

    #[error("step size underflow at tau = {tau} (step {step:e})")]
    Stiffness { tau: f64, step: f64 },

    #[error("estimation error: {0}")]
    Estimation(String),

    #[error("refinement error: {0}")]
    Refinement(String),

    #[error("fit error: {0}")]
    Fit(String),

    #[error("eigensolver did not converge: {0}")]
    NoConvergence(String),
}

impl Error {
    /// True for failures of a numerical method, as opposed to rejected inputs.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::Stiffness { .. }
                | Error::Estimation(_)
                | Error::Refinement(_)
                | Error::Fit(_)
                | Error::NoConvergence(_)
        )
    }
}
