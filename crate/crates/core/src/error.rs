use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Every failure mode of the library. Mathematical non-success (an
/// inconclusive certificate, a scan without sign change) is reported through
/// status values where a partial answer exists and through `Error` otherwise.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("point not on the unit sphere (|p| = {radius})")]
    NotOnSphere { radius: f64 },
    #[error("point within {distance:e} of the projection pole")]
    TooCloseToPole { distance: f64 },
    #[error("λ₀(X_H) = {value:e} is below the starshapedness threshold")]
    NotStarshaped { value: f64 },
    #[error("the component of {{V < {energy}}} containing the origin is unbounded")]
    UnboundedRegion { energy: f64 },
    #[error("step size underflow at t = {t}, state {state:?}")]
    StepSizeUnderflow { t: f64, state: Vec<f64> },
    #[error("no periodic orbit found: {0}")]
    NotFound(String),
    #[error("Newton iteration did not converge after {iterations} steps (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64, trace: Vec<f64> },
    #[error("frame degenerate along the orbit (condition number {condition:e})")]
    DegenerateFrame { condition: f64 },
    #[error("inadequate sampling: {0}")]
    Sampling(String),
    #[error("insufficient resolution: {0}")]
    Resolution(String),
    #[error("path is not symplectic (symmetry defect {defect:e})")]
    NotSymplectic { defect: f64 },
    #[error("degenerate: {0}")]
    Degenerate(String),
    #[error("curves too close (distance {distance:e})")]
    CurvesTooClose { distance: f64 },
    #[error("linking integral {value} is not near an integer")]
    NonInteger { value: f64 },
    #[error("curve not transverse to ξ (|λ₀(K')| = {value:e})")]
    NotTransverse { value: f64 },
    #[error("disk does not span the curve (boundary mismatch {mismatch:e})")]
    DiskNotSpanning { mismatch: f64 },
}

impl Error {
    /// Whether the error reports a mathematical outcome rather than bad input.
    pub fn is_mathematical(&self) -> bool {
        !matches!(self, Error::InvalidInput(_) | Error::NotOnSphere { .. })
    }
}
