use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Coarse grouping used by front ends to pick exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    InvalidInput,
    Stability,
    Numeric,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("cubic root refinement did not converge (residuals {residuals:?})")]
    NonConvergence { residuals: [f64; 3] },

    #[error("digamma pole at z = {re} + {im}i")]
    Pole { re: f64, im: f64 },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("unstable parameters: {0}")]
    Stability(String),

    #[error("roots too close for the closed-form coefficients (min separation {min_separation:e})")]
    DegenerateRoots { min_separation: f64 },

    #[error("regime mismatch: {0}")]
    RegimeMismatch(String),

    #[error("confluent drift spectrum: {0}")]
    ConfluentSpectrum(String),

    #[error("asymptotic diffusion kernel diverges: {0}")]
    Divergence(String),

    #[error("non-physical symplectic spectrum: {0}")]
    NonPhysicalSpectrum(String),

    #[error("frame mismatch: expected {expected:?}, got {got:?}")]
    FrameMismatch {
        expected: crate::propagator::Frame,
        got: crate::propagator::Frame,
    },

    #[error("step size {dt:e} exceeds the bound {bound:e}")]
    StepSize { dt: f64, bound: f64 },

    #[error("{what} has imaginary residue {residue:e}")]
    NonReal { what: &'static str, residue: f64 },

    #[error("at t = {t}: {source}")]
    AtTime {
        t: f64,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub fn at_time(self, t: f64) -> Self {
        Error::AtTime {
            t,
            source: Box::new(self),
        }
    }

    pub fn class(&self) -> ErrorClass {
        match self {
            Error::InvalidInput(_) | Error::FrameMismatch { .. } | Error::StepSize { .. } => {
                ErrorClass::InvalidInput
            }
            Error::Stability(_) | Error::RegimeMismatch(_) => ErrorClass::Stability,
            Error::AtTime { source, .. } => source.class(),
            _ => ErrorClass::Numeric,
        }
    }
}
