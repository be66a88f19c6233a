use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix is not unitary: max |M M^dagger - I| = {deviation:e} exceeds {tolerance:e}")]
    NotUnitary { deviation: f64, tolerance: f64 },

    #[error("{what} of size {size} exceeds the supported maximum {max}")]
    TooLarge {
        what: &'static str,
        size: usize,
        max: usize,
    },

    #[error("photon number mismatch: input carries {input}, output carries {output}")]
    PhotonMismatch { input: u32, output: u32 },

    #[error("mode index {index} out of range for {modes} modes")]
    ModeOutOfRange { index: usize, modes: usize },

    #[error("degenerate phase strategy `{0}`: weights sum to zero")]
    DegenerateStrategy(String),

    #[error("Cramer-Rao bound undefined for non-positive Fisher information {0}")]
    UndefinedBound(f64),

    #[error("phase not identifiable at phi = {phi}: |dP/dphi| = {slope:e}")]
    NonIdentifiablePhase { phi: f64, slope: f64 },

    #[error("probability {0} outside [0, 1] beyond numerical slack")]
    ProbabilityOutOfRange(f64),

    #[error("invalid parameter {name} = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("malformed matrix: {0}")]
    MalformedMatrix(String),
}

impl Error {
    pub(crate) fn invalid(name: &'static str, value: impl Into<f64>, reason: &'static str) -> Self {
        Error::InvalidParameter {
            name,
            value: value.into(),
            reason,
        }
    }
}
