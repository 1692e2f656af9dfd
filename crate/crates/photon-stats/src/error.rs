use core::fmt;

use crate::transmission::TransmissionModel;

/// Domain error raised when constructing or combining photon-statistics
/// values. Offending values are reported as `f64` regardless of the scalar
/// type in use.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Error {
    /// Mean photon number was negative or not finite.
    InvalidMeanOccupancy { value: f64 },
    /// Transmittance must lie in [0, 1].
    InvalidTransmittance { value: f64 },
    /// Tail tolerance must lie strictly between 0 and 1.
    InvalidTailTolerance { value: f64 },
    /// Reduced frequency x = hbar*omega/(k*T) must be strictly positive.
    InvalidReducedFrequency { value: f64 },
    /// A quantity that must be strictly positive and finite was not.
    NonPositive { name: &'static str, value: f64 },
    /// Raw PMF data violated a representation invariant.
    InvalidPmf { reason: &'static str },
    /// The requested truncated support does not fit in memory.
    SupportTooLarge { required: u64, limit: u64 },
    /// A result overflowed the scalar range.
    Overflow { name: &'static str },
    /// Cavity operations reject a = 0: nothing ever escapes, so the bounce
    /// series is degenerate.
    OpaqueCavity,
    /// A bounce series built for one transmission model was passed to an
    /// operation defined only for the other.
    ModelMismatch {
        expected: TransmissionModel,
        found: TransmissionModel,
    },
    /// Monte Carlo runs need at least one trial.
    ZeroTrials,
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Error::InvalidMeanOccupancy { value } => {
                write!(f, "mean occupancy must be finite and >= 0, got {value}")
            }
            Error::InvalidTransmittance { value } => {
                write!(f, "transmittance must lie in [0, 1], got {value}")
            }
            Error::InvalidTailTolerance { value } => {
                write!(f, "tail tolerance must lie in (0, 1), got {value}")
            }
            Error::InvalidReducedFrequency { value } => {
                write!(f, "reduced frequency must be finite and > 0, got {value}")
            }
            Error::NonPositive { name, value } => {
                write!(f, "{name} must be finite and > 0, got {value}")
            }
            Error::InvalidPmf { reason } => write!(f, "invalid PMF: {reason}"),
            Error::SupportTooLarge { required, limit } => write!(
                f,
                "truncated support needs {required} entries, more than the supported {limit}"
            ),
            Error::Overflow { name } => write!(f, "{name} overflowed the scalar range"),
            Error::OpaqueCavity => {
                write!(f, "cavity with a = 0 never emits; bounce series undefined")
            }
            Error::ModelMismatch { expected, found } => {
                write!(f, "bounce series built for {found}, operation requires {expected}")
            }
            Error::ZeroTrials => write!(f, "at least one trial is required"),
        }
    }
}

impl std::error::Error for Error {}

pub type Result<T> = core::result::Result<T, Error>;
