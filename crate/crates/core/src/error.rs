use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("unknown ion species `{name}` (known: {known})")]
    UnknownSpecies { name: String, known: String },

    #[error("operation needs {expected} ions, configuration has {found}")]
    IonCount { expected: usize, found: usize },

    #[error("ion index {index} out of range for {count} ions")]
    IonIndex { index: usize, count: usize },

    #[error(
        "secular frequencies differ by {relative_detuning:.3e} (relative); \
         the closed-form exchange needs resonant ions, use the numerical propagators instead"
    )]
    NotResonant { relative_detuning: f64 },

    #[error("coupling too strong: normal-mode frequency squared {omega_sq:.3e} rad^2/s^2 is not positive")]
    UnstableCoupling { omega_sq: f64 },

    #[error("wire resistance is zero, the quality factor is unbounded")]
    Lossless,

    #[error("Fock truncation leak: population {population:.3e} in the top layers exceeds {limit:.0e}")]
    TruncationLeak { population: f64, limit: f64 },

    #[error("invalid quantum state: {0}")]
    InvalidState(String),

    #[error("network solver failed to reach tolerance {requested:.1e} (achieved error estimate {achieved:.3e})")]
    SolverTolerance { requested: f64, achieved: f64 },
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}
