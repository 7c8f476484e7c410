//! Unified error type for the crate.

/// Errors produced by construction, simulation, and reporting routines.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A constructor or routine received parameters outside its contract.
    #[error("invalid specification: {0}")]
    InvalidSpec(String),

    /// An input value lies outside the mathematical domain of the routine.
    #[error("domain error: {0}")]
    Domain(String),

    /// A time stepper produced a non-finite value and stopped.
    #[error("aborted at step {step}: {context}")]
    Aborted { step: usize, context: String },

    /// An iterative solve did not converge within its iteration budget.
    #[error("iteration did not converge: {0}")]
    NonConvergence(String),

    /// The mode amplitude is outside the invertible range of the
    /// near-identity transformation.
    #[error("amplitude too large for invertible transformation: |u| = {0:.3e}")]
    AmplitudeTooLarge(f64),

    /// A frame construction requires a nonzero reference amplitude.
    #[error("degenerate amplitude: frame speed requires a nonzero reference amplitude")]
    DegenerateAmplitude,

    /// Inputs violate a precondition that the diagnostic depends on.
    #[error("contract violation: {0}")]
    ContractViolation(String),

    /// An experiment configuration failed validation.
    #[error("configuration error: {0}")]
    Config(String),

    /// An experiment exceeded its wall-clock budget and was stopped.
    #[error("budget exceeded in {experiment}: {elapsed:.1} s > {budget:.1} s")]
    BudgetExceeded {
        experiment: String,
        elapsed: f64,
        budget: f64,
    },

    /// A rate fit was refused because the series is unusable for it.
    #[error("rate fit refused: {0}")]
    FitRefused(String),

    #[error("i/o failure: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv failure: {0}")]
    Csv(#[from] csv::Error),

    #[error("config parse failure: {0}")]
    TomlDe(#[from] toml::de::Error),

    #[error("config write failure: {0}")]
    TomlSer(#[from] toml::ser::Error),
}

impl Error {
    /// Process exit code for the command-line front end: 2 for
    /// configuration problems, 3 for runtime failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidSpec(_) | Error::Config(_) | Error::TomlDe(_) => 2,
            _ => 3,
        }
    }
}

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
