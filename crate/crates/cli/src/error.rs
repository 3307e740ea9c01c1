use thiserror::Error;

pub type CliResult<T> = std::result::Result<T, CliError>;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] nlhelm::Error),

    #[error("config parse error: {0}")]
    Parse(#[from] serde_json::Error),

    #[error("override error: {0}")]
    Override(String),

    #[error("{0}")]
    Usage(String),

    #[error("output error: {0}")]
    Io(#[from] std::io::Error),
}

/// Process exit codes.
pub mod exit {
    pub const SUCCESS: u8 = 0;
    pub const FAILURE: u8 = 1;
    pub const CONFIG: u8 = 2;
    pub const NON_CONVERGENCE: u8 = 3;
    pub const ACCURACY: u8 = 4;
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        use nlhelm::Error as E;
        match self {
            CliError::Parse(_) | CliError::Override(_) | CliError::Usage(_) => exit::CONFIG,
            CliError::Io(_) => exit::FAILURE,
            CliError::Core(e) => match e {
                E::Config(_)
                | E::Spec(_)
                | E::Shape(_)
                | E::Domain(_)
                | E::WeightNotMonotone { .. } => exit::CONFIG,
                E::NonContraction { .. } | E::NotConverged { .. } | E::Uniqueness { .. } => {
                    exit::NON_CONVERGENCE
                }
                E::Accuracy(_) | E::Integrator(_) | E::Range(_) => exit::ACCURACY,
                E::Format(_) | E::Io(_) => exit::FAILURE,
            },
        }
    }
}
