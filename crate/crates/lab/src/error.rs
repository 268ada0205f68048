use thiserror::Error;

#[derive(Debug, Error)]
pub enum LabError {
    #[error("config error{}: {message}", line.map(|l| format!(" at line {l}")).unwrap_or_default())]
    Config { line: Option<usize>, message: String },
    #[error("solver failure in {context}: {source}")]
    Solver {
        context: String,
        #[source]
        source: kwise_core::Error,
    },
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

impl LabError {
    pub fn solver(context: impl Into<String>, source: kwise_core::Error) -> Self {
        LabError::Solver {
            context: context.into(),
            source,
        }
    }

    /// Process exit status: 2 for configuration problems, 3 for solver
    /// failures in a required computation, 1 otherwise.
    pub fn exit_code(&self) -> u8 {
        match self {
            LabError::Config { .. } => 2,
            LabError::Solver { .. } => 3,
            _ => 1,
        }
    }
}
