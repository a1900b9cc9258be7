use driftwalk_core::Error as CoreError;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] CoreError),
    #[error("{context}: {source}")]
    Io { context: String, source: std::io::Error },
    #[error("{0}")]
    Check(String),
}

impl CliError {
    /// 2 usage, 3 domain, 4 numerical (failed self-checks included), 1 I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Core(CoreError::Domain { .. }) => 3,
            CliError::Core(CoreError::Numerical(_)) | CliError::Check(_) => 4,
            CliError::Io { .. } => 1,
        }
    }

    pub fn io(context: impl Into<String>, source: std::io::Error) -> Self {
        CliError::Io { context: context.into(), source }
    }
}
