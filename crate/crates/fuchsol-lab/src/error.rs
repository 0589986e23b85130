use thiserror::Error;

#[derive(Debug, Error)]
pub enum LabError {
    /// Malformed configuration or invocation; exit code 2.
    #[error("{0}")]
    Usage(String),
    #[error("I/O error on {path}: {source}")]
    Io { path: String, source: std::io::Error },
    /// A computation failed; exit code 1.
    #[error("{0}")]
    Run(String),
}

impl LabError {
    pub fn exit_code(&self) -> i32 {
        match self {
            LabError::Usage(_) => 2,
            LabError::Io { .. } | LabError::Run(_) => 1,
        }
    }

    pub fn run(e: impl std::fmt::Display) -> Self {
        LabError::Run(e.to_string())
    }

    pub fn io(path: &std::path::Path, source: std::io::Error) -> Self {
        LabError::Io { path: path.display().to_string(), source }
    }
}
