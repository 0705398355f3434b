use std::process::ExitCode;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("numerical failure: {0}")]
    Numerical(#[from] rmt_entangle::Error),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("{} check(s) failed: {}", .0.len(), .0.join(", "))]
    ChecksFailed(Vec<String>),
}

impl CliError {
    pub fn exit_code(&self) -> ExitCode {
        ExitCode::from(match self {
            Self::Io(_) => 1,
            Self::Config(_) => 2,
            Self::Numerical(_) => 3,
            Self::ChecksFailed(_) => 4,
        })
    }
}
