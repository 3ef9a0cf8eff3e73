use std::path::PathBuf;

/// Everything that can stop a job. Budget failures from the library exit
/// with code 3, everything else with code 2.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{}: invalid JSON at line {line}, column {column}: {message}", path.display())]
    Json { path: PathBuf, line: usize, column: usize, message: String },
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] zariski_core::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(e) if e.is_budget() => 3,
            _ => 2,
        }
    }

    pub fn json(path: &std::path::Path, e: &serde_json::Error) -> Self {
        // serde_json appends its own " at line .. column .."; keep the bare message
        let full = e.to_string();
        let message = match full.rfind(" at line ") {
            Some(i) => full[..i].to_string(),
            None => full,
        };
        CliError::Json { path: path.to_path_buf(), line: e.line(), column: e.column(), message }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
