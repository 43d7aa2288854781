use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Model(#[from] gkdv_waves::Error),
    #[error("no cycle: {0}")]
    NoCycle(gkdv_waves::Error),
    #[error("{0}")]
    Usage(String),
    #[error("{failed} check(s) failed")]
    ChecksFailed { failed: usize },
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("could not move output into place: {0}")]
    Persist(#[from] tempfile::PersistError),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl CliError {
    /// 2 for usage errors, as clap does, and 1 for everything else.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            _ => 1,
        }
    }
}
