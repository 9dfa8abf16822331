use beamexpand_core::Error as CoreError;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{0}")]
    Usage(String),

    #[error("config line {line}: {message}")]
    Config { line: usize, message: String },

    #[error("{context}: {source}")]
    Run {
        context: String,
        #[source]
        source: CoreError,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn run(context: impl Into<String>, source: CoreError) -> Self {
        Error::Run {
            context: context.into(),
            source,
        }
    }

    /// 2 for physics-domain failures (a repulsive trap, non-positive
    /// inputs), 1 for everything else.
    pub fn exit_code(&self) -> u8 {
        match self {
            Error::Run { source, .. } if source.is_physics_domain() => 2,
            _ => 1,
        }
    }
}

pub(crate) trait Context<T> {
    fn context(self, what: impl FnOnce() -> String) -> Result<T>;
}

impl<T> Context<T> for std::result::Result<T, CoreError> {
    fn context(self, what: impl FnOnce() -> String) -> Result<T> {
        self.map_err(|e| Error::run(what(), e))
    }
}
