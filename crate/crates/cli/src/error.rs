use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration: {0}")]
    Config(String),

    #[error("{context}: {source}")]
    Io {
        context: String,
        source: std::io::Error,
    },

    #[error("{context}: {source}")]
    Numerical {
        context: String,
        source: infolat::Error,
    },
}

impl CliError {
    /// Machine-readable class printed on failure, e.g. `numerical.physicality`.
    pub fn kind(&self) -> String {
        match self {
            CliError::Config(_) => "config".into(),
            CliError::Io { .. } => "io".into(),
            CliError::Numerical { source, .. } => format!("numerical.{}", source.kind()),
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Io { .. } => 3,
            CliError::Numerical { .. } => 4,
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

/// Attaches the module context to core errors.
pub trait Context<T> {
    fn context(self, context: &str) -> CliResult<T>;
}

impl<T> Context<T> for infolat::Result<T> {
    fn context(self, context: &str) -> CliResult<T> {
        self.map_err(|source| match source {
            infolat::Error::Validation(_)
            | infolat::Error::Domain(_)
            | infolat::Error::SiteOutOfRange { .. }
            | infolat::Error::DimensionMismatch { .. } => {
                CliError::Config(format!("{context}: {source}"))
            }
            source => CliError::Numerical {
                context: context.to_string(),
                source,
            },
        })
    }
}
