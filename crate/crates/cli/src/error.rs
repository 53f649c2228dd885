use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("i/o error: {0}")]
    Io(String),
    #[error("report does not re-derive from its tables: {0}")]
    Revalidation(String),
    #[error(transparent)]
    Core(#[from] muband_core::Error),
}

pub const EXIT_PARSE: i32 = 64;
pub const EXIT_IO: i32 = 74;
pub const EXIT_REVALIDATION: i32 = 76;

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Parse(_) => EXIT_PARSE,
            CliError::Io(_) => EXIT_IO,
            CliError::Revalidation(_) => EXIT_REVALIDATION,
            CliError::Core(e) => e.exit_code(),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
