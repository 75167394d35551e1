use thiserror::Error;

pub const EXIT_CONFIG: i32 = 3;
pub const EXIT_NUMERIC: i32 = 4;
pub const EXIT_IO: i32 = 5;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CliError {
    #[error("config error: {field}: {reason}")]
    Config { field: String, reason: String },
    #[error("numeric error: {0}")]
    Numeric(String),
    #[error("I/O error: {0}")]
    Io(String),
}

impl CliError {
    pub fn config(field: impl Into<String>, reason: impl Into<String>) -> Self {
        CliError::Config {
            field: field.into(),
            reason: reason.into(),
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config { .. } => EXIT_CONFIG,
            CliError::Numeric(_) => EXIT_NUMERIC,
            CliError::Io(_) => EXIT_IO,
        }
    }
}

impl From<nbiot_rach::Error> for CliError {
    fn from(e: nbiot_rach::Error) -> Self {
        match e {
            nbiot_rach::Error::Config { field, reason } => CliError::config(field, reason),
            nbiot_rach::Error::Domain(msg) => CliError::config("domain", msg),
            e @ nbiot_rach::Error::Numeric { .. } => CliError::Numeric(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}
