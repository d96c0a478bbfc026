use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid `{field}`: {reason}")]
    Validation { field: String, reason: String },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("i/o: {0}")]
    Io(String),

    #[error("verification failed")]
    VerifyFailed,
}

impl CliError {
    pub fn field(field: impl Into<String>, reason: impl Into<String>) -> Self {
        CliError::Validation {
            field: field.into(),
            reason: reason.into(),
        }
    }

    pub fn missing(field: &str) -> Self {
        Self::field(field, "required for this command")
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation { .. } => 2,
            CliError::Numerical(_) => 3,
            CliError::Io(_) | CliError::VerifyFailed => 1,
        }
    }
}

impl From<fracdim::Error> for CliError {
    fn from(e: fracdim::Error) -> Self {
        use fracdim::Error as E;
        match &e {
            _ if e.is_numerical() => CliError::Numerical(e.to_string()),
            E::InvalidParameter { name, reason } => CliError::field(*name, reason.clone()),
            E::Io(_) | E::Csv(_) | E::Json(_) => CliError::Io(e.to_string()),
            _ => CliError::field("input", e.to_string()),
        }
    }
}
