use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error("numeric failure: {0}")]
    Numeric(String),
    #[error("acceptance failure: {0}")]
    Acceptance(String),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl CliError {
    #[must_use]
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Usage(_) => 2,
            Self::Numeric(_) => 3,
            Self::Acceptance(_) => 4,
            Self::Io(_) | Self::Json(_) => 1,
        }
    }
}

macro_rules! numeric_from {
    ($($t:ty),*) => {
        $(impl From<$t> for CliError {
            fn from(e: $t) -> Self {
                Self::Numeric(e.to_string())
            }
        })*
    };
}

numeric_from!(
    stabflow::swt::SwtError,
    stabflow::spectrum::SpectrumError,
    stabflow::flow::FlowError,
    stabflow::soundness::SoundnessError
);

impl From<stabflow::constructors::ConstructError> for CliError {
    fn from(e: stabflow::constructors::ConstructError) -> Self {
        Self::Usage(e.to_string())
    }
}

impl From<stabflow::code::CodeError> for CliError {
    fn from(e: stabflow::code::CodeError) -> Self {
        Self::Usage(e.to_string())
    }
}

impl From<stabflow::alist::AlistError> for CliError {
    fn from(e: stabflow::alist::AlistError) -> Self {
        Self::Usage(e.to_string())
    }
}
