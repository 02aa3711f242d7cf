use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid config: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] randcrit_core::Error),
    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: std::io::Error,
    },
    #[error("output validation failed: {0}")]
    Validation(String),
    #[error("bad input artifact: {0}")]
    Input(String),
}

#[derive(Serialize)]
struct ErrorBody<'a> {
    kind: &'a str,
    message: String,
}

#[derive(Serialize)]
struct ErrorDoc<'a> {
    error: ErrorBody<'a>,
}

impl CliError {
    pub fn config(msg: impl Into<String>) -> Self {
        CliError::Config(msg.into())
    }

    pub fn io(context: impl Into<String>, source: std::io::Error) -> Self {
        CliError::Io {
            context: context.into(),
            source,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Config(_) => "invalid_config",
            CliError::Core(randcrit_core::Error::InvalidParameter(_))
            | CliError::Core(randcrit_core::Error::InvalidRegion(_))
            | CliError::Core(randcrit_core::Error::InvalidDegree(_))
            | CliError::Core(randcrit_core::Error::VarianceOverflow(_))
            | CliError::Core(randcrit_core::Error::OutsideFundamentalDomain)
            | CliError::Core(randcrit_core::Error::Unsupported(_)) => "invalid_config",
            CliError::Core(_) => "numerical",
            CliError::Io { .. } => "io",
            CliError::Validation(_) => "validation",
            CliError::Input(_) => "input",
        }
    }

    /// Process exit status: 2 for configuration problems, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        if self.kind() == "invalid_config" {
            2
        } else {
            1
        }
    }

    /// One-line machine-readable form for stderr.
    pub fn to_json(&self) -> String {
        serde_json::to_string(&ErrorDoc {
            error: ErrorBody {
                kind: self.kind(),
                message: self.to_string(),
            },
        })
        .expect("error serializes")
    }
}
