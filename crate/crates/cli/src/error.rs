use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),

    #[error("numeric error in {op}: {source}")]
    Numeric {
        op: String,
        #[source]
        source: longbond_core::Error,
    },

    #[error("non-finite value in column `{column}` of {op} output")]
    NonFinite { op: &'static str, column: String },

    #[error("cannot write output: {0}")]
    Output(#[from] std::io::Error),
}

impl CliError {
    pub fn numeric(op: impl Into<String>, source: longbond_core::Error) -> Self {
        Self::Numeric {
            op: op.into(),
            source,
        }
    }

    /// 2 for configuration and I/O problems, 3 for numerical failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Config(_) | Self::Output(_) => 2,
            Self::Numeric { .. } | Self::NonFinite { .. } => 3,
        }
    }
}
