use std::fmt;

/// Failure of a subcommand, split by who is at fault.
#[derive(Debug)]
pub enum CliError {
    /// Bad arguments or input files. Exit code 1.
    Validation(anyhow::Error),
    /// The inputs were fine but the computation or output failed. Exit code 2.
    Runtime(anyhow::Error),
}

impl CliError {
    pub fn validation(msg: impl fmt::Display) -> Self {
        CliError::Validation(anyhow::anyhow!("{msg}"))
    }

    pub fn runtime(msg: impl fmt::Display) -> Self {
        CliError::Runtime(anyhow::anyhow!("{msg}"))
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 1,
            CliError::Runtime(_) => 2,
        }
    }

    /// Adds a prefix describing where the error happened.
    pub fn context(self, ctx: impl fmt::Display + Send + Sync + 'static) -> Self {
        match self {
            CliError::Validation(e) => CliError::Validation(e.context(ctx)),
            CliError::Runtime(e) => CliError::Runtime(e.context(ctx)),
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (kind, e) = match self {
            CliError::Validation(e) => ("invalid input", e),
            CliError::Runtime(e) => ("runtime failure", e),
        };
        write!(f, "{kind}: {e:#}")
    }
}

impl std::error::Error for CliError {}

/// Errors raised while validating inputs are the caller's fault; the rest
/// are runtime failures.
impl From<sandwich_core::Error> for CliError {
    fn from(e: sandwich_core::Error) -> Self {
        use sandwich_core::Error::*;
        match e {
            InvalidInput(_) | InvalidPool(_) | InvalidDepth(_) | Parse { .. } => {
                CliError::Validation(e.into())
            }
            Depletion { .. } | RangeExhausted { .. } | ZeroLiquidity | Infeasible(_) | Io(_) => {
                CliError::Runtime(e.into())
            }
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
