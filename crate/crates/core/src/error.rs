use thiserror::Error;

use crate::amm::SwapQuote;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("invalid pool: {0}")]
    InvalidPool(String),

    #[error("invalid depth {0}: must be finite and positive")]
    InvalidDepth(f64),

    /// Output would drain the out-side reserve.
    #[error("swap output {output} would deplete reserve {reserve}")]
    Depletion { output: f64, reserve: f64 },

    /// All liquidity in the swap direction was consumed before the input ran out.
    /// `partial` holds what was filled.
    #[error(
        "liquidity exhausted after {} tick(s): filled {} of {requested}",
        partial.ticks_crossed,
        partial.amount_in
    )]
    RangeExhausted { partial: SwapQuote, requested: f64 },

    #[error("active tick has zero liquidity")]
    ZeroLiquidity,

    #[error("infeasible: {0}")]
    Infeasible(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(err: std::io::Error) -> Self {
        Error::Io(err.to_string())
    }
}

pub(crate) fn ensure_finite_non_negative(name: &str, value: f64) -> Result<()> {
    if value.is_finite() && value >= 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!(
            "{name} must be finite and non-negative, got {value}"
        )))
    }
}

pub(crate) fn ensure_fee(fee: f64) -> Result<()> {
    if fee.is_finite() && (0.0..1.0).contains(&fee) {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!("fee must lie in [0, 1), got {fee}")))
    }
}
