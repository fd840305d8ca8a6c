use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid exponent profile: {0}")]
    InvalidProfile(String),

    #[error("enumeration budget exceeded: {what} needs {needed} items, budget is {budget}")]
    BudgetExceeded {
        what: &'static str,
        needed: f64,
        budget: u64,
    },

    #[error("argument out of range: {0}")]
    OutOfRange(String),

    #[error("exponent {exponent} exceeds the configured maximum {max}")]
    ExponentTooLarge { exponent: u32, max: u32 },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("integer overflow in {0}")]
    Overflow(&'static str),

    #[error("cannot parse {what}: {input:?}")]
    Parse { what: &'static str, input: String },
}

impl Error {
    pub fn is_budget(&self) -> bool {
        matches!(self, Error::BudgetExceeded { .. })
    }
}

/// Fails with [`Error::BudgetExceeded`] when `needed` exceeds `budget`.
pub(crate) fn check_budget(what: &'static str, needed: f64, budget: u64) -> Result<()> {
    if needed > budget as f64 {
        Err(Error::BudgetExceeded {
            what,
            needed,
            budget,
        })
    } else {
        Ok(())
    }
}
