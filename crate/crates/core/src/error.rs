use thiserror::Error;

/// Errors produced while validating inputs or running a summation.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum IrwinError {
    #[error("base {base} must be in the range from 2 through 10")]
    BaseOutOfRange { base: i64 },

    #[error("at least one digit condition is required")]
    NoConditions,

    #[error("{count} conditions given but base {base} has only {base} digits")]
    TooManyConditions { count: usize, base: u32 },

    #[error("digit {digit} is not valid in base {base}")]
    DigitOutOfRange { digit: i64, base: u32 },

    #[error("digit {digit} is listed more than once")]
    DuplicateDigit { digit: u32 },

    #[error("count {count} for digit {digit} must be 0 or greater")]
    NegativeCount { digit: u32, count: i64 },

    #[error("digit list has {digits} entries but count list has {counts}")]
    LengthMismatch { digits: usize, counts: usize },

    #[error("occurrence index {index} is outside the table of {cells} cells")]
    IndexOutOfBounds { index: usize, cells: usize },

    #[error("occurrence vector {counts:?} exceeds the condition bounds {bounds:?}")]
    VectorOutOfBounds { counts: Vec<u32>, bounds: Vec<u32> },

    #[error("occurrence table with {cells} cells exceeds the supported size")]
    TableTooLarge { cells: u128 },

    #[error("direct summation over {digit_length}-digit numbers in base {base} exceeds the enumeration budget")]
    RangeTooLarge { base: u32, digit_length: u32 },

    #[error("could not find a power count for {decimals} decimals (last estimate {estimate})")]
    EstimateFailed { decimals: u32, estimate: usize },

    #[error("no convergence within {digits} digit-lengths; partial sum so far {partial_sum}")]
    DigitCapReached { digits: u32, partial_sum: String },

    #[error("threshold {threshold} is greater than the sum of the entire series ({total})")]
    ThresholdAboveTotal { threshold: String, total: String },

    #[error("not enough accuracy to place threshold {threshold}: {reason}; supply more threshold digits (e.g. \"{threshold}`25\")")]
    InsufficientAccuracy { threshold: String, reason: String },

    #[error("invalid threshold {0:?}: expected a positive decimal such as \"23\" or \"23.0442`25\"")]
    InvalidThreshold(String),

    #[error("comparison needs a limit that is a power of the base; {limit} is not a power of {base}")]
    LimitNotPower { limit: u128, base: u32 },

    #[error("enumeration limit {limit} exceeds the oracle budget of {budget}")]
    LimitTooLarge { limit: u128, budget: u64 },
}

impl IrwinError {
    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        use IrwinError::*;
        match self {
            BaseOutOfRange { .. }
            | NoConditions
            | TooManyConditions { .. }
            | DigitOutOfRange { .. }
            | DuplicateDigit { .. }
            | NegativeCount { .. }
            | LengthMismatch { .. }
            | IndexOutOfBounds { .. }
            | VectorOutOfBounds { .. }
            | InvalidThreshold(_)
            | LimitNotPower { .. } => 2,
            ThresholdAboveTotal { .. } | InsufficientAccuracy { .. } | EstimateFailed { .. } => 3,
            DigitCapReached { .. } => 4,
            TableTooLarge { .. } | RangeTooLarge { .. } | LimitTooLarge { .. } => 5,
        }
    }
}

pub type Result<T> = std::result::Result<T, IrwinError>;
