//! Sums of Kempner and Irwin series: `1/n` summed over the positive integers
//! whose base-`b` digits contain a prescribed number of occurrences of
//! chosen digits.
//!
//! ```
//! use irwin::{irwin_sum, ConditionSet};
//!
//! let no_nines = ConditionSet::single(10, 9, 0).unwrap();
//! let r = irwin_sum(&no_nines, 10).unwrap();
//! assert_eq!(r.requested_sum.to_string(), "22.9206766193");
//! ```

pub mod cli;
pub mod error;
pub mod fixed;
pub mod model;
pub mod oracle;
pub mod power_sums;
pub mod recurrence;
pub mod summation;

pub use error::{IrwinError, Result};
pub use fixed::Fixed;
pub use model::{Condition, ConditionSet, OccurrenceVector, PrecisionPlan, SeriesKind};
pub use power_sums::{direct_sum, PowerSumTable};
pub use recurrence::advance;
pub use summation::{
    at_most_sum, irwin_sum, partial_sum, threshold_search, Engine, SumResult, Termination, Threshold,
    ThresholdResult,
};
