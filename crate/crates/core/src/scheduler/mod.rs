//! Online privacy-budget allocation.
//!
//! Each video carries a budget `ξ` and a per-selection cost `ε_i`. A video is
//! admitted to the prefetch candidate set only if its utility per unit cost
//! beats a threshold that rises with the fraction of its budget already
//! spent, and only while the remaining budget strictly exceeds `ε_i`.

mod cr;
mod ledger;
mod oracle;
mod select;
mod threshold;

pub use cr::{empirical_cr, random_instance, CrInstance, CrReport, CrSuite};
pub use ledger::PrivacyLedger;
pub use oracle::{offline_optimum, MAX_ORACLE_VARIABLES};
pub use select::{select_candidates, CandidateSet};
pub use threshold::{threshold, BoundsEstimator, ThresholdConfig};
