//! Correlated differential privacy for prefetch requests.
//!
//! Pearson correlation between videos is tracked incrementally over the
//! utility vectors of successive prefetch steps; it weights how much
//! deleting one video's history moves another's utility, and the largest
//! such correlated sensitivity calibrates an exponential mechanism over the
//! candidate set.

mod correlation;
mod mechanism;
mod sensitivity;

pub use correlation::{CorrelationState, DENSE_LIMIT};
pub use mechanism::{dp_ratio_check, em_probabilities, em_sample, step_budget, PrefetchDecision};
pub use sensitivity::{correlated_sensitivities, global_sensitivity, video_sensitivity};
