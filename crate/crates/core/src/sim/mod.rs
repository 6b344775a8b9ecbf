//! Trace-driven simulation of edge devices running a caching/prefetching
//! policy, with periodic federated refits of the shared predictor.

mod config;
mod engine;
mod metrics;
mod report;

pub use config::{Bounds, SimConfig};
pub use engine::{fit_schedule, run_simulation, run_with_schedule, FitSchedule, ScheduledFit};
pub use metrics::{budget_cdf, cache_hit_ratio, jaccard_similarity, residual_fractions, CDF_POINTS};
pub use report::{
    budget_cdf_csv, chr_csv, fl_loss_csv, js_csv, EdgeCounters, FetchRecord, PolicyReport, SimReport,
};
