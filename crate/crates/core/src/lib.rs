//! Privacy-preserving video prefetching for edge caches.
//!
//! Edge devices predict per-video request intensity with a low-rank
//! mutual-exciting point process trained by federated gradient descent,
//! admit prefetch candidates online under per-video privacy budgets with a
//! threshold rule, and hide the real request among candidates drawn by an
//! exponential mechanism whose sensitivity accounts for correlation between
//! videos. [`sim`] replays a request trace through the whole pipeline and
//! against the LRU, LFU, MAV, SAGE and BESTFIT baselines.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod cache;
pub mod cdp;
pub mod cli;
pub mod error;
pub mod federation;
pub mod numeric;
pub mod predictor;
pub mod rng;
pub mod scheduler;
pub mod sim;
pub mod trace;

pub use cache::Policy;
pub use error::{Error, Result};
pub use predictor::{KernelState, ModelParams, TrainWindow};
pub use scheduler::{CandidateSet, PrivacyLedger, ThresholdConfig};
pub use sim::{run_simulation, SimConfig, SimReport};
pub use trace::{EventLog, RequestEvent};
