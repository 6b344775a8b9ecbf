//! Mutual-exciting point-process utility predictor.
//!
//! Intensity of video `i` at time `t`:
//!
//! ```text
//! λ_i(t) = β_i + Σ_j (p_i · q_j) Σ_{τ ∈ T_j, τ < t} exp(-δ (t - τ))
//! ```
//!
//! The influence matrix `p qᵀ` is never formed; [`KernelState`] caches the
//! decayed per-video sums `S_j` and the projection `u = Σ_j q_j S_j` so a
//! full sweep over the catalog costs `O(I·D)`. The sum over `j` includes
//! `j = i` (self-excitation).

mod kernel;
mod likelihood;
mod params;

pub use kernel::KernelState;
pub use likelihood::{
    kernel_integral, window_gradients, window_log_likelihood, window_objective, Gradients,
    TrainWindow,
};
pub use params::{LatentMatrix, ModelParams, POSITIVITY_FLOOR};
