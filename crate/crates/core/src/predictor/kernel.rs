use crate::error::{Error, Result};
use crate::numeric::dot;

use super::ModelParams;

/// Incrementally maintained decayed event sums for one edge.
///
/// `s[j] = Σ_{τ ∈ T_j, τ ≤ last_update} exp(-δ (last_update - τ))` and
/// `u = Σ_j q_j s[j]`. Decaying to a later time scales both by the same
/// factor, so `u` stays consistent without touching `q`.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelState {
    s: Vec<f64>,
    u: Vec<f64>,
    last_update: f64,
    delta: f64,
}

impl KernelState {
    pub fn new(catalog_size: usize, latent_dim: usize, delta: f64) -> Self {
        Self {
            s: vec![0.0; catalog_size],
            u: vec![0.0; latent_dim],
            last_update: 0.0,
            delta,
        }
    }

    pub fn for_params(params: &ModelParams) -> Self {
        Self::new(params.catalog_size(), params.latent_dim(), params.delta)
    }

    /// Build a state at `time` from raw `(video, timestamp)` events, all of
    /// which must satisfy `timestamp ≤ time`.
    pub fn from_events(params: &ModelParams, time: f64, events: &[(usize, f64)]) -> Result<Self> {
        let mut state = Self::for_params(params);
        let mut sorted = events.to_vec();
        sorted.sort_by(|a, b| a.1.total_cmp(&b.1));
        state.advance(params, time, &sorted)?;
        Ok(state)
    }

    pub fn s(&self) -> &[f64] {
        &self.s
    }

    pub fn u(&self) -> &[f64] {
        &self.u
    }

    pub fn last_update(&self) -> f64 {
        self.last_update
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    /// Decay to `to_time` and fold in `new_events`, which must be sorted and
    /// lie in `[last_update, to_time]`.
    pub fn advance(&mut self, params: &ModelParams, to_time: f64, new_events: &[(usize, f64)]) -> Result<()> {
        if to_time < self.last_update {
            return Err(Error::OutOfOrder {
                time: to_time,
                state_time: self.last_update,
            });
        }
        let mut prev = self.last_update;
        for &(video, time) in new_events {
            if time < prev || time > to_time {
                return Err(Error::OutOfOrder { time, state_time: prev });
            }
            if video >= self.s.len() {
                return Err(Error::InvalidArgument(format!("video {video} outside catalog")));
            }
            prev = time;
        }
        self.decay_to(to_time);
        for &(video, time) in new_events {
            let weight = (-self.delta * (to_time - time)).exp();
            self.s[video] += weight;
            for (u, q) in self.u.iter_mut().zip(params.q.row(video)) {
                *u += q * weight;
            }
        }
        Ok(())
    }

    /// Advance to `time` and record one request for `video` at that time.
    pub fn record(&mut self, params: &ModelParams, video: usize, time: f64) -> Result<()> {
        self.advance(params, time, &[(video, time)])
    }

    pub fn decay_to(&mut self, to_time: f64) {
        let dt = to_time - self.last_update;
        if dt > 0.0 {
            let factor = (-self.delta * dt).exp();
            self.s.iter_mut().for_each(|v| *v *= factor);
            self.u.iter_mut().for_each(|v| *v *= factor);
        }
        self.last_update = self.last_update.max(to_time);
    }

    /// Recompute `u` from `s`; required after `q` changes.
    pub fn rebuild(&mut self, params: &ModelParams) {
        self.u = vec![0.0; params.latent_dim()];
        for (j, &s) in self.s.iter().enumerate() {
            if s != 0.0 {
                for (u, q) in self.u.iter_mut().zip(params.q.row(j)) {
                    *u += q * s;
                }
            }
        }
    }

    /// `λ_i = β_i + p_i · u` at `last_update`.
    pub fn intensity(&self, params: &ModelParams, video: usize) -> f64 {
        params.beta[video] + dot(params.p.row(video), &self.u)
    }

    /// Intensity of every video, `O(I·D)`.
    pub fn intensities(&self, params: &ModelParams) -> Vec<f64> {
        (0..params.catalog_size())
            .map(|i| self.intensity(params, i))
            .collect()
    }
}
