use crate::cache::Policy;
use crate::error::{Error, Result};
use crate::federation::TrainConfig;
use crate::scheduler::ThresholdConfig;

/// Source of the threshold bounds `L` and `U`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Bounds {
    /// Running extremes of `λ/ε` over the initialization period, frozen at
    /// its end (per edge).
    Auto,
    Fixed(ThresholdConfig),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    /// End of the initialization period (hours); earlier requests only warm
    /// state.
    pub init_horizon: f64,
    /// End of the test period; later requests are ignored.
    pub test_horizon: f64,
    /// Per-video budget `ξ` on every edge.
    pub xi: f64,
    /// Per-selection cost `ε`.
    pub epsilon: f64,
    /// Prefetch capacity per step.
    pub f: usize,
    /// Cache size as a fraction of the catalog.
    pub capacity_fraction: f64,
    pub bounds: Bounds,
    /// Lower clamp for automatically estimated `L`.
    pub bounds_floor: f64,
    pub train: TrainConfig,
    pub latent_dim: usize,
    pub delta: f64,
    /// Kernel cut-off defining the training window length.
    pub phi_th: f64,
    /// Initial value of every model parameter.
    pub init_value: f64,
    /// MAV slot length (hours).
    pub slot_hours: f64,
    pub policies: Vec<Policy>,
    pub seed: u64,
    /// Keep one [`super::FetchRecord`] per miss in the report.
    pub record_fetches: bool,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            init_horizon: 240.0,
            test_horizon: 720.0,
            xi: 15.0,
            epsilon: 1.0,
            f: 4,
            capacity_fraction: 0.01,
            bounds: Bounds::Auto,
            bounds_floor: 1e-6,
            train: TrainConfig::default(),
            latent_dim: 10,
            delta: 0.01,
            phi_th: (-0.48f64).exp(),
            init_value: 1.0,
            slot_hours: 1.0,
            policies: Policy::ALL.to_vec(),
            seed: 1,
            record_fetches: false,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidArgument(msg));
        if !(self.init_horizon > 0.0 && self.init_horizon < self.test_horizon && self.test_horizon.is_finite()) {
            return bad(format!(
                "need 0 < init_horizon < test_horizon, got {} and {}",
                self.init_horizon, self.test_horizon
            ));
        }
        if !(self.xi >= 0.0 && self.xi.is_finite()) {
            return bad(format!("xi must be finite and >= 0, got {}", self.xi));
        }
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return bad(format!("epsilon must be positive, got {}", self.epsilon));
        }
        if self.f == 0 {
            return bad("f must be at least 1".into());
        }
        if !(self.capacity_fraction > 0.0 && self.capacity_fraction <= 1.0) {
            return bad(format!("capacity fraction must be in (0, 1], got {}", self.capacity_fraction));
        }
        if !(self.bounds_floor > 0.0) {
            return bad("bounds floor must be positive".into());
        }
        if self.latent_dim == 0 {
            return bad("latent dimension must be at least 1".into());
        }
        if !(self.delta > 0.0 && self.delta.is_finite()) {
            return bad(format!("delta must be positive, got {}", self.delta));
        }
        if !(self.phi_th > 0.0 && self.phi_th < 1.0) {
            return bad(format!("phi_th must be in (0, 1), got {}", self.phi_th));
        }
        if !(self.init_value > 0.0 && self.init_value.is_finite()) {
            return bad(format!("init_value must be positive, got {}", self.init_value));
        }
        if !(self.slot_hours > 0.0) {
            return bad("slot length must be positive".into());
        }
        if self.policies.is_empty() {
            return bad("no policies selected".into());
        }
        self.train.validate()
    }

    /// Cache size in videos for a catalog of `catalog_size`.
    pub fn capacity(&self, catalog_size: usize) -> usize {
        ((self.capacity_fraction * catalog_size as f64).round() as usize).max(1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid() {
        let cfg = SimConfig::default();
        cfg.validate().unwrap();
        assert_eq!(cfg.capacity(500), 5);
        assert_eq!(cfg.capacity(20), 1);
    }

    #[test]
    fn horizons_checked() {
        let cfg = SimConfig {
            init_horizon: 720.0,
            ..SimConfig::default()
        };
        assert!(cfg.validate().is_err());
    }
}
