use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};

use crate::error::{Error, Result};

fn exact(v: f64) -> BigRational {
    BigRational::from_float(v).expect("finite value")
}

/// Per-edge privacy budget accounting.
///
/// Each admission of video `i` commits exactly `ε_i`; consumption is kept as
/// an integer admission count, so the budget constraint `count_i · ε_i ≤ ξ`
/// is decided in exact rational arithmetic rather than by accumulating
/// floats.
#[derive(Debug, Clone, PartialEq)]
pub struct PrivacyLedger {
    xi: f64,
    costs: Vec<f64>,
    counts: Vec<u32>,
    /// Admissions allowed by the strict rule `ε_i < (1 − γ_i) ξ`.
    caps: Vec<u32>,
    capacity: usize,
}

impl PrivacyLedger {
    pub fn new(xi: f64, costs: Vec<f64>, capacity: usize) -> Result<Self> {
        if !(xi >= 0.0 && xi.is_finite()) {
            return Err(Error::InvalidArgument(format!("total budget must be non-negative, got {xi}")));
        }
        if costs.iter().any(|c| !(*c > 0.0 && c.is_finite())) {
            return Err(Error::InvalidArgument("per-selection costs must be positive".into()));
        }
        let xi_exact = exact(xi);
        let caps = costs
            .iter()
            .map(|&c| {
                // Largest m with m·ε < ξ, i.e. ceil(ξ/ε) − 1.
                let ratio = &xi_exact / exact(c);
                let m = ratio.ceil().to_integer() - BigInt::from(1);
                m.to_i64().unwrap_or(i64::MAX).clamp(0, i64::from(u32::MAX)) as u32
            })
            .collect();
        Ok(Self {
            xi,
            counts: vec![0; costs.len()],
            costs,
            caps,
            capacity,
        })
    }

    pub fn uniform(catalog_size: usize, xi: f64, cost: f64, capacity: usize) -> Result<Self> {
        Self::new(xi, vec![cost; catalog_size], capacity)
    }

    pub fn xi(&self) -> f64 {
        self.xi
    }

    pub fn costs(&self) -> &[f64] {
        &self.costs
    }

    pub fn cost(&self, video: usize) -> f64 {
        self.costs[video]
    }

    /// Prefetch capacity `f` per step.
    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn catalog_size(&self) -> usize {
        self.costs.len()
    }

    pub fn admissions(&self, video: usize) -> u32 {
        self.counts[video]
    }

    /// Consumed fraction `γ_i` of the budget.
    pub fn gamma(&self, video: usize) -> f64 {
        if self.xi == 0.0 {
            return 1.0;
        }
        (f64::from(self.counts[video]) * self.costs[video] / self.xi).min(1.0)
    }

    /// Remaining fraction `1 − γ_i`.
    pub fn residual_fraction(&self, video: usize) -> f64 {
        1.0 - self.gamma(video)
    }

    /// Whether `ε_i < (1 − γ_i) ξ` holds exactly.
    pub fn can_afford(&self, video: usize) -> bool {
        self.counts[video] < self.caps[video]
    }

    /// Commit one selection of `video`; false when unaffordable.
    pub fn commit(&mut self, video: usize) -> bool {
        if !self.can_afford(video) {
            return false;
        }
        self.counts[video] += 1;
        true
    }

    pub fn consumed(&self, video: usize) -> f64 {
        f64::from(self.counts[video]) * self.costs[video]
    }

    /// Check `count_i · ε_i ≤ ξ` for every video in exact arithmetic.
    pub fn budget_respected(&self) -> bool {
        let xi = exact(self.xi);
        self.counts.iter().zip(&self.costs).all(|(&n, &c)| {
            let spent = exact(c) * BigRational::from_integer(BigInt::from(n));
            spent <= xi && !(spent < BigRational::zero())
        })
    }
}
