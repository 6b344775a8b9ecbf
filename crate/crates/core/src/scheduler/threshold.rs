use crate::error::{Error, Result};

/// Bounds `L ≤ λ/ε ≤ U` of the utility-per-cost ratio.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThresholdConfig {
    lower: f64,
    upper: f64,
}

impl ThresholdConfig {
    pub fn new(lower: f64, upper: f64) -> Result<Self> {
        if !(lower > 0.0 && lower <= upper && upper.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "threshold bounds need 0 < L <= U, got L = {lower}, U = {upper}"
            )));
        }
        Ok(Self { lower, upper })
    }

    pub fn lower(&self) -> f64 {
        self.lower
    }

    pub fn upper(&self) -> f64 {
        self.upper
    }

    /// `1 + ln(U/L)`, the competitive ratio of the threshold rule.
    pub fn competitive_ratio(&self) -> f64 {
        1.0 + (self.upper / self.lower).ln()
    }

    /// Knee `Γ = 1 / (1 + ln(U/L))` below which the threshold is flat at `L`.
    pub fn knee(&self) -> f64 {
        1.0 / self.competitive_ratio()
    }

    /// `Θ(γ)`: `L` on `[0, Γ]`, `(U e / L)^γ · L / e` above.
    pub fn threshold(&self, gamma: f64) -> f64 {
        if gamma <= self.knee() {
            self.lower
        } else {
            // (Ue/L)^γ L/e = L exp(γ (1 + ln(U/L)) − 1)
            self.lower * (gamma * self.competitive_ratio() - 1.0).exp()
        }
    }

    /// Same decisions for utilities multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        Self::new(self.lower * factor, self.upper * factor)
    }
}

pub fn threshold(gamma: f64, cfg: &ThresholdConfig) -> f64 {
    cfg.threshold(gamma)
}

/// Running extremes of observed `λ/ε` ratios, frozen into a
/// [`ThresholdConfig`] after warm-up.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundsEstimator {
    min: f64,
    max: f64,
    floor: f64,
}

impl BoundsEstimator {
    /// `floor` keeps `L` strictly positive when some utilities are ~0.
    pub fn new(floor: f64) -> Self {
        Self {
            min: f64::INFINITY,
            max: 0.0,
            floor,
        }
    }

    pub fn observe(&mut self, ratio: f64) {
        if ratio.is_finite() {
            self.min = self.min.min(ratio);
            self.max = self.max.max(ratio);
        }
    }

    pub fn observe_all(&mut self, utilities: &[f64], costs: &[f64]) {
        for (u, c) in utilities.iter().zip(costs) {
            self.observe(u / c);
        }
    }

    pub fn is_empty(&self) -> bool {
        self.min > self.max
    }

    /// Frozen bounds; `fallback` when nothing was observed.
    pub fn freeze(&self, fallback: ThresholdConfig) -> ThresholdConfig {
        if self.is_empty() {
            return fallback;
        }
        let lower = self.min.max(self.floor);
        let upper = self.max.max(lower);
        ThresholdConfig::new(lower, upper).unwrap_or(fallback)
    }
}
