//! Empirical check of the competitive ratio `1 + ln(U/L)` of the threshold
//! rule against the exact offline optimum.

use rand::Rng;

use crate::error::{Error, Result};
use crate::rng;

use super::{offline_optimum, select_candidates, PrivacyLedger, ThresholdConfig};

/// One online allocation instance: per-step utilities, a fresh ledger and
/// the ratio bounds known to the online rule.
#[derive(Debug, Clone)]
pub struct CrInstance {
    pub utilities: Vec<Vec<f64>>,
    pub ledger: PrivacyLedger,
    pub bounds: ThresholdConfig,
}

/// Parameters of the randomized instance family.
#[derive(Debug, Clone, PartialEq)]
pub struct CrSuite {
    pub catalog_size: usize,
    pub steps: usize,
    /// `ξ / ε`.
    pub budget_units: f64,
    pub cost: f64,
    /// `U / L`.
    pub ratio_spread: f64,
    pub lower: f64,
    /// Prefetch capacity per step; `None` means the whole catalog.
    pub capacity: Option<usize>,
    pub instances: usize,
    /// Allowed relative excess over `1 + ln(U/L)`.
    pub slack: f64,
}

impl Default for CrSuite {
    fn default() -> Self {
        Self {
            catalog_size: 4,
            steps: 6,
            budget_units: 20.0,
            cost: 1.0,
            ratio_spread: 50.0,
            lower: 1.0,
            capacity: None,
            instances: 200,
            slack: 0.15,
        }
    }
}

/// Smallest ratio margin above `L` used when `U = L`; the admission test is
/// strict, so a ratio exactly at `L` would never be selected.
const DEGENERATE_MARGIN: f64 = 1e-12;

/// Draw an instance whose ratios `λ/ε` are log-uniform on `(L, U]`.
pub fn random_instance<R: Rng + ?Sized>(rng: &mut R, suite: &CrSuite) -> Result<CrInstance> {
    if !(suite.ratio_spread >= 1.0) {
        return Err(Error::InvalidArgument(format!("ratio spread U/L must be >= 1, got {}", suite.ratio_spread)));
    }
    let bounds = ThresholdConfig::new(suite.lower, suite.lower * suite.ratio_spread)?;
    let xi = suite.budget_units * suite.cost;
    let capacity = suite.capacity.unwrap_or(suite.catalog_size);
    let ledger = PrivacyLedger::uniform(suite.catalog_size, xi, suite.cost, capacity)?;
    let log_spread = suite.ratio_spread.ln();
    let utilities = (0..suite.steps)
        .map(|_| {
            (0..suite.catalog_size)
                .map(|_| {
                    let u = 1.0 - rng.gen::<f64>();
                    let ratio = (suite.lower * (u * log_spread).exp()).max(suite.lower * (1.0 + DEGENERATE_MARGIN));
                    ratio * suite.cost
                })
                .collect()
        })
        .collect();
    Ok(CrInstance {
        utilities,
        ledger,
        bounds,
    })
}

impl CrSuite {
    pub fn generate(&self, seed: u64) -> Result<Vec<CrInstance>> {
        let mut rng = rng::stream(seed, "cr-instances", 0);
        (0..self.instances).map(|_| random_instance(&mut rng, self)).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CrReport {
    pub instances: usize,
    /// Largest `OPT/ALG` observed.
    pub worst_ratio: f64,
    /// `1 + ln(U/L)` of the instance with the largest normalized ratio.
    pub bound: f64,
    /// Largest `(OPT/ALG) / (1 + ln(U/L))`.
    pub worst_normalized: f64,
    pub slack: f64,
    pub violations: usize,
}

impl CrReport {
    pub fn passed(&self) -> bool {
        self.violations == 0
    }

    pub fn limit(&self) -> f64 {
        self.bound * (1.0 + self.slack)
    }
}

/// Run the threshold rule and the offline oracle on every instance.
pub fn empirical_cr(instances: &[CrInstance], seed: u64, slack: f64) -> Result<CrReport> {
    let mut report = CrReport {
        instances: instances.len(),
        worst_ratio: 1.0,
        bound: 1.0,
        worst_normalized: 0.0,
        slack,
        violations: 0,
    };
    for (idx, inst) in instances.iter().enumerate() {
        let xi = inst.ledger.xi();
        if inst.ledger.costs().iter().any(|&c| c > xi / 20.0) {
            return Err(Error::InvalidArgument(format!(
                "instance {idx}: costs must be at most ξ/20 for the small-cost regime"
            )));
        }
        let opt = offline_optimum(&inst.utilities, &inst.ledger)?;
        let mut ledger = inst.ledger.clone();
        let mut rng = rng::stream(seed, "scheduler", idx as u64);
        let alg: f64 = inst
            .utilities
            .iter()
            .map(|row| {
                let set = select_candidates(row, &mut ledger, &inst.bounds, &mut rng);
                set.videos().iter().map(|&v| row[v]).sum::<f64>()
            })
            .sum();
        let ratio = if alg > 0.0 {
            opt / alg
        } else if opt > 0.0 {
            f64::INFINITY
        } else {
            1.0
        };
        let bound = inst.bounds.competitive_ratio();
        let normalized = ratio / bound;
        report.worst_ratio = report.worst_ratio.max(ratio);
        if normalized > report.worst_normalized {
            report.worst_normalized = normalized;
            report.bound = bound;
        }
        if ratio > bound * (1.0 + slack) {
            report.violations += 1;
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn equal_bounds_match_optimum() {
        let suite = CrSuite {
            ratio_spread: 1.0,
            instances: 20,
            ..CrSuite::default()
        };
        let report = empirical_cr(&suite.generate(4).unwrap(), 4, 0.15).unwrap();
        assert_eq!(report.bound, 1.0);
        assert!((report.worst_ratio - 1.0).abs() < 1e-12);
        assert!(report.passed());
    }

    #[test]
    fn single_step_capacity_slack_is_optimal() {
        let suite = CrSuite {
            steps: 1,
            instances: 50,
            ..CrSuite::default()
        };
        let report = empirical_cr(&suite.generate(11).unwrap(), 11, 0.0).unwrap();
        assert!((report.worst_ratio - 1.0).abs() < 1e-12);
    }

    #[test]
    fn large_costs_violate_assumption() {
        let suite = CrSuite {
            budget_units: 5.0,
            instances: 1,
            ..CrSuite::default()
        };
        assert!(empirical_cr(&suite.generate(1).unwrap(), 1, 0.15).is_err());
    }
}
