use rand::Rng;

use crate::error::{Error, Result};
use crate::numeric::log_sum_exp;

/// Videos drawn by the exponential mechanism for one prefetch step.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PrefetchDecision {
    pub chosen: Vec<usize>,
    /// Budget spent: number of draws times the per-draw `ε`.
    pub charged: f64,
}

/// Per-draw budget `(1/f)·Σ_{i∈A} ε_i`.
pub fn step_budget(costs: &[f64], f: usize) -> f64 {
    if f == 0 {
        return 0.0;
    }
    costs.iter().sum::<f64>() / f as f64
}

fn scores(utilities: &[f64], eps_step: f64, sensitivity: f64) -> Vec<f64> {
    if sensitivity <= 0.0 || eps_step == 0.0 {
        // No information can leak through the score: sample uniformly.
        return vec![0.0; utilities.len()];
    }
    let scale = eps_step / (2.0 * sensitivity);
    utilities.iter().map(|&u| scale * u).collect()
}

/// Single-draw probabilities `∝ exp(ε·λ_i / (2Δ))`.
pub fn em_probabilities(utilities: &[f64], eps_step: f64, sensitivity: f64) -> Vec<f64> {
    let s = scores(utilities, eps_step, sensitivity);
    let max = s.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let w: Vec<f64> = s.iter().map(|&x| (x - max).exp()).collect();
    let total: f64 = w.iter().sum();
    w.into_iter().map(|x| x / total).collect()
}

/// Draw `min(f, |A|)` distinct candidates, each from the exponential
/// mechanism over those not yet drawn. `utilities` is aligned with
/// `candidates`.
pub fn em_sample<R: Rng + ?Sized>(
    candidates: &[usize],
    utilities: &[f64],
    eps_step: f64,
    sensitivity: f64,
    f: usize,
    rng: &mut R,
) -> Result<PrefetchDecision> {
    if candidates.len() != utilities.len() {
        return Err(Error::InvalidArgument(format!(
            "{} candidates but {} utilities",
            candidates.len(),
            utilities.len()
        )));
    }
    if !(eps_step >= 0.0 && eps_step.is_finite()) {
        return Err(Error::InvalidArgument(format!("per-draw budget {eps_step} must be finite and >= 0")));
    }
    let mut pool: Vec<(usize, f64)> = candidates
        .iter()
        .copied()
        .zip(scores(utilities, eps_step, sensitivity))
        .collect();
    let draws = f.min(pool.len());
    let mut chosen = Vec::with_capacity(draws);
    for _ in 0..draws {
        let max = pool.iter().map(|&(_, s)| s).fold(f64::NEG_INFINITY, f64::max);
        let weights: Vec<f64> = pool.iter().map(|&(_, s)| (s - max).exp()).collect();
        let total: f64 = weights.iter().sum();
        let mut target = rng.gen::<f64>() * total;
        let mut pick = pool.len() - 1;
        for (idx, w) in weights.iter().enumerate() {
            if target < *w {
                pick = idx;
                break;
            }
            target -= w;
        }
        chosen.push(pool.swap_remove(pick).0);
    }
    Ok(PrefetchDecision { chosen, charged: draws as f64 * eps_step })
}

/// Largest `|log P_i − log P'_i|` between the single-draw distributions
/// under two utility vectors that differ by at most `sensitivity` per entry.
pub fn dp_ratio_check(utilities: &[f64], adjacent: &[f64], eps_step: f64, sensitivity: f64) -> Result<f64> {
    if utilities.len() != adjacent.len() {
        return Err(Error::InvalidArgument("utility vectors differ in length".into()));
    }
    let gap = utilities
        .iter()
        .zip(adjacent)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    if gap > sensitivity * (1.0 + 1e-12) {
        return Err(Error::PremiseViolated { gap, sensitivity });
    }
    if utilities.is_empty() {
        return Ok(0.0);
    }
    let s = scores(utilities, eps_step, sensitivity);
    let s_adj = scores(adjacent, eps_step, sensitivity);
    let (z, z_adj) = (log_sum_exp(&s), log_sum_exp(&s_adj));
    Ok(s.iter()
        .zip(&s_adj)
        .map(|(a, b)| ((a - z) - (b - z_adj)).abs())
        .fold(0.0, f64::max))
}
