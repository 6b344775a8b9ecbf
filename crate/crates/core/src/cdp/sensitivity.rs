use crate::error::{Error, Result};
use crate::predictor::{KernelState, ModelParams};

use super::CorrelationState;

/// Correlation weight used by the sensitivity. Before two steps have been
/// observed the correlation is undefined and videos are treated as
/// independent.
fn weight(corr: &CorrelationState, i: usize, j: usize) -> Result<f64> {
    if corr.steps() < 2 {
        return Ok(if i == j { 1.0 } else { 0.0 });
    }
    Ok(corr.correlation_degree(i, j)?.abs())
}

/// `Δλ_i = Σ_{j∈A} |Ψ_ij| · (p_i·q_j) · S_j`: how far removing all of video
/// `j`'s history moves `i`'s intensity, weighted by their correlation.
pub fn video_sensitivity(
    params: &ModelParams,
    kernel: &KernelState,
    corr: &CorrelationState,
    candidates: &[usize],
    i: usize,
) -> Result<f64> {
    let s = kernel.s();
    let mut total = 0.0;
    for &j in candidates {
        if s[j] == 0.0 {
            continue;
        }
        let w = weight(corr, i, j)?;
        if w != 0.0 {
            total += w * params.influence(i, j) * s[j];
        }
    }
    Ok(total)
}

/// Sensitivities for every candidate, in candidate order.
pub fn correlated_sensitivities(
    params: &ModelParams,
    kernel: &KernelState,
    corr: &CorrelationState,
    candidates: &[usize],
) -> Result<Vec<f64>> {
    candidates
        .iter()
        .map(|&i| video_sensitivity(params, kernel, corr, candidates, i))
        .collect()
}

/// Largest per-video sensitivity.
pub fn global_sensitivity(sensitivities: &[f64]) -> Result<f64> {
    if sensitivities.is_empty() {
        return Err(Error::EmptyCandidates);
    }
    Ok(sensitivities.iter().copied().fold(0.0, f64::max))
}
