use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::scheduler::PrivacyLedger;

/// Grid size of [`budget_cdf`] on `[0, 1]`.
pub const CDF_POINTS: usize = 101;

/// `|A ∩ B| / |A ∪ B|`, 0 when both are empty.
pub fn jaccard_similarity(a: &BTreeSet<usize>, b: &BTreeSet<usize>) -> f64 {
    let inter = a.intersection(b).count();
    let union = a.len() + b.len() - inter;
    if union == 0 {
        0.0
    } else {
        inter as f64 / union as f64
    }
}

pub fn cache_hit_ratio(hits: u64, requests: u64) -> Result<f64> {
    if requests == 0 {
        return Err(Error::NoRequests);
    }
    Ok(hits as f64 / requests as f64)
}

pub fn residual_fractions(ledger: &PrivacyLedger) -> Vec<f64> {
    (0..ledger.catalog_size()).map(|v| ledger.residual_fraction(v)).collect()
}

/// CDF over videos of the residual budget fraction averaged across edges,
/// evaluated at `x = 0, 0.01, …, 1`.
pub fn budget_cdf(per_edge: &[Vec<f64>]) -> Vec<(f64, f64)> {
    let videos = per_edge.iter().map(Vec::len).max().unwrap_or(0);
    let mut mean: Vec<f64> = (0..videos)
        .map(|v| {
            let vals: Vec<f64> = per_edge.iter().filter_map(|e| e.get(v).copied()).collect();
            vals.iter().sum::<f64>() / vals.len() as f64
        })
        .collect();
    mean.sort_by(|a, b| a.total_cmp(b));
    (0..CDF_POINTS)
        .map(|k| {
            let x = k as f64 / (CDF_POINTS - 1) as f64;
            let below = mean.partition_point(|&r| r <= x + 1e-12);
            let cdf = if videos == 0 { 1.0 } else { below as f64 / videos as f64 };
            (x, cdf)
        })
        .collect()
}
