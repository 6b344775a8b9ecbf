//! Independent reference implementations used as test oracles.
#![allow(dead_code)]

use rand::Rng;

use ppvf_core::predictor::{LatentMatrix, ModelParams, TrainWindow};
use ppvf_core::rng::stream;
use ppvf_core::trace::{EventLog, RequestEvent};

/// Random positive parameters.
pub fn random_params<R: Rng>(rng: &mut R, videos: usize, dim: usize, delta: f64) -> ModelParams {
    let beta = (0..videos).map(|_| rng.gen_range(0.05..1.0)).collect();
    let mut p = LatentMatrix::zeros(videos, dim);
    let mut q = LatentMatrix::zeros(videos, dim);
    for v in p.as_mut_slice().iter_mut().chain(q.as_mut_slice()) {
        *v = rng.gen_range(0.02..0.6);
    }
    ModelParams::new(beta, p, q, delta).unwrap()
}

/// Random single-edge log on `[0, horizon)`; a share of timestamps is
/// rounded to whole hours so that simultaneous events occur.
pub fn random_log<R: Rng>(rng: &mut R, videos: usize, events: usize, horizon: f64) -> EventLog {
    let evs = (0..events)
        .map(|_| {
            let mut t = rng.gen_range(0.0..horizon);
            if rng.gen_bool(0.3) {
                t = t.floor();
            }
            RequestEvent::new(0, rng.gen_range(0..4), rng.gen_range(0..videos), t)
        })
        .collect();
    EventLog::new(evs, videos, 1, horizon).unwrap()
}

pub fn rng(name: &str, index: u64) -> ppvf_core::rng::SimRng {
    stream(0x7e57, name, index)
}

/// `λ_i(t)` as the raw double sum over events selected by `include`.
pub fn brute_intensity(params: &ModelParams, log: &EventLog, video: usize, t: f64, include: impl Fn(f64) -> bool) -> f64 {
    let mut total = params.beta[video];
    for e in log.events() {
        if include(e.timestamp) {
            total += params.influence(video, e.video_id) * (-params.delta * (t - e.timestamp)).exp();
        }
    }
    total
}

fn legendre_nodes(n: usize) -> Vec<(f64, f64)> {
    (0..n)
        .map(|k| {
            let mut x = (std::f64::consts::PI * (k as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (mut p0, mut p1) = (1.0, x);
                for m in 2..=n {
                    let m = m as f64;
                    let p2 = ((2.0 * m - 1.0) * x * p1 - (m - 1.0) * p0) / m;
                    p0 = p1;
                    p1 = p2;
                }
                dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
                let step = p1 / dp;
                x -= step;
                if step.abs() < 1e-16 {
                    break;
                }
            }
            (x, 2.0 / ((1.0 - x * x) * dp * dp))
        })
        .collect()
}

/// Composite Gauss–Legendre quadrature of `f` over `[a, b]`, split at
/// `breaks` (where `f` may jump).
pub fn quadrature(f: impl Fn(f64) -> f64, a: f64, b: f64, breaks: &[f64]) -> f64 {
    let nodes = legendre_nodes(16);
    let mut cuts: Vec<f64> = breaks.iter().copied().filter(|&x| x > a && x < b).collect();
    cuts.push(a);
    cuts.push(b);
    cuts.sort_by(|x, y| x.total_cmp(y));
    cuts.dedup();
    let mut total = 0.0;
    for w in cuts.windows(2) {
        // Sub-divide long pieces so the exponentials stay well resolved.
        let pieces = ((w[1] - w[0]) / 2.0).ceil().max(1.0) as usize;
        let h = (w[1] - w[0]) / pieces as f64;
        for k in 0..pieces {
            let (lo, hi) = (w[0] + k as f64 * h, w[0] + (k + 1) as f64 * h);
            let (mid, half) = ((lo + hi) / 2.0, (hi - lo) / 2.0);
            total += nodes.iter().map(|&(x, wt)| wt * f(mid + half * x)).sum::<f64>() * half;
        }
    }
    total
}

/// Window log-likelihood by direct evaluation: strict-history intensities
/// at window events, numerical integral of every intensity.
pub fn reference_log_likelihood(params: &ModelParams, log: &EventLog, window: &TrainWindow) -> f64 {
    let (a, b) = (window.start(), window.end());
    let mut total = 0.0;
    for e in log.events() {
        if e.timestamp >= a && e.timestamp < b {
            total += brute_intensity(params, log, e.video_id, e.timestamp, |s| s < e.timestamp).ln();
        }
    }
    let breaks: Vec<f64> = log.events().iter().map(|e| e.timestamp).collect();
    for i in 0..params.catalog_size() {
        total -= quadrature(|t| brute_intensity(params, log, i, t, |s| s < t), a, b, &breaks);
    }
    total
}

/// Average ranks (ties share the mean rank).
pub fn ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut out = vec![0.0; values.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        let mean = (i + j) as f64 / 2.0 + 1.0;
        for &idx in &order[i..=j] {
            out[idx] = mean;
        }
        i = j + 1;
    }
    out
}

pub fn pearson(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let (mx, my) = (x.iter().sum::<f64>() / n, y.iter().sum::<f64>() / n);
    let cov: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let vx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let vy: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
    cov / (vx.sqrt() * vy.sqrt())
}

pub fn spearman(x: &[f64], y: &[f64]) -> f64 {
    pearson(&ranks(x), &ranks(y))
}

pub fn rel_close(a: f64, b: f64, rel: f64, abs: f64) -> bool {
    (a - b).abs() <= abs.max(rel * a.abs().max(b.abs()))
}
