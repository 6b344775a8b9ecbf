//! Truncated-window log-likelihood and its analytic gradients.
//!
//! For a window `[a, b)` the local log-likelihood is
//!
//! ```text
//! ll = Σ_{(i,τ) ∈ window} log λ_i(τ) − Σ_i ∫_a^b λ_i(t) dt
//! ```
//!
//! where `λ_i(τ)` sees the full history strictly before `τ`. With
//! `G_j = Σ_{τ<a} ∫_{a-τ}^{b-τ} φ + Σ_{a≤τ<b} ∫_0^{b-τ} φ`, the integral
//! collapses to `Δt Σβ + (Σ_i p_i) · (Σ_j G_j q_j)`, and the gradients are
//!
//! ```text
//! ∂β_i = Σ_{τ ∈ T_i ∩ window} 1/λ_i(τ) − Δt
//! ∂p_i = Σ_{τ ∈ T_i ∩ window} u(τ)/λ_i(τ) − Σ_j G_j q_j
//! ∂q_j = Σ_{(i,τ) ∈ window} p_i S_j(τ)/λ_i(τ) − G_j Σ_i p_i
//! ```
//!
//! The first term of `∂q_j` is accumulated by a reverse sweep so the whole
//! evaluation is `O(N·D + I·D)` for `N` events.

use crate::error::{Error, Result};
use crate::numeric::{dot, KahanSum};
use crate::trace::EventLog;

use super::{LatentMatrix, ModelParams};

/// `∫_a^b exp(-δ t) dt = (exp(-δa) − exp(-δb)) / δ`; `b` may be infinite.
pub fn kernel_integral(a: f64, b: f64, delta: f64) -> Result<f64> {
    if !(a <= b) || a < 0.0 {
        return Err(Error::InvalidArgument(format!("kernel integral bounds [{a}, {b}] invalid")));
    }
    if !(delta > 0.0) {
        return Err(Error::InvalidArgument(format!("decay must be positive, got {delta}")));
    }
    Ok((-delta * a).exp() * -(-delta * (b - a)).exp_m1() / delta)
}

/// Training window `[t_theta − Δt, t_theta)` with `Δt = −ln(φ_th)/δ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainWindow {
    pub t_theta: f64,
    pub delta_t: f64,
    pub phi_th: f64,
}

impl TrainWindow {
    pub fn new(t_theta: f64, phi_th: f64, delta: f64) -> Result<Self> {
        if !(phi_th > 0.0 && phi_th < 1.0) {
            return Err(Error::InvalidArgument(format!("phi_th must lie in (0, 1), got {phi_th}")));
        }
        if !(delta > 0.0) {
            return Err(Error::InvalidArgument(format!("decay must be positive, got {delta}")));
        }
        Ok(Self {
            t_theta,
            delta_t: -phi_th.ln() / delta,
            phi_th,
        })
    }

    /// Window of explicit length; `phi_th` is back-derived from `delta`.
    pub fn with_length(t_theta: f64, delta_t: f64, delta: f64) -> Self {
        Self {
            t_theta,
            delta_t,
            phi_th: (-delta * delta_t).exp(),
        }
    }

    /// Window start clamped at the time origin.
    pub fn start(&self) -> f64 {
        (self.t_theta - self.delta_t).max(0.0)
    }

    pub fn end(&self) -> f64 {
        self.t_theta
    }

    /// Effective length `end − start`.
    pub fn length(&self) -> f64 {
        self.end() - self.start()
    }
}

/// Gradient of the local log-likelihood with respect to `θ = {β, p, q}`.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub beta: Vec<f64>,
    pub p: LatentMatrix,
    pub q: LatentMatrix,
}

impl Gradients {
    pub fn zeros(catalog_size: usize, latent_dim: usize) -> Self {
        Self {
            beta: vec![0.0; catalog_size],
            p: LatentMatrix::zeros(catalog_size, latent_dim),
            q: LatentMatrix::zeros(catalog_size, latent_dim),
        }
    }

    pub fn zeros_like(params: &ModelParams) -> Self {
        Self::zeros(params.catalog_size(), params.latent_dim())
    }

    pub fn entries(&self) -> impl Iterator<Item = f64> + '_ {
        self.beta
            .iter()
            .chain(self.p.as_slice())
            .chain(self.q.as_slice())
            .copied()
    }

    pub fn is_finite(&self) -> bool {
        self.entries().all(f64::is_finite)
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.beta.len(), self.p.cols())
    }
}

pub fn window_log_likelihood(params: &ModelParams, log: &EventLog, window: &TrainWindow) -> Result<f64> {
    window_objective(params, log, window, false).map(|(ll, _)| ll)
}

pub fn window_gradients(params: &ModelParams, log: &EventLog, window: &TrainWindow) -> Result<Gradients> {
    window_objective(params, log, window, true).map(|(_, g)| g.expect("gradients requested"))
}

struct WindowEvent {
    time: f64,
    video: usize,
    inv_intensity: f64,
}

/// Log-likelihood and, when `with_gradients`, its gradient in one pass.
pub fn window_objective(
    params: &ModelParams,
    log: &EventLog,
    window: &TrainWindow,
    with_gradients: bool,
) -> Result<(f64, Option<Gradients>)> {
    params.validate()?;
    let n_videos = params.catalog_size();
    if log.catalog_size() > n_videos {
        return Err(Error::InvalidArgument(format!(
            "log catalog {} exceeds parameter catalog {n_videos}",
            log.catalog_size()
        )));
    }
    let d = params.latent_dim();
    let delta = params.delta;
    let (a, b) = (window.start(), window.end());
    let length = window.length();

    // Only events strictly before the window end matter.
    let events: Vec<(usize, f64)> = log
        .events()
        .iter()
        .take_while(|e| e.timestamp < b)
        .map(|e| (e.video_id, e.timestamp))
        .collect();

    let mut grads = with_gradients.then(|| Gradients::zeros(n_videos, d));
    let mut log_sum = KahanSum::new();
    let mut g = vec![0.0; n_videos];
    let mut window_events = Vec::new();

    // Forward sweep: intensities at window events from the strict history.
    let mut s = vec![0.0; n_videos];
    let mut u = vec![0.0; d];
    let mut now = 0.0;
    let mut idx = 0;
    while idx < events.len() {
        let t = events[idx].1;
        let factor = (-delta * (t - now)).exp();
        s.iter_mut().for_each(|v| *v *= factor);
        u.iter_mut().for_each(|v| *v *= factor);
        now = t;
        let group_end = idx + events[idx..].iter().take_while(|e| e.1 == t).count();
        for &(video, time) in &events[idx..group_end] {
            g[video] += if time < a {
                kernel_integral(a - time, b - time, delta)?
            } else {
                kernel_integral(0.0, b - time, delta)?
            };
            if time < a {
                continue;
            }
            let lambda = params.beta[video] + dot(params.p.row(video), &u);
            if !(lambda > 0.0) || !lambda.is_finite() {
                return Err(Error::NonPositiveIntensity {
                    video,
                    time,
                    value: lambda,
                });
            }
            log_sum.add(lambda.ln());
            if let Some(grads) = grads.as_mut() {
                let w = 1.0 / lambda;
                grads.beta[video] += w;
                for (gp, uu) in grads.p.row_mut(video).iter_mut().zip(&u) {
                    *gp += uu * w;
                }
                window_events.push(WindowEvent {
                    time,
                    video,
                    inv_intensity: w,
                });
            }
        }
        for &(video, _) in &events[idx..group_end] {
            s[video] += 1.0;
            for (uu, q) in u.iter_mut().zip(params.q.row(video)) {
                *uu += q;
            }
        }
        idx = group_end;
    }

    let p_sum = params.p.column_sums();
    let mut w_vec = vec![0.0; d];
    for (j, &gj) in g.iter().enumerate() {
        if gj != 0.0 {
            for (w, q) in w_vec.iter_mut().zip(params.q.row(j)) {
                *w += gj * q;
            }
        }
    }
    let beta_sum: f64 = params.beta.iter().sum();
    let integral = length * beta_sum + dot(&p_sum, &w_vec);
    let ll = log_sum.value() - integral;

    let Some(mut grads) = grads else {
        return Ok((ll, None));
    };

    for i in 0..n_videos {
        grads.beta[i] -= length;
        for (gp, w) in grads.p.row_mut(i).iter_mut().zip(&w_vec) {
            *gp -= w;
        }
        for (gq, ps) in grads.q.row_mut(i).iter_mut().zip(&p_sum) {
            *gq -= g[i] * ps;
        }
    }

    // Reverse sweep: acc(t) = Σ_{window events τ > t} p_i e^{-δ(τ-t)} / λ_i(τ).
    let mut acc = vec![0.0; d];
    let mut acc_time = b;
    let mut widx = window_events.len();
    let mut idx = events.len();
    while idx > 0 {
        let t = events[idx - 1].1;
        // Window events strictly later than t join the accumulator.
        while widx > 0 && window_events[widx - 1].time > t {
            let ev = &window_events[widx - 1];
            let factor = (-delta * (acc_time - ev.time)).exp();
            acc.iter_mut().for_each(|v| *v *= factor);
            acc_time = ev.time;
            for (av, p) in acc.iter_mut().zip(params.p.row(ev.video)) {
                *av += p * ev.inv_intensity;
            }
            widx -= 1;
        }
        let factor = (-delta * (acc_time - t)).exp();
        acc.iter_mut().for_each(|v| *v *= factor);
        acc_time = t;
        let group_start = idx - events[..idx].iter().rev().take_while(|e| e.1 == t).count();
        for &(video, _) in &events[group_start..idx] {
            for (gq, av) in grads.q.row_mut(video).iter_mut().zip(&acc) {
                *gq += av;
            }
        }
        idx = group_start;
    }

    Ok((ll, Some(grads)))
}
