//! Federated estimation of the predictor parameters.
//!
//! Edges evaluate their local window likelihood and its gradient; only those
//! numbers cross to the coordinator, which minimises
//!
//! ```text
//! L(θ) = −Σ_e ll_e(θ) + ρ_β/2 ‖β‖² + ρ_p/2 ‖p‖² + ρ_q/2 ‖q‖²
//! ```
//!
//! by projected gradient descent, `θ ← max(θ − η ∂L/∂θ, floor)` with
//! `∂L/∂θ = ρ_θ θ − Σ_e ∂ll_e/∂θ`, halving `η` whenever a step would raise `L`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::order_free_sum;
use crate::predictor::{window_objective, Gradients, ModelParams, TrainWindow};
use crate::trace::EventLog;

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub rho_beta: f64,
    pub rho_p: f64,
    pub rho_q: f64,
    pub learning_rate: f64,
    pub max_iters: usize,
    /// Stop once `|ΔL| / |L|` falls below this.
    pub tolerance: f64,
    /// Spacing of the update times `t_θ`, hours.
    pub update_interval_hours: f64,
    /// Halvings of the learning rate tried before a round gives up.
    pub max_backtracks: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            rho_beta: 0.01,
            rho_p: 0.01,
            rho_q: 0.01,
            learning_rate: 0.05,
            max_iters: 20,
            tolerance: 1e-6,
            update_interval_hours: 48.0,
            max_backtracks: 40,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let rhos = [self.rho_beta, self.rho_p, self.rho_q];
        if rhos.iter().any(|r| !(*r >= 0.0 && r.is_finite())) {
            return Err(Error::InvalidArgument("regularization weights must be non-negative".into()));
        }
        if !(self.learning_rate > 0.0) || !(self.tolerance > 0.0) || !(self.update_interval_hours > 0.0) {
            return Err(Error::InvalidArgument(
                "learning rate, tolerance and update interval must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// What an edge exports after local training: a likelihood value and its
/// gradient. Carries no event data.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalContribution {
    pub ll: f64,
    pub grads: Gradients,
}

/// Local likelihood and gradients of one edge's log.
pub fn local_round(edge_log: &EventLog, params: &ModelParams, window: &TrainWindow) -> Result<LocalContribution> {
    let (ll, grads) = window_objective(params, edge_log, window, true)?;
    Ok(LocalContribution {
        ll,
        grads: grads.expect("gradients requested"),
    })
}

/// Aggregated global loss and its gradient at the current parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct Aggregate {
    pub loss: f64,
    /// `∂L/∂θ`.
    pub gradient: Gradients,
}

fn sum_entry(contributions: &[LocalContribution], pick: impl Fn(&Gradients) -> f64) -> f64 {
    let mut values: Vec<f64> = contributions.iter().map(|c| pick(&c.grads)).collect();
    order_free_sum(&mut values)
}

/// Sum the contributions (order-independent) and form `L` and `∂L/∂θ`.
pub fn aggregate(params: &ModelParams, contributions: &[LocalContribution], cfg: &TrainConfig) -> Result<Aggregate> {
    if contributions.is_empty() {
        return Err(Error::InvalidArgument("no contributions to aggregate".into()));
    }
    let shape = (params.catalog_size(), params.latent_dim());
    for (edge, c) in contributions.iter().enumerate() {
        if c.grads.shape() != shape {
            return Err(Error::InvalidArgument(format!("contribution {edge} has shape {:?}, expected {shape:?}", c.grads.shape())));
        }
        if !c.ll.is_finite() || !c.grads.is_finite() {
            return Err(Error::NonFinite { edge });
        }
    }
    let mut lls: Vec<f64> = contributions.iter().map(|c| c.ll).collect();
    let ll_total = order_free_sum(&mut lls);
    let sq = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>();
    let loss = -ll_total
        + 0.5 * cfg.rho_beta * sq(&params.beta)
        + 0.5 * cfg.rho_p * sq(params.p.as_slice())
        + 0.5 * cfg.rho_q * sq(params.q.as_slice());

    let mut gradient = Gradients::zeros_like(params);
    for (i, g) in gradient.beta.iter_mut().enumerate() {
        *g = cfg.rho_beta * params.beta[i] - sum_entry(contributions, |c| c.beta[i]);
    }
    let gp = gradient.p.as_mut_slice();
    for (k, g) in gp.iter_mut().enumerate() {
        *g = cfg.rho_p * params.p.as_slice()[k] - sum_entry(contributions, |c| c.p.as_slice()[k]);
    }
    let gq = gradient.q.as_mut_slice();
    for (k, g) in gq.iter_mut().enumerate() {
        *g = cfg.rho_q * params.q.as_slice()[k] - sum_entry(contributions, |c| c.q.as_slice()[k]);
    }
    Ok(Aggregate { loss, gradient })
}

/// `θ − η ∂L/∂θ`, projected onto the positivity floor.
pub fn apply_step(params: &ModelParams, gradient: &Gradients, learning_rate: f64) -> ModelParams {
    let mut next = params.clone();
    for (v, g) in next.beta.iter_mut().zip(&gradient.beta) {
        *v -= learning_rate * g;
    }
    for (v, g) in next.p.as_mut_slice().iter_mut().zip(gradient.p.as_slice()) {
        *v -= learning_rate * g;
    }
    for (v, g) in next.q.as_mut_slice().iter_mut().zip(gradient.q.as_slice()) {
        *v -= learning_rate * g;
    }
    next.clamp_positive();
    next
}

/// One coordinator update. Returns the new parameters and the loss at the
/// incoming parameters.
pub fn aggregate_and_step(
    params: &ModelParams,
    contributions: &[LocalContribution],
    cfg: &TrainConfig,
) -> Result<(ModelParams, f64)> {
    let agg = aggregate(params, contributions, cfg)?;
    Ok((apply_step(params, &agg.gradient, cfg.learning_rate), agg.loss))
}

/// Result of fitting at one update time.
#[derive(Debug, Clone, PartialEq)]
pub struct FitRound {
    pub params: ModelParams,
    /// Global loss before the first step and after every accepted step.
    pub losses: Vec<f64>,
}

fn collect_contributions(edge_logs: &[EventLog], params: &ModelParams, window: &TrainWindow) -> Result<Vec<LocalContribution>> {
    edge_logs
        .par_iter()
        .enumerate()
        .map(|(edge, log)| local_round(log, params, window).map_err(|e| e.context(format!("edge {edge}"))))
        .collect()
}

/// Iterate local rounds and coordinator steps until `max_iters` or relative
/// loss change below `tolerance`. Accepted steps never raise the loss.
pub fn run_fit_round(
    edge_logs: &[EventLog],
    params: &ModelParams,
    window: &TrainWindow,
    cfg: &TrainConfig,
) -> Result<FitRound> {
    cfg.validate()?;
    let mut current = params.clone();
    let mut losses = Vec::new();
    if cfg.max_iters == 0 || edge_logs.is_empty() {
        return Ok(FitRound { params: current, losses });
    }
    let mut agg = aggregate(&current, &collect_contributions(edge_logs, &current, window)?, cfg)?;
    losses.push(agg.loss);
    'outer: for _ in 0..cfg.max_iters {
        let mut rate = cfg.learning_rate;
        for _ in 0..=cfg.max_backtracks {
            let trial = apply_step(&current, &agg.gradient, rate);
            let trial_agg = aggregate(&trial, &collect_contributions(edge_logs, &trial, window)?, cfg)?;
            if trial_agg.loss <= agg.loss {
                let change = (agg.loss - trial_agg.loss).abs() / agg.loss.abs().max(f64::MIN_POSITIVE);
                current = trial;
                agg = trial_agg;
                losses.push(agg.loss);
                if change < cfg.tolerance {
                    break 'outer;
                }
                continue 'outer;
            }
            rate *= 0.5;
        }
        // No descent found at any tried rate.
        break;
    }
    Ok(FitRound { params: current, losses })
}

/// Sidecar record written next to a parameter checkpoint.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitRecord {
    pub round: usize,
    pub t_theta: f64,
    pub loss: f64,
}
