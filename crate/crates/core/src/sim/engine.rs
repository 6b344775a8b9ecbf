use std::collections::{BTreeMap, BTreeSet};

use rayon::prelude::*;

use crate::cache::{
    baseline_step, bestfit_candidates, sage_candidates, CacheKey, EdgeCache, Policy, PolicyState,
};
use crate::cdp::{correlated_sensitivities, em_sample, global_sensitivity, step_budget, CorrelationState};
use crate::error::Result;
use crate::federation::run_fit_round;
use crate::predictor::{KernelState, ModelParams, TrainWindow};
use crate::rng::{stream, SimRng};
use crate::scheduler::{select_candidates, BoundsEstimator, CandidateSet, PrivacyLedger, ThresholdConfig};
use crate::trace::{partition_by_edge, EventLog};

use super::metrics::{cache_hit_ratio, jaccard_similarity, residual_fractions};
use super::{Bounds, EdgeCounters, FetchRecord, PolicyReport, SimConfig, SimReport};

/// Parameters produced by the federated fit at one update time.
#[derive(Debug, Clone, PartialEq)]
pub struct ScheduledFit {
    pub t_theta: f64,
    pub params: ModelParams,
    pub losses: Vec<f64>,
}

/// Predictor parameters over time. The fit only sees request logs, so one
/// schedule serves every policy and configuration point on the same trace.
#[derive(Debug, Clone, PartialEq)]
pub struct FitSchedule {
    pub initial: ModelParams,
    pub fits: Vec<ScheduledFit>,
}

/// Run a federated fit every `update_interval_hours` up to the end of the
/// test period, each starting from the previous parameters.
pub fn fit_schedule(cfg: &SimConfig, log: &EventLog) -> Result<FitSchedule> {
    cfg.validate()?;
    let initial = ModelParams::uniform(log.catalog_size(), cfg.latent_dim, cfg.delta, cfg.init_value);
    let edge_logs = partition_by_edge(log);
    let mut fits: Vec<ScheduledFit> = Vec::new();
    let mut m = 1u32;
    loop {
        let t_theta = f64::from(m) * cfg.train.update_interval_hours;
        if t_theta >= cfg.test_horizon {
            break;
        }
        let window = TrainWindow::new(t_theta, cfg.phi_th, cfg.delta)?;
        let current = fits.last().map_or(&initial, |f| &f.params);
        let round = run_fit_round(&edge_logs, current, &window, &cfg.train)
            .map_err(|e| e.context(format!("federated fit at t={t_theta}")))?;
        fits.push(ScheduledFit {
            t_theta,
            params: round.params,
            losses: round.losses,
        });
        m += 1;
    }
    Ok(FitSchedule { initial, fits })
}

pub fn run_simulation(cfg: &SimConfig, log: &EventLog) -> Result<SimReport> {
    let schedule = fit_schedule(cfg, log)?;
    run_with_schedule(cfg, log, &schedule)
}

struct EdgeResult {
    counters: EdgeCounters,
    user_js: Vec<f64>,
    residuals: Vec<f64>,
    records: Vec<FetchRecord>,
}

/// Simulate every configured policy on every edge. Edges are independent
/// between fits (the schedule is precomputed), so (policy, edge) pairs run
/// in parallel; each owns its random streams, making the report
/// independent of the worker count.
pub fn run_with_schedule(cfg: &SimConfig, log: &EventLog, schedule: &FitSchedule) -> Result<SimReport> {
    cfg.validate()?;
    let edge_logs = partition_by_edge(log);
    let jobs: Vec<(Policy, usize)> = cfg
        .policies
        .iter()
        .flat_map(|&p| (0..edge_logs.len()).map(move |e| (p, e)))
        .collect();
    let results: Vec<EdgeResult> = jobs
        .par_iter()
        .map(|&(policy, edge)| {
            run_edge(cfg, policy, edge, &edge_logs[edge], schedule)
                .map_err(|e| e.context(format!("policy {policy}, edge {edge}")))
        })
        .collect::<Result<_>>()?;

    let capacity = cfg.capacity(log.catalog_size());
    let mut policies = Vec::with_capacity(cfg.policies.len());
    let mut results = results.into_iter();
    for &policy in &cfg.policies {
        let edges: Vec<EdgeResult> = results.by_ref().take(edge_logs.len()).collect();
        let requests: u64 = edges.iter().map(|e| e.counters.requests).sum();
        let hits: u64 = edges.iter().map(|e| e.counters.hits).sum();
        let js: Vec<f64> = edges.iter().flat_map(|e| e.user_js.iter().copied()).collect();
        let mean_js = if js.is_empty() {
            0.0
        } else {
            js.iter().sum::<f64>() / js.len() as f64
        };
        let mut report = PolicyReport {
            policy,
            capacity_fraction: cfg.capacity_fraction,
            capacity,
            f: cfg.f,
            xi: cfg.xi,
            requests,
            hits,
            chr: cache_hit_ratio(hits, requests).unwrap_or(0.0),
            mean_js,
            users: js.len(),
            edges: Vec::with_capacity(edges.len()),
            residuals: Vec::with_capacity(edges.len()),
            fetch_records: Vec::new(),
        };
        for e in edges {
            report.edges.push(e.counters);
            report.residuals.push(e.residuals);
            report.fetch_records.extend(e.records);
        }
        policies.push(report);
    }
    Ok(SimReport {
        policies,
        fits: schedule.fits.clone(),
    })
}

struct Prefetcher {
    corr: CorrelationState,
    ledger: PrivacyLedger,
    estimator: BoundsEstimator,
    threshold: Option<ThresholdConfig>,
    scheduler_rng: SimRng,
    em_rng: SimRng,
}

impl Prefetcher {
    fn candidates(&mut self, policy: Policy, lambda: &[f64]) -> CandidateSet {
        match policy {
            Policy::Ppvf => {
                let cfg = self.threshold.expect("bounds frozen before the test period");
                select_candidates(lambda, &mut self.ledger, &cfg, &mut self.scheduler_rng)
            }
            Policy::Sage => sage_candidates(&mut self.ledger, &mut self.scheduler_rng),
            Policy::Bestfit => bestfit_candidates(lambda, &mut self.ledger),
            Policy::Mav | Policy::Lru | Policy::Lfu => CandidateSet::default(),
        }
    }

    /// Candidate selection followed by the exponential mechanism; returns
    /// the drawn videos and the budget charged.
    fn prefetch(
        &mut self,
        policy: Policy,
        params: &ModelParams,
        kernel: &KernelState,
        lambda: &[f64],
        f: usize,
    ) -> Result<(Vec<usize>, f64)> {
        let candidates = self.candidates(policy, lambda);
        if candidates.is_empty() {
            return Ok((Vec::new(), 0.0));
        }
        let videos = candidates.videos();
        self.corr.register_pairs(videos);
        let sensitivities = correlated_sensitivities(params, kernel, &self.corr, videos)?;
        let sensitivity = global_sensitivity(&sensitivities)?;
        let costs: Vec<f64> = videos.iter().map(|&v| self.ledger.cost(v)).collect();
        let utilities: Vec<f64> = videos.iter().map(|&v| lambda[v]).collect();
        let decision = em_sample(
            videos,
            &utilities,
            step_budget(&costs, f),
            sensitivity,
            f,
            &mut self.em_rng,
        )?;
        Ok((decision.chosen, decision.charged))
    }
}

fn run_edge(cfg: &SimConfig, policy: Policy, edge: usize, log: &EventLog, schedule: &FitSchedule) -> Result<EdgeResult> {
    let catalog = schedule.initial.catalog_size();
    let mut params = &schedule.initial;
    let mut next_fit = 0;
    let mut kernel = KernelState::for_params(params);
    let mut state = PolicyState::new(policy, catalog, cfg.slot_hours)?;
    let mut cache = EdgeCache::new(cfg.capacity(catalog))?;
    let ledger = PrivacyLedger::uniform(catalog, cfg.xi, cfg.epsilon, cfg.f)?;
    let mut prefetcher = policy.prefetches().then(|| Prefetcher {
        corr: CorrelationState::new(catalog),
        ledger: ledger.clone(),
        estimator: BoundsEstimator::new(cfg.bounds_floor),
        threshold: match cfg.bounds {
            Bounds::Fixed(t) => Some(t),
            Bounds::Auto => None,
        },
        scheduler_rng: stream(cfg.seed, &format!("scheduler/{policy}"), edge as u64),
        em_rng: stream(cfg.seed, &format!("em/{policy}"), edge as u64),
    });
    let fallback = ThresholdConfig::new(cfg.bounds_floor, cfg.bounds_floor)?;

    let mut counters = EdgeCounters {
        edge,
        ..EdgeCounters::default()
    };
    let mut profiles: BTreeMap<u64, BTreeSet<usize>> = BTreeMap::new();
    let mut exposed: BTreeSet<usize> = BTreeSet::new();
    let mut records = Vec::new();

    for (idx, event) in log.events().iter().enumerate() {
        let t = event.timestamp;
        if t >= cfg.test_horizon {
            break;
        }
        let video = event.video_id;
        while let Some(fit) = schedule.fits.get(next_fit).filter(|f| f.t_theta <= t) {
            params = &fit.params;
            if prefetcher.is_some() {
                kernel.decay_to(fit.t_theta);
                kernel.rebuild(params);
            }
            next_fit += 1;
        }
        let testing = t >= cfg.init_horizon;

        let (hit, fetched, prefetched, evicted) = match prefetcher.as_mut() {
            None => {
                let out = baseline_step(&mut state, &mut cache, event)?;
                (out.hit, out.fetched, Vec::new(), out.evicted.len())
            }
            Some(pf) => {
                if testing && pf.threshold.is_none() {
                    pf.threshold = Some(pf.estimator.freeze(fallback));
                }
                kernel.decay_to(t);
                let lambda = kernel.intensities(params);
                pf.corr.update(&lambda);
                if !testing && matches!(cfg.bounds, Bounds::Auto) {
                    pf.estimator.observe_all(&lambda, pf.ledger.costs());
                }
                state.record_access(video, t);
                let hit = cache.lookup(video);
                let mut fetched = Vec::new();
                let mut prefetched = Vec::new();
                let mut evicted = 0;
                if !hit {
                    if testing {
                        let (chosen, charged) = pf
                            .prefetch(policy, params, &kernel, &lambda, cfg.f)
                            .map_err(|e| e.context(format!("event {idx} at t={t}")))?;
                        counters.charged += charged;
                        prefetched = chosen;
                    }
                    fetched.push(video);
                    fetched.extend(prefetched.iter().copied().filter(|&v| v != video));
                    evicted = cache.admit(&fetched, |v| CacheKey::score(lambda[v])).len();
                }
                kernel
                    .record(params, video, t)
                    .map_err(|e| e.context(format!("event {idx}")))?;
                (hit, fetched, prefetched, evicted)
            }
        };

        if !testing {
            continue;
        }
        counters.requests += 1;
        if hit {
            counters.hits += 1;
        } else {
            counters.misses += 1;
            counters.fetched += fetched.len() as u64;
            counters.prefetched += prefetched.len() as u64;
            counters.evictions += evicted as u64;
            exposed.extend(fetched.iter().copied());
            if cfg.record_fetches {
                records.push(FetchRecord {
                    edge,
                    step: counters.misses,
                    viewed: video,
                    prefetched,
                    fetched,
                });
            }
        }
        profiles.entry(event.user_id).or_default().insert(video);
    }

    let user_js = profiles.values().map(|p| jaccard_similarity(p, &exposed)).collect();
    let residuals = match &prefetcher {
        Some(pf) => residual_fractions(&pf.ledger),
        None => residual_fractions(&ledger),
    };
    Ok(EdgeResult {
        counters,
        user_js,
        residuals,
        records,
    })
}
