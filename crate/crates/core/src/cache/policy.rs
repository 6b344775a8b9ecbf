use rand::Rng;

use crate::error::{Error, Result};
use crate::scheduler::{CandidateSet, PrivacyLedger};
use crate::trace::RequestEvent;

use super::{CacheKey, EdgeCache, Policy};

/// Weight on the previous average in the MAV recurrence.
pub const MAV_WEIGHT: f64 = 0.9;

/// Per-slot exponentially weighted request average:
/// `m ← w·m + (1 − w)·(requests in the closed slot)`.
#[derive(Debug, Clone, PartialEq)]
pub struct MovingAverage {
    weight: f64,
    slot_hours: f64,
    slot: i64,
    pending: Vec<u32>,
    touched: Vec<usize>,
    values: Vec<f64>,
}

impl MovingAverage {
    pub fn new(catalog_size: usize, weight: f64, slot_hours: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&weight) || !(slot_hours > 0.0 && slot_hours.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "moving average needs weight in [0,1] and positive slot length, got {weight} and {slot_hours}"
            )));
        }
        Ok(Self {
            weight,
            slot_hours,
            slot: 0,
            pending: vec![0; catalog_size],
            touched: Vec::new(),
            values: vec![0.0; catalog_size],
        })
    }

    /// Close every slot that ends at or before `time`.
    pub fn advance_to(&mut self, time: f64) {
        let slot = (time / self.slot_hours).floor() as i64;
        if slot <= self.slot {
            return;
        }
        let w = self.weight;
        for v in &mut self.values {
            *v *= w;
        }
        for &video in &self.touched {
            self.values[video] += (1.0 - w) * f64::from(self.pending[video]);
            self.pending[video] = 0;
        }
        self.touched.clear();
        let idle = slot - self.slot - 1;
        if idle > 0 {
            let decay = w.powi(idle.min(i64::from(i32::MAX)) as i32);
            for v in &mut self.values {
                *v *= decay;
            }
        }
        self.slot = slot;
    }

    pub fn record(&mut self, video: usize, time: f64) {
        self.advance_to(time);
        if self.pending[video] == 0 {
            self.touched.push(video);
        }
        self.pending[video] += 1;
    }

    pub fn value(&self, video: usize) -> f64 {
        self.values[video]
    }
}

/// Bookkeeping shared by all policies on one edge.
#[derive(Debug, Clone, PartialEq)]
pub struct PolicyState {
    policy: Policy,
    clock: u64,
    last_access: Vec<u64>,
    counts: Vec<u64>,
    mav: MovingAverage,
}

/// What one request did to an eviction-only cache.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct StepOutcome {
    pub hit: bool,
    pub fetched: Vec<usize>,
    pub evicted: Vec<usize>,
}

impl PolicyState {
    pub fn new(policy: Policy, catalog_size: usize, slot_hours: f64) -> Result<Self> {
        Ok(Self {
            policy,
            clock: 0,
            last_access: vec![0; catalog_size],
            counts: vec![0; catalog_size],
            mav: MovingAverage::new(catalog_size, MAV_WEIGHT, slot_hours)?,
        })
    }

    pub fn policy(&self) -> Policy {
        self.policy
    }

    pub fn count(&self, video: usize) -> u64 {
        self.counts[video]
    }

    pub fn moving_average(&self) -> &MovingAverage {
        &self.mav
    }

    pub fn record_access(&mut self, video: usize, time: f64) {
        self.clock += 1;
        self.last_access[video] = self.clock;
        self.counts[video] += 1;
        self.mav.record(video, time);
    }

    /// Cache ranking key of `video`; `utilities` is required for the
    /// utility-ranked policies.
    pub fn key(&self, video: usize, utilities: Option<&[f64]>) -> CacheKey {
        match self.policy {
            Policy::Lru => CacheKey {
                score: 0.0,
                recency: self.last_access[video],
            },
            Policy::Lfu => CacheKey {
                score: self.counts[video] as f64,
                recency: self.last_access[video],
            },
            Policy::Mav => CacheKey::score(self.mav.value(video)),
            Policy::Ppvf | Policy::Sage | Policy::Bestfit => {
                CacheKey::score(utilities.expect("utility-ranked policy needs utilities")[video])
            }
        }
    }
}

/// Serve one request under an eviction-only policy (LRU, LFU, MAV): the
/// viewed video is fetched on a miss and offered to the cache.
pub fn baseline_step(state: &mut PolicyState, cache: &mut EdgeCache, event: &RequestEvent) -> Result<StepOutcome> {
    if state.policy.prefetches() {
        return Err(Error::InvalidArgument(format!(
            "policy {} prefetches and is driven by the simulation pipeline",
            state.policy
        )));
    }
    let video = event.video_id;
    state.record_access(video, event.timestamp);
    if cache.lookup(video) {
        return Ok(StepOutcome {
            hit: true,
            ..StepOutcome::default()
        });
    }
    let evicted = cache.admit(&[video], |v| state.key(v, None));
    Ok(StepOutcome {
        hit: false,
        fetched: vec![video],
        evicted,
    })
}

/// SAGE: uniformly random budget-feasible videos, charging each, until `f`
/// are chosen or nothing affordable remains.
pub fn sage_candidates<R: Rng + ?Sized>(ledger: &mut PrivacyLedger, rng: &mut R) -> CandidateSet {
    let mut pool: Vec<usize> = (0..ledger.catalog_size()).collect();
    let mut remaining = pool.len();
    let mut chosen = Vec::with_capacity(ledger.capacity());
    while chosen.len() < ledger.capacity() && remaining > 0 {
        let pick = rng.gen_range(0..remaining);
        remaining -= 1;
        pool.swap(pick, remaining);
        let video = pool[remaining];
        if ledger.commit(video) {
            chosen.push(video);
        }
    }
    CandidateSet::new(chosen)
}

/// BESTFIT: the highest-utility budget-feasible videos (ties by id),
/// charging each, until `f` are chosen.
pub fn bestfit_candidates(utilities: &[f64], ledger: &mut PrivacyLedger) -> CandidateSet {
    let n = utilities.len().min(ledger.catalog_size());
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| utilities[b].total_cmp(&utilities[a]).then(a.cmp(&b)));
    let mut chosen = Vec::with_capacity(ledger.capacity());
    for video in order {
        if chosen.len() == ledger.capacity() {
            break;
        }
        if ledger.commit(video) {
            chosen.push(video);
        }
    }
    CandidateSet::new(chosen)
}
