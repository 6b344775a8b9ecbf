use std::fmt::Write;

use serde::Serialize;

use crate::cache::Policy;

use super::metrics::budget_cdf;
use super::ScheduledFit;

/// One miss: the viewed video and the prefetched noise together form the
/// fetch set `r = v ∪ x` seen by the content provider.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FetchRecord {
    pub edge: usize,
    pub step: u64,
    pub viewed: usize,
    pub prefetched: Vec<usize>,
    pub fetched: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct EdgeCounters {
    pub edge: usize,
    pub requests: u64,
    pub hits: u64,
    pub misses: u64,
    /// Videos requested from the content provider (viewed plus prefetched).
    pub fetched: u64,
    pub prefetched: u64,
    pub evictions: u64,
    /// Budget charged by the exponential mechanism.
    pub charged: f64,
}

/// Outcome of one policy at one configuration point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PolicyReport {
    pub policy: Policy,
    pub capacity_fraction: f64,
    pub capacity: usize,
    pub f: usize,
    pub xi: f64,
    pub requests: u64,
    pub hits: u64,
    /// Hits over test-period requests; 0 without requests.
    pub chr: f64,
    /// Average Jaccard similarity over (edge, user) pairs active in the test
    /// period.
    pub mean_js: f64,
    pub users: usize,
    pub edges: Vec<EdgeCounters>,
    /// Residual budget fraction per video, one vector per edge.
    pub residuals: Vec<Vec<f64>>,
    pub fetch_records: Vec<FetchRecord>,
}

impl PolicyReport {
    pub fn budget_cdf(&self) -> Vec<(f64, f64)> {
        budget_cdf(&self.residuals)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimReport {
    pub policies: Vec<PolicyReport>,
    pub fits: Vec<ScheduledFit>,
}

impl SimReport {
    pub fn policy(&self, policy: Policy) -> Option<&PolicyReport> {
        self.policies.iter().find(|r| r.policy == policy)
    }
}

pub fn chr_csv<'a>(reports: impl IntoIterator<Item = &'a PolicyReport>) -> String {
    let mut out = String::from("policy,capacity,chr\n");
    for r in reports {
        writeln!(out, "{},{},{}", r.policy, r.capacity_fraction, r.chr).unwrap();
    }
    out
}

pub fn js_csv<'a>(reports: impl IntoIterator<Item = &'a PolicyReport>) -> String {
    let mut out = String::from("policy,f,xi,mean_js\n");
    for r in reports {
        writeln!(out, "{},{},{},{}", r.policy, r.f, r.xi, r.mean_js).unwrap();
    }
    out
}

pub fn budget_cdf_csv<'a>(reports: impl IntoIterator<Item = &'a PolicyReport>) -> String {
    let mut out = String::from("policy,x,cdf\n");
    for r in reports {
        for (x, cdf) in r.budget_cdf() {
            writeln!(out, "{},{},{}", r.policy, x, cdf).unwrap();
        }
    }
    out
}

pub fn fl_loss_csv(fits: &[ScheduledFit]) -> String {
    let mut out = String::from("t_theta,round,loss\n");
    for fit in fits {
        for (round, loss) in fit.losses.iter().enumerate() {
            writeln!(out, "{},{},{}", fit.t_theta, round, loss).unwrap();
        }
    }
    out
}
