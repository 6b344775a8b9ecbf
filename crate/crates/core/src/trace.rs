//! Request traces: loading, synthetic generation and per-edge partitioning.
//!
//! Trace files are UTF-8, one record per line:
//!
//! ```text
//! # edge_id,user_id,video_id,timestamp
//! 0,17,3,0.4
//! ```
//!
//! Timestamps are hours since the start of the trace. Lines starting with
//! `#` and blank lines are skipped.

use std::fmt::Write as _;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::numeric::dot;
use crate::predictor::{LatentMatrix, ModelParams};
use crate::rng;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RequestEvent {
    pub edge_id: usize,
    pub user_id: u64,
    pub video_id: usize,
    pub timestamp: f64,
}

impl RequestEvent {
    pub fn new(edge_id: usize, user_id: u64, video_id: usize, timestamp: f64) -> Self {
        Self {
            edge_id,
            user_id,
            video_id,
            timestamp,
        }
    }
}

/// Time-ordered request log over the window `[0, horizon)`.
#[derive(Debug, Clone, PartialEq)]
pub struct EventLog {
    events: Vec<RequestEvent>,
    catalog_size: usize,
    edge_count: usize,
    horizon: f64,
}

impl EventLog {
    /// Sorts `events` stably by timestamp and validates the invariants.
    pub fn new(mut events: Vec<RequestEvent>, catalog_size: usize, edge_count: usize, horizon: f64) -> Result<Self> {
        events.sort_by(|a, b| a.timestamp.total_cmp(&b.timestamp));
        for e in &events {
            if !(e.timestamp >= 0.0 && e.timestamp < horizon) {
                return Err(Error::InvalidArgument(format!(
                    "timestamp {} outside [0, {horizon})",
                    e.timestamp
                )));
            }
            if e.video_id >= catalog_size {
                return Err(Error::InvalidArgument(format!(
                    "video {} outside catalog of size {catalog_size}",
                    e.video_id
                )));
            }
            if e.edge_id >= edge_count {
                return Err(Error::InvalidArgument(format!(
                    "edge {} outside {edge_count} edges",
                    e.edge_id
                )));
            }
        }
        Ok(Self {
            events,
            catalog_size,
            edge_count,
            horizon,
        })
    }

    pub fn empty(catalog_size: usize, edge_count: usize, horizon: f64) -> Self {
        Self {
            events: Vec::new(),
            catalog_size,
            edge_count,
            horizon,
        }
    }

    pub fn events(&self) -> &[RequestEvent] {
        &self.events
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    pub fn catalog_size(&self) -> usize {
        self.catalog_size
    }

    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    /// Widen the catalog (configuration override); cannot drop videos.
    pub fn with_catalog_size(mut self, catalog_size: usize) -> Result<Self> {
        if catalog_size < self.catalog_size {
            return Err(Error::InvalidArgument(format!(
                "catalog size {catalog_size} smaller than observed {}",
                self.catalog_size
            )));
        }
        self.catalog_size = catalog_size;
        Ok(self)
    }

    /// Sub-log of events with `timestamp < t`.
    pub fn before(&self, t: f64) -> EventLog {
        let n = self.events.partition_point(|e| e.timestamp < t);
        EventLog {
            events: self.events[..n].to_vec(),
            catalog_size: self.catalog_size,
            edge_count: self.edge_count,
            horizon: self.horizon.min(t.max(0.0)),
        }
    }

    /// Serialize in the trace file format.
    pub fn to_trace_string(&self) -> String {
        let mut out = String::from("# edge_id,user_id,video_id,timestamp\n");
        for e in &self.events {
            let _ = writeln!(out, "{},{},{},{}", e.edge_id, e.user_id, e.video_id, e.timestamp);
        }
        out
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_trace_string()).map_err(|e| Error::io(path, e))
    }
}

fn quantize(t: f64, step: f64) -> f64 {
    let mut k = (t / step).floor();
    // Guard against t/step rounding just below an integer.
    if (k + 1.0) * step <= t {
        k += 1.0;
    }
    k * step
}

/// Parse a trace from text; `origin` labels errors.
pub fn parse_trace(text: &str, origin: &Path, quantize_hours: f64) -> Result<EventLog> {
    if !(quantize_hours > 0.0 && quantize_hours.is_finite()) {
        return Err(Error::InvalidArgument(format!("quantize_hours must be positive, got {quantize_hours}")));
    }
    let parse_err = |line: usize, message: String| Error::Parse {
        path: origin.to_path_buf(),
        line,
        message,
    };
    let mut events = Vec::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != 4 {
            return Err(parse_err(n + 1, format!("expected 4 fields, found {}", fields.len())));
        }
        let edge_id = fields[0]
            .parse::<usize>()
            .map_err(|e| parse_err(n + 1, format!("edge_id `{}`: {e}", fields[0])))?;
        let user_id = fields[1]
            .parse::<u64>()
            .map_err(|e| parse_err(n + 1, format!("user_id `{}`: {e}", fields[1])))?;
        let video_id = fields[2]
            .parse::<usize>()
            .map_err(|e| parse_err(n + 1, format!("video_id `{}`: {e}", fields[2])))?;
        let timestamp = fields[3]
            .parse::<f64>()
            .map_err(|e| parse_err(n + 1, format!("timestamp `{}`: {e}", fields[3])))?;
        if !(timestamp >= 0.0 && timestamp.is_finite()) {
            return Err(parse_err(n + 1, format!("timestamp {timestamp} must be a finite non-negative number")));
        }
        events.push(RequestEvent::new(edge_id, user_id, video_id, quantize(timestamp, quantize_hours)));
    }
    if events.is_empty() {
        return Err(Error::EmptyTrace(origin.to_path_buf()));
    }
    let catalog_size = 1 + events.iter().map(|e| e.video_id).max().unwrap_or(0);
    let edge_count = 1 + events.iter().map(|e| e.edge_id).max().unwrap_or(0);
    let last = events.iter().map(|e| e.timestamp).fold(0.0, f64::max);
    EventLog::new(events, catalog_size, edge_count, last + quantize_hours)
}

/// Load a trace file, flooring timestamps to multiples of `quantize_hours`.
pub fn load_trace(path: &Path, quantize_hours: f64) -> Result<EventLog> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_trace(&text, path, quantize_hours)
}

/// Split a log into one log per edge, preserving order.
pub fn partition_by_edge(log: &EventLog) -> Vec<EventLog> {
    let mut parts: Vec<Vec<RequestEvent>> = vec![Vec::new(); log.edge_count];
    for e in &log.events {
        parts[e.edge_id].push(*e);
    }
    parts
        .into_iter()
        .map(|events| EventLog {
            events,
            catalog_size: log.catalog_size,
            edge_count: log.edge_count,
            horizon: log.horizon,
        })
        .collect()
}

/// Ground-truth process for synthetic traces.
#[derive(Debug, Clone)]
pub struct SyntheticSpec {
    pub catalog_size: usize,
    pub edge_count: usize,
    pub horizon: f64,
    pub ground_truth: ModelParams,
    /// Multiplies every base rate `β_i`.
    pub base_rate_scale: f64,
    pub users_per_edge: u64,
    pub rng_seed: u64,
}

/// Upper bound on generated events per edge; hitting it means the process
/// is effectively explosive over the horizon.
pub const MAX_EVENTS_PER_EDGE: usize = 5_000_000;

impl SyntheticSpec {
    pub fn validate(&self) -> Result<()> {
        if self.catalog_size == 0 || self.edge_count == 0 || self.users_per_edge == 0 {
            return Err(Error::InvalidArgument("catalog, edge and user counts must be at least 1".into()));
        }
        if !(self.horizon > 0.0) || !(self.base_rate_scale > 0.0) {
            return Err(Error::InvalidArgument("horizon and base_rate_scale must be positive".into()));
        }
        self.ground_truth.validate()?;
        if self.ground_truth.catalog_size() != self.catalog_size {
            return Err(Error::InvalidArgument("ground truth catalog size mismatch".into()));
        }
        Ok(())
    }
}

/// Sample a log from the mutual-exciting process by Ogata thinning.
///
/// Between events every intensity decays, so the total intensity just after
/// the last accepted event bounds the process until the next one; the bound
/// is refreshed at every candidate point.
pub fn generate_synthetic(spec: &SyntheticSpec) -> Result<EventLog> {
    spec.validate()?;
    let radius = spec.ground_truth.excitation_radius();
    if radius >= 1.0 {
        return Err(Error::Unstable { radius });
    }
    let per_edge: Vec<Vec<RequestEvent>> = (0..spec.edge_count)
        .into_par_iter()
        .map(|edge| simulate_edge(spec, edge))
        .collect::<Result<_>>()?;
    let events = per_edge.into_iter().flatten().collect();
    EventLog::new(events, spec.catalog_size, spec.edge_count, spec.horizon)
}

fn simulate_edge(spec: &SyntheticSpec, edge: usize) -> Result<Vec<RequestEvent>> {
    let params = &spec.ground_truth;
    let mut rng = rng::stream(spec.rng_seed, "trace", edge as u64);
    let d = params.latent_dim();
    let base: Vec<f64> = params.beta.iter().map(|b| b * spec.base_rate_scale).collect();
    let base_total: f64 = base.iter().sum();
    let p_sum = params.p.column_sums();
    let mut u = vec![0.0; d];
    let mut t = 0.0;
    let mut events = Vec::new();
    let mut weights = vec![0.0; spec.catalog_size];
    loop {
        let bound = base_total + dot(&p_sum, &u);
        if !(bound > 0.0) {
            break;
        }
        let wait = -(1.0 - rng.gen::<f64>()).ln() / bound;
        t += wait;
        if t >= spec.horizon {
            break;
        }
        let factor = (-params.delta * wait).exp();
        u.iter_mut().for_each(|v| *v *= factor);
        let total = base_total + dot(&p_sum, &u);
        if rng.gen::<f64>() * bound >= total {
            continue;
        }
        for (i, w) in weights.iter_mut().enumerate() {
            *w = base[i] + dot(params.p.row(i), &u);
        }
        let video = pick_weighted(&weights, rng.gen::<f64>() * total);
        let user = edge as u64 * spec.users_per_edge + rng.gen_range(0..spec.users_per_edge);
        events.push(RequestEvent::new(edge, user, video, t));
        for (uu, q) in u.iter_mut().zip(params.q.row(video)) {
            *uu += q;
        }
        if events.len() > MAX_EVENTS_PER_EDGE {
            return Err(Error::Unstable { radius: params.excitation_radius() });
        }
    }
    Ok(events)
}

fn pick_weighted(weights: &[f64], target: f64) -> usize {
    let mut acc = 0.0;
    for (i, w) in weights.iter().enumerate() {
        acc += w;
        if target < acc {
            return i;
        }
    }
    // Rounding can leave target at the very top of the range.
    weights.iter().rposition(|w| *w > 0.0).unwrap_or(0)
}

/// Skewed synthetic workload: Zipf-like base rates and random latent
/// factors scaled to a target branching ratio.
#[derive(Debug, Clone, PartialEq)]
pub struct SkewedTraceConfig {
    pub catalog_size: usize,
    pub edge_count: usize,
    pub horizon: f64,
    pub latent_dim: usize,
    pub delta: f64,
    pub zipf_exponent: f64,
    /// Total base request rate per edge, requests/hour.
    pub base_rate: f64,
    /// Spectral radius of the excitation, in `[0, 1)`.
    pub branching: f64,
    pub users_per_edge: u64,
    pub seed: u64,
}

impl Default for SkewedTraceConfig {
    fn default() -> Self {
        Self {
            catalog_size: 500,
            edge_count: 5,
            horizon: 720.0,
            latent_dim: 4,
            delta: 0.01,
            zipf_exponent: 0.9,
            base_rate: 1.0,
            branching: 0.5,
            users_per_edge: 20,
            seed: 1,
        }
    }
}

impl SkewedTraceConfig {
    pub fn ground_truth(&self) -> Result<ModelParams> {
        if self.catalog_size == 0 || self.latent_dim == 0 {
            return Err(Error::InvalidArgument("catalog and latent dim must be positive".into()));
        }
        if !(0.0..1.0).contains(&self.branching) {
            return Err(Error::InvalidArgument(format!("branching must lie in [0, 1), got {}", self.branching)));
        }
        let mut rng = rng::stream(self.seed, "ground-truth", 0);
        let mut ranks: Vec<usize> = (1..=self.catalog_size).collect();
        ranks.shuffle(&mut rng);
        let raw: Vec<f64> = ranks.iter().map(|&r| (r as f64).powf(-self.zipf_exponent)).collect();
        let norm: f64 = raw.iter().sum();
        let beta = raw.iter().map(|w| w / norm).collect();
        let mut p = LatentMatrix::zeros(self.catalog_size, self.latent_dim);
        let mut q = LatentMatrix::zeros(self.catalog_size, self.latent_dim);
        for v in p.as_mut_slice().iter_mut().chain(q.as_mut_slice()) {
            *v = rng.gen::<f64>();
        }
        let mut params = ModelParams::new(beta, p, q, self.delta)?;
        let radius = params.excitation_radius();
        let scale = if radius > 0.0 { (self.branching / radius).sqrt() } else { 0.0 };
        params.p.as_mut_slice().iter_mut().for_each(|v| *v *= scale);
        params.q.as_mut_slice().iter_mut().for_each(|v| *v *= scale);
        Ok(params)
    }

    pub fn spec(&self) -> Result<SyntheticSpec> {
        Ok(SyntheticSpec {
            catalog_size: self.catalog_size,
            edge_count: self.edge_count,
            horizon: self.horizon,
            ground_truth: self.ground_truth()?,
            base_rate_scale: self.base_rate,
            users_per_edge: self.users_per_edge,
            rng_seed: self.seed,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str, q: f64) -> Result<EventLog> {
        parse_trace(text, Path::new("inline"), q)
    }

    #[test]
    fn floors_timestamps() {
        let log = parse("0,7,3,0.4\n0,7,3,1.9\n", 1.0).unwrap();
        let ts: Vec<f64> = log.events().iter().map(|e| e.timestamp).collect();
        assert_eq!(ts, vec![0.0, 1.0]);
    }

    #[test]
    fn catalog_from_max_video() {
        let log = parse("2,1,5,10.0", 1.0).unwrap();
        assert_eq!(log.catalog_size(), 6);
        assert_eq!(log.edge_count(), 3);
        assert_eq!(log.len(), 1);
        assert_eq!(log.events()[0].timestamp, 10.0);
    }

    #[test]
    fn quantization_is_idempotent() {
        let once = parse("0,1,2,3.7\n1,2,3,0.25\n0,1,1,7.0\n", 0.5).unwrap();
        let twice = parse(&once.to_trace_string(), 0.5).unwrap();
        assert_eq!(once.events(), twice.events());
        for k in 0..1000 {
            let t = k as f64 * 0.1;
            assert_eq!(quantize(quantize(t, 0.1), 0.1), quantize(t, 0.1));
        }
    }

    #[test]
    fn ties_keep_file_order() {
        let log = parse("0,1,9,5.5\n1,2,8,5.1\n0,3,7,2.0\n", 1.0).unwrap();
        let videos: Vec<usize> = log.events().iter().map(|e| e.video_id).collect();
        assert_eq!(videos, vec![7, 9, 8]);
    }

    #[test]
    fn malformed_line_reports_line_number() {
        let err = parse("# header\n0,1,2,3\n0,1,x,4\n", 1.0).unwrap_err();
        match err {
            Error::Parse { line, .. } => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(parse("0,1,2\n", 1.0), Err(Error::Parse { line: 1, .. })));
        assert!(matches!(parse("0,1,2,-1\n", 1.0), Err(Error::Parse { line: 1, .. })));
    }

    #[test]
    fn empty_file_is_an_error() {
        assert!(matches!(parse("# only comments\n\n", 1.0), Err(Error::EmptyTrace(_))));
        assert!(parse("0,0,0,0", 0.0).is_err());
    }

    #[test]
    fn partition_counts() {
        let text = "0,1,1,0\n1,1,1,0\n1,1,1,1\n2,1,1,2\n1,1,1,3\n0,1,1,4\n1,1,1,5\n1,1,1,6\n2,1,1,7\n0,1,1,8\n";
        let log = parse(text, 1.0).unwrap();
        let parts = partition_by_edge(&log);
        let sizes: Vec<usize> = parts.iter().map(EventLog::len).collect();
        assert_eq!(sizes, vec![3, 5, 2]);
        assert!(parts.iter().enumerate().all(|(e, p)| p.events().iter().all(|x| x.edge_id == e)));
    }

    #[test]
    fn partition_of_empty_log() {
        let parts = partition_by_edge(&EventLog::empty(4, 3, 10.0));
        assert_eq!(parts.len(), 3);
        assert!(parts.iter().all(EventLog::is_empty));
    }

    #[test]
    fn zero_intensity_gives_empty_log() {
        let spec = SyntheticSpec {
            catalog_size: 1,
            edge_count: 1,
            horizon: 100.0,
            ground_truth: ModelParams::uniform(1, 1, 0.1, 0.0),
            base_rate_scale: 1.0,
            users_per_edge: 1,
            rng_seed: 3,
        };
        assert!(generate_synthetic(&spec).unwrap().is_empty());
    }

    #[test]
    fn explosive_ground_truth_rejected() {
        let spec = SyntheticSpec {
            catalog_size: 3,
            edge_count: 1,
            horizon: 100.0,
            ground_truth: ModelParams::uniform(3, 2, 0.01, 1.0),
            base_rate_scale: 1.0,
            users_per_edge: 1,
            rng_seed: 3,
        };
        assert!(matches!(generate_synthetic(&spec), Err(Error::Unstable { .. })));
    }

    #[test]
    fn skewed_ground_truth_hits_target_branching() {
        let cfg = SkewedTraceConfig {
            catalog_size: 50,
            ..SkewedTraceConfig::default()
        };
        let gt = cfg.ground_truth().unwrap();
        assert!((gt.excitation_radius() - cfg.branching).abs() < 1e-9);
        assert!((gt.beta.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }
}
