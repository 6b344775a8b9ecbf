use rand::Rng;

use super::{PrivacyLedger, ThresholdConfig};

/// Videos admitted for one prefetch step, in admission order.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CandidateSet {
    videos: Vec<usize>,
}

impl CandidateSet {
    pub fn new(videos: Vec<usize>) -> Self {
        Self { videos }
    }

    pub fn videos(&self) -> &[usize] {
        &self.videos
    }

    pub fn len(&self) -> usize {
        self.videos.len()
    }

    pub fn is_empty(&self) -> bool {
        self.videos.is_empty()
    }

    pub fn contains(&self, video: usize) -> bool {
        self.videos.contains(&video)
    }

    /// Total committed cost `Σ_{i∈A} ε_i`.
    pub fn total_cost(&self, ledger: &PrivacyLedger) -> f64 {
        self.videos.iter().map(|&v| ledger.cost(v)).sum()
    }
}

/// Threshold-based online candidate selection.
///
/// Videos are drawn uniformly without replacement (a lazily advanced
/// Fisher–Yates shuffle). A draw is admitted iff `λ_i/ε_i > Θ(γ_i)` and
/// `ε_i < (1 − γ_i) ξ`; admission commits `ε_i` in the ledger. Stops at `f`
/// admissions or when every video has been drawn.
pub fn select_candidates<R: Rng + ?Sized>(
    utilities: &[f64],
    ledger: &mut PrivacyLedger,
    cfg: &ThresholdConfig,
    rng: &mut R,
) -> CandidateSet {
    let n = utilities.len().min(ledger.catalog_size());
    let capacity = ledger.capacity();
    let mut pool: Vec<usize> = (0..n).collect();
    let mut chosen = Vec::with_capacity(capacity);
    let mut remaining = n;
    while chosen.len() < capacity && remaining > 0 {
        let pick = rng.gen_range(0..remaining);
        remaining -= 1;
        pool.swap(pick, remaining);
        let video = pool[remaining];
        let ratio = utilities[video] / ledger.cost(video);
        if ratio > cfg.threshold(ledger.gamma(video)) && ledger.commit(video) {
            chosen.push(video);
        }
    }
    CandidateSet { videos: chosen }
}
