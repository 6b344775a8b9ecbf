use std::cmp::Ordering;
use std::collections::HashMap;

use crate::error::{Error, Result};

/// Ranking key of a cached video: compared on `score` first, then on
/// `recency` (a logical access clock).
///
/// Utility ranking leaves `recency` at zero so equal scores tie, and ties
/// keep the incumbent. LRU uses only `recency`; LFU uses the access count
/// with recency as tie-breaker.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct CacheKey {
    pub score: f64,
    pub recency: u64,
}

impl CacheKey {
    pub fn score(score: f64) -> Self {
        Self { score, recency: 0 }
    }

    fn cmp(&self, other: &Self) -> Ordering {
        self.score
            .total_cmp(&other.score)
            .then(self.recency.cmp(&other.recency))
    }
}

/// Fixed-capacity set of videos held by one edge.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeCache {
    capacity: usize,
    residents: Vec<(usize, CacheKey)>,
    index: HashMap<usize, usize>,
}

impl EdgeCache {
    pub fn new(capacity: usize) -> Result<Self> {
        if capacity == 0 {
            return Err(Error::InvalidArgument("cache capacity must be at least 1".into()));
        }
        Ok(Self {
            capacity,
            residents: Vec::with_capacity(capacity),
            index: HashMap::with_capacity(capacity),
        })
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn len(&self) -> usize {
        self.residents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.residents.is_empty()
    }

    pub fn lookup(&self, video: usize) -> bool {
        self.index.contains_key(&video)
    }

    /// Resident videos in slot order.
    pub fn videos(&self) -> impl Iterator<Item = usize> + '_ {
        self.residents.iter().map(|&(v, _)| v)
    }

    fn min_slot(&self) -> Option<usize> {
        self.residents
            .iter()
            .enumerate()
            .min_by(|a, b| a.1 .1.cmp(&b.1 .1).then(a.0.cmp(&b.0)))
            .map(|(slot, _)| slot)
    }

    /// Offer `incoming` videos in order. Resident keys are refreshed from
    /// `key` first; an incoming video enters if there is room or if its key
    /// strictly exceeds the smallest resident key, which is then evicted.
    /// Returns the evicted videos.
    pub fn admit<F: Fn(usize) -> CacheKey>(&mut self, incoming: &[usize], key: F) -> Vec<usize> {
        for entry in &mut self.residents {
            entry.1 = key(entry.0);
        }
        let mut evicted = Vec::new();
        for &video in incoming {
            if self.lookup(video) {
                continue;
            }
            let k = key(video);
            if self.residents.len() < self.capacity {
                self.index.insert(video, self.residents.len());
                self.residents.push((video, k));
                continue;
            }
            let slot = self.min_slot().expect("full cache has residents");
            let (old, old_key) = self.residents[slot];
            if k.cmp(&old_key) == Ordering::Greater {
                self.index.remove(&old);
                self.index.insert(video, slot);
                self.residents[slot] = (video, k);
                evicted.push(old);
            }
        }
        evicted
    }
}
