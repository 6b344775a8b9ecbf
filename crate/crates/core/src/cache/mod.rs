//! Edge caches and the baseline policies.

mod edge;
mod policy;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::Error;

pub use edge::{CacheKey, EdgeCache};
pub use policy::{
    baseline_step, bestfit_candidates, sage_candidates, MovingAverage, PolicyState, StepOutcome, MAV_WEIGHT,
};

/// Caching / prefetching strategy run by every edge in a simulation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Policy {
    Ppvf,
    Sage,
    Bestfit,
    Mav,
    Lru,
    Lfu,
}

impl Policy {
    pub const ALL: [Policy; 6] = [
        Policy::Ppvf,
        Policy::Sage,
        Policy::Bestfit,
        Policy::Mav,
        Policy::Lru,
        Policy::Lfu,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Policy::Ppvf => "ppvf",
            Policy::Sage => "sage",
            Policy::Bestfit => "bestfit",
            Policy::Mav => "mav",
            Policy::Lru => "lru",
            Policy::Lfu => "lfu",
        }
    }

    /// Policies that inject privacy-preserving prefetch requests and rank
    /// the cache by predicted utility.
    pub fn prefetches(self) -> bool {
        matches!(self, Policy::Ppvf | Policy::Sage | Policy::Bestfit)
    }
}

impl fmt::Display for Policy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Policy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let lower = s.trim().to_ascii_lowercase();
        Policy::ALL
            .into_iter()
            .find(|p| p.name() == lower)
            .ok_or_else(|| Error::UnknownPolicy(s.to_string()))
    }
}
