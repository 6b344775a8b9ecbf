use std::collections::HashMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::ToPrimitive;

use crate::error::{Error, Result};

use super::PrivacyLedger;

/// Largest number of binary decision variables `K·I` the exact oracle accepts.
pub const MAX_ORACLE_VARIABLES: usize = 24;

/// Offline optimum of `Σ_k Σ_i λ_i^k a_i^k` subject to `Σ_k ε_i a_i^k ≤ ξ`
/// per video and `Σ_i a_i^k ≤ f` per step.
///
/// Exact dynamic program over steps whose state is the admission count of
/// every video.
pub fn offline_optimum(utilities: &[Vec<f64>], template: &PrivacyLedger) -> Result<f64> {
    let steps = utilities.len();
    let videos = template.catalog_size();
    if utilities.iter().any(|row| row.len() != videos) {
        return Err(Error::InvalidArgument("utility rows must match the ledger catalog".into()));
    }
    let vars = steps * videos;
    if vars > MAX_ORACLE_VARIABLES {
        return Err(Error::InstanceTooLarge {
            vars,
            limit: MAX_ORACLE_VARIABLES,
        });
    }
    let xi = BigRational::from_float(template.xi()).expect("finite budget");
    let limits: Vec<u8> = (0..videos)
        .map(|v| {
            let cost = BigRational::from_float(template.cost(v)).expect("finite cost");
            let m: BigInt = (&xi / cost).floor().to_integer();
            m.to_usize().unwrap_or(usize::MAX).min(steps) as u8
        })
        .collect();
    let capacity = template.capacity().min(videos);
    let subsets: Vec<u32> = (0u32..(1u32 << videos))
        .filter(|s| s.count_ones() as usize <= capacity)
        .collect();

    struct Search<'a> {
        utilities: &'a [Vec<f64>],
        limits: &'a [u8],
        subsets: &'a [u32],
        memo: HashMap<(usize, Vec<u8>), f64>,
    }

    impl Search<'_> {
        fn best(&mut self, step: usize, used: &mut Vec<u8>) -> f64 {
            if step == self.utilities.len() {
                return 0.0;
            }
            if let Some(&v) = self.memo.get(&(step, used.clone())) {
                return v;
            }
            let mut best = f64::NEG_INFINITY;
            for &subset in self.subsets {
                let feasible = (0..used.len()).all(|i| subset & (1 << i) == 0 || used[i] < self.limits[i]);
                if !feasible {
                    continue;
                }
                let mut gain = 0.0;
                for i in 0..used.len() {
                    if subset & (1 << i) != 0 {
                        gain += self.utilities[step][i];
                        used[i] += 1;
                    }
                }
                let total = gain + self.best(step + 1, used);
                for i in 0..used.len() {
                    if subset & (1 << i) != 0 {
                        used[i] -= 1;
                    }
                }
                best = best.max(total);
            }
            self.memo.insert((step, used.clone()), best);
            best
        }
    }

    let mut search = Search {
        utilities,
        limits: &limits,
        subsets: &subsets,
        memo: HashMap::new(),
    };
    Ok(search.best(0, &mut vec![0; videos]))
}
