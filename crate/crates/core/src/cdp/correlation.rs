use std::collections::HashMap;

use crate::error::{Error, Result};

/// Catalogs up to this size keep the full `ψ` matrix.
pub const DENSE_LIMIT: usize = 4096;

#[derive(Debug, Clone, Default, PartialEq)]
struct PairAccumulator {
    steps: u64,
    cross: f64,
    sum_i: f64,
    sum_j: f64,
    sq_i: f64,
    sq_j: f64,
}

#[derive(Debug, Clone, PartialEq)]
enum PairStorage {
    /// Upper triangle of `ψ` including the diagonal, row-major.
    Dense { n: usize, packed: Vec<f64> },
    /// Pairs registered once they co-occur in a candidate set; their
    /// statistics start at registration.
    Sparse { pairs: HashMap<(usize, usize), PairAccumulator> },
}

/// Running sums `ψ_ij = Σ_k λ_i λ_j`, `α_i = Σ_k λ_i`, `σ_i = Σ_k λ_i²`.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationState {
    storage: PairStorage,
    alpha: Vec<f64>,
    sigma: Vec<f64>,
    steps: u64,
}

fn packed_index(n: usize, i: usize, j: usize) -> usize {
    let (i, j) = if i <= j { (i, j) } else { (j, i) };
    i * n - i * (i + 1) / 2 + j
}

fn ordered(i: usize, j: usize) -> (usize, usize) {
    if i <= j {
        (i, j)
    } else {
        (j, i)
    }
}

fn pearson(k: f64, cross: f64, sum_i: f64, sum_j: f64, sq_i: f64, sq_j: f64) -> f64 {
    let var_i = k * sq_i - sum_i * sum_i;
    let var_j = k * sq_j - sum_j * sum_j;
    // Variances within rounding of zero are treated as degenerate.
    let degenerate = |var: f64, scale: f64| var <= 1e-12 * scale.max(1.0);
    if degenerate(var_i, k * sq_i) || degenerate(var_j, k * sq_j) {
        return 0.0;
    }
    ((k * cross - sum_i * sum_j) / (var_i.sqrt() * var_j.sqrt())).clamp(-1.0, 1.0)
}

impl CorrelationState {
    pub fn new(catalog_size: usize) -> Self {
        let storage = if catalog_size <= DENSE_LIMIT {
            PairStorage::Dense {
                n: catalog_size,
                packed: vec![0.0; catalog_size * (catalog_size + 1) / 2],
            }
        } else {
            PairStorage::Sparse { pairs: HashMap::new() }
        };
        Self {
            storage,
            alpha: vec![0.0; catalog_size],
            sigma: vec![0.0; catalog_size],
            steps: 0,
        }
    }

    pub fn is_dense(&self) -> bool {
        matches!(self.storage, PairStorage::Dense { .. })
    }

    pub fn steps(&self) -> u64 {
        self.steps
    }

    pub fn alpha(&self) -> &[f64] {
        &self.alpha
    }

    pub fn sigma(&self) -> &[f64] {
        &self.sigma
    }

    /// `ψ_ij`; zero for untracked pairs of a sparse state.
    pub fn psi(&self, i: usize, j: usize) -> f64 {
        if i == j {
            return self.sigma[i];
        }
        match &self.storage {
            PairStorage::Dense { n, packed } => packed[packed_index(*n, i, j)],
            PairStorage::Sparse { pairs } => pairs.get(&ordered(i, j)).map_or(0.0, |p| p.cross),
        }
    }

    /// Start tracking every pair of `videos` (sparse storage only).
    pub fn register_pairs(&mut self, videos: &[usize]) {
        if let PairStorage::Sparse { pairs } = &mut self.storage {
            for (a, &i) in videos.iter().enumerate() {
                for &j in &videos[a + 1..] {
                    if i != j {
                        pairs.entry(ordered(i, j)).or_default();
                    }
                }
            }
        }
    }

    /// Incorporate one utility vector.
    pub fn update(&mut self, lambda: &[f64]) {
        assert_eq!(lambda.len(), self.alpha.len(), "utility vector length mismatch");
        for (i, &l) in lambda.iter().enumerate() {
            self.alpha[i] += l;
            self.sigma[i] += l * l;
        }
        match &mut self.storage {
            PairStorage::Dense { n, packed } => {
                let n = *n;
                let mut idx = 0;
                for i in 0..n {
                    let li = lambda[i];
                    let row = &mut packed[idx..idx + (n - i)];
                    if li != 0.0 {
                        for (slot, &lj) in row.iter_mut().zip(&lambda[i..]) {
                            *slot += li * lj;
                        }
                    }
                    idx += n - i;
                }
            }
            PairStorage::Sparse { pairs } => {
                for (&(i, j), acc) in pairs.iter_mut() {
                    let (li, lj) = (lambda[i], lambda[j]);
                    acc.steps += 1;
                    acc.cross += li * lj;
                    acc.sum_i += li;
                    acc.sum_j += lj;
                    acc.sq_i += li * li;
                    acc.sq_j += lj * lj;
                }
            }
        }
        self.steps += 1;
    }

    /// Pearson correlation `Ψ_ij` of the two utility series, clamped to
    /// `[-1, 1]`; 0 when either series has (numerically) zero variance.
    pub fn correlation_degree(&self, i: usize, j: usize) -> Result<f64> {
        if self.steps < 2 {
            return Err(Error::TooFewSteps(self.steps));
        }
        let k = self.steps as f64;
        let (a, s) = (&self.alpha, &self.sigma);
        match &self.storage {
            PairStorage::Dense { .. } => Ok(pearson(k, self.psi(i, j), a[i], a[j], s[i], s[j])),
            PairStorage::Sparse { .. } if i == j => Ok(pearson(k, s[i], a[i], a[i], s[i], s[i])),
            PairStorage::Sparse { pairs } => Ok(pairs.get(&ordered(i, j)).map_or(0.0, |p| {
                if p.steps < 2 {
                    return 0.0;
                }
                let (si, sj, qi, qj) = if i <= j {
                    (p.sum_i, p.sum_j, p.sq_i, p.sq_j)
                } else {
                    (p.sum_j, p.sum_i, p.sq_j, p.sq_i)
                };
                pearson(p.steps as f64, p.cross, si, sj, qi, qj)
            })),
        }
    }
}
