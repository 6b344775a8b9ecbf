use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::dot;

/// Lower bound applied to every parameter after an update.
pub const POSITIVITY_FLOOR: f64 = 1e-8;

/// Dense row-major `rows × cols` matrix of latent factors.
#[derive(Debug, Clone, PartialEq)]
pub struct LatentMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl LatentMatrix {
    pub fn filled(rows: usize, cols: usize, value: f64) -> Self {
        Self {
            rows,
            cols,
            data: vec![value; rows * cols],
        }
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self::filled(rows, cols, 0.0)
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::InvalidArgument("ragged latent matrix".into()));
        }
        Ok(Self {
            rows: rows.len(),
            cols,
            data: rows.iter().flatten().copied().collect(),
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.data.chunks(self.cols.max(1)).map(<[f64]>::to_vec).collect()
    }

    /// Sum of all rows.
    pub fn column_sums(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.cols];
        for row in self.data.chunks(self.cols.max(1)) {
            for (o, v) in out.iter_mut().zip(row) {
                *o += v;
            }
        }
        out
    }
}

/// Point-process parameters `θ = {β, p, q}` plus the kernel decay `δ`.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    pub beta: Vec<f64>,
    pub p: LatentMatrix,
    pub q: LatentMatrix,
    pub delta: f64,
}

#[derive(Serialize, Deserialize)]
struct ParamsDoc {
    beta: Vec<f64>,
    p: Vec<Vec<f64>>,
    q: Vec<Vec<f64>>,
    delta: f64,
    #[serde(rename = "D")]
    latent_dim: usize,
}

impl ModelParams {
    pub fn new(beta: Vec<f64>, p: LatentMatrix, q: LatentMatrix, delta: f64) -> Result<Self> {
        let params = Self { beta, p, q, delta };
        params.validate()?;
        Ok(params)
    }

    /// Every entry of `β`, `p` and `q` set to `value`.
    pub fn uniform(catalog_size: usize, latent_dim: usize, delta: f64, value: f64) -> Self {
        Self {
            beta: vec![value; catalog_size],
            p: LatentMatrix::filled(catalog_size, latent_dim, value),
            q: LatentMatrix::filled(catalog_size, latent_dim, value),
            delta,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let i = self.beta.len();
        if self.p.rows() != i || self.q.rows() != i {
            return Err(Error::InvalidArgument(format!(
                "parameter shapes disagree: beta {i}, p {}x{}, q {}x{}",
                self.p.rows(),
                self.p.cols(),
                self.q.rows(),
                self.q.cols()
            )));
        }
        if self.p.cols() != self.q.cols() {
            return Err(Error::InvalidArgument("p and q latent dims differ".into()));
        }
        if !(self.delta > 0.0 && self.delta.is_finite()) {
            return Err(Error::InvalidArgument(format!("delta must be positive, got {}", self.delta)));
        }
        let all = self.beta.iter().chain(self.p.as_slice()).chain(self.q.as_slice());
        for v in all {
            if !v.is_finite() || *v < 0.0 {
                return Err(Error::InvalidArgument(format!("parameter entry {v} is not a non-negative real")));
            }
        }
        Ok(())
    }

    pub fn catalog_size(&self) -> usize {
        self.beta.len()
    }

    pub fn latent_dim(&self) -> usize {
        self.p.cols()
    }

    /// Influence of video `j` on video `i`, `p_i · q_j`.
    pub fn influence(&self, i: usize, j: usize) -> f64 {
        dot(self.p.row(i), self.q.row(j))
    }

    /// Clamp every entry to [`POSITIVITY_FLOOR`].
    pub fn clamp_positive(&mut self) {
        let all = self
            .beta
            .iter_mut()
            .chain(self.p.as_mut_slice())
            .chain(self.q.as_mut_slice());
        for v in all {
            if *v < POSITIVITY_FLOOR || v.is_nan() {
                *v = POSITIVITY_FLOOR;
            }
        }
    }

    pub fn min_entry(&self) -> f64 {
        self.beta
            .iter()
            .chain(self.p.as_slice())
            .chain(self.q.as_slice())
            .copied()
            .fold(f64::INFINITY, f64::min)
    }

    /// Spectral radius of the branching matrix `p qᵀ / δ`.
    ///
    /// The non-zero spectrum of `p qᵀ` equals that of the `D × D` matrix
    /// `qᵀ p`, which is non-negative, so power iteration converges to the
    /// Perron root.
    pub fn excitation_radius(&self) -> f64 {
        let d = self.latent_dim();
        if d == 0 {
            return 0.0;
        }
        let mut m = vec![0.0; d * d];
        for i in 0..self.catalog_size() {
            let (p, q) = (self.p.row(i), self.q.row(i));
            for a in 0..d {
                for b in 0..d {
                    m[a * d + b] += q[a] * p[b];
                }
            }
        }
        let mut v = vec![1.0; d];
        let mut radius = 0.0;
        for _ in 0..2000 {
            let mut next = vec![0.0; d];
            for a in 0..d {
                next[a] = (0..d).map(|b| m[a * d + b] * v[b]).sum();
            }
            let norm = next.iter().map(|x| x * x).sum::<f64>().sqrt();
            if norm == 0.0 {
                return 0.0;
            }
            let prev = radius;
            radius = norm / v.iter().map(|x| x * x).sum::<f64>().sqrt();
            v = next.into_iter().map(|x| x / norm).collect();
            if (radius - prev).abs() <= 1e-13 * radius {
                break;
            }
        }
        radius / self.delta
    }

    pub fn to_json(&self) -> Result<String> {
        let doc = ParamsDoc {
            beta: self.beta.clone(),
            p: self.p.to_rows(),
            q: self.q.to_rows(),
            delta: self.delta,
            latent_dim: self.latent_dim(),
        };
        Ok(serde_json::to_string_pretty(&doc)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: ParamsDoc = serde_json::from_str(text)?;
        let p = LatentMatrix::from_rows(&doc.p)?;
        let q = LatentMatrix::from_rows(&doc.q)?;
        if p.cols() != doc.latent_dim && !doc.beta.is_empty() {
            return Err(Error::InvalidArgument(format!(
                "declared D = {} but rows have {} entries",
                doc.latent_dim,
                p.cols()
            )));
        }
        Self::new(doc.beta, p, q, doc.delta)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()?).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }
}
