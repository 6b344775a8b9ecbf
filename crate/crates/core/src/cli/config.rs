use std::collections::BTreeMap;
use std::fmt::Write;
use std::path::Path;

use crate::cache::Policy;
use crate::error::{Error, Result};
use crate::federation::TrainConfig;
use crate::scheduler::{CrSuite, ThresholdConfig};
use crate::sim::{Bounds, SimConfig};
use crate::trace::SkewedTraceConfig;

const DEFAULTS: &[(&str, &str)] = &[
    ("seed", "1"),
    // synthetic trace
    ("catalog_size", "500"),
    ("edges", "25"),
    ("horizon", "720"),
    ("trace_latent_dim", "4"),
    ("zipf_exponent", "0.9"),
    ("base_rate", "1.0"),
    ("branching", "0.5"),
    ("users_per_edge", "20"),
    ("quantize_hours", "1.0"),
    // predictor and federated fit
    ("latent_dim", "10"),
    ("delta", "0.01"),
    ("phi_th", "exp(-0.48)"),
    ("t_theta", "48"),
    ("init_value", "1.0"),
    ("max_iters", "20"),
    ("learning_rate", "0.05"),
    ("rho", "0.01"),
    ("tolerance", "1e-6"),
    ("max_backtracks", "40"),
    // privacy and caching
    ("xi", "15"),
    ("epsilon", "1"),
    ("f", "4"),
    ("c", "0.01"),
    ("init_horizon", "240"),
    ("test_horizon", "720"),
    ("bounds", "auto"),
    ("bounds_floor", "1e-6"),
    ("slot_hours", "1.0"),
    ("policies", "ppvf,sage,bestfit,mav,lru,lfu"),
    ("sweep_c", ""),
    ("sweep_f", ""),
    ("sweep_xi", ""),
    // competitive-ratio suite
    ("cr_catalog", "4"),
    ("cr_steps", "6"),
    ("cr_budget_units", "20"),
    ("cr_ratio_spread", "50"),
    ("cr_lower", "1"),
    ("cr_capacity", "all"),
    ("cr_instances", "200"),
    ("cr_slack", "0.15"),
];

const ALIASES: &[(&str, &str)] = &[("I", "catalog_size"), ("E", "edges"), ("T", "horizon"), ("D", "latent_dim")];

/// Flat `key = value` configuration layered over built-in defaults.
#[derive(Debug, Clone, PartialEq)]
pub struct KvConfig {
    values: BTreeMap<String, String>,
    explicit: Vec<String>,
}

impl Default for KvConfig {
    fn default() -> Self {
        Self {
            values: DEFAULTS.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect(),
            explicit: Vec::new(),
        }
    }
}

fn canonical(key: &str) -> Result<&'static str> {
    let key = ALIASES.iter().find(|(a, _)| *a == key).map_or(key, |(_, k)| *k);
    DEFAULTS
        .iter()
        .find(|(k, _)| *k == key)
        .map(|(k, _)| *k)
        .ok_or_else(|| Error::InvalidArgument(format!("unknown configuration key `{key}`")))
}

fn parse_real(key: &str, raw: &str) -> Result<f64> {
    let raw = raw.trim();
    let value = match raw.strip_prefix("exp(").and_then(|r| r.strip_suffix(')')) {
        Some(inner) => inner.trim().parse::<f64>().map(f64::exp),
        None => raw.parse::<f64>(),
    };
    value.map_err(|_| Error::InvalidArgument(format!("{key}: expected a number, got `{raw}`")))
}

fn parse_list<T>(key: &str, raw: &str, item: impl Fn(&str, &str) -> Result<T>) -> Result<Vec<T>> {
    raw.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| item(key, s))
        .collect()
}

impl KvConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg = Self::default();
        for (n, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| Error::Parse {
                path: path.to_path_buf(),
                line: n + 1,
                message: "expected `key = value`".into(),
            })?;
            cfg.set(k.trim(), v.trim()).map_err(|e| Error::Parse {
                path: path.to_path_buf(),
                line: n + 1,
                message: e.to_string(),
            })?;
        }
        Ok(cfg)
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let key = canonical(key)?;
        self.values.insert(key.to_string(), value.to_string());
        if !self.explicit.iter().any(|k| k == key) {
            self.explicit.push(key.to_string());
        }
        Ok(())
    }

    /// Apply a `key=value` override.
    pub fn apply(&mut self, assignment: &str) -> Result<()> {
        let (k, v) = assignment
            .split_once('=')
            .ok_or_else(|| Error::InvalidArgument(format!("override `{assignment}` is not key=value")))?;
        self.set(k.trim(), v.trim())
    }

    pub fn is_explicit(&self, key: &str) -> bool {
        self.explicit.iter().any(|k| k == key)
    }

    pub fn values(&self) -> &BTreeMap<String, String> {
        &self.values
    }

    pub fn get(&self, key: &str) -> &str {
        self.values.get(key).map(String::as_str).unwrap_or("")
    }

    pub fn real(&self, key: &str) -> Result<f64> {
        parse_real(key, self.get(key))
    }

    pub fn int<T: std::str::FromStr>(&self, key: &str) -> Result<T> {
        let raw = self.get(key).trim();
        raw.parse()
            .map_err(|_| Error::InvalidArgument(format!("{key}: expected a non-negative integer, got `{raw}`")))
    }

    pub fn reals(&self, key: &str) -> Result<Vec<f64>> {
        parse_list(key, self.get(key), parse_real)
    }

    pub fn ints(&self, key: &str) -> Result<Vec<usize>> {
        parse_list(key, self.get(key), |k, s| {
            s.parse()
                .map_err(|_| Error::InvalidArgument(format!("{k}: expected integers, got `{s}`")))
        })
    }

    pub fn policies(&self) -> Result<Vec<Policy>> {
        let list = parse_list("policies", self.get("policies"), |_, s| s.parse::<Policy>())?;
        if list.is_empty() {
            return Err(Error::InvalidArgument("policies: empty list".into()));
        }
        Ok(list)
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.values {
            writeln!(out, "{k} = {v}").unwrap();
        }
        out
    }

    pub fn trace_config(&self) -> Result<SkewedTraceConfig> {
        Ok(SkewedTraceConfig {
            catalog_size: self.int("catalog_size")?,
            edge_count: self.int("edges")?,
            horizon: self.real("horizon")?,
            latent_dim: self.int("trace_latent_dim")?,
            delta: self.real("delta")?,
            zipf_exponent: self.real("zipf_exponent")?,
            base_rate: self.real("base_rate")?,
            branching: self.real("branching")?,
            users_per_edge: self.int("users_per_edge")?,
            seed: self.int("seed")?,
        })
    }

    pub fn train_config(&self) -> Result<TrainConfig> {
        let rho = self.real("rho")?;
        let cfg = TrainConfig {
            rho_beta: rho,
            rho_p: rho,
            rho_q: rho,
            learning_rate: self.real("learning_rate")?,
            max_iters: self.int("max_iters")?,
            tolerance: self.real("tolerance")?,
            update_interval_hours: self.real("t_theta")?,
            max_backtracks: self.int("max_backtracks")?,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn sim_config(&self) -> Result<SimConfig> {
        let bounds = match self.get("bounds").trim() {
            "auto" => Bounds::Auto,
            raw => {
                let v = parse_list("bounds", raw, parse_real)?;
                match v.as_slice() {
                    [l, u] => Bounds::Fixed(ThresholdConfig::new(*l, *u)?),
                    _ => return Err(Error::InvalidArgument(format!("bounds: expected `auto` or `L,U`, got `{raw}`"))),
                }
            }
        };
        let cfg = SimConfig {
            init_horizon: self.real("init_horizon")?,
            test_horizon: self.real("test_horizon")?,
            xi: self.real("xi")?,
            epsilon: self.real("epsilon")?,
            f: self.int("f")?,
            capacity_fraction: self.real("c")?,
            bounds,
            bounds_floor: self.real("bounds_floor")?,
            train: self.train_config()?,
            latent_dim: self.int("latent_dim")?,
            delta: self.real("delta")?,
            phi_th: self.real("phi_th")?,
            init_value: self.real("init_value")?,
            slot_hours: self.real("slot_hours")?,
            policies: self.policies()?,
            seed: self.int("seed")?,
            record_fetches: false,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn cr_suite(&self) -> Result<CrSuite> {
        let capacity = match self.get("cr_capacity").trim() {
            "all" => None,
            _ => Some(self.int("cr_capacity")?),
        };
        Ok(CrSuite {
            catalog_size: self.int("cr_catalog")?,
            steps: self.int("cr_steps")?,
            budget_units: self.real("cr_budget_units")?,
            cost: 1.0,
            ratio_spread: self.real("cr_ratio_spread")?,
            lower: self.real("cr_lower")?,
            capacity,
            instances: self.int("cr_instances")?,
            slack: self.real("cr_slack")?,
        })
    }
}
