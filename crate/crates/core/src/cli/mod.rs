//! `ppvf` command-line driver.
//!
//! Exit codes: 0 success, 1 usage or configuration error, 2 data error,
//! 3 property violation.

mod config;
mod manifest;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};

use crate::error::{Error, Result};
use crate::scheduler::empirical_cr;
use crate::sim::{
    budget_cdf_csv, chr_csv, fit_schedule, fl_loss_csv, js_csv, run_with_schedule, PolicyReport, SimConfig,
};
use crate::trace::{generate_synthetic, load_trace, EventLog};

pub use config::KvConfig;
pub use manifest::{sha256_hex, OutputEntry, RunManifest, MANIFEST_FILE};

#[derive(Debug, Parser)]
#[command(name = "ppvf", version, about = "Privacy-preserving video prefetching simulator")]
pub struct Cli {
    /// Flat `key = value` configuration file.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Master seed (overrides `seed` in the configuration).
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads; defaults to the available parallelism.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Configuration override `key=value`; repeatable.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    pub overrides: Vec<String>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic trace from a skewed ground-truth process.
    GenTrace {
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the federated fit schedule over a trace and save the parameters.
    Fit {
        #[arg(long)]
        trace: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Simulate policies over a trace (synthetic if `--trace` is omitted)
    /// and write CSV reports.
    Simulate {
        #[arg(long)]
        trace: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        /// Comma-separated policies (overrides `policies`).
        #[arg(long)]
        policy: Option<String>,
    },
    /// Check the threshold rule's competitive ratio on random instances.
    EvalCr,
    /// Summarize a simulate output directory and verify its hashes.
    Report {
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Data(String),
    Violation(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let root = {
            let mut cur = &e;
            while let Error::Context { source, .. } = cur {
                cur = source;
            }
            cur
        };
        match root {
            Error::InvalidArgument(_) | Error::UnknownPolicy(_) | Error::InstanceTooLarge { .. } => {
                Failure::Usage(e.to_string())
            }
            _ => Failure::Data(e.to_string()),
        }
    }
}

/// Parse the process arguments, run, and map the outcome to an exit code.
pub fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
        Err(Failure::Data(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
        Err(Failure::Violation(m)) => {
            eprintln!("violation: {m}");
            ExitCode::from(3)
        }
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    let mut cfg = match &cli.config {
        Some(path) => KvConfig::load(path)?,
        None => KvConfig::default(),
    };
    for o in &cli.overrides {
        cfg.apply(o)?;
    }
    if let Some(seed) = cli.seed {
        cfg.set("seed", &seed.to_string())?;
    }
    if let Command::Simulate { policy: Some(p), .. } = &cli.command {
        cfg.set("policies", p)?;
    }
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(Failure::Usage("--threads must be at least 1".into()));
        }
        builder = builder.num_threads(n);
    }
    let pool = builder
        .build()
        .map_err(|e| Failure::Usage(format!("thread pool: {e}")))?;

    print!("# effective configuration\n{}", cfg.render());
    pool.install(|| match &cli.command {
        Command::GenTrace { out } => gen_trace(&cfg, out),
        Command::Fit { trace, out } => fit(&cfg, cli.config.clone(), trace, out),
        Command::Simulate { trace, out, .. } => simulate(&cfg, cli.config.clone(), trace.as_deref(), out),
        Command::EvalCr => eval_cr(&cfg),
        Command::Report { out } => report(out),
    })
}

fn create_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

fn gen_trace(cfg: &KvConfig, out: &Path) -> Result<(), Failure> {
    let log = generate_synthetic(&cfg.trace_config()?.spec()?)?;
    if let Some(parent) = out.parent().filter(|p| !p.as_os_str().is_empty()) {
        create_dir(parent)?;
    }
    log.write(out)?;
    println!(
        "wrote {} events (I = {}, E = {}) to {}",
        log.len(),
        log.catalog_size(),
        log.edge_count(),
        out.display()
    );
    Ok(())
}

fn read_trace(cfg: &KvConfig, path: &Path) -> Result<EventLog> {
    let log = load_trace(path, cfg.real("quantize_hours")?)?;
    if cfg.is_explicit("catalog_size") {
        return log.with_catalog_size(cfg.int("catalog_size")?);
    }
    Ok(log)
}

fn fit(cfg: &KvConfig, config_path: Option<PathBuf>, trace: &Path, out: &Path) -> Result<(), Failure> {
    let sim = cfg.sim_config()?;
    create_dir(out)?;
    let mut manifest = RunManifest::new("fit", config_path, cfg.values().clone(), out);
    let start = Instant::now();
    let log = read_trace(cfg, trace)?;
    let schedule = fit_schedule(&sim, &log)?;
    manifest.time("fit", start.elapsed().as_secs_f64());
    let last = schedule.fits.last().map_or(&schedule.initial, |f| &f.params);
    manifest.emit("params.json", &(last.to_json()? + "\n"))?;
    manifest.emit("fl_loss.csv", &fl_loss_csv(&schedule.fits))?;
    manifest.save()?;
    println!("{} fit rounds; parameters in {}", schedule.fits.len(), out.join("params.json").display());
    Ok(())
}

/// Configuration points of a sweep: the base point plus each swept axis.
struct SweepPlan {
    capacities: Vec<f64>,
    fs: Vec<usize>,
    xis: Vec<f64>,
}

impl SweepPlan {
    fn from_config(cfg: &KvConfig, base: &SimConfig) -> Result<Self> {
        let or_base = |v: Vec<f64>, b: f64| if v.is_empty() { vec![b] } else { v };
        let fs = cfg.ints("sweep_f")?;
        Ok(Self {
            capacities: or_base(cfg.reals("sweep_c")?, base.capacity_fraction),
            fs: if fs.is_empty() { vec![base.f] } else { fs },
            xis: cfg.reals("sweep_xi")?,
        })
    }

    /// Points in emission order: capacity sweep, then f sweep, then ξ sweep.
    fn points(&self, base: &SimConfig) -> Vec<SimConfig> {
        let mut points: Vec<SimConfig> = Vec::new();
        let mut push = |c: SimConfig| {
            if !points
                .iter()
                .any(|p| p.capacity_fraction == c.capacity_fraction && p.f == c.f && p.xi == c.xi)
            {
                points.push(c);
            }
        };
        for &c in &self.capacities {
            push(SimConfig {
                capacity_fraction: c,
                ..base.clone()
            });
        }
        for &f in &self.fs {
            push(SimConfig { f, ..base.clone() });
        }
        for &xi in &self.xis {
            push(SimConfig { xi, ..base.clone() });
        }
        points
    }
}

fn simulate(cfg: &KvConfig, config_path: Option<PathBuf>, trace: Option<&Path>, out: &Path) -> Result<(), Failure> {
    let base = cfg.sim_config()?;
    let plan = SweepPlan::from_config(cfg, &base)?;
    create_dir(out)?;
    let mut manifest = RunManifest::new("simulate", config_path, cfg.values().clone(), out);

    let start = Instant::now();
    let log = match trace {
        Some(path) => read_trace(cfg, path)?,
        None => generate_synthetic(&cfg.trace_config()?.spec()?)?,
    };
    manifest.time("trace", start.elapsed().as_secs_f64());

    let start = Instant::now();
    let schedule = fit_schedule(&base, &log)?;
    manifest.time("fit", start.elapsed().as_secs_f64());

    let start = Instant::now();
    let mut runs: Vec<(SimConfig, Vec<PolicyReport>)> = Vec::new();
    for point in plan.points(&base) {
        let report = run_with_schedule(&point, &log, &schedule)?;
        runs.push((point, report.policies));
    }
    manifest.time("simulate", start.elapsed().as_secs_f64());

    let select = |keep: &dyn Fn(&SimConfig) -> bool| -> Vec<&PolicyReport> {
        runs.iter()
            .filter(|(p, _)| keep(p))
            .flat_map(|(_, r)| r.iter())
            .collect()
    };
    let chr_rows = select(&|p| p.f == base.f && p.xi == base.xi && plan.capacities.contains(&p.capacity_fraction));
    let js_rows = select(&|p| {
        p.capacity_fraction == base.capacity_fraction
            && ((p.xi == base.xi && plan.fs.contains(&p.f)) || (p.f == base.f && plan.xis.contains(&p.xi)))
    });
    let base_rows = select(&|p| p.capacity_fraction == base.capacity_fraction && p.f == base.f && p.xi == base.xi);

    manifest.emit("chr.csv", &chr_csv(chr_rows.iter().copied()))?;
    manifest.emit("js.csv", &js_csv(js_rows.iter().copied()))?;
    manifest.emit("budget_cdf.csv", &budget_cdf_csv(base_rows.iter().copied()))?;
    manifest.emit("fl_loss.csv", &fl_loss_csv(&schedule.fits))?;
    manifest.save()?;

    println!("{} events, {} configuration points", log.len(), runs.len());
    for r in &base_rows {
        println!("{:8} chr {:.4}  mean_js {:.4}", r.policy.name(), r.chr, r.mean_js);
    }
    Ok(())
}

fn eval_cr(cfg: &KvConfig) -> Result<(), Failure> {
    let suite = cfg.cr_suite()?;
    let seed: u64 = cfg.int("seed")?;
    let start = Instant::now();
    let instances = suite.generate(seed)?;
    let report = empirical_cr(&instances, seed, suite.slack)?;
    println!(
        "instances {}  worst OPT/ALG {:.6}  bound 1+ln(U/L) {:.6}  limit {:.6}  ({:.2}s)",
        report.instances,
        report.worst_ratio,
        report.bound,
        report.limit(),
        start.elapsed().as_secs_f64()
    );
    if report.passed() {
        Ok(())
    } else {
        Err(Failure::Violation(format!(
            "{} instance(s) exceed the competitive-ratio bound",
            report.violations
        )))
    }
}

fn report(out: &Path) -> Result<(), Failure> {
    let manifest = RunManifest::load(out)?;
    let stale = manifest.stale_outputs(out)?;
    for entry in &manifest.outputs {
        let path = out.join(&entry.file);
        let text = std::fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
        if entry.file.ends_with(".csv") && entry.file != "budget_cdf.csv" && entry.file != "fl_loss.csv" {
            println!("== {}", entry.file);
            print!("{text}");
        }
    }
    if !stale.is_empty() {
        return Err(Failure::Violation(format!("outputs changed since the run: {}", stale.join(", "))));
    }
    println!("{} outputs verified against {}", manifest.outputs.len(), MANIFEST_FILE);
    Ok(())
}
