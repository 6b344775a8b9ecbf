mod common;

use ppvf_core::federation::TrainConfig;
use ppvf_core::sim::{chr_csv, fit_schedule, js_csv, run_with_schedule, Bounds};
use ppvf_core::trace::{generate_synthetic, SkewedTraceConfig};
use ppvf_core::{run_simulation, EventLog, Policy, RequestEvent, SimConfig, ThresholdConfig};

fn small_config() -> SimConfig {
    SimConfig {
        init_horizon: 48.0,
        test_horizon: 200.0,
        latent_dim: 3,
        capacity_fraction: 0.05,
        train: TrainConfig {
            max_iters: 5,
            ..TrainConfig::default()
        },
        ..SimConfig::default()
    }
}

fn small_trace(seed: u64) -> EventLog {
    let spec = SkewedTraceConfig {
        catalog_size: 80,
        edge_count: 3,
        horizon: 200.0,
        base_rate: 2.0,
        seed,
        ..SkewedTraceConfig::default()
    }
    .spec()
    .unwrap();
    generate_synthetic(&spec).unwrap()
}

#[test]
fn repeated_single_video_hits_after_first_miss() {
    let n = 40;
    let events: Vec<RequestEvent> = (0..n).map(|k| RequestEvent::new(0, 1, 0, 50.0 + k as f64)).collect();
    let log = EventLog::new(events, 3, 1, 100.0).unwrap();
    let cfg = SimConfig {
        init_horizon: 10.0,
        test_horizon: 100.0,
        capacity_fraction: 1.0,
        latent_dim: 2,
        ..SimConfig::default()
    };
    let report = run_simulation(&cfg, &log).unwrap();
    for p in &report.policies {
        assert_eq!(p.requests, n as u64, "{}", p.policy);
        assert_eq!(p.hits, n as u64 - 1, "{}", p.policy);
        assert!((p.chr - (n as f64 - 1.0) / n as f64).abs() < 1e-15);
    }
}

#[test]
fn zero_budget_disables_prefetching() {
    let log = small_trace(3);
    let cfg = SimConfig {
        xi: 0.0,
        record_fetches: true,
        policies: vec![Policy::Ppvf, Policy::Sage, Policy::Bestfit],
        ..small_config()
    };
    let report = run_simulation(&cfg, &log).unwrap();
    let base = &report.policies[0];
    assert!(base.requests > 0);
    for p in &report.policies {
        assert_eq!(p.hits, base.hits);
        assert_eq!(p.edges, base.edges);
        assert_eq!(p.fetch_records, base.fetch_records);
        for r in &p.fetch_records {
            assert!(r.prefetched.is_empty());
            assert_eq!(r.fetched, vec![r.viewed]);
        }
        assert!(p.edges.iter().all(|e| e.charged == 0.0));
    }
}

#[test]
fn fetched_videos_are_viewed_or_prefetched() {
    let log = small_trace(5);
    let cfg = SimConfig {
        record_fetches: true,
        ..small_config()
    };
    let report = run_simulation(&cfg, &log).unwrap();
    for p in &report.policies {
        let misses: u64 = p.edges.iter().map(|e| e.misses).sum();
        assert_eq!(p.fetch_records.len() as u64, misses);
        assert_eq!(p.requests, p.hits + misses);
        for r in &p.fetch_records {
            assert_eq!(r.fetched[0], r.viewed);
            assert!(r.prefetched.len() <= cfg.f);
            if !p.policy.prefetches() {
                assert!(r.prefetched.is_empty());
            }
            let mut distinct = r.fetched.clone();
            distinct.sort_unstable();
            distinct.dedup();
            assert_eq!(distinct.len(), r.fetched.len());
            assert!(r.fetched[1..].iter().all(|v| r.prefetched.contains(v)));
        }
        for residuals in &p.residuals {
            assert!(residuals.iter().all(|&x| (0.0..=1.0).contains(&x)));
        }
        assert!((0.0..=1.0).contains(&p.chr));
        assert!((0.0..=1.0).contains(&p.mean_js));
    }
    let ppvf = report.policy(Policy::Ppvf).unwrap();
    assert!(ppvf.edges.iter().any(|e| e.prefetched > 0));
}

#[test]
fn report_is_independent_of_thread_count() {
    let log = small_trace(7);
    let cfg = SimConfig {
        record_fetches: true,
        ..small_config()
    };
    let run = |threads| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| run_simulation(&cfg, &log).unwrap())
    };
    let a = run(1);
    let b = run(4);
    assert_eq!(a, b);
    assert_eq!(chr_csv(&a.policies), chr_csv(&b.policies));
    assert_eq!(js_csv(&a.policies), js_csv(&b.policies));
}

#[test]
fn schedule_is_shared_across_policy_subsets() {
    let log = small_trace(9);
    let cfg = small_config();
    let schedule = fit_schedule(&cfg, &log).unwrap();
    let times: Vec<f64> = schedule.fits.iter().map(|f| f.t_theta).collect();
    assert_eq!(times, vec![48.0, 96.0, 144.0, 192.0]);
    let all = run_with_schedule(&cfg, &log, &schedule).unwrap();
    let only = run_with_schedule(
        &SimConfig {
            policies: vec![Policy::Bestfit],
            ..cfg.clone()
        },
        &log,
        &schedule,
    )
    .unwrap();
    assert_eq!(only.policies[0], *all.policy(Policy::Bestfit).unwrap());
}

#[test]
fn fixed_bounds_are_accepted() {
    let log = small_trace(11);
    let cfg = SimConfig {
        bounds: Bounds::Fixed(ThresholdConfig::new(1e-3, 10.0).unwrap()),
        policies: vec![Policy::Ppvf],
        ..small_config()
    };
    let report = run_simulation(&cfg, &log).unwrap();
    assert!(report.policies[0].requests > 0);
}

#[test]
fn empty_test_period_reports_zero() {
    let events = vec![RequestEvent::new(0, 0, 1, 2.0), RequestEvent::new(0, 0, 2, 3.0)];
    let log = EventLog::new(events, 4, 1, 100.0).unwrap();
    let cfg = SimConfig {
        init_horizon: 10.0,
        test_horizon: 100.0,
        latent_dim: 2,
        ..SimConfig::default()
    };
    let report = run_simulation(&cfg, &log).unwrap();
    for p in &report.policies {
        assert_eq!(p.requests, 0);
        assert_eq!(p.chr, 0.0);
        assert_eq!(p.users, 0);
    }
}
