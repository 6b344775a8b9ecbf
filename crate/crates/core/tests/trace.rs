mod common;

use std::collections::BTreeMap;

use proptest::prelude::*;
use rand::Rng;

use ppvf_core::predictor::{LatentMatrix, ModelParams};
use ppvf_core::trace::{
    generate_synthetic, load_trace, parse_trace, partition_by_edge, EventLog, RequestEvent, SkewedTraceConfig,
    SyntheticSpec,
};

#[test]
fn fixture_of_100_lines_loads_sorted() {
    let mut r = common::rng("trace-fixture", 0);
    let mut tuples = Vec::new();
    let mut text = String::from("# edge,user,video,timestamp\n");
    for _ in 0..100 {
        let (e, u, v) = (r.gen_range(0..3usize), r.gen_range(0..50u64), r.gen_range(0..40usize));
        let t: f64 = r.gen_range(0.0..200.0);
        text.push_str(&format!("{e},{u},{v},{t}\n"));
        tuples.push((e, u, v, t.floor()));
    }
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("fixture.csv");
    std::fs::write(&path, &text).unwrap();
    let log = load_trace(&path, 1.0).unwrap();
    assert_eq!(log.len(), 100);
    // Reference: stable sort of the parsed tuples by floored timestamp.
    tuples.sort_by(|a, b| a.3.partial_cmp(&b.3).unwrap());
    let got: Vec<_> = log
        .events()
        .iter()
        .map(|e| (e.edge_id, e.user_id, e.video_id, e.timestamp))
        .collect();
    assert_eq!(got, tuples);
    assert_eq!(log.catalog_size(), 1 + tuples.iter().map(|t| t.2).max().unwrap());
}

#[test]
fn quantization_examples() {
    let log = parse_trace("0,7,3,0.4\n0,7,3,1.9\n", std::path::Path::new("x"), 1.0).unwrap();
    let ts: Vec<f64> = log.events().iter().map(|e| e.timestamp).collect();
    assert_eq!(ts, vec![0.0, 1.0]);
    let log = parse_trace("2,1,5,10.0\n", std::path::Path::new("x"), 1.0).unwrap();
    assert_eq!(log.catalog_size(), 6);
    assert_eq!(log.events()[0].timestamp, 10.0);
}

#[test]
fn poisson_reduction_without_excitation() {
    let (b, horizon, seeds) = (0.4, 50.0, 200u64);
    let params = ModelParams::new(
        vec![b, b],
        LatentMatrix::zeros(2, 1),
        LatentMatrix::zeros(2, 1),
        0.1,
    )
    .unwrap();
    let mut total = 0.0;
    for seed in 0..seeds {
        let spec = SyntheticSpec {
            catalog_size: 2,
            edge_count: 2,
            horizon,
            ground_truth: params.clone(),
            base_rate_scale: 1.0,
            users_per_edge: 3,
            rng_seed: seed,
        };
        let log = generate_synthetic(&spec).unwrap();
        total += log.events().iter().filter(|e| e.edge_id == 0 && e.video_id == 0).count() as f64;
    }
    let mean = total / seeds as f64;
    let expected = b * horizon;
    let se = (expected / seeds as f64).sqrt();
    assert!((mean - expected).abs() < 3.0 * se, "mean {mean} vs {expected} (se {se})");
}

#[test]
fn synthetic_generation_is_deterministic_across_thread_counts() {
    let spec = SkewedTraceConfig {
        catalog_size: 50,
        edge_count: 4,
        horizon: 200.0,
        ..SkewedTraceConfig::default()
    }
    .spec()
    .unwrap();
    let run = |threads| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| generate_synthetic(&spec).unwrap())
    };
    let a = run(1);
    let b = run(3);
    assert!(!a.is_empty());
    assert_eq!(a, b);
    assert_eq!(a.to_trace_string(), b.to_trace_string());
}

#[test]
fn written_trace_parses_back() {
    let spec = SkewedTraceConfig {
        catalog_size: 50,
        edge_count: 5,
        horizon: 720.0,
        ..SkewedTraceConfig::default()
    }
    .spec()
    .unwrap();
    let log = generate_synthetic(&spec).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("t.csv");
    log.write(&path).unwrap();
    // Synthetic timestamps are not hour-aligned; a tiny quantum keeps them.
    let back = load_trace(&path, 1e-9).unwrap();
    assert_eq!(back.len(), log.len());
    assert!(back.catalog_size() <= 50);
    assert_eq!(back.edge_count(), 5);
}

fn log_strategy() -> impl Strategy<Value = EventLog> {
    prop::collection::vec((0usize..4, 0u64..10, 0usize..6, 0u32..500), 0..120).prop_map(|raw| {
        let events = raw
            .into_iter()
            .map(|(e, u, v, t)| RequestEvent::new(e, u, v, f64::from(t) * 0.5))
            .collect();
        EventLog::new(events, 6, 4, 250.0).unwrap()
    })
}

proptest! {
    #[test]
    fn partition_is_a_bijection(log in log_strategy()) {
        let parts = partition_by_edge(&log);
        prop_assert_eq!(parts.len(), 4);
        let mut seen: BTreeMap<(usize, u64, usize, u64), i64> = BTreeMap::new();
        for e in log.events() {
            *seen.entry((e.edge_id, e.user_id, e.video_id, e.timestamp.to_bits())).or_default() += 1;
        }
        for (edge, part) in parts.iter().enumerate() {
            prop_assert!(part.events().iter().all(|e| e.edge_id == edge));
            for e in part.events() {
                *seen.entry((e.edge_id, e.user_id, e.video_id, e.timestamp.to_bits())).or_default() -= 1;
            }
        }
        prop_assert!(seen.values().all(|&c| c == 0));
    }

    #[test]
    fn quantization_is_idempotent(log in log_strategy()) {
        prop_assume!(!log.is_empty());
        let once = parse_trace(&log.to_trace_string(), std::path::Path::new("a"), 1.0).unwrap();
        let twice = parse_trace(&once.to_trace_string(), std::path::Path::new("b"), 1.0).unwrap();
        prop_assert_eq!(once.events(), twice.events());
    }
}
