use brunovsky::{
    kappa_cond, reduce_to_staircase, apply_triple, brunovsky_target, LinearSystem, ProposedOptions, TransformTriple,
};
use brunovsky_bench::output::{read_csv, write_csv};
use brunovsky_bench::{
    evaluate_triple, generate_feedback_system, generate_system, run_benchmark, run_trial, write_all, BenchConfig,
    GeneratorKind, Method,
};
use nalgebra::DMatrix;
use tempfile::TempDir;

const MU: [usize; 4] = [5, 5, 3, 2];

fn identity_triple(mu: &[usize]) -> TransformTriple<f64> {
    let (n, m) = (mu.iter().sum(), mu.len());
    TransformTriple::new(DMatrix::identity(n, n), DMatrix::zeros(m, n), DMatrix::identity(m, m), mu.to_vec())
}

#[test]
fn identity_transformation_returns_brunovsky_pair() {
    let target = brunovsky_target::<f64>(&MU).unwrap();
    let (a, b) = apply_triple(&target.a, &target.b, &identity_triple(&MU)).unwrap();
    assert_eq!(a, target.a);
    assert_eq!(b, target.b);

    let sys = LinearSystem::new(target.a.clone(), target.b.clone()).unwrap();
    let metrics = evaluate_triple(&sys, &identity_triple(&MU), &MU);
    assert_eq!(metrics.total_error(), 0.0);
    // The nilpotency metric needs the fifth power: the fourth is not zero.
    assert_eq!(metrics.nilpotency, 0.0);
    assert!(target.a.pow(4).norm() > 0.0);
}

#[test]
fn state_generator_prescribes_condition_and_keeps_indices() {
    for (seed, cond) in [(1u64, 1e6), (2, 1e3), (3, 1.0)] {
        let g = generate_system(&MU, cond, seed).unwrap();
        let k = kappa_cond(&g.truth.t);
        assert!((k / cond - 1.0).abs() <= 0.01, "seed {seed}: kappa {k:e}");
        if cond <= 1e3 {
            let idx = reduce_to_staircase(&g.system).unwrap().index_summary().unwrap();
            assert_eq!(idx.mu, MU);
        }
    }
}

#[test]
fn feedback_generator_hits_target_and_keeps_indices() {
    for (seed, cond) in [(4u64, 1e3), (5, 1e6), (6, 1e9)] {
        let g = generate_feedback_system(&MU, cond, 10.0, seed).unwrap();
        let k = brunovsky_bench::generator::ctrb_condition(&g.system);
        assert!((k.ln() - cond.ln()).abs() <= 0.05, "seed {seed}: kappa(C) {k:e}");
        assert!((kappa_cond(&g.truth.t) / 10.0 - 1.0).abs() <= 0.01);
        let idx = reduce_to_staircase(&g.system).unwrap().index_summary().unwrap();
        assert_eq!(idx.mu, MU);
    }
}

#[test]
fn ground_truth_scores_as_exact() {
    for seed in 0..5 {
        let g = generate_feedback_system(&MU, 1e4, 10.0, seed).unwrap();
        let m = evaluate_triple(&g.system, &g.truth, &MU);
        assert!(m.err_ab <= 1e-10 && m.err_bb <= 1e-10 && m.nilpotency <= 1e-10, "{m:?}");
    }
}

#[test]
fn proposed_on_well_conditioned_draw() {
    let g = generate_system(&MU, 10.0, 17).unwrap();
    let m = run_trial(&g.system, &MU, Method::Proposed, &ProposedOptions::default()).unwrap();
    assert!(m.total_error() <= 1e-8, "{m:?}");
}

#[test]
fn benign_single_trial_methods_agree() {
    let config = BenchConfig {
        trials: 1,
        cond_range: (1.0, 1.0),
        generator: GeneratorKind::State,
        ..BenchConfig::default()
    };
    let result = run_benchmark(&config).unwrap();
    assert_eq!(result.records.len(), 2);
    for r in &result.records {
        assert!(!r.failed);
        assert!(r.total_error() <= 1e-8 && r.nilpotency <= 1e-8, "{r:?}");
    }
    assert_eq!(result.records[0].cond_ctrb, result.records[1].cond_ctrb);
}

#[test]
fn csv_layout_and_round_trip() {
    let config = BenchConfig { trials: 3, ..BenchConfig::default() };
    let result = run_benchmark(&config).unwrap();
    let dir = TempDir::new().unwrap();
    let files = write_all(&result, dir.path()).unwrap();
    let text = std::fs::read_to_string(&files.csv).unwrap();
    let header = text.lines().next().unwrap();
    assert_eq!(header, "trial,seed,method,cond_ctrb,cond_TG,err_Ab,err_Bb,nilpotency,wall_ms,failed");
    assert_eq!(text.lines().count(), 1 + 3 * 2);
    assert_eq!(read_csv(&files.csv).unwrap(), result.records);

    let copy = dir.path().join("copy.csv");
    write_csv(&result.records, &copy).unwrap();
    assert_eq!(std::fs::read_to_string(copy).unwrap(), text);

    let summary: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(files.summary).unwrap()).unwrap();
    assert_eq!(summary["config"]["trials"], 3);
    assert!(std::fs::read_to_string(files.plot).unwrap().contains("bench.csv"));
}

#[test]
fn seeded_runs_are_identical() {
    let config = BenchConfig { trials: 4, seed: 99, ..BenchConfig::default() };
    let dir = TempDir::new().unwrap();
    let texts: Vec<String> = ["a", "b"]
        .iter()
        .map(|name| {
            let files = write_all(&run_benchmark(&config).unwrap(), &dir.path().join(name)).unwrap();
            std::fs::read_to_string(files.csv).unwrap()
        })
        .collect();
    assert_eq!(texts[0], texts[1]);
    let other = run_benchmark(&BenchConfig { seed: 100, ..config.clone() }).unwrap();
    assert_ne!(read_csv(&dir.path().join("a").join("bench.csv")).unwrap(), other.records);
}

#[test]
fn invalid_configs_are_rejected() {
    let bad = [
        BenchConfig { indices: vec![5, 5, 3], ..BenchConfig::default() },
        BenchConfig { indices: vec![5, 5, 3, 1], ..BenchConfig::default() },
        BenchConfig { indices: vec![2, 5, 5, 3], ..BenchConfig::default() },
        BenchConfig { trials: 0, ..BenchConfig::default() },
        BenchConfig { cond_range: (1e6, 1e2), ..BenchConfig::default() },
    ];
    for c in bad {
        assert!(c.validate().is_err(), "{c:?}");
    }
}
