//! Lambda continuation of the two branches, the fold, and persistence of a
//! sweep.

use cc_shoot::analysis::{check_solution, CheckLimits};
use cc_shoot::continuation::{trace_branches, SweepConfig, SweepStep};
use cc_shoot::ode::{ProblemParams, Tolerance};
use cc_shoot::report::{
    parse_bifurcation_csv, persist_step, persist_sweep_result, read_manifest, verify_manifest, EmitFlags,
    RunConfig, RunWriter, BIFURCATION_CSV,
};
use cc_shoot::shooting::{BranchLabel, ScanWindow, SolutionRecord, SolveSettings, Spacing};

/// Seed windows tight around the lambda = 10 roots, to keep the test quick.
fn quick_config(start: f64, end: f64, step: f64) -> SweepConfig {
    SweepConfig {
        lambda_start: start,
        lambda_end: end,
        lambda_step: step,
        seed_lambda: 10.0,
        lower_window: ScanWindow::new(0.5, 1.5, 0.0, 0.1, 0.05).unwrap(),
        upper_window: ScanWindow::new(42.0, 46.0, 15.0, 18.0, 0.25).unwrap(),
        seed_dense: Spacing::uniform(0.005),
        ..SweepConfig::default()
    }
}

#[test]
fn both_branches_are_followed_and_stay_ordered() {
    let cfg = quick_config(8.0, 12.0, 1.0);
    let mut steps = Vec::new();
    let result = trace_branches(&cfg, &ProblemParams::reference(10.0), &SolveSettings::default(), |s: &SweepStep| {
        steps.push(s.lambda);
        Ok(())
    })
    .unwrap();
    assert_eq!(result.lower.lambdas(), vec![8.0, 9.0, 10.0, 11.0, 12.0]);
    assert_eq!(result.upper.lambdas(), result.lower.lambdas());
    assert!(result.unlabeled.is_empty());
    assert!(result.fold.is_none());
    let mut sorted = steps.clone();
    sorted.sort_by(f64::total_cmp);
    assert_eq!(sorted, vec![8.0, 9.0, 10.0, 11.0, 12.0]);
    let tol = Tolerance::default();
    for (lo, up) in result.lower.records.iter().zip(&result.upper.records) {
        assert!(lo.sup_v < up.sup_v, "{lo:?} {up:?}");
        for r in [lo, up] {
            let c = check_solution(&ProblemParams::reference(r.lambda), r.du0, r.dv0, &tol, &CheckLimits::default())
                .unwrap();
            assert!(c.passed(), "{:?}: {:?}", c.failures(), c);
        }
    }
    // the lower branch grows with lambda, the upper one shrinks
    let lo = &result.lower.records;
    let up = &result.upper.records;
    assert!(lo.windows(2).all(|w| w[0].sup_v < w[1].sup_v));
    assert!(up.windows(2).all(|w| w[0].sup_v > w[1].sup_v));
}

#[test]
fn fold_is_bracketed_between_the_last_pair_and_the_first_empty_lambda() {
    let mut cfg = quick_config(48.0, 50.0, 0.5);
    cfg.seed_lambda = 48.0;
    cfg.lower_window = ScanWindow::new(25.0, 27.0, 5.0, 6.5, 0.1).unwrap();
    cfg.upper_window = ScanWindow::new(33.0, 35.0, 8.0, 9.5, 0.1).unwrap();
    cfg.fallback = ScanWindow::new(20.0, 40.0, 3.0, 12.0, 0.25).unwrap();
    let result = trace_branches(&cfg, &ProblemParams::reference(48.0), &SolveSettings::default(), |_| Ok(())).unwrap();
    assert_eq!(result.lower.lambdas(), vec![48.0, 48.5]);
    assert_eq!(result.upper.lambdas(), vec![48.0, 48.5]);
    let fold = result.fold.expect("fold inside the range");
    assert!(fold.lo >= 48.5 && fold.hi <= 49.0 && fold.lo < fold.hi);
    assert!(fold.estimate >= fold.lo && fold.estimate <= fold.hi);
    assert_eq!(result.lambda_bif(), Some(fold.estimate));
    assert!((fold.estimate - 49.0).abs() < 0.5);
    // bisection refined the bracket well below the sweep step
    assert!(fold.hi - fold.lo < 1e-2);
}

#[test]
fn persisted_sweep_is_complete_and_consistent() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = quick_config(9.0, 11.0, 1.0);
    let emit = EmitFlags {
        grids: true,
        profiles: true,
        bifurcation: true,
    };
    let mut out = RunWriter::create(dir.path(), "trace", &RunConfig::default()).unwrap();
    let mut so_far: Vec<SolutionRecord> = Vec::new();
    let result = trace_branches(&cfg, &ProblemParams::reference(10.0), &SolveSettings::default(), |s: &SweepStep| {
        so_far.extend(s.records.iter().copied());
        persist_step(&mut out, s, &so_far, emit)
    })
    .unwrap();
    persist_sweep_result(&mut out, &result, emit).unwrap();
    out.finish().unwrap();

    assert!(verify_manifest(dir.path()).unwrap().is_empty());
    let manifest = read_manifest(dir.path()).unwrap();
    assert!(manifest.complete);
    assert_eq!(manifest.lambdas.len(), 3);
    assert!(manifest.lambdas.iter().all(|l| l.lower && l.upper && l.solutions == 2));
    let names: Vec<&str> = manifest.files.iter().map(|f| f.path.as_str()).collect();
    for expected in [
        BIFURCATION_CSV,
        "bifurcation.svg",
        "sweep.json",
        "profiles/lambda_10.0000_lower.csv",
        "profiles/lambda_10.0000_upper.svg",
    ] {
        assert!(names.contains(&expected), "{expected} missing from {names:?}");
    }
    assert!(names.iter().any(|n| n.starts_with("grids/lambda_9.0000_")));

    let rows = parse_bifurcation_csv(&std::fs::read_to_string(dir.path().join(BIFURCATION_CSV)).unwrap()).unwrap();
    assert_eq!(rows.len(), 6);
    for pair in rows.chunks(2) {
        assert_eq!(pair[0].lambda, pair[1].lambda);
        assert_eq!(pair[0].branch, BranchLabel::Lower);
        assert_eq!(pair[1].branch, BranchLabel::Upper);
        assert!(pair[0].sup_v < pair[1].sup_v);
    }
}
