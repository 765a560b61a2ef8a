//! Property-based invariants of the integrator, labeling and tables.

use cc_shoot::analysis::{gamma_fn, h_profile, threshold_t};
use cc_shoot::continuation::{label_branches, BranchMemory};
use cc_shoot::ode::{integrate, terminal_state, ProblemParams, Tolerance};
use cc_shoot::report::{bifurcation_csv, parse_bifurcation_csv, BifurcationRow, RunConfig};
use cc_shoot::shooting::{BranchLabel, SolutionRecord};
use proptest::prelude::*;

fn record(lambda: f64, du0: f64, dv0: f64, sup_v: f64) -> SolutionRecord {
    SolutionRecord {
        lambda,
        du0,
        dv0,
        sup_v,
        sup_u: 2.0 * sup_v,
        min_u: 0.0,
        min_v: 0.0,
        energy: -sup_v,
        residue_u1: 1e-9,
        residue_v1: -1e-9,
        branch: BranchLabel::Unlabeled,
        symmetry_defect: 1e-8,
        iterations: 3,
    }
}

#[test]
fn zero_slopes_give_the_zero_trajectory() {
    let tol = Tolerance::default();
    for lambda in [0.5, 10.0, 49.0] {
        let traj = integrate(&ProblemParams::reference(lambda), 0.0, 0.0, &tol).unwrap();
        for s in &traj.samples {
            assert!(s.u.abs() <= tol.abs && s.v.abs() <= tol.abs && s.w.abs() <= tol.abs && s.z.abs() <= tol.abs);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn tightening_the_tolerance_stays_within_the_coarse_error_estimate(
        lambda in 0.5f64..50.0,
        du0 in 0.0f64..45.0,
        dv0 in 0.0f64..18.0,
    ) {
        let params = ProblemParams::reference(lambda);
        let coarse_tol = Tolerance::default();
        let fine_tol = coarse_tol.scaled(1e-2);
        let coarse = terminal_state(&params, du0, dv0, &coarse_tol);
        let fine = terminal_state(&params, du0, dv0, &fine_tol);
        if let (Ok(c), Ok(f)) = (coarse, fine) {
            let change = (c.state[0] - f.state[0]).abs().max((c.state[1] - f.state[1]).abs());
            prop_assert!(
                change <= c.stats.error_estimate.max(coarse_tol.abs),
                "change {change:e} estimate {:e}", c.stats.error_estimate
            );
        }
    }

    #[test]
    fn gamma_functional_equation(z in 0.1f64..20.0) {
        let lhs = gamma_fn(z + 1.0).unwrap();
        let rhs = z * gamma_fn(z).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-10 * lhs.abs());
    }

    #[test]
    fn threshold_maximizes_the_profile(
        p in 1.5f64..5.0,
        q in 1.0f64..3.0,
        r in 0.05f64..0.3,
        s in 0.01f64..5.0,
    ) {
        prop_assume!(p * q > 1.0 && q * r < 1.0 && r < 1.0 && p > 1.0);
        let t = threshold_t(p, q, r).unwrap();
        prop_assert!(h_profile(t, p, q, r) >= h_profile(s * t, p, q, r) - 1e-12 * h_profile(t, p, q, r).abs());
    }

    #[test]
    fn labeled_lower_never_exceeds_labeled_upper(
        sups in prop::collection::vec(1e-6f64..10.0, 2..6),
    ) {
        let records: Vec<SolutionRecord> = sups
            .iter()
            .enumerate()
            .map(|(k, &s)| record(10.0, k as f64 + 1.0, s / 3.0, s))
            .collect();
        let out = label_branches(&records, &BranchMemory::default());
        prop_assert_eq!(out.len(), records.len());
        let lower: Vec<_> = out.iter().filter(|r| r.branch == BranchLabel::Lower).collect();
        let upper: Vec<_> = out.iter().filter(|r| r.branch == BranchLabel::Upper).collect();
        prop_assert_eq!(lower.len(), 1);
        prop_assert_eq!(upper.len(), 1);
        for r in &out {
            prop_assert!(lower[0].sup_v <= r.sup_v && r.sup_v <= upper[0].sup_v);
        }
    }

    #[test]
    fn bifurcation_table_round_trips(
        rows in prop::collection::vec((1.0f64..50.0, 1e-4f64..50.0, 1e-6f64..20.0, 1e-6f64..6.0, 0u8..3), 0..12),
    ) {
        let records: Vec<SolutionRecord> = rows
            .iter()
            .map(|&(l, du, dv, s, b)| {
                let mut r = record(l, du, dv, s);
                r.branch = [BranchLabel::Lower, BranchLabel::Upper, BranchLabel::Unlabeled][b as usize];
                r
            })
            .collect();
        let text = bifurcation_csv(&records).unwrap();
        let parsed = parse_bifurcation_csv(&text).unwrap();
        prop_assert_eq!(parsed.len(), records.len());
        for w in parsed.windows(2) {
            prop_assert!(w[0].lambda <= w[1].lambda);
        }
        for r in &records {
            let row = BifurcationRow::from(r);
            prop_assert!(parsed.contains(&row), "{:?} lost", row);
        }
        prop_assert_eq!(bifurcation_csv(&records).unwrap(), text);
    }

    #[test]
    fn config_round_trips_through_toml(
        coarse in 0.01f64..1.0,
        ratio in 2.0f64..50.0,
        eps_exp in 5i32..9,
        lambda in prop::option::of(0.1f64..60.0),
    ) {
        let mut cfg = RunConfig::default();
        cfg.grid.coarse = coarse;
        cfg.grid.dense = coarse / ratio;
        cfg.polish.eps = 10f64.powi(-eps_exp);
        cfg.problem.lambda = lambda;
        let text = cfg.to_toml().unwrap();
        prop_assert_eq!(RunConfig::from_toml(&text).unwrap(), cfg);
    }
}
