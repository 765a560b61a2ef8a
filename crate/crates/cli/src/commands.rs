use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use cc_shoot::analysis::{check_solution, thresholds, CheckLimits, SolutionChecks};
use cc_shoot::continuation::{trace_branches, SweepStep};
use cc_shoot::ode::ProblemParams;
use cc_shoot::report::{
    grid_csv, lambda_tag, persist_step, persist_sweep_result, profile_csv, render_color_diagram,
    render_profile, verify_manifest, EmitFlags, RunConfig, RunWriter,
};
use cc_shoot::shooting::{search_window, solve_window, MeetingCell, SolutionRecord};
use serde::{Deserialize, Serialize};

use crate::args::{BoundsArgs, ScanArgs, TraceArgs, VerifyArgs};

/// Name of the file `solve` writes and `verify` reads.
pub const SOLUTIONS_FILE: &str = "solutions.json";

/// Outcome of a command that ran to completion.
pub enum Outcome {
    Success,
    NoSolution,
}

#[derive(Serialize, Deserialize)]
pub struct SolutionsFile {
    pub params: ProblemParams,
    pub solutions: Vec<SolutionRecord>,
}

fn scan_config(args: &ScanArgs) -> Result<RunConfig> {
    let mut cfg = args.common.config()?;
    args.window.apply(&mut cfg);
    if args.lambda.is_some() {
        cfg.problem.lambda = args.lambda;
    }
    cfg.validate()?;
    Ok(cfg)
}

pub fn scan(args: &ScanArgs) -> Result<Outcome> {
    let cfg = scan_config(args)?;
    let params = cfg.params(None)?;
    let window = cfg.scan_window()?;
    let settings = cfg.solve_settings()?;
    let search = search_window(&window, cfg.dense_spacing(), &params, &settings)?;
    let mut out = RunWriter::create(&cfg.output.dir, "scan", &cfg)?;
    let tag = lambda_tag(params.lambda);
    out.write_file(&format!("{tag}_coarse.csv"), grid_csv(&search.coarse)?.as_bytes())?;
    out.write_file(&format!("{tag}_dense.csv"), grid_csv(&search.dense)?.as_bytes())?;
    out.write_file(
        &format!("{tag}_coarse.svg"),
        render_color_diagram(&search.coarse, &[]).as_bytes(),
    )?;
    let roots: Vec<(f64, f64)> = search.roots.iter().map(|r| (r.du0, r.dv0)).collect();
    out.write_file(
        &format!("{tag}_dense.svg"),
        render_color_diagram(&search.dense, &roots).as_bytes(),
    )?;
    let meetings: &[MeetingCell] = &search.meetings;
    out.write_file(
        &format!("{tag}_meetings.json"),
        serde_json::to_string_pretty(meetings)?.as_bytes(),
    )?;
    out.finish()?;
    println!(
        "lambda = {}: {} coarse and {} dense vertices, {} meeting blocks, {} roots",
        params.lambda,
        search.coarse.evaluated_count(),
        search.dense.evaluated_count(),
        search.meetings.len(),
        search.roots.len()
    );
    for r in &search.roots {
        println!("root du0 = {:.10} dv0 = {:.10}", r.du0, r.dv0);
    }
    Ok(Outcome::Success)
}

pub fn solve(args: &ScanArgs) -> Result<Outcome> {
    let cfg = scan_config(args)?;
    let params = cfg.params(None)?;
    let window = cfg.scan_window()?;
    let settings = cfg.solve_settings()?;
    let solved = solve_window(&window, cfg.dense_spacing(), &params, &settings)?;
    let mut out = RunWriter::create(&cfg.output.dir, "solve", &cfg)?;
    let tag = lambda_tag(params.lambda);
    let records = solved.records();
    let roots: Vec<(f64, f64)> = records.iter().map(|r| (r.du0, r.dv0)).collect();
    out.write_file(
        &format!("{tag}_dense.svg"),
        render_color_diagram(&solved.search.dense, &roots).as_bytes(),
    )?;
    for (k, s) in solved.solutions.iter().enumerate() {
        out.write_file(
            &format!("profiles/{tag}_root{k}.csv"),
            profile_csv(&s.trajectory)?.as_bytes(),
        )?;
        out.write_file(
            &format!("profiles/{tag}_root{k}.svg"),
            render_profile(&s.trajectory).as_bytes(),
        )?;
    }
    let file = SolutionsFile {
        params,
        solutions: records.clone(),
    };
    out.write_file(SOLUTIONS_FILE, (serde_json::to_string_pretty(&file)? + "\n").as_bytes())?;
    out.finish()?;
    if records.is_empty() {
        eprintln!("no solution found in the window at lambda = {}", params.lambda);
        return Ok(Outcome::NoSolution);
    }
    for r in &records {
        println!(
            "du0 = {:.10} dv0 = {:.10} residue = {:.2e} sup_v = {:.6} sup_u = {:.6} J = {:.6}",
            r.du0,
            r.dv0,
            r.residue_max(),
            r.sup_v,
            r.sup_u,
            r.energy
        );
    }
    Ok(Outcome::Success)
}

pub fn trace(args: &TraceArgs) -> Result<Outcome> {
    let cfg = args.config()?;
    cfg.validate()?;
    let sweep = cfg.sweep_config()?;
    let base = cfg.params(Some(sweep.lambda_start))?;
    let settings = cfg.solve_settings()?;
    let emit = EmitFlags::from_config(&cfg);
    let mut out = RunWriter::create(&cfg.output.dir, "trace", &cfg)?;
    let mut so_far: Vec<SolutionRecord> = Vec::new();
    let result = trace_branches(&sweep, &base, &settings, |step: &SweepStep| {
        so_far.extend(step.records.iter().copied());
        let found: Vec<String> = step
            .records
            .iter()
            .map(|r| format!("{} sup_v = {:.6}", r.branch.name(), r.sup_v))
            .collect();
        eprintln!("lambda = {:.4}: {}", step.lambda, found.join(", "));
        persist_step(&mut out, step, &so_far, emit)
    })?;
    persist_sweep_result(&mut out, &result, emit)?;
    out.finish()?;
    println!(
        "lower branch: {} points, upper branch: {} points",
        result.lower.len(),
        result.upper.len()
    );
    match result.fold {
        Some(f) => println!(
            "lambda_bif = {:.6} (solutions at {:.6}, none at {:.6})",
            f.estimate, f.lo, f.hi
        ),
        None => println!("lambda_bif: no fold inside the range"),
    }
    Ok(Outcome::Success)
}

pub fn bounds(args: &BoundsArgs) -> Result<Outcome> {
    let rep = thresholds(args.p, args.q, args.r)?;
    if args.json {
        println!("{}", serde_json::to_string_pretty(&rep)?);
    } else {
        println!("T = {:.10}", rep.t);
        println!("hT = {:.10}", rep.h_t);
        println!("lambda0_basic = {:.10}", rep.lambda0_basic);
        println!("gamma = {:.10}", rep.gamma);
        println!("gamma_prime = {:.10}", rep.gamma_prime);
        println!("K_emb = {:.10}", rep.k_emb);
        println!("lambda0_improved = {:.10}", rep.lambda0_improved);
    }
    Ok(Outcome::Success)
}

fn print_checks(c: &SolutionChecks) {
    println!(
        "lambda = {} du0 = {:.10} dv0 = {:.10}: residue {:.2e}, symmetry {:.2e}, max at x = {:.6}, \
         {} critical point(s), residual orders {:.2}/{:.2}, min u {:.2e}, min v {:.2e}, J = {:.6} -> {}",
        c.lambda,
        c.du0,
        c.dv0,
        c.residue,
        c.relative_symmetry_defect,
        c.v_max_location,
        c.critical_points,
        c.residual_orders[0],
        c.residual_orders[1],
        c.min_u,
        c.min_v,
        c.energy,
        if c.passed() {
            "ok".to_string()
        } else {
            format!("FAILED ({})", c.failures().join(", "))
        }
    );
}

pub fn verify(args: &VerifyArgs) -> Result<Outcome> {
    let cfg = args.common.config()?;
    cfg.validate()?;
    let tol = cfg.tolerance()?;
    let limits = CheckLimits {
        eps: cfg.polish.eps,
        ..CheckLimits::default()
    };
    let mut failures = 0;
    let mut checked = 0;
    if let (Some(du0), Some(dv0), Some(lambda)) = (args.du0, args.dv0, args.lambda) {
        let c = check_solution(&cfg.params(Some(lambda))?, du0, dv0, &tol, &limits)?;
        print_checks(&c);
        checked += 1;
        failures += usize::from(!c.passed());
    } else if args.run.is_none() || args.solutions.is_some() {
        let path: PathBuf = args
            .solutions
            .clone()
            .unwrap_or_else(|| cfg.output.dir.join(SOLUTIONS_FILE));
        let text = std::fs::read_to_string(&path)
            .with_context(|| format!("reading {}", path.display()))?;
        let file: SolutionsFile =
            serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
        for r in &file.solutions {
            let params = file.params.with_lambda(r.lambda);
            let c = check_solution(&params, r.du0, r.dv0, &tol, &limits)?;
            print_checks(&c);
            checked += 1;
            failures += usize::from(!c.passed());
        }
    }
    if let Some(dir) = &args.run {
        let bad = verify_manifest(dir)?;
        for path in &bad {
            println!("manifest mismatch: {path}");
        }
        println!("manifest {}: {} mismatched file(s)", dir.display(), bad.len());
        failures += bad.len();
    }
    if failures > 0 {
        bail!("{failures} check(s) failed out of {checked} solution(s)");
    }
    Ok(Outcome::Success)
}
