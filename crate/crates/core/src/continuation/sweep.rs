use serde::{Deserialize, Serialize};

use super::branch::{label_branches, relative_distance, Branch, BranchMemory};
use crate::error::{Error, Result};
use crate::ode::ProblemParams;
use crate::shooting::{
    describe_root, escalating_meetings, polish_clusters, scan_grid, search_window, BranchLabel,
    Root, ScanWindow, SolutionDetail, SolutionRecord, SolveSettings, Spacing, WindowSearch,
};

/// Roots from overlapping windows closer than this (relative distance) are
/// one root.
const MERGE_DISTANCE: f64 = 1e-4;

// Lattice points within this fraction of a step count as reached.
const LATTICE_SNAP: f64 = 1e-9;

/// Parameters of a lambda sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub lambda_start: f64,
    pub lambda_end: f64,
    pub lambda_step: f64,
    /// Lambda at which the initial windows are searched. When it lies outside
    /// the sweep range the branches are first continued, unrecorded, to the
    /// nearest end of the range.
    pub seed_lambda: f64,
    /// Initial windows, one per branch, with their coarse spacing.
    pub lower_window: ScanWindow,
    pub upper_window: ScanWindow,
    /// Dense spacing used with the initial windows.
    pub seed_dense: Spacing,
    /// Window half-width as a multiple of the predicted step of the root.
    pub inflation: f64,
    /// Floor on the half-width of a tracking window, relative to the root
    /// coordinate (a log-scale half-width).
    pub min_half_width: f64,
    /// Coarse cells per axis of a tracking window.
    pub cells: usize,
    /// Dense subdivisions of each coarse cell edge on a tracking window.
    pub dense_factor: usize,
    /// Times a tracking window is doubled when its branch is not found.
    pub expansions: usize,
    /// Searched at its own coarse spacing when a live branch is lost, before
    /// the branch is declared dead at that lambda.
    pub fallback: ScanWindow,
    /// Bisection steps refining the fold bracket.
    pub bisection_steps: usize,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            lambda_start: 1.0,
            lambda_end: 50.0,
            lambda_step: 0.5,
            seed_lambda: 10.0,
            lower_window: ScanWindow {
                du_min: 0.0,
                du_max: 5.0,
                dv_min: 0.0,
                dv_max: 1.0,
                spacing: Spacing::uniform(0.1),
            },
            upper_window: ScanWindow {
                du_min: 30.0,
                du_max: 60.0,
                dv_min: 5.0,
                dv_max: 30.0,
                spacing: Spacing::uniform(0.1),
            },
            seed_dense: Spacing::uniform(0.005),
            inflation: 1.5,
            min_half_width: 0.05,
            cells: 16,
            dense_factor: 16,
            expansions: 3,
            fallback: ScanWindow {
                du_min: 0.0,
                du_max: 100.0,
                dv_min: 0.0,
                dv_max: 100.0,
                spacing: Spacing::uniform(0.1),
            },
            bisection_steps: 12,
        }
    }
}

impl SweepConfig {
    pub fn validate(&self) -> Result<()> {
        let finite = [
            self.lambda_start,
            self.lambda_end,
            self.lambda_step,
            self.seed_lambda,
            self.inflation,
            self.min_half_width,
        ];
        if !finite.iter().all(|x| x.is_finite()) {
            return Err(Error::Config(format!("sweep has non-finite entries: {self:?}")));
        }
        if !(self.lambda_step > 0.0) {
            return Err(Error::Config(format!(
                "lambda_step must be positive, got {}",
                self.lambda_step
            )));
        }
        if !(self.lambda_start >= 0.0 && self.seed_lambda >= 0.0) {
            return Err(Error::Config(format!(
                "lambda_start ({}) and seed_lambda ({}) must be nonnegative",
                self.lambda_start, self.seed_lambda
            )));
        }
        if self.lambda_start > self.lambda_end {
            return Err(Error::Config(format!(
                "lambda_start ({}) must not exceed lambda_end ({})",
                self.lambda_start, self.lambda_end
            )));
        }
        if !(self.inflation > 0.0 && self.min_half_width > 0.0) {
            return Err(Error::Config(format!(
                "inflation ({}) and min_half_width ({}) must be positive",
                self.inflation, self.min_half_width
            )));
        }
        if self.cells < 2 || self.dense_factor < 2 {
            return Err(Error::Config(format!(
                "cells ({}) and dense_factor ({}) must be at least 2",
                self.cells, self.dense_factor
            )));
        }
        for (name, w) in [
            ("lower_window", &self.lower_window),
            ("upper_window", &self.upper_window),
            ("fallback", &self.fallback),
        ] {
            w.validate()
                .map_err(|e| Error::Config(format!("{name}: {e}")))?;
        }
        let (c, d) = (self.lower_window.spacing, self.seed_dense);
        if !(d.du > 0.0 && d.dv > 0.0 && d.du < c.du && d.dv < c.dv) {
            return Err(Error::Config(format!(
                "seed_dense ({}, {}) must be positive and finer than the window spacing ({}, {})",
                d.du, d.dv, c.du, c.dv
            )));
        }
        Ok(())
    }

    /// The recorded lambda values: start, start + step, ..., up to end.
    pub fn lambdas(&self) -> Vec<f64> {
        let n = ((self.lambda_end - self.lambda_start) / self.lambda_step + LATTICE_SNAP).floor();
        (0..=n as usize)
            .map(|k| self.lambda_start + k as f64 * self.lambda_step)
            .collect()
    }
}

/// Everything computed at one lambda of the sweep.
#[derive(Debug, Clone)]
pub struct SweepStep {
    pub lambda: f64,
    /// Labeled records, lower first.
    pub records: Vec<SolutionRecord>,
    pub details: Vec<SolutionDetail>,
    pub searches: Vec<WindowSearch>,
    pub fallback_used: bool,
}

/// Outcome summary at one recorded lambda.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LambdaOutcome {
    pub lambda: f64,
    pub lower: bool,
    pub upper: bool,
    pub solutions: usize,
    pub fallback_used: bool,
}

/// Bracket on the fold: solutions were found at `lo` and none at `hi`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FoldBracket {
    pub lo: f64,
    pub hi: f64,
    pub estimate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub lower: Branch,
    pub upper: Branch,
    /// Records beyond the two extreme ones at a lambda, or lone records with
    /// no history to attach to.
    pub unlabeled: Vec<SolutionRecord>,
    /// Per recorded lambda, ordered by lambda.
    pub outcomes: Vec<LambdaOutcome>,
    pub fold: Option<FoldBracket>,
}

impl SweepResult {
    pub fn lambda_bif(&self) -> Option<f64> {
        self.fold.map(|f| f.estimate)
    }
}

/// Last two roots of a branch.
#[derive(Debug, Clone, Copy, Default)]
struct Track {
    prev: Option<(f64, f64, f64)>,
    last: Option<(f64, f64, f64)>,
}

impl Track {
    fn push(&mut self, lambda: f64, du0: f64, dv0: f64) {
        self.prev = self.last;
        self.last = Some((lambda, du0, dv0));
    }

    fn alive(&self) -> bool {
        self.last.is_some()
    }
}

#[derive(Debug, Clone, Copy, Default)]
struct Tracker {
    lower: Track,
    upper: Track,
}

impl Tracker {
    fn memory(&self) -> BranchMemory {
        let at = |t: &Track| t.last.map(|(_, u, v)| (u, v));
        BranchMemory {
            lower: at(&self.lower),
            upper: at(&self.upper),
        }
    }

    fn fresh(&self) -> bool {
        !self.lower.alive() && !self.upper.alive()
    }
}

struct Sweeper<'a> {
    cfg: &'a SweepConfig,
    base: ProblemParams,
    solve: &'a SolveSettings,
}

impl Sweeper<'_> {
    /// Predicted interval for one coordinate of a branch root at `lambda`,
    /// with its half-width multiplied by `scale`.
    fn predict_axis(
        &self,
        prev: Option<(f64, f64)>,
        last: (f64, f64),
        lambda: f64,
        dense: f64,
        scale: f64,
    ) -> (f64, f64) {
        let (l1, c1) = last;
        let positive = c1 > 0.0 && prev.map_or(true, |(_, c0)| c0 > 0.0);
        let log_lambda = lambda > 0.0 && l1 > 0.0 && prev.map_or(true, |(l0, _)| l0 > 0.0);
        let x = |l: f64| if log_lambda { l.ln() } else { l };
        if positive {
            // Branch coordinates behave like powers of lambda away from the
            // fold, so extrapolate log(c) linearly in log(lambda).
            let (centre, half) = match prev {
                Some((l0, c0)) if x(l1) != x(l0) => {
                    let d = (c1.ln() - c0.ln()) / (x(l1) - x(l0)) * (x(lambda) - x(l1));
                    (c1.ln() + d, (self.cfg.inflation * d.abs()).max(self.cfg.min_half_width))
                }
                // One point only: allow growth up to a cubic power law.
                _ => (c1.ln(), self.cfg.min_half_width + 3.0 * (x(lambda) - x(l1)).abs()),
            };
            let half = half * scale;
            return ((centre - half).exp(), (centre + half).exp());
        }
        let (centre, d) = match prev {
            Some((l0, c0)) if l1 != l0 => {
                let d = (c1 - c0) / (l1 - l0) * (lambda - l1);
                (c1 + d, d)
            }
            _ => (c1, 0.0),
        };
        let half = (self.cfg.inflation * d.abs()).max(10.0 * dense) * scale;
        (centre - half, centre + half)
    }

    /// Tracking window (with its dense spacing) for a live branch.
    fn tracking_window(&self, track: &Track, lambda: f64, scale: f64) -> Option<(ScanWindow, Spacing)> {
        let (l1, u1, v1) = track.last?;
        let prev = track.prev;
        let (du_min, du_max) =
            self.predict_axis(prev.map(|p| (p.0, p.1)), (l1, u1), lambda, self.cfg.seed_dense.du, scale);
        let (dv_min, dv_max) =
            self.predict_axis(prev.map(|p| (p.0, p.2)), (l1, v1), lambda, self.cfg.seed_dense.dv, scale);
        let cells = self.cfg.cells as f64;
        let spacing = Spacing {
            du: (du_max - du_min) / cells,
            dv: (dv_max - dv_min) / cells,
        };
        let window = ScanWindow::with_spacing(du_min, du_max, dv_min, dv_max, spacing).ok()?;
        Some((window, spacing.scaled(1.0 / self.cfg.dense_factor as f64)))
    }

    fn fallback_roots(&self, params: &ProblemParams) -> Result<Vec<Root>> {
        let tol = self.solve.polish.tol;
        let grid = scan_grid(&self.cfg.fallback, params, &tol)?;
        let meetings = escalating_meetings(&grid, self.solve);
        Ok(polish_clusters(&meetings, params, self.solve))
    }

    /// Searches for both branches at `lambda` and advances the tracker.
    fn step(&self, lambda: f64, tracker: &mut Tracker, allow_fallback: bool) -> Result<SweepStep> {
        let params = self.base.with_lambda(lambda);
        params.validate()?;
        let mut searches = Vec::new();
        let mut roots = Vec::new();
        let mut run = |windows: &[(ScanWindow, Spacing)], roots: &mut Vec<Root>| -> Result<()> {
            for (window, dense) in windows {
                let s = search_window(window, *dense, &params, self.solve)?;
                roots.extend(s.roots.iter().copied());
                searches.push(s);
            }
            *roots = merge_roots(std::mem::take(roots));
            Ok(())
        };
        let missing = |roots: &[Root]| -> Result<[bool; 2]> {
            let labeled = self.label(roots, &params, tracker)?.1;
            let has = |b: BranchLabel| labeled.iter().any(|r| r.branch == b);
            Ok([
                tracker.lower.alive() && !has(BranchLabel::Lower),
                tracker.upper.alive() && !has(BranchLabel::Upper),
            ])
        };
        if tracker.fresh() {
            run(
                &[
                    (self.cfg.lower_window, self.cfg.seed_dense),
                    (self.cfg.upper_window, self.cfg.seed_dense),
                ],
                &mut roots,
            )?;
        } else {
            // Search each live branch's window; windows of branches still
            // missing are doubled and searched again.
            let mut want = [tracker.lower.alive(), tracker.upper.alive()];
            for e in 0..=self.cfg.expansions {
                let scale = (1u64 << e) as f64;
                let windows: Vec<_> = [&tracker.lower, &tracker.upper]
                    .into_iter()
                    .zip(want)
                    .filter(|(_, w)| *w)
                    .filter_map(|(t, _)| self.tracking_window(t, lambda, scale))
                    .collect();
                if windows.is_empty() {
                    break;
                }
                run(&windows, &mut roots)?;
                want = missing(&roots)?;
                if want == [false, false] {
                    break;
                }
            }
        }
        let lost = |roots: &[Root]| -> Result<bool> { Ok(missing(roots)? != [false, false]) };
        let mut fallback_used = false;
        if allow_fallback && !tracker.fresh() && lost(&roots)? {
            fallback_used = true;
            roots.extend(self.fallback_roots(&params)?);
            roots = merge_roots(roots);
        }
        let (details, records) = self.label(&roots, &params, tracker)?;
        for r in &records {
            match r.branch {
                BranchLabel::Lower => tracker.lower.push(lambda, r.du0, r.dv0),
                BranchLabel::Upper => tracker.upper.push(lambda, r.du0, r.dv0),
                BranchLabel::Unlabeled => {}
            }
        }
        Ok(SweepStep {
            lambda,
            records,
            details,
            searches,
            fallback_used,
        })
    }

    fn label(
        &self,
        roots: &[Root],
        params: &ProblemParams,
        tracker: &Tracker,
    ) -> Result<(Vec<SolutionDetail>, Vec<SolutionRecord>)> {
        let mut details = roots
            .iter()
            .map(|r| describe_root(r, params, &self.solve.polish.tol))
            .collect::<Result<Vec<_>>>()?;
        let plain: Vec<SolutionRecord> = details.iter().map(|d| d.record).collect();
        let labeled = label_branches(&plain, &tracker.memory());
        // label_branches may reorder; match details back by slopes
        let mut ordered = Vec::with_capacity(details.len());
        for rec in &labeled {
            let k = details
                .iter()
                .position(|d| d.record.du0 == rec.du0 && d.record.dv0 == rec.dv0)
                .expect("labeled record comes from details");
            let mut d = details.swap_remove(k);
            d.record.branch = rec.branch;
            ordered.push(d);
        }
        Ok((ordered, labeled))
    }

    /// Bisects the fold bracket, starting from the tracker state at `lo`.
    fn bisect(&self, mut lo: f64, mut hi: f64, tracker: &Tracker) -> Result<FoldBracket> {
        let mut state = *tracker;
        for _ in 0..self.cfg.bisection_steps {
            let mid = 0.5 * (lo + hi);
            let mut trial = state;
            let s = self.step(mid, &mut trial, false)?;
            if s.records.is_empty() {
                hi = mid;
            } else {
                lo = mid;
                state = trial;
            }
        }
        Ok(FoldBracket {
            lo,
            hi,
            estimate: 0.5 * (lo + hi),
        })
    }
}

/// Merges roots found by more than one window, keeping the smaller residue.
fn merge_roots(roots: Vec<Root>) -> Vec<Root> {
    let mut out: Vec<Root> = Vec::with_capacity(roots.len());
    for r in roots {
        match out
            .iter_mut()
            .find(|o| relative_distance((o.du0, o.dv0), (r.du0, r.dv0)) < MERGE_DISTANCE)
        {
            Some(o) if r.residue.max_abs() < o.residue.max_abs() => *o = r,
            Some(_) => {}
            None => out.push(r),
        }
    }
    out.sort_by(|a, b| a.du0.total_cmp(&b.du0).then(a.dv0.total_cmp(&b.dv0)));
    out
}

/// Traces the lower and upper branches over the lambda range of `cfg`.
///
/// The initial windows are searched at `seed_lambda`; from there each branch
/// is continued lambda by lambda in a window around the extrapolated root.
/// Continuing upward, the first lambda at which neither branch is found
/// (after the fallback window) brackets the fold, which is then bisected;
/// lambdas beyond it are reported as gaps. `observer` sees every recorded
/// lambda as soon as it is solved (upward walk first, then downward).
pub fn trace_branches<F>(
    cfg: &SweepConfig,
    base: &ProblemParams,
    solve: &SolveSettings,
    mut observer: F,
) -> Result<SweepResult>
where
    F: FnMut(&SweepStep) -> Result<()>,
{
    cfg.validate()?;
    base.validate()?;
    let sweeper = Sweeper { cfg, base: *base, solve };
    let lambdas = cfg.lambdas();
    let (first, last) = (lambdas[0], *lambdas.last().expect("lattice is never empty"));
    let snap = LATTICE_SNAP * cfg.lambda_step;

    let mut lower = Branch::new(BranchLabel::Lower);
    let mut upper = Branch::new(BranchLabel::Upper);
    let mut unlabeled = Vec::new();
    let mut outcomes = Vec::new();
    let mut fold = None;

    let mut record = |s: &SweepStep, observer: &mut F| -> Result<()> {
        for r in &s.records {
            match r.branch {
                BranchLabel::Lower => lower.insert(*r),
                BranchLabel::Upper => upper.insert(*r),
                BranchLabel::Unlabeled => unlabeled.push(*r),
            }
        }
        outcomes.push(LambdaOutcome {
            lambda: s.lambda,
            lower: s.records.iter().any(|r| r.branch == BranchLabel::Lower),
            upper: s.records.iter().any(|r| r.branch == BranchLabel::Upper),
            solutions: s.records.len(),
            fallback_used: s.fallback_used,
        });
        observer(s)
    };

    let mut tracker = Tracker::default();
    let seed = cfg.seed_lambda;
    let (up, down): (Vec<f64>, Vec<f64>);
    // false once both branches vanished before the range was reached
    let mut alive = true;
    if seed < first - snap {
        let mut l = seed;
        while l < first - snap {
            let seeded = !tracker.fresh();
            let s = sweeper.step(l, &mut tracker, true)?;
            if s.records.is_empty() && seeded {
                alive = false;
                break;
            }
            l += cfg.lambda_step;
        }
        up = lambdas.clone();
        down = Vec::new();
    } else if seed > last + snap {
        let mut l = seed;
        while l > last + snap {
            sweeper.step(l, &mut tracker, true)?;
            l -= cfg.lambda_step;
        }
        up = Vec::new();
        down = lambdas.iter().rev().copied().collect();
    } else {
        let k = lambdas
            .iter()
            .enumerate()
            .min_by(|a, b| (a.1 - seed).abs().total_cmp(&(b.1 - seed).abs()))
            .map(|(k, _)| k)
            .expect("lattice is never empty");
        up = lambdas[k..].to_vec();
        down = lambdas[..k].iter().rev().copied().collect();
    }

    let mut seed_state: Option<Tracker> = None;
    if alive {
        for &l in &up {
            let before = tracker;
            let s = sweeper.step(l, &mut tracker, true)?;
            if seed_state.is_none() {
                seed_state = Some(tracker);
            }
            let died = s.records.is_empty() && !before.fresh();
            record(&s, &mut observer)?;
            if died {
                let lo = [before.lower.last, before.upper.last]
                    .into_iter()
                    .flatten()
                    .map(|t| t.0)
                    .fold(f64::NEG_INFINITY, f64::max);
                fold = Some(sweeper.bisect(lo, l, &before)?);
                break;
            }
        }
    }

    let mut tracker = seed_state.unwrap_or(tracker);
    for &l in &down {
        let s = sweeper.step(l, &mut tracker, true)?;
        record(&s, &mut observer)?;
    }

    outcomes.sort_by(|a, b| a.lambda.total_cmp(&b.lambda));
    unlabeled.sort_by(|a: &SolutionRecord, b| a.lambda.total_cmp(&b.lambda));
    Ok(SweepResult {
        lower,
        upper,
        unlabeled,
        outcomes,
        fold,
    })
}
