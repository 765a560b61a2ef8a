use serde::{Deserialize, Serialize};

use super::meeting::MeetingCell;
use super::residue::{classify, shoot, Residue, ResidueStatus};
use crate::ode::{FirstOrderSystem, Tolerance};

/// Default acceptance threshold on max(|u(1)|, |v(1)|).
pub const DEFAULT_EPS: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PolishSettings {
    /// A root is accepted when max(|u(1)|, |v(1)|) < eps.
    pub eps: f64,
    /// Polishing keeps going until the residue drops below `eps * tighten`
    /// or stops improving; the extra digits keep diagnostics such as the
    /// symmetry defect meaningful for small-amplitude solutions.
    pub tighten: f64,
    /// Budget of quadrisection levels plus quasi-Newton iterations.
    pub max_iter: usize,
    /// Quadrisection levels before handing over to the quasi-Newton phase.
    pub quad_levels: usize,
    /// A converged point further than this many cell diameters from the
    /// cell centre is not attributed to the cell.
    pub max_drift: f64,
    /// Roots with slope norm below this are the trivial solution.
    pub trivial_guard: f64,
    pub tol: Tolerance,
}

impl Default for PolishSettings {
    fn default() -> Self {
        PolishSettings {
            eps: DEFAULT_EPS,
            tighten: 1e-4,
            max_iter: 80,
            quad_levels: 6,
            max_drift: 10.0,
            trivial_guard: 1e-9,
            tol: Tolerance::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PolishMethod {
    /// The starting point already met the polishing target.
    Immediate,
    /// Quadrisection alone reached the target.
    Quadrisection,
    /// Finished by the quasi-Newton phase.
    Broyden,
}

/// A converged zero of the shooting map.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Root {
    pub du0: f64,
    pub dv0: f64,
    pub residue: Residue,
    pub iterations: usize,
    pub method: PolishMethod,
}

struct Evaluator<'a, S: ?Sized> {
    sys: &'a S,
    tol: Tolerance,
    best: Option<(f64, f64, Residue)>,
}

impl<'a, S: FirstOrderSystem + ?Sized> Evaluator<'a, S> {
    fn eval(&mut self, du: f64, dv: f64) -> Option<Residue> {
        let r = shoot(self.sys, du, dv, &self.tol).ok()?;
        if r.status == ResidueStatus::Ok {
            let better = self.best.map_or(true, |(_, _, b)| r.max_abs() < b.max_abs());
            if better {
                self.best = Some((du, dv, r));
            }
        }
        Some(r)
    }

    fn best_norm(&self) -> f64 {
        self.best.map_or(f64::INFINITY, |(_, _, r)| r.max_abs())
    }
}

#[derive(Clone, Copy)]
struct Rect {
    du0: f64,
    du1: f64,
    dv0: f64,
    dv1: f64,
}

impl Rect {
    fn at(&self, a: usize, b: usize, n: usize) -> (f64, f64) {
        let t = a as f64 / n as f64;
        let s = b as f64 / n as f64;
        (
            self.du0 + t * (self.du1 - self.du0),
            self.dv0 + s * (self.dv1 - self.dv0),
        )
    }
}

/// Refines a four-colour meeting cell to a zero of the shooting map.
///
/// The cell is quadrisected while some sub-cell still shows all four
/// quadrants among its corners and edge midpoints. When no sub-cell does, or
/// after `quad_levels` levels, a Broyden iteration takes over from the best
/// point seen, with its initial Jacobian taken from secants across the
/// current cell. Returns `None` when the residue never drops below `eps`,
/// when the iteration drifts away from the cell, or when it lands on the
/// trivial solution.
pub fn polish_root<S: FirstOrderSystem + ?Sized>(
    cell: &MeetingCell,
    sys: &S,
    settings: &PolishSettings,
) -> Option<Root> {
    let target = settings.eps * settings.tighten;
    let mut ev = Evaluator {
        sys,
        tol: settings.tol,
        best: None,
    };
    let (cu, cv) = cell.center();
    let center = ev.eval(cu, cv)?;
    if center.status == ResidueStatus::Ok && center.max_abs() < target {
        return finish(cell, settings, cu, cv, center, 0, PolishMethod::Immediate);
    }

    let mut rect = Rect {
        du0: cell.du_min,
        du1: cell.du_max,
        dv0: cell.dv_min,
        dv1: cell.dv_max,
    };
    let mut iterations = 0;
    // 5x5 stencil over the current cell; sub-cell (a, b) uses the even
    // points of its quarter as corners and odd points as edge midpoints.
    for _ in 0..settings.quad_levels.min(settings.max_iter) {
        let mut stencil = [[None; 5]; 5];
        for (a, row) in stencil.iter_mut().enumerate() {
            for (b, slot) in row.iter_mut().enumerate() {
                if a % 2 == 1 && b % 2 == 1 {
                    continue; // sub-cell centres are not part of the test
                }
                let (du, dv) = rect.at(a, b, 4);
                *slot = ev.eval(du, dv).map(|r| classify(&r));
            }
        }
        iterations += 1;
        if ev.best_norm() < target {
            let (du, dv, r) = ev.best.unwrap();
            return finish(cell, settings, du, dv, r, iterations, PolishMethod::Quadrisection);
        }
        let mut chosen = None;
        for (sa, sb) in [(0usize, 0usize), (0, 2), (2, 0), (2, 2)] {
            let mut mask = 0u8;
            for a in sa..=sa + 2 {
                for b in sb..=sb + 2 {
                    if let Some(q) = stencil[a][b] {
                        mask |= q.bit();
                    }
                }
            }
            if mask == 0b1111 {
                chosen = Some((sa, sb));
                break;
            }
        }
        let Some((sa, sb)) = chosen else { break };
        let (du0, dv0) = rect.at(sa, sb, 4);
        let (du1, dv1) = rect.at(sa + 2, sb + 2, 4);
        rect = Rect { du0, du1, dv0, dv1 };
    }

    let remaining = settings.max_iter.saturating_sub(iterations);
    let start = ev.best.map(|(du, dv, _)| (du, dv)).unwrap_or(((rect.du0 + rect.du1) / 2.0, (rect.dv0 + rect.dv1) / 2.0));
    let jac = secant_jacobian(&mut ev, &rect);
    let used = broyden(&mut ev, start, jac, remaining, target);
    iterations += used;
    let (du, dv, r) = ev.best?;
    finish(cell, settings, du, dv, r, iterations, PolishMethod::Broyden)
}

fn finish(
    cell: &MeetingCell,
    settings: &PolishSettings,
    du0: f64,
    dv0: f64,
    residue: Residue,
    iterations: usize,
    method: PolishMethod,
) -> Option<Root> {
    if !(residue.status == ResidueStatus::Ok && residue.max_abs() < settings.eps) {
        return None;
    }
    if du0.hypot(dv0) < settings.trivial_guard {
        return None;
    }
    let (cu, cv) = cell.center();
    let reach = settings.max_drift * cell.diameter().max(f64::MIN_POSITIVE);
    if (du0 - cu).hypot(dv0 - cv) > reach {
        return None;
    }
    Some(Root {
        du0,
        dv0,
        residue,
        iterations,
        method,
    })
}

type Mat2 = [[f64; 2]; 2];

fn secant_jacobian<S: FirstOrderSystem + ?Sized>(ev: &mut Evaluator<'_, S>, rect: &Rect) -> Option<Mat2> {
    let (l, _) = rect.at(0, 2, 4);
    let (r, m) = rect.at(4, 2, 4);
    let (c, b) = rect.at(2, 0, 4);
    let (_, t) = rect.at(2, 4, 4);
    let fl = ev.eval(l, m)?;
    let fr = ev.eval(r, m)?;
    let fb = ev.eval(c, b)?;
    let ft = ev.eval(c, t)?;
    if [fl, fr, fb, ft].iter().any(|f| f.status != ResidueStatus::Ok) {
        return None;
    }
    let (hu, hv) = (r - l, t - b);
    Some([
        [(fr.u1 - fl.u1) / hu, (ft.u1 - fb.u1) / hv],
        [(fr.v1 - fl.v1) / hu, (ft.v1 - fb.v1) / hv],
    ])
}

fn forward_jacobian<S: FirstOrderSystem + ?Sized>(
    ev: &mut Evaluator<'_, S>,
    x: (f64, f64),
    f: &Residue,
    scale: (f64, f64),
) -> Option<Mat2> {
    let hu = 1e-6 * x.0.abs().max(scale.0);
    let hv = 1e-6 * x.1.abs().max(scale.1);
    let fu = ev.eval(x.0 + hu, x.1)?;
    let fv = ev.eval(x.0, x.1 + hv)?;
    if fu.status != ResidueStatus::Ok || fv.status != ResidueStatus::Ok {
        return None;
    }
    Some([
        [(fu.u1 - f.u1) / hu, (fv.u1 - f.u1) / hv],
        [(fu.v1 - f.v1) / hu, (fv.v1 - f.v1) / hv],
    ])
}

fn solve2(m: &Mat2, rhs: (f64, f64)) -> Option<(f64, f64)> {
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    let scale = m.iter().flatten().fold(0.0_f64, |a, c| a.max(c.abs()));
    if !(det.is_finite() && det.abs() > 1e-300 && det.abs() > 1e-14 * scale * scale) {
        return None;
    }
    Some((
        (rhs.0 * m[1][1] - rhs.1 * m[0][1]) / det,
        (m[0][0] * rhs.1 - m[1][0] * rhs.0) / det,
    ))
}

/// Good Broyden with backtracking on the Euclidean residue norm. A failed
/// line search triggers one refresh of the Jacobian by forward differences.
fn broyden<S: FirstOrderSystem + ?Sized>(
    ev: &mut Evaluator<'_, S>,
    start: (f64, f64),
    jac: Option<Mat2>,
    budget: usize,
    target: f64,
) -> usize {
    let Some(mut f) = ev.eval(start.0, start.1) else { return 0 };
    if f.status != ResidueStatus::Ok {
        return 0;
    }
    let scale = (start.0.abs().max(1e-8), start.1.abs().max(1e-8));
    let mut x = start;
    let mut b = match jac {
        Some(j) => j,
        None => match forward_jacobian(ev, x, &f, scale) {
            Some(j) => j,
            None => return 0,
        },
    };
    let mut refreshed = jac.is_none();
    let mut used = 0;
    while used < budget {
        if f.max_abs() < target {
            break;
        }
        used += 1;
        let step = match solve2(&b, (-f.u1, -f.v1)) {
            Some(s) => s,
            None => {
                if refreshed {
                    break;
                }
                refreshed = true;
                match forward_jacobian(ev, x, &f, scale) {
                    Some(j) => {
                        b = j;
                        continue;
                    }
                    None => break,
                }
            }
        };
        let norm = f.u1.hypot(f.v1);
        let mut t = 1.0;
        let mut accepted = None;
        while t >= 1.0 / 64.0 {
            let trial = (x.0 + t * step.0, x.1 + t * step.1);
            if let Some(ft) = ev.eval(trial.0, trial.1) {
                if ft.status == ResidueStatus::Ok && ft.u1.hypot(ft.v1) < (1.0 - 1e-4 * t) * norm {
                    accepted = Some((trial, ft, t));
                    break;
                }
            }
            t *= 0.5;
        }
        match accepted {
            Some((xn, fn_, t)) => {
                let s = (t * step.0, t * step.1);
                let y = (fn_.u1 - f.u1, fn_.v1 - f.v1);
                let bs = (b[0][0] * s.0 + b[0][1] * s.1, b[1][0] * s.0 + b[1][1] * s.1);
                let ss = s.0 * s.0 + s.1 * s.1;
                if ss > 0.0 {
                    let d = ((y.0 - bs.0) / ss, (y.1 - bs.1) / ss);
                    b[0][0] += d.0 * s.0;
                    b[0][1] += d.0 * s.1;
                    b[1][0] += d.1 * s.0;
                    b[1][1] += d.1 * s.1;
                }
                x = xn;
                f = fn_;
                refreshed = false;
            }
            None => {
                if refreshed {
                    break;
                }
                refreshed = true;
                match forward_jacobian(ev, x, &f, scale) {
                    Some(j) => b = j,
                    None => break,
                }
            }
        }
    }
    used
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ode::State;

    /// Phi(d) = (d.0 - 1.03, d.1 - 2.07) exactly (quadratic profiles are
    /// integrated without truncation error).
    struct Off;

    impl FirstOrderSystem for Off {
        fn derivative(&self, _x: f64, y: &State) -> State {
            [y[2], y[3], -2.06, -4.14]
        }
    }

    #[test]
    fn converges_inside_a_meeting_cell() {
        let cell = MeetingCell::rect(1.0, 1.25, 2.0, 2.25);
        let root = polish_root(&cell, &Off, &PolishSettings::default()).unwrap();
        assert!((root.du0 - 1.03).abs() < 1e-9, "{root:?}");
        assert!((root.dv0 - 2.07).abs() < 1e-9, "{root:?}");
        assert!(root.residue.max_abs() < 1e-6);
    }

    #[test]
    fn centre_on_root_returns_without_iterating() {
        let cell = MeetingCell::rect(1.03 - 0.1, 1.03 + 0.1, 2.07 - 0.1, 2.07 + 0.1);
        let root = polish_root(&cell, &Off, &PolishSettings::default()).unwrap();
        assert_eq!(root.iterations, 0);
        assert_eq!(root.method, PolishMethod::Immediate);
    }

    #[test]
    fn cell_far_from_any_root_fails() {
        let cell = MeetingCell::rect(10.0, 10.25, 20.0, 20.25);
        let s = PolishSettings {
            max_drift: 2.0,
            ..PolishSettings::default()
        };
        assert!(polish_root(&cell, &Off, &s).is_none());
    }

    #[test]
    fn trivial_root_is_rejected() {
        struct Linear;
        impl FirstOrderSystem for Linear {
            fn derivative(&self, _x: f64, y: &State) -> State {
                [y[2], y[3], -y[1], -y[0]]
            }
        }
        let cell = MeetingCell::rect(-0.1, 0.1, -0.1, 0.1);
        assert!(polish_root(&cell, &Linear, &PolishSettings::default()).is_none());
    }
}
