//! Hand-written SVG 1.1 figures. Output depends only on the inputs: no
//! timestamps, no randomness, fixed float formatting.

use std::fmt::Write as _;

use crate::continuation::BifurcationPoint;
use crate::ode::Trajectory;
use crate::shooting::{BranchLabel, ColorGrid, Quadrant};

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 480.0;
const LEFT: f64 = 72.0;
const RIGHT: f64 = 130.0;
const TOP: f64 = 20.0;
const BOTTOM: f64 = 52.0;

/// Fill colour of each quadrant.
pub fn quadrant_color(q: Quadrant) -> &'static str {
    match q {
        Quadrant::Green => "#2ca02c",
        Quadrant::Yellow => "#ffdf00",
        Quadrant::Blue => "#1f77b4",
        Quadrant::Red => "#d62728",
    }
}

fn branch_color(b: BranchLabel) -> &'static str {
    match b {
        BranchLabel::Lower => "#1f77b4",
        BranchLabel::Upper => "#d62728",
        BranchLabel::Unlabeled => "#7f7f7f",
    }
}

/// Maps data coordinates into the plot area.
struct Frame {
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
}

impl Frame {
    fn new(x: (f64, f64), y: (f64, f64)) -> Self {
        let widen = |(a, b): (f64, f64)| {
            if !(a.is_finite() && b.is_finite()) {
                (0.0, 1.0)
            } else if b > a {
                (a, b)
            } else {
                let pad = if a == 0.0 { 1.0 } else { 0.05 * a.abs() };
                (a - pad, b + pad)
            }
        };
        let (x0, x1) = widen(x);
        let (y0, y1) = widen(y);
        Frame { x0, x1, y0, y1 }
    }

    fn px(&self, x: f64) -> f64 {
        LEFT + (x - self.x0) / (self.x1 - self.x0) * (WIDTH - LEFT - RIGHT)
    }

    fn py(&self, y: f64) -> f64 {
        HEIGHT - BOTTOM - (y - self.y0) / (self.y1 - self.y0) * (HEIGHT - TOP - BOTTOM)
    }
}

/// Fixed-precision coordinate.
fn f(v: f64) -> String {
    format!("{v:.2}")
}

/// Round tick positions covering [lo, hi], roughly `n` of them.
fn ticks(lo: f64, hi: f64, n: usize) -> (Vec<f64>, usize) {
    let raw = (hi - lo) / n as f64;
    let mag = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 5.0, 10.0]
        .into_iter()
        .map(|m| m * mag)
        .find(|s| *s >= raw)
        .unwrap_or(10.0 * mag);
    let decimals = (-step.log10().floor()).max(0.0) as usize;
    let first = (lo / step).ceil() as i64;
    let last = (hi / step + 1e-9).floor() as i64;
    ((first..=last).map(|k| k as f64 * step).collect(), decimals)
}

fn header(out: &mut String, title: &str) {
    let _ = writeln!(
        out,
        r#"<?xml version="1.0" encoding="UTF-8"?>
<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{w}" height="{h}" viewBox="0 0 {w} {h}" font-family="sans-serif" font-size="12">
<title>{title}</title>
<rect x="0" y="0" width="{w}" height="{h}" fill="white"/>"#,
        w = WIDTH,
        h = HEIGHT,
        title = escape(title)
    );
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Axes box, ticks and labels. Labels may contain SVG markup.
fn axes(out: &mut String, fr: &Frame, xlabel: &str, ylabel: &str) {
    let (l, r) = (fr.px(fr.x0), fr.px(fr.x1));
    let (b, t) = (fr.py(fr.y0), fr.py(fr.y1));
    let _ = writeln!(
        out,
        r#"<rect x="{}" y="{}" width="{}" height="{}" fill="none" stroke="black"/>"#,
        f(l),
        f(t),
        f(r - l),
        f(b - t)
    );
    let (xt, xd) = ticks(fr.x0, fr.x1, 6);
    for x in xt {
        let p = fr.px(x);
        let _ = writeln!(
            out,
            r#"<line x1="{p}" y1="{b}" x2="{p}" y2="{b5}" stroke="black"/><text x="{p}" y="{ty}" text-anchor="middle">{label:.prec$}</text>"#,
            p = f(p),
            b = f(b),
            b5 = f(b + 5.0),
            ty = f(b + 18.0),
            label = x,
            prec = xd
        );
    }
    let (yt, yd) = ticks(fr.y0, fr.y1, 6);
    for y in yt {
        let p = fr.py(y);
        let _ = writeln!(
            out,
            r#"<line x1="{l5}" y1="{p}" x2="{l}" y2="{p}" stroke="black"/><text x="{tx}" y="{ty}" text-anchor="end">{label:.prec$}</text>"#,
            p = f(p),
            l = f(l),
            l5 = f(l - 5.0),
            tx = f(l - 8.0),
            ty = f(p + 4.0),
            label = y,
            prec = yd
        );
    }
    let _ = writeln!(
        out,
        r#"<text x="{}" y="{}" text-anchor="middle">{xlabel}</text>
<text x="{}" y="{}" text-anchor="middle" transform="rotate(-90 {} {})">{ylabel}</text>"#,
        f(0.5 * (l + r)),
        f(HEIGHT - 12.0),
        f(18.0),
        f(0.5 * (t + b)),
        f(18.0),
        f(0.5 * (t + b)),
    );
}

fn legend(out: &mut String, entries: &[(&str, &str)]) {
    let x = WIDTH - RIGHT + 14.0;
    for (k, (color, label)) in entries.iter().enumerate() {
        let y = TOP + 10.0 + 20.0 * k as f64;
        let _ = writeln!(
            out,
            r#"<rect x="{}" y="{}" width="12" height="12" fill="{color}" stroke="black" stroke-width="0.5"/><text x="{}" y="{}">{label}</text>"#,
            f(x),
            f(y),
            f(x + 18.0),
            f(y + 10.0)
        );
    }
}

const DU0: &str = r#"du<tspan baseline-shift="sub" font-size="9">0</tspan>"#;
const DV0: &str = r#"dv<tspan baseline-shift="sub" font-size="9">0</tspan>"#;

/// Colour diagram of a scan: each evaluated vertex fills the cell centred on
/// it, masked vertices stay blank, and roots are black circles.
pub fn render_color_diagram(grid: &ColorGrid, roots: &[(f64, f64)]) -> String {
    let w = grid.window();
    let (hu, hv) = (0.5 * w.spacing.du, 0.5 * w.spacing.dv);
    let fr = Frame::new(
        (w.du_min - hu, w.du_at(grid.n_du() - 1) + hu),
        (w.dv_min - hv, w.dv_at(grid.n_dv() - 1) + hv),
    );
    let mut out = String::new();
    header(&mut out, "Sign quadrants of the shooting map");
    out.push_str("<g shape-rendering=\"crispEdges\">\n");
    // merge horizontal runs of one colour into a single rectangle
    let verts = grid.vertices();
    let mut k = 0;
    while k < verts.len() {
        let start = verts[k];
        let mut end = k;
        while end + 1 < verts.len()
            && verts[end + 1].j == start.j
            && verts[end + 1].i == verts[end].i + 1
            && verts[end + 1].quadrant == start.quadrant
        {
            end += 1;
        }
        let x0 = fr.px(start.du0 - hu);
        let x1 = fr.px(verts[end].du0 + hu);
        let y0 = fr.py(start.dv0 + hv);
        let y1 = fr.py(start.dv0 - hv);
        let _ = writeln!(
            out,
            r#"<rect x="{}" y="{}" width="{}" height="{}" fill="{}"/>"#,
            f(x0),
            f(y0),
            f(x1 - x0),
            f(y1 - y0),
            quadrant_color(start.quadrant)
        );
        k = end + 1;
    }
    out.push_str("</g>\n");
    for &(du, dv) in roots {
        let _ = writeln!(
            out,
            r#"<circle cx="{}" cy="{}" r="5" fill="none" stroke="black" stroke-width="2"/>"#,
            f(fr.px(du)),
            f(fr.py(dv))
        );
    }
    axes(&mut out, &fr, DU0, DV0);
    legend(
        &mut out,
        &[
            (quadrant_color(Quadrant::Green), "u(1)&gt;0, v(1)&gt;0"),
            (quadrant_color(Quadrant::Yellow), "u(1)&gt;0, v(1)&lt;0"),
            (quadrant_color(Quadrant::Blue), "u(1)&lt;0, v(1)&gt;0"),
            (quadrant_color(Quadrant::Red), "u(1)&lt;0, v(1)&lt;0"),
        ],
    );
    out.push_str("</svg>\n");
    out
}

fn polyline(out: &mut String, fr: &Frame, pts: impl Iterator<Item = (f64, f64)>, color: &str) {
    let coords: Vec<String> = pts
        .map(|(x, y)| format!("{},{}", f(fr.px(x)), f(fr.py(y))))
        .collect();
    if coords.is_empty() {
        return;
    }
    let _ = writeln!(
        out,
        r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="1.5"/>"#,
        coords.join(" ")
    );
}

fn marker(out: &mut String, fr: &Frame, x: f64, y: f64, color: &str) {
    let _ = writeln!(
        out,
        r#"<circle cx="{}" cy="{}" r="3.5" fill="{color}" stroke="black" stroke-width="0.5"/>"#,
        f(fr.px(x)),
        f(fr.py(y))
    );
}

/// u and v over [0,1], each with its maximum marked.
pub fn render_profile(traj: &Trajectory) -> String {
    let s = &traj.samples;
    let (lo, hi) = s.iter().fold((0.0f64, 0.0f64), |(lo, hi), p| {
        (lo.min(p.u).min(p.v), hi.max(p.u).max(p.v))
    });
    let fr = Frame::new((0.0, 1.0), (lo, hi));
    let mut out = String::new();
    header(&mut out, "Solution profile");
    let (cu, cv) = ("#1f77b4", "#d62728");
    polyline(&mut out, &fr, s.iter().map(|p| (p.x, p.u)), cu);
    polyline(&mut out, &fr, s.iter().map(|p| (p.x, p.v)), cv);
    // first maximum wins, so ties do not depend on float noise ordering
    let argmax = |get: fn(&crate::ode::ShootState) -> f64| {
        s.iter()
            .fold(None::<&crate::ode::ShootState>, |best, p| match best {
                Some(b) if get(b) >= get(p) => Some(b),
                _ => Some(p),
            })
    };
    if let Some(p) = argmax(|p| p.u) {
        marker(&mut out, &fr, p.x, p.u, cu);
    }
    if let Some(p) = argmax(|p| p.v) {
        marker(&mut out, &fr, p.x, p.v, cv);
    }
    axes(&mut out, &fr, "x", "u, v");
    legend(&mut out, &[(cu, "u(x)"), (cv, "v(x)")]);
    out.push_str("</svg>\n");
    out
}

/// sup v against lambda for every branch; the fold estimate, when known, is
/// a dashed vertical line.
pub fn render_bifurcation(points: &[BifurcationPoint], lambda_bif: Option<f64>) -> String {
    let bounds = |get: fn(&BifurcationPoint) -> f64| {
        points.iter().map(get).fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| {
            (a.min(v), b.max(v))
        })
    };
    let (mut l0, mut l1) = bounds(|p| p.lambda);
    if let Some(l) = lambda_bif {
        l0 = l0.min(l);
        l1 = l1.max(l);
    }
    let (_, s1) = bounds(|p| p.sup_v);
    let fr = Frame::new((l0, l1), (0.0, if s1.is_finite() { 1.05 * s1 } else { 1.0 }));
    let mut out = String::new();
    header(&mut out, "Bifurcation diagram");
    let mut entries = Vec::new();
    for b in [BranchLabel::Lower, BranchLabel::Upper, BranchLabel::Unlabeled] {
        let pts: Vec<(f64, f64)> = points
            .iter()
            .filter(|p| p.branch == b)
            .map(|p| (p.lambda, p.sup_v))
            .collect();
        if pts.is_empty() {
            continue;
        }
        let color = branch_color(b);
        if b != BranchLabel::Unlabeled {
            polyline(&mut out, &fr, pts.iter().copied(), color);
        }
        for &(x, y) in &pts {
            marker(&mut out, &fr, x, y, color);
        }
        entries.push((color, b.name()));
    }
    if let Some(l) = lambda_bif {
        let x = f(fr.px(l));
        let _ = writeln!(
            out,
            r#"<line x1="{x}" y1="{}" x2="{x}" y2="{}" stroke="black" stroke-dasharray="4 3"/>"#,
            f(fr.py(fr.y0)),
            f(fr.py(fr.y1))
        );
        entries.push(("none", "fold"));
    }
    axes(&mut out, &fr, "&#955;", "max v");
    legend(&mut out, &entries);
    out.push_str("</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ode::{integrate, ProblemParams, Tolerance};
    use crate::shooting::{scan_grid, ScanWindow};

    #[test]
    fn ticks_are_round_numbers_inside_the_range() {
        let (t, d) = ticks(0.0, 5.0, 6);
        assert_eq!(t, vec![0.0, 1.0, 2.0, 3.0, 4.0, 5.0]);
        assert_eq!(d, 0);
        let (t, d) = ticks(0.013, 0.061, 5);
        assert_eq!(d, 2);
        assert!(t.iter().all(|x| (0.013..=0.061).contains(x)));
    }

    #[test]
    fn color_diagram_is_deterministic_and_marks_roots() {
        let params = ProblemParams::reference(10.0);
        let w = ScanWindow::new(0.5, 1.5, 0.0, 0.1, 0.05).unwrap();
        let g = scan_grid(&w, &params, &Tolerance::default()).unwrap();
        let a = render_color_diagram(&g, &[(0.9856, 0.0418)]);
        assert_eq!(a, render_color_diagram(&g, &[(0.9856, 0.0418)]));
        assert!(a.starts_with("<?xml"));
        assert!(a.trim_end().ends_with("</svg>"));
        assert_eq!(a.matches("<circle").count(), 1);
        assert!(a.contains("#ffdf00"));
    }

    #[test]
    fn empty_inputs_give_axes_only() {
        let g = ColorGrid::blank(ScanWindow::new(0.0, 1.0, 0.0, 1.0, 0.1).unwrap());
        let svg = render_color_diagram(&g, &[]);
        assert!(!svg.contains("crispEdges\">\n<rect"));
        let svg = render_bifurcation(&[], None);
        assert!(svg.contains("max v"));
        assert!(!svg.contains("<polyline"));
    }

    #[test]
    fn profile_has_two_curves_and_two_markers() {
        let traj = integrate(&ProblemParams::reference(10.0), 0.9856, 0.0418, &Tolerance::default())
            .unwrap();
        let svg = render_profile(&traj);
        assert_eq!(svg.matches("<polyline").count(), 2);
        assert_eq!(svg.matches("<circle").count(), 2);
    }
}
