use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::residue::{classify, shoot_total, Quadrant, Residue};
use crate::error::{Error, Result};
use crate::ode::{FirstOrderSystem, Tolerance};

// Absorbs rounding when a span is an integer multiple of the spacing.
const SNAP: f64 = 1e-9;

/// Grid spacing along the du0 and dv0 axes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Spacing {
    pub du: f64,
    pub dv: f64,
}

impl Spacing {
    pub fn uniform(delta: f64) -> Self {
        Spacing { du: delta, dv: delta }
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Spacing {
            du: self.du * factor,
            dv: self.dv * factor,
        }
    }
}

impl From<f64> for Spacing {
    fn from(delta: f64) -> Self {
        Spacing::uniform(delta)
    }
}

/// Rectangle [du_min, du_max] x [dv_min, dv_max] of initial slopes, with the
/// spacing of the vertex grid laid over it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScanWindow {
    pub du_min: f64,
    pub du_max: f64,
    pub dv_min: f64,
    pub dv_max: f64,
    pub spacing: Spacing,
}

impl ScanWindow {
    pub fn new(du_min: f64, du_max: f64, dv_min: f64, dv_max: f64, delta: f64) -> Result<Self> {
        Self::with_spacing(du_min, du_max, dv_min, dv_max, Spacing::uniform(delta))
    }

    pub fn with_spacing(
        du_min: f64,
        du_max: f64,
        dv_min: f64,
        dv_max: f64,
        spacing: Spacing,
    ) -> Result<Self> {
        let w = ScanWindow {
            du_min,
            du_max,
            dv_min,
            dv_max,
            spacing,
        };
        w.validate()?;
        Ok(w)
    }

    pub fn validate(&self) -> Result<()> {
        let all = [
            self.du_min,
            self.du_max,
            self.dv_min,
            self.dv_max,
            self.spacing.du,
            self.spacing.dv,
        ];
        if !all.iter().all(|c| c.is_finite()) {
            return Err(Error::domain(format!("window has non-finite entries: {self:?}")));
        }
        if !(self.du_min < self.du_max && self.dv_min < self.dv_max) {
            return Err(Error::domain(format!(
                "window must have du_min < du_max and dv_min < dv_max, got [{}, {}] x [{}, {}]",
                self.du_min, self.du_max, self.dv_min, self.dv_max
            )));
        }
        if !(self.spacing.du > 0.0 && self.spacing.dv > 0.0) {
            return Err(Error::domain(format!(
                "grid spacing must be positive, got ({}, {})",
                self.spacing.du, self.spacing.dv
            )));
        }
        Ok(())
    }

    /// Same rectangle, different spacing.
    pub fn respaced(&self, spacing: Spacing) -> Self {
        ScanWindow { spacing, ..*self }
    }

    pub fn n_du(&self) -> usize {
        ((self.du_max - self.du_min) / self.spacing.du + SNAP).floor() as usize + 1
    }

    pub fn n_dv(&self) -> usize {
        ((self.dv_max - self.dv_min) / self.spacing.dv + SNAP).floor() as usize + 1
    }

    pub fn du_at(&self, i: usize) -> f64 {
        self.du_min + i as f64 * self.spacing.du
    }

    pub fn dv_at(&self, j: usize) -> f64 {
        self.dv_min + j as f64 * self.spacing.dv
    }

    pub fn contains(&self, du: f64, dv: f64) -> bool {
        du >= self.du_min && du <= self.du_max && dv >= self.dv_min && dv <= self.dv_max
    }

    pub fn diameter(&self) -> f64 {
        (self.du_max - self.du_min).hypot(self.dv_max - self.dv_min)
    }
}

/// One evaluated grid vertex.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridVertex {
    pub i: usize,
    pub j: usize,
    pub du0: f64,
    pub dv0: f64,
    pub residue: Residue,
    pub quadrant: Quadrant,
}

/// Quadrant labels over a window's vertex grid. Vertex (i, j) sits at
/// (du_min + i * spacing.du, dv_min + j * spacing.dv) and is stored at
/// row-major index j * n_du + i. Vertices skipped by a dense pass are masked.
#[derive(Debug, Clone, PartialEq)]
pub struct ColorGrid {
    window: ScanWindow,
    n_du: usize,
    n_dv: usize,
    labels: Vec<Option<Quadrant>>,
    /// Evaluated vertices in increasing index order.
    vertices: Vec<GridVertex>,
}

impl ColorGrid {
    pub fn window(&self) -> &ScanWindow {
        &self.window
    }

    pub fn n_du(&self) -> usize {
        self.n_du
    }

    pub fn n_dv(&self) -> usize {
        self.n_dv
    }

    pub fn label(&self, i: usize, j: usize) -> Option<Quadrant> {
        if i < self.n_du && j < self.n_dv {
            self.labels[j * self.n_du + i]
        } else {
            None
        }
    }

    pub fn vertices(&self) -> &[GridVertex] {
        &self.vertices
    }

    pub fn evaluated_count(&self) -> usize {
        self.vertices.len()
    }

    /// True when no vertex is evaluated.
    pub fn is_blank(&self) -> bool {
        self.vertices.is_empty()
    }

    /// Set of quadrants present among evaluated vertices.
    pub fn quadrants_present(&self) -> Vec<Quadrant> {
        let mut mask = 0u8;
        for v in &self.vertices {
            mask |= v.quadrant.bit();
        }
        Quadrant::ALL.into_iter().filter(|q| mask & q.bit() != 0).collect()
    }

    fn evaluate<S: FirstOrderSystem + ?Sized>(
        window: ScanWindow,
        indices: Vec<usize>,
        sys: &S,
        tol: &Tolerance,
    ) -> Self {
        let n_du = window.n_du();
        let n_dv = window.n_dv();
        // Each result lands in the slot of its index, so the grid does not
        // depend on how rayon schedules the work.
        let vertices: Vec<GridVertex> = indices
            .into_par_iter()
            .map(|idx| {
                let (i, j) = (idx % n_du, idx / n_du);
                let (du0, dv0) = (window.du_at(i), window.dv_at(j));
                let residue = shoot_total(sys, du0, dv0, tol);
                GridVertex {
                    i,
                    j,
                    du0,
                    dv0,
                    residue,
                    quadrant: classify(&residue),
                }
            })
            .collect();
        let mut labels = vec![None; n_du * n_dv];
        for v in &vertices {
            labels[v.j * n_du + v.i] = Some(v.quadrant);
        }
        ColorGrid {
            window,
            n_du,
            n_dv,
            labels,
            vertices,
        }
    }

    /// A fully masked grid over `window`.
    pub fn blank(window: ScanWindow) -> Self {
        let (n_du, n_dv) = (window.n_du(), window.n_dv());
        ColorGrid {
            window,
            n_du,
            n_dv,
            labels: vec![None; n_du * n_dv],
            vertices: Vec::new(),
        }
    }

    /// Coarse cells (i, j) = [i, i+1] x [j, j+1] touching a vertex that has a
    /// 4-neighbour of a different colour.
    pub fn boundary_cells(&self) -> Vec<(usize, usize)> {
        let (n_du, n_dv) = (self.n_du, self.n_dv);
        if n_du < 2 || n_dv < 2 {
            return Vec::new();
        }
        let mut active = vec![false; (n_du - 1) * (n_dv - 1)];
        for v in &self.vertices {
            let (i, j) = (v.i, v.j);
            let differs = [(0i64, 1i64), (0, -1), (1, 0), (-1, 0)].iter().any(|&(di, dj)| {
                let (ni, nj) = (i as i64 + di, j as i64 + dj);
                ni >= 0
                    && nj >= 0
                    && self
                        .label(ni as usize, nj as usize)
                        .is_some_and(|q| q != v.quadrant)
            });
            if !differs {
                continue;
            }
            for ci in i.saturating_sub(1)..=i.min(n_du - 2) {
                for cj in j.saturating_sub(1)..=j.min(n_dv - 2) {
                    active[cj * (n_du - 1) + ci] = true;
                }
            }
        }
        active
            .iter()
            .enumerate()
            .filter(|(_, &a)| a)
            .map(|(k, _)| (k % (n_du - 1), k / (n_du - 1)))
            .collect()
    }
}

/// Evaluates the shooting map at every vertex of `window`.
pub fn scan_grid<S: FirstOrderSystem + ?Sized>(
    window: &ScanWindow,
    sys: &S,
    tol: &Tolerance,
) -> Result<ColorGrid> {
    window.validate()?;
    let n = window.n_du() * window.n_dv();
    Ok(ColorGrid::evaluate(*window, (0..n).collect(), sys, tol))
}

/// Re-scans `coarse`'s rectangle at a finer spacing, evaluating only inside
/// coarse cells adjacent to a colour boundary. Everything else stays masked.
pub fn refine_to_dense<S: FirstOrderSystem + ?Sized>(
    coarse: &ColorGrid,
    dense: Spacing,
    sys: &S,
    tol: &Tolerance,
) -> Result<ColorGrid> {
    let cw = coarse.window;
    if !(dense.du > 0.0 && dense.dv > 0.0) {
        return Err(Error::domain("dense spacing must be positive"));
    }
    if !(dense.du < cw.spacing.du && dense.dv < cw.spacing.dv) {
        return Err(Error::domain(format!(
            "dense spacing ({}, {}) must be finer than coarse spacing ({}, {})",
            dense.du, dense.dv, cw.spacing.du, cw.spacing.dv
        )));
    }
    let window = cw.respaced(dense);
    let (n_du, n_dv) = (window.n_du(), window.n_dv());
    let mut marked = vec![false; n_du * n_dv];
    for (ci, cj) in coarse.boundary_cells() {
        let (lo_i, hi_i) = span(ci, cw.spacing.du, dense.du, n_du);
        let (lo_j, hi_j) = span(cj, cw.spacing.dv, dense.dv, n_dv);
        for j in lo_j..=hi_j {
            marked[j * n_du + lo_i..=j * n_du + hi_i].fill(true);
        }
    }
    let indices: Vec<usize> = marked
        .iter()
        .enumerate()
        .filter(|(_, &m)| m)
        .map(|(k, _)| k)
        .collect();
    Ok(ColorGrid::evaluate(window, indices, sys, tol))
}

/// Dense index range covering coarse cell `c` (closed on both ends).
fn span(c: usize, coarse: f64, dense: f64, n: usize) -> (usize, usize) {
    let lo = ((c as f64 * coarse) / dense - SNAP).ceil().max(0.0) as usize;
    let hi = ((((c + 1) as f64) * coarse) / dense + SNAP).floor() as usize;
    (lo.min(n - 1), hi.min(n - 1))
}
