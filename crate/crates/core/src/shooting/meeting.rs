use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::grid::ColorGrid;

/// Default side length (in vertices) of the neighbourhood searched for a
/// four-colour meeting.
pub const DEFAULT_MEETING_K: usize = 3;

/// Default cap on the escalated neighbourhood side.
pub const DEFAULT_MAX_MEETING_K: usize = 33;

/// A k x k block of grid vertices whose evaluated labels contain all four
/// quadrants. By the Poincaré–Miranda heuristic such a block likely holds a
/// zero of the shooting map.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeetingCell {
    /// Lower-left vertex of the block.
    pub i: usize,
    pub j: usize,
    pub k: usize,
    pub du_min: f64,
    pub du_max: f64,
    pub dv_min: f64,
    pub dv_max: f64,
}

impl MeetingCell {
    pub fn center(&self) -> (f64, f64) {
        (
            0.5 * (self.du_min + self.du_max),
            0.5 * (self.dv_min + self.dv_max),
        )
    }

    pub fn diameter(&self) -> f64 {
        (self.du_max - self.du_min).hypot(self.dv_max - self.dv_min)
    }

    /// A free-standing rectangle, used by tests and by polishing entry points
    /// that do not come from a grid.
    pub fn rect(du_min: f64, du_max: f64, dv_min: f64, dv_max: f64) -> Self {
        MeetingCell {
            i: 0,
            j: 0,
            k: 2,
            du_min,
            du_max,
            dv_min,
            dv_max,
        }
    }
}

/// All k x k vertex blocks of `grid` containing the four quadrants, in
/// row-major order of their lower-left vertex.
pub fn find_meeting_points(grid: &ColorGrid, k: usize) -> Vec<MeetingCell> {
    let k = k.max(2);
    let (n_du, n_dv) = (grid.n_du(), grid.n_dv());
    if n_du < k || n_dv < k || grid.evaluated_count() == 0 {
        return Vec::new();
    }
    // Colour bitmask per vertex, restricted to the bounding box of the
    // evaluated vertices (plus the block reach) to keep memory small.
    let (mut i_lo, mut i_hi, mut j_lo, mut j_hi) = (usize::MAX, 0, usize::MAX, 0);
    for v in grid.vertices() {
        i_lo = i_lo.min(v.i);
        i_hi = i_hi.max(v.i);
        j_lo = j_lo.min(v.j);
        j_hi = j_hi.max(v.j);
    }
    let (i_lo, j_lo) = (i_lo.saturating_sub(k - 1), j_lo.saturating_sub(k - 1));
    let (i_hi, j_hi) = ((i_hi + k - 1).min(n_du - 1), (j_hi + k - 1).min(n_dv - 1));
    let (w, h) = (i_hi - i_lo + 1, j_hi - j_lo + 1);
    if w < k || h < k {
        return Vec::new();
    }
    let mut masks = vec![0u8; w * h];
    for v in grid.vertices() {
        masks[(v.j - j_lo) * w + (v.i - i_lo)] = v.quadrant.bit();
    }
    // OR over k consecutive entries along rows, then along columns.
    let rw = w - k + 1;
    let mut rows = Vec::with_capacity(rw * h);
    for line in masks.chunks_exact(w) {
        rows.extend(sliding_or(line, k));
    }
    let rh = h - k + 1;
    let mut blocks = vec![0u8; rw * rh];
    let mut column = vec![0u8; h];
    for i in 0..rw {
        for (j, c) in column.iter_mut().enumerate() {
            *c = rows[j * rw + i];
        }
        for (j, m) in sliding_or(&column, k).into_iter().enumerate() {
            blocks[j * rw + i] = m;
        }
    }

    let win = grid.window();
    blocks
        .iter()
        .enumerate()
        .filter(|(_, &m)| m == 0b1111)
        .map(|(n, _)| {
            let (i, j) = (i_lo + n % rw, j_lo + n / rw);
            MeetingCell {
                i,
                j,
                k,
                du_min: win.du_at(i),
                du_max: win.du_at(i + k - 1),
                dv_min: win.dv_at(j),
                dv_max: win.dv_at(j + k - 1),
            }
        })
        .collect()
}

/// OR of every run of `k` consecutive entries, by doubling.
fn sliding_or(line: &[u8], k: usize) -> Vec<u8> {
    let mut acc = line.to_vec();
    let mut span = 1;
    while 2 * span <= k {
        for x in 0..acc.len() - span {
            acc[x] |= acc[x + span];
        }
        span *= 2;
    }
    // acc[x] now covers [x, x + span); two overlapping spans cover k
    (0..=line.len() - k)
        .map(|x| acc[x] | acc[x + k - span])
        .collect()
}

/// Groups meeting blocks whose anchors touch (8-neighbourhood). Each group
/// is ordered by distance of the block centre from the group centroid, so
/// the first entry is the most central block.
pub fn cluster_meeting_cells(cells: &[MeetingCell]) -> Vec<Vec<MeetingCell>> {
    let n = cells.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    let index: HashMap<(usize, usize), usize> =
        cells.iter().enumerate().map(|(n, c)| ((c.i, c.j), n)).collect();
    for (a, c) in cells.iter().enumerate() {
        for dj in -1i64..=1 {
            for di in -1i64..=1 {
                let (ni, nj) = (c.i as i64 + di, c.j as i64 + dj);
                if ni < 0 || nj < 0 {
                    continue;
                }
                if let Some(&b) = index.get(&(ni as usize, nj as usize)) {
                    let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
                    if ra != rb {
                        parent[ra.max(rb)] = ra.min(rb);
                    }
                }
            }
        }
    }
    let mut groups: Vec<Vec<MeetingCell>> = Vec::new();
    let mut root_slot: HashMap<usize, usize> = HashMap::new();
    for a in 0..n {
        let r = find(&mut parent, a);
        let slot = *root_slot.entry(r).or_insert_with(|| {
            groups.push(Vec::new());
            groups.len() - 1
        });
        groups[slot].push(cells[a]);
    }
    for g in &mut groups {
        let m = g.len() as f64;
        let (cx, cy) = g.iter().fold((0.0, 0.0), |(x, y), c| {
            let (a, b) = c.center();
            (x + a / m, y + b / m)
        });
        g.sort_by(|a, b| {
            let da = dist2(a.center(), (cx, cy));
            let db = dist2(b.center(), (cx, cy));
            da.total_cmp(&db).then((a.j, a.i).cmp(&(b.j, b.i)))
        });
    }
    groups
}

fn dist2(a: (f64, f64), b: (f64, f64)) -> f64 {
    (a.0 - b.0).powi(2) + (a.1 - b.1).powi(2)
}
