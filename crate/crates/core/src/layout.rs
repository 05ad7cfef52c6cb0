//! Force-directed placement with grid snapping.
//!
//! Phase 1 relaxes a spring embedder: every vertex pair repels with `k1/r^2`
//! and every edge pulls with a linear spring `k2 * (length - rest)`. Phase 2
//! adds an attraction toward the nearest unclaimed integer grid point; a
//! vertex claims a point once it gets close enough, conflicting vertices are
//! separated by the ordinary repulsion, and everyone is finally hard-snapped
//! to a distinct lattice point.

use std::collections::HashSet;
use std::fmt::Write as _;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::topology::TopologyGraph;

#[derive(Debug, Clone, PartialEq)]
pub struct LayoutParams {
    pub k1: f64,
    pub k2: f64,
    pub rest_length: f64,
    pub step_size: f64,
    pub damping: f64,
    pub grid_pitch: f64,
    pub tol: f64,
    pub max_iters: usize,
    /// Claim a grid point when within this fraction of the pitch.
    pub claim_radius: f64,
    /// Repulsion multiplier; larger values space qubits farther apart.
    pub sparse: f64,
}

impl Default for LayoutParams {
    fn default() -> Self {
        Self {
            k1: 1.0,
            k2: 0.05,
            rest_length: 1.0,
            step_size: 0.05,
            damping: 0.9,
            grid_pitch: 1.0,
            tol: 1e-4,
            max_iters: 500,
            claim_radius: 0.25,
            sparse: 1.0,
        }
    }
}

/// Continuous positions during simulation.
#[derive(Debug, Clone)]
pub struct LayoutState {
    pub positions: Vec<[f64; 2]>,
    pub params: LayoutParams,
    /// Claimed grid point per vertex, set during the snap phase.
    claims: Vec<Option<(i64, i64)>>,
    occupied: HashSet<(i64, i64)>,
}

/// Final integer placement: `(row, col)` per vertex, normalized to start at 0.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GridLayout {
    pub coords: Vec<(i64, i64)>,
    pub crossing_count: usize,
    pub iterations_used: usize,
}

impl LayoutState {
    /// Seeded circular initial placement. Vertices go around the circle in a
    /// seeded depth-first order, which follows paths and cycles instead of
    /// scattering them, so the relaxation starts from far fewer crossings.
    /// The seeded start vertex and neighbor shuffle are what make restarts
    /// explore different untanglings. Tiny jitter rules out coincident
    /// positions.
    pub fn initial(g: &TopologyGraph, seed: u64, params: LayoutParams) -> Self {
        use rand::seq::SliceRandom;
        let n = g.num_vertices();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);

        let mut starts: Vec<usize> = (0..n).collect();
        starts.shuffle(&mut rng);
        let mut order = Vec::with_capacity(n);
        let mut seen = vec![false; n];
        for &start in &starts {
            if seen[start] {
                continue;
            }
            let mut stack = vec![start];
            while let Some(v) = stack.pop() {
                if seen[v] {
                    continue;
                }
                seen[v] = true;
                order.push(v);
                let mut nbrs = g.neighbors(v);
                nbrs.shuffle(&mut rng);
                stack.extend(nbrs.into_iter().filter(|&u| !seen[u]));
            }
        }

        let spacing = equilibrium_spacing(&params);
        let radius = (n as f64 * spacing / (2.0 * std::f64::consts::PI)).max(params.grid_pitch);
        let phase: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
        let mut positions = vec![[0.0; 2]; n];
        for (slot, &v) in order.iter().enumerate() {
            let angle = phase + std::f64::consts::TAU * slot as f64 / n as f64;
            positions[v] = [
                radius * angle.cos() + rng.gen_range(-1e-3..1e-3),
                radius * angle.sin() + rng.gen_range(-1e-3..1e-3),
            ];
        }
        Self {
            positions,
            params,
            claims: vec![None; n],
            occupied: HashSet::new(),
        }
    }

    /// Net force on each vertex from pairwise repulsion and edge springs.
    /// Pairwise distances are floored to dodge the 1/r^2 singularity.
    fn spring_forces(&self, g: &TopologyGraph) -> Vec<[f64; 2]> {
        let n = self.positions.len();
        let p = &self.params;
        let mut forces = vec![[0.0; 2]; n];
        for v in 0..n {
            for u in (v + 1)..n {
                let dx = self.positions[v][0] - self.positions[u][0];
                let dy = self.positions[v][1] - self.positions[u][1];
                let r = (dx * dx + dy * dy).sqrt().max(1e-6);
                let (ux, uy) = (dx / r, dy / r);
                let repulse = p.k1 * p.sparse / (r * r);
                forces[v][0] += repulse * ux;
                forces[v][1] += repulse * uy;
                forces[u][0] -= repulse * ux;
                forces[u][1] -= repulse * uy;
                if g.has_edge(v, u) {
                    let pull = p.k2 * (r - p.rest_length);
                    forces[v][0] -= pull * ux;
                    forces[v][1] -= pull * uy;
                    forces[u][0] += pull * ux;
                    forces[u][1] += pull * uy;
                }
            }
        }
        forces
    }

    /// One synchronous relaxation step; returns the largest displacement norm.
    pub fn force_step(&mut self, g: &TopologyGraph) -> f64 {
        let forces = self.spring_forces(g);
        self.apply_displacements(&forces)
    }

    fn apply_displacements(&mut self, forces: &[[f64; 2]]) -> f64 {
        let scale = self.params.damping * self.params.step_size;
        let mut max_norm = 0.0f64;
        for (pos, f) in self.positions.iter_mut().zip(forces) {
            let mut dx = scale * f[0];
            let mut dy = scale * f[1];
            let norm = (dx * dx + dy * dy).sqrt();
            // Stability clamp for pathological force spikes.
            if norm > 1.0 {
                dx /= norm;
                dy /= norm;
            }
            pos[0] += dx;
            pos[1] += dy;
            max_norm = max_norm.max(norm.min(1.0));
        }
        max_norm
    }

    fn nearest_free_point(&self, pos: [f64; 2]) -> (i64, i64) {
        let pitch = self.params.grid_pitch;
        let base = (
            (pos[1] / pitch).round() as i64,
            (pos[0] / pitch).round() as i64,
        );
        if !self.occupied.contains(&base) {
            return base;
        }
        // Expand Chebyshev rings; pick the Euclidean-nearest free point with
        // a deterministic tie-break.
        for ring in 1..=64i64 {
            let mut best: Option<(f64, (i64, i64))> = None;
            for dr in -ring..=ring {
                for dc in -ring..=ring {
                    if dr.abs().max(dc.abs()) != ring {
                        continue;
                    }
                    let cand = (base.0 + dr, base.1 + dc);
                    if self.occupied.contains(&cand) {
                        continue;
                    }
                    let (cx, cy) = (cand.1 as f64 * pitch, cand.0 as f64 * pitch);
                    let d2 = (pos[0] - cx).powi(2) + (pos[1] - cy).powi(2);
                    let key = (d2, cand);
                    if best.is_none_or(|(bd, bc)| (key.0, key.1) < (bd, bc)) {
                        best = Some(key);
                    }
                }
            }
            if let Some((_, point)) = best {
                return point;
            }
        }
        unreachable!("a free grid point always exists within 64 rings");
    }

    /// One snap-phase step: refresh targets, record claims (first come,
    /// nearest free point), add grid attraction to the spring forces.
    /// Returns (max displacement, all claimed).
    pub fn snap_step(&mut self, g: &TopologyGraph) -> (f64, bool) {
        let n = self.positions.len();
        let pitch = self.params.grid_pitch;
        let mut targets: Vec<(i64, i64)> = Vec::with_capacity(n);
        for v in 0..n {
            match self.claims[v] {
                Some(point) => targets.push(point),
                None => {
                    let target = self.nearest_free_point(self.positions[v]);
                    let (tx, ty) = (target.1 as f64 * pitch, target.0 as f64 * pitch);
                    let d = ((self.positions[v][0] - tx).powi(2)
                        + (self.positions[v][1] - ty).powi(2))
                    .sqrt();
                    if d <= self.params.claim_radius * pitch {
                        self.claims[v] = Some(target);
                        self.occupied.insert(target);
                    }
                    targets.push(target);
                }
            }
        }
        let all_claimed = self.claims.iter().all(Option::is_some);

        let mut forces = self.spring_forces(g);
        for v in 0..n {
            let (tx, ty) = (targets[v].1 as f64 * pitch, targets[v].0 as f64 * pitch);
            let dx = tx - self.positions[v][0];
            let dy = ty - self.positions[v][1];
            let d = (dx * dx + dy * dy).sqrt();
            if d > 1e-12 {
                // Grid attraction uses the spring form toward the target.
                let pull = self.params.k2 * d;
                forces[v][0] += pull * dx / d;
                forces[v][1] += pull * dy / d;
            }
        }
        let disp = self.apply_displacements(&forces);
        (disp, all_claimed)
    }

    /// Force any unclaimed vertices onto free points, in index order.
    fn finalize_claims(&mut self) {
        for v in 0..self.positions.len() {
            if self.claims[v].is_none() {
                let point = self.nearest_free_point(self.positions[v]);
                self.claims[v] = Some(point);
                self.occupied.insert(point);
            }
        }
    }
}

/// Spacing where spring pull balances repulsion: solves
/// `k2 (d - rest) = k1 sparse / d^2` by a few Newton steps.
fn equilibrium_spacing(p: &LayoutParams) -> f64 {
    let ratio = p.k1 * p.sparse / p.k2;
    let mut d = ratio.cbrt().max(p.rest_length + 0.1);
    for _ in 0..40 {
        let f = d * d * (d - p.rest_length) - ratio;
        let fp = 3.0 * d * d - 2.0 * p.rest_length * d;
        let next = d - f / fp;
        if !next.is_finite() || next <= 0.0 {
            break;
        }
        if (next - d).abs() < 1e-12 {
            d = next;
            break;
        }
        d = next;
    }
    d
}

/// Run both phases and return the snapped grid placement.
pub fn layout(g: &TopologyGraph, seed: u64, params: &LayoutParams) -> GridLayout {
    let mut state = LayoutState::initial(g, seed, params.clone());
    let mut iterations = 0usize;

    for _ in 0..params.max_iters {
        iterations += 1;
        if state.force_step(g) < params.tol {
            break;
        }
    }
    for _ in 0..params.max_iters {
        iterations += 1;
        let (disp, all_claimed) = state.snap_step(g);
        if all_claimed || disp < params.tol * 1e-2 {
            break;
        }
    }
    state.finalize_claims();

    let mut coords: Vec<(i64, i64)> = state
        .claims
        .iter()
        .map(|c| c.expect("finalize_claims assigns everyone"))
        .collect();
    let min_r = coords.iter().map(|c| c.0).min().unwrap_or(0);
    let min_c = coords.iter().map(|c| c.1).min().unwrap_or(0);
    for c in &mut coords {
        *c = (c.0 - min_r, c.1 - min_c);
    }
    let crossing_count = count_crossings_coords(&coords, &g.edges());
    GridLayout {
        coords,
        crossing_count,
        iterations_used: iterations,
    }
}

/// Best-of-k restarts by crossing count (ties keep the earliest seed).
pub fn best_layout(g: &TopologyGraph, seeds: &[u64], params: &LayoutParams) -> GridLayout {
    assert!(!seeds.is_empty());
    seeds
        .iter()
        .map(|&s| layout(g, s, params))
        .min_by_key(|l| l.crossing_count)
        .expect("at least one seed")
}

/// Number of edge pairs whose open segments intersect. Shared endpoints never
/// count; collinear overlap counts once per pair. Exact integer arithmetic.
pub fn count_crossings(grid: &GridLayout, g: &TopologyGraph) -> usize {
    count_crossings_coords(&grid.coords, &g.edges())
}

pub fn count_crossings_coords(coords: &[(i64, i64)], edges: &[(usize, usize)]) -> usize {
    let mut count = 0;
    for (idx, &(a, b)) in edges.iter().enumerate() {
        for &(c, d) in &edges[idx + 1..] {
            if a == c || a == d || b == c || b == d {
                continue;
            }
            if segments_cross(coords[a], coords[b], coords[c], coords[d]) {
                count += 1;
            }
        }
    }
    count
}

fn cross(o: (i64, i64), a: (i64, i64), b: (i64, i64)) -> i128 {
    let (ox, oy) = (o.1 as i128, o.0 as i128);
    let (ax, ay) = (a.1 as i128, a.0 as i128);
    let (bx, by) = (b.1 as i128, b.0 as i128);
    (ax - ox) * (by - oy) - (ay - oy) * (bx - ox)
}

/// Open-segment intersection for integer endpoints.
fn segments_cross(p1: (i64, i64), p2: (i64, i64), p3: (i64, i64), p4: (i64, i64)) -> bool {
    let d1 = cross(p3, p4, p1);
    let d2 = cross(p3, p4, p2);
    let d3 = cross(p1, p2, p3);
    let d4 = cross(p1, p2, p4);
    if d1 == 0 && d2 == 0 && d3 == 0 && d4 == 0 {
        // Collinear: open intervals overlap on the dominant axis?
        let axis = |p: (i64, i64)| {
            if p1.1 != p2.1 || p3.1 != p4.1 {
                p.1
            } else {
                p.0
            }
        };
        let (lo1, hi1) = minmax(axis(p1), axis(p2));
        let (lo2, hi2) = minmax(axis(p3), axis(p4));
        return lo1.max(lo2) < hi1.min(hi2);
    }
    // Proper crossing: strict sign alternation on both segments. Touches at
    // an endpoint produce a zero product and are excluded by the open rule.
    (d1 > 0) != (d2 > 0) && (d3 > 0) != (d4 > 0) && d1 != 0 && d2 != 0 && d3 != 0 && d4 != 0
}

fn minmax(a: i64, b: i64) -> (i64, i64) {
    if a <= b {
        (a, b)
    } else {
        (b, a)
    }
}

/// Crossing count for continuous positions (used to score the un-snapped
/// initial placement). Strict inequalities; generic positions only.
pub fn count_crossings_f64(positions: &[[f64; 2]], edges: &[(usize, usize)]) -> usize {
    let crossf = |o: [f64; 2], a: [f64; 2], b: [f64; 2]| -> f64 {
        (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
    };
    let mut count = 0;
    for (idx, &(a, b)) in edges.iter().enumerate() {
        for &(c, d) in &edges[idx + 1..] {
            if a == c || a == d || b == c || b == d {
                continue;
            }
            let d1 = crossf(positions[c], positions[d], positions[a]);
            let d2 = crossf(positions[c], positions[d], positions[b]);
            let d3 = crossf(positions[a], positions[b], positions[c]);
            let d4 = crossf(positions[a], positions[b], positions[d]);
            if d1 * d2 < 0.0 && d3 * d4 < 0.0 {
                count += 1;
            }
        }
    }
    count
}

/// SVG drawing: vertices as labeled circles on the grid, edges as lines.
pub fn layout_svg(grid: &GridLayout, g: &TopologyGraph) -> String {
    let scale = 60.0;
    let margin = 40.0;
    let max_r = grid.coords.iter().map(|c| c.0).max().unwrap_or(0) as f64;
    let max_c = grid.coords.iter().map(|c| c.1).max().unwrap_or(0) as f64;
    let width = max_c * scale + 2.0 * margin;
    let height = max_r * scale + 2.0 * margin;
    let at = |v: usize| {
        let (r, c) = grid.coords[v];
        (margin + c as f64 * scale, margin + r as f64 * scale)
    };
    let mut out = String::new();
    let _ = writeln!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{width}\" height=\"{height}\" viewBox=\"0 0 {width} {height}\">"
    );
    for &(a, b) in &g.edges() {
        let (x1, y1) = at(a);
        let (x2, y2) = at(b);
        let _ = writeln!(
            out,
            "  <line x1=\"{x1}\" y1=\"{y1}\" x2=\"{x2}\" y2=\"{y2}\" stroke=\"#555\" stroke-width=\"2\"/>"
        );
    }
    for v in 0..grid.coords.len() {
        let (x, y) = at(v);
        let _ = writeln!(
            out,
            "  <circle cx=\"{x}\" cy=\"{y}\" r=\"14\" fill=\"#e8f0fe\" stroke=\"#1a57c2\" stroke-width=\"2\"/>"
        );
        let _ = writeln!(
            out,
            "  <text x=\"{x}\" y=\"{}\" font-size=\"11\" text-anchor=\"middle\" font-family=\"monospace\">{v}</text>",
            y + 4.0
        );
    }
    out.push_str("</svg>\n");
    out
}

/// Coordinate table: `qubit,row,col` per line.
pub fn layout_csv(grid: &GridLayout) -> String {
    let mut out = String::from("qubit,row,col\n");
    for (v, (r, c)) in grid.coords.iter().enumerate() {
        let _ = writeln!(out, "{v},{r},{c}");
    }
    out
}
