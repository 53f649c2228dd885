//! Two-dimensional bands discretized on a square grid and solved exactly by
//! s–t min-cut.

use std::f64::consts::FRAC_PI_2;

use crate::bubble::crofton::CroftonWeights;
use crate::bubble::maxflow::{FlowNetwork, INFINITE};
use crate::bubble::{BarrierReport, DiscreteSet};
use crate::error::{Error, Result};

/// Capacities are rounded to integer multiples of this length.
pub const QUANTUM: f64 = 1e-9;
/// Largest interior cell count accepted by the enumeration oracle.
pub const BRUTE_FORCE_BUDGET: usize = 20;

pub fn quantize(x: f64) -> i64 {
    (x / QUANTUM).round() as i64
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Topology {
    /// periodic in y; every slice x = const is a closed curve
    Cylinder,
    Rectangle,
}

impl Topology {
    pub fn name(self) -> &'static str {
        match self {
            Topology::Cylinder => "cylinder",
            Topology::Rectangle => "rectangle",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Edge {
    pub p: usize,
    pub q: usize,
    pub diagonal: bool,
}

/// Cells are indexed `i·ny + j` with `i` along the band (x) and `j` across (y).
#[derive(Debug, Clone, PartialEq)]
pub struct PlanarGrid {
    nx: usize,
    ny: usize,
    delta: f64,
    topology: Topology,
    h: Vec<f64>,
    weights: CroftonWeights,
    source: Vec<bool>,
    sink: Vec<bool>,
    h_minus: f64,
    h_plus: f64,
    edges: Vec<Edge>,
}

impl PlanarGrid {
    /// Grid with one-column collars at both ends and flat collars (H = 0).
    pub fn new(nx: usize, ny: usize, delta: f64, topology: Topology, h: Vec<f64>) -> Result<Self> {
        if nx < 2 || ny < 1 {
            return Err(Error::Domain(format!("grid {nx}×{ny} is too small")));
        }
        if topology == Topology::Cylinder && ny < 3 {
            return Err(Error::Domain(format!("a cylinder needs ny ≥ 3, got {ny}")));
        }
        if !(delta > 0.0 && delta.is_finite()) {
            return Err(Error::Domain(format!("cell size must be positive, got {delta}")));
        }
        if h.len() != nx * ny {
            return Err(Error::Domain(format!("{} h values for {} cells", h.len(), nx * ny)));
        }
        if let Some(v) = h.iter().find(|v| !v.is_finite()) {
            return Err(Error::Domain(format!("non-finite h value {v}")));
        }
        let mut grid = Self {
            nx,
            ny,
            delta,
            topology,
            h,
            weights: CroftonWeights::for_cell(delta),
            source: Vec::new(),
            sink: Vec::new(),
            h_minus: 0.0,
            h_plus: 0.0,
            edges: Vec::new(),
        };
        grid.edges = grid.build_edges();
        grid.with_collar_columns(1, 1)
    }

    /// Samples `h` at cell centres.
    pub fn from_fn(
        nx: usize,
        ny: usize,
        delta: f64,
        topology: Topology,
        h: impl Fn(f64, f64) -> f64,
    ) -> Result<Self> {
        let mut values = Vec::with_capacity(nx * ny);
        for i in 0..nx {
            for j in 0..ny {
                values.push(h((i as f64 + 0.5) * delta, (j as f64 + 0.5) * delta));
            }
        }
        Self::new(nx, ny, delta, topology, values)
    }

    pub fn with_collar_columns(self, minus: usize, plus: usize) -> Result<Self> {
        let (nx, ny) = (self.nx, self.ny);
        let source = (0..nx * ny).map(|c| c / ny < minus).collect();
        let sink = (0..nx * ny).map(|c| c / ny >= nx.saturating_sub(plus)).collect();
        self.with_collars(source, sink)
    }

    pub fn with_collars(mut self, source: Vec<bool>, sink: Vec<bool>) -> Result<Self> {
        let cells = self.cell_count();
        if source.len() != cells || sink.len() != cells {
            return Err(Error::Domain("collar masks must cover every cell".into()));
        }
        if !source.iter().any(|&b| b) || !sink.iter().any(|&b| b) {
            return Err(Error::Domain("collars must be non-empty".into()));
        }
        if source.iter().zip(&sink).any(|(a, b)| *a && *b) {
            return Err(Error::Domain("source and sink collars overlap".into()));
        }
        self.source = source;
        self.sink = sink;
        Ok(self)
    }

    /// Declared mean curvatures of ∂₋X and ∂₊X.
    pub fn with_boundary_curvature(mut self, h_minus: f64, h_plus: f64) -> Self {
        self.h_minus = h_minus;
        self.h_plus = h_plus;
        self
    }

    pub fn with_h(mut self, h: Vec<f64>) -> Result<Self> {
        if h.len() != self.cell_count() || h.iter().any(|v| !v.is_finite()) {
            return Err(Error::Domain("h must hold one finite value per cell".into()));
        }
        self.h = h;
        Ok(self)
    }

    fn build_edges(&self) -> Vec<Edge> {
        let (nx, ny) = (self.nx as isize, self.ny as isize);
        let cyl = self.topology == Topology::Cylinder;
        let mut edges = Vec::new();
        for i in 0..nx {
            for j in 0..ny {
                for (di, dj, diagonal) in [(1, 0, false), (0, 1, false), (1, 1, true), (1, -1, true)] {
                    let (a, mut b) = (i + di, j + dj);
                    if a >= nx {
                        continue;
                    }
                    if b < 0 || b >= ny {
                        if !cyl {
                            continue;
                        }
                        b = b.rem_euclid(ny);
                    }
                    edges.push(Edge { p: (i * ny + j) as usize, q: (a * ny + b) as usize, diagonal });
                }
            }
        }
        edges
    }

    pub fn nx(&self) -> usize {
        self.nx
    }
    pub fn ny(&self) -> usize {
        self.ny
    }
    pub fn delta(&self) -> f64 {
        self.delta
    }
    pub fn topology(&self) -> Topology {
        self.topology
    }
    pub fn weights(&self) -> CroftonWeights {
        self.weights
    }
    pub fn h(&self) -> &[f64] {
        &self.h
    }
    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }
    pub fn cell_count(&self) -> usize {
        self.nx * self.ny
    }
    pub fn cell_volume(&self) -> f64 {
        self.delta * self.delta
    }
    pub fn length(&self) -> f64 {
        self.nx as f64 * self.delta
    }
    pub fn height(&self) -> f64 {
        self.ny as f64 * self.delta
    }
    pub fn boundary_curvatures(&self) -> (f64, f64) {
        (self.h_minus, self.h_plus)
    }
    pub fn is_source(&self, c: usize) -> bool {
        self.source[c]
    }
    pub fn is_sink(&self, c: usize) -> bool {
        self.sink[c]
    }
    pub fn cell(&self, i: usize, j: usize) -> usize {
        i * self.ny + j
    }
    pub fn centre(&self, c: usize) -> (f64, f64) {
        let (i, j) = (c / self.ny, c % self.ny);
        ((i as f64 + 0.5) * self.delta, (j as f64 + 0.5) * self.delta)
    }

    pub fn interior_cells(&self) -> Vec<usize> {
        (0..self.cell_count()).filter(|&c| !self.source[c] && !self.sink[c]).collect()
    }

    fn edge_weight(&self, e: &Edge) -> f64 {
        if e.diagonal {
            self.weights.diagonal
        } else {
            self.weights.axis
        }
    }

    pub fn check_admissible(&self, set: &DiscreteSet) -> Result<()> {
        if set.len() != self.cell_count() {
            return Err(Error::Admissibility(format!("set has {} cells, grid has {}", set.len(), self.cell_count())));
        }
        for c in 0..self.cell_count() {
            if self.source[c] && !set.contains(c) {
                return Err(Error::Admissibility(format!("source collar cell {c} missing")));
            }
            if self.sink[c] && set.contains(c) {
                return Err(Error::Admissibility(format!("sink collar cell {c} included")));
            }
        }
        Ok(())
    }

    /// Crofton perimeter of the set inside the band.
    pub fn perimeter(&self, set: &DiscreteSet) -> f64 {
        self.edges
            .iter()
            .filter(|e| set.contains(e.p) != set.contains(e.q))
            .map(|e| self.edge_weight(e))
            .sum()
    }

    /// `perimeter − Σ_{cells in set} h·vol`.
    pub fn energy(&self, set: &DiscreteSet) -> Result<f64> {
        self.check_admissible(set)?;
        let vol = self.cell_volume();
        let bulk: f64 = (0..self.cell_count()).filter(|&c| set.contains(c)).map(|c| self.h[c] * vol).sum();
        Ok(self.perimeter(set) - bulk)
    }

    /// The same functional with every term rounded to [`QUANTUM`].
    pub fn quantized_energy(&self, set: &DiscreteSet) -> Result<i64> {
        self.check_admissible(set)?;
        Ok(self.quantized_energy_unchecked(set))
    }

    fn quantized_energy_unchecked(&self, set: &DiscreteSet) -> i64 {
        let (qa, qd) = (quantize(self.weights.axis), quantize(self.weights.diagonal));
        let vol = self.cell_volume();
        let mut total = 0i64;
        for e in &self.edges {
            if set.contains(e.p) != set.contains(e.q) {
                total += if e.diagonal { qd } else { qa };
            }
        }
        for c in 0..self.cell_count() {
            if set.contains(c) {
                total -= quantize(self.h[c] * vol);
            }
        }
        total
    }

    /// Upper bound on |quantized/QUANTUM − energy| for any set.
    pub fn quantization_bound(&self) -> f64 {
        0.5 * QUANTUM * (self.edges.len() + self.cell_count()) as f64
    }

    /// Strict margins `H(∂₋) + min h` over the source collar and
    /// `H(∂₊) − max h` over the sink collar.
    pub fn check_barriers(&self) -> BarrierReport {
        let min_source = (0..self.cell_count()).filter(|&c| self.source[c]).map(|c| self.h[c]).fold(f64::INFINITY, f64::min);
        let max_sink =
            (0..self.cell_count()).filter(|&c| self.sink[c]).map(|c| self.h[c]).fold(f64::NEG_INFINITY, f64::max);
        BarrierReport::new(self.h_minus + min_source, self.h_plus - max_sink)
    }

    /// Whether removing the cut edges disconnects source from sink.
    pub fn separates(&self, set: &DiscreteSet) -> bool {
        let mut adjacency = vec![Vec::new(); self.cell_count()];
        for e in &self.edges {
            if set.contains(e.p) == set.contains(e.q) {
                adjacency[e.p].push(e.q);
                adjacency[e.q].push(e.p);
            }
        }
        let mut seen = self.source.clone();
        let mut stack: Vec<usize> = (0..self.cell_count()).filter(|&c| self.source[c]).collect();
        while let Some(c) = stack.pop() {
            if self.sink[c] {
                return false;
            }
            for &d in &adjacency[c] {
                if !seen[d] {
                    seen[d] = true;
                    stack.push(d);
                }
            }
        }
        true
    }

    /// Energy of the best set `{i < c}` over all column cuts.
    pub fn best_straight_cut(&self) -> Result<(usize, f64)> {
        let mut best: Option<(usize, f64)> = None;
        for c in 1..self.nx {
            let set = DiscreteSet::from_fn(self.cell_count(), |k| k / self.ny < c);
            if let Ok(e) = self.energy(&set) {
                if best.is_none_or(|(_, b)| e < b) {
                    best = Some((c, e));
                }
            }
        }
        best.ok_or_else(|| Error::Admissibility("no admissible straight cut".into()))
    }

    /// `|∇h|` at a cell centre by central differences (one-sided at the
    /// x ends and, for rectangles, the y ends).
    pub fn gradient(&self, c: usize) -> (f64, f64) {
        let (i, j) = (c / self.ny, c % self.ny);
        let d = self.delta;
        let gx = if self.nx == 1 {
            0.0
        } else if i == 0 {
            (self.h[self.cell(1, j)] - self.h[c]) / d
        } else if i + 1 == self.nx {
            (self.h[c] - self.h[self.cell(i - 1, j)]) / d
        } else {
            (self.h[self.cell(i + 1, j)] - self.h[self.cell(i - 1, j)]) / (2.0 * d)
        };
        let gy = match self.topology {
            Topology::Cylinder => {
                let up = self.cell(i, (j + 1) % self.ny);
                let down = self.cell(i, (j + self.ny - 1) % self.ny);
                (self.h[up] - self.h[down]) / (2.0 * d)
            }
            Topology::Rectangle if self.ny == 1 => 0.0,
            Topology::Rectangle if j == 0 => (self.h[self.cell(i, 1)] - self.h[c]) / d,
            Topology::Rectangle if j + 1 == self.ny => (self.h[c] - self.h[self.cell(i, j - 1)]) / d,
            Topology::Rectangle => (self.h[self.cell(i, j + 1)] - self.h[self.cell(i, j - 1)]) / (2.0 * d),
        };
        (gx, gy)
    }
}

/// One face of Σ, oriented with the set on its left.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Face {
    pub from: (usize, usize),
    pub to: (usize, usize),
    pub inside: usize,
    pub outside: usize,
    /// unit direction (Ω on the left); outward normal ν = (dy, −dx)
    pub dir: (i32, i32),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Polyline {
    /// vertices in length units; y is unwrapped across the cylinder seam
    pub points: Vec<(f64, f64)>,
    pub faces: Vec<Face>,
    pub closed: bool,
}

impl Polyline {
    pub fn length(&self, delta: f64) -> f64 {
        self.faces.len() as f64 * delta
    }
}

/// Boundary faces of the set between cells of the band, traced into
/// oriented polylines. At saddle vertices the left turn is taken.
pub fn trace_boundary(grid: &PlanarGrid, set: &DiscreteSet) -> Vec<Polyline> {
    let (nx, ny) = (grid.nx, grid.ny);
    let cyl = grid.topology == Topology::Cylinder;
    let vy = |b: usize| if cyl { b % ny } else { b };
    let mut faces = Vec::new();
    for i in 0..nx {
        for j in 0..ny {
            let p = grid.cell(i, j);
            if i + 1 < nx {
                let q = grid.cell(i + 1, j);
                match (set.contains(p), set.contains(q)) {
                    (true, false) => faces.push(Face { from: (i + 1, vy(j)), to: (i + 1, vy(j + 1)), inside: p, outside: q, dir: (0, 1) }),
                    (false, true) => faces.push(Face { from: (i + 1, vy(j + 1)), to: (i + 1, vy(j)), inside: q, outside: p, dir: (0, -1) }),
                    _ => {}
                }
            }
            if j + 1 < ny || cyl {
                let q = grid.cell(i, (j + 1) % ny);
                match (set.contains(p), set.contains(q)) {
                    (true, false) => faces.push(Face { from: (i + 1, vy(j + 1)), to: (i, vy(j + 1)), inside: p, outside: q, dir: (-1, 0) }),
                    (false, true) => faces.push(Face { from: (i, vy(j + 1)), to: (i + 1, vy(j + 1)), inside: q, outside: p, dir: (1, 0) }),
                    _ => {}
                }
            }
        }
    }

    let vertex_rows = if cyl { ny } else { ny + 1 };
    let vid = |v: (usize, usize)| v.0 * vertex_rows + v.1;
    let mut outgoing = vec![Vec::new(); (nx + 1) * vertex_rows];
    let mut incoming = vec![0usize; (nx + 1) * vertex_rows];
    for (k, f) in faces.iter().enumerate() {
        outgoing[vid(f.from)].push(k);
        incoming[vid(f.to)] += 1;
    }

    let mut used = vec![false; faces.len()];
    let mut lines = Vec::new();
    let open_starts: Vec<usize> = (0..faces.len()).filter(|&k| incoming[vid(faces[k].from)] == 0).collect();
    let starts = open_starts.iter().copied().chain(0..faces.len());
    for start in starts {
        if used[start] {
            continue;
        }
        let origin = faces[start].from;
        let mut line = Polyline { points: Vec::new(), faces: Vec::new(), closed: false };
        let (mut x, mut y) = (origin.0 as f64 * grid.delta, origin.1 as f64 * grid.delta);
        line.points.push((x, y));
        let mut k = start;
        loop {
            used[k] = true;
            let f = faces[k];
            x += f.dir.0 as f64 * grid.delta;
            y += f.dir.1 as f64 * grid.delta;
            line.points.push((x, y));
            line.faces.push(f);
            let candidates: Vec<usize> = outgoing[vid(f.to)].iter().copied().filter(|&c| !used[c]).collect();
            let next = candidates.iter().copied().max_by_key(|&c| {
                let d = faces[c].dir;
                // cross > 0: left turn; prefer left, then straight, then right
                f.dir.0 * d.1 - f.dir.1 * d.0
            });
            match next {
                Some(c) => k = c,
                None => {
                    line.closed = f.to == origin;
                    break;
                }
            }
        }
        lines.push(line);
    }
    lines
}

/// Discrete curvature on a 3-face stencil: turning angle between the outer
/// faces over the stencil length 2Δ, positive for left turns.
pub fn stencil_curvatures(grid: &PlanarGrid, line: &Polyline) -> Vec<(usize, f64, f64)> {
    let m = line.faces.len();
    let turn = |a: (i32, i32), b: (i32, i32)| -> f64 {
        let cross = a.0 * b.1 - a.1 * b.0;
        let dot = a.0 * b.0 + a.1 * b.1;
        if cross > 0 {
            FRAC_PI_2
        } else if cross < 0 {
            -FRAC_PI_2
        } else if dot > 0 {
            0.0
        } else {
            std::f64::consts::PI
        }
    };
    let mut out = Vec::new();
    for k in 0..m {
        let (prev, next) = if line.closed && m >= 3 {
            ((k + m - 1) % m, (k + 1) % m)
        } else if k == 0 || k + 1 >= m {
            continue;
        } else {
            (k - 1, k + 1)
        };
        let theta = turn(line.faces[prev].dir, line.faces[k].dir) + turn(line.faces[k].dir, line.faces[next].dir);
        let kappa = theta / (2.0 * grid.delta);
        let h_avg = [prev, k, next]
            .iter()
            .map(|&s| 0.5 * (grid.h[line.faces[s].inside] + grid.h[line.faces[s].outside]))
            .sum::<f64>()
            / 3.0;
        out.push((k, kappa, h_avg));
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct CutResult {
    pub set: DiscreteSet,
    pub energy: f64,
    pub quantized_energy: i64,
    pub quantization_bound: f64,
    pub perimeter: f64,
    pub boundary: Vec<Polyline>,
    pub barrier: BarrierReport,
}

impl CutResult {
    fn build(grid: &PlanarGrid, set: DiscreteSet) -> Result<Self> {
        let energy = grid.energy(&set)?;
        let quantized_energy = grid.quantized_energy(&set)?;
        let perimeter = grid.perimeter(&set);
        let boundary = trace_boundary(grid, &set);
        Ok(Self {
            set,
            energy,
            quantized_energy,
            quantization_bound: grid.quantization_bound(),
            perimeter,
            boundary,
            barrier: grid.check_barriers(),
        })
    }

    /// Length-weighted mean x of the boundary faces.
    pub fn boundary_centroid_x(&self) -> Option<f64> {
        let mut sum = 0.0;
        let mut count = 0usize;
        for line in &self.boundary {
            for w in line.points.windows(2) {
                sum += 0.5 * (w[0].0 + w[1].0);
                count += 1;
            }
        }
        (count > 0).then(|| sum / count as f64)
    }

    pub fn polyline_length(&self, delta: f64) -> f64 {
        self.boundary.iter().map(|l| l.length(delta)).sum()
    }
}

/// Exact minimizer of the quantized functional; the returned set is the
/// minimal one (source side of the residual graph).
pub fn minimize_2d(grid: &PlanarGrid) -> Result<CutResult> {
    let barrier = grid.check_barriers();
    if !barrier.passed {
        return Err(Error::Barrier { minus: barrier.minus_margin, plus: barrier.plus_margin });
    }
    let set = solve_min_cut(grid).0;
    CutResult::build(grid, set)
}

/// Min-cut without the barrier check: `(minimal minimizer, cut value)`.
pub fn solve_min_cut(grid: &PlanarGrid) -> (DiscreteSet, i64) {
    let cells = grid.cell_count();
    let (s, t) = (cells, cells + 1);
    let mut net = FlowNetwork::new(cells + 2);
    let vol = grid.cell_volume();
    for c in 0..cells {
        if grid.source[c] {
            net.add_edge(s, c, INFINITE, 0);
        }
        if grid.sink[c] {
            net.add_edge(c, t, INFINITE, 0);
        }
        let q = quantize(grid.h[c] * vol);
        if q > 0 {
            net.add_edge(s, c, q, 0);
        } else if q < 0 {
            net.add_edge(c, t, -q, 0);
        }
    }
    let (qa, qd) = (quantize(grid.weights.axis), quantize(grid.weights.diagonal));
    for e in &grid.edges {
        let w = if e.diagonal { qd } else { qa };
        net.add_edge(e.p, e.q, w, w);
    }
    let flow = net.max_flow(s, t);
    let side = net.source_side(s);
    (DiscreteSet::from_fn(cells, |c| side[c]), flow)
}

fn enumerate<F: FnMut(&DiscreteSet, i64)>(grid: &PlanarGrid, mut visit: F) -> Result<()> {
    let interior = grid.interior_cells();
    if interior.len() > BRUTE_FORCE_BUDGET {
        return Err(Error::Budget { cells: interior.len(), budget: BRUTE_FORCE_BUDGET });
    }
    let mut set = DiscreteSet::from_fn(grid.cell_count(), |c| grid.source[c]);
    for mask in 0u32..(1u32 << interior.len()) {
        for (bit, &c) in interior.iter().enumerate() {
            set.set(c, mask >> bit & 1 == 1);
        }
        let q = grid.quantized_energy_unchecked(&set);
        visit(&set, q);
    }
    Ok(())
}

/// Minimum quantized energy and every set attaining it.
pub fn enumerate_minimizers(grid: &PlanarGrid) -> Result<(i64, Vec<DiscreteSet>)> {
    let mut best = i64::MAX;
    let mut sets = Vec::new();
    enumerate(grid, |set, q| {
        if q < best {
            best = q;
            sets.clear();
        }
        if q == best {
            sets.push(set.clone());
        }
    })?;
    Ok((best, sets))
}

/// Enumeration oracle over all admissible sets; returns the intersection of
/// all minimizers.
pub fn brute_force_minimize(grid: &PlanarGrid) -> Result<CutResult> {
    let (best, sets) = enumerate_minimizers(grid)?;
    let mut minimal = sets[0].clone();
    for s in &sets[1..] {
        minimal = minimal.intersection(s);
    }
    if grid.quantized_energy_unchecked(&minimal) != best {
        minimal = sets[0].clone();
    }
    CutResult::build(grid, minimal)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn flat(nx: usize, ny: usize, topo: Topology, h: impl Fn(f64, f64) -> f64) -> PlanarGrid {
        PlanarGrid::from_fn(nx, ny, 1.0 / ny as f64, topo, h).unwrap()
    }

    #[test]
    fn straight_cut_energy_is_height_times_density() {
        let g = flat(8, 4, Topology::Cylinder, |_, _| 0.0);
        let set = DiscreteSet::from_fn(g.cell_count(), |c| c / 4 < 4);
        let expected = g.weights().line_density(0.0, g.delta());
        assert!((g.energy(&set).unwrap() - expected).abs() < 1e-14);
    }

    #[test]
    fn collar_only_energy() {
        let g = flat(5, 3, Topology::Rectangle, |_, _| 0.0);
        let set = DiscreteSet::from_fn(g.cell_count(), |c| g.is_source(c));
        // 3 axis edges and 4 diagonals leave the collar
        let w = g.weights();
        assert!((g.energy(&set).unwrap() - (3.0 * w.axis + 4.0 * w.diagonal)).abs() < 1e-15);
    }

    #[test]
    fn admissibility_enforced() {
        let g = flat(4, 3, Topology::Cylinder, |_, _| 0.0);
        let empty = DiscreteSet::from_fn(g.cell_count(), |_| false);
        assert!(matches!(g.energy(&empty), Err(Error::Admissibility(_))));
        let full = DiscreteSet::from_fn(g.cell_count(), |_| true);
        assert!(matches!(g.energy(&full), Err(Error::Admissibility(_))));
    }

    #[test]
    fn cylinder_needs_three_rows() {
        assert!(PlanarGrid::from_fn(4, 2, 0.5, Topology::Cylinder, |_, _| 0.0).is_err());
    }

    #[test]
    fn min_cut_matches_enumeration_small() {
        let g = flat(6, 3, Topology::Rectangle, |x, y| (3.0 * x - 2.0 * y).sin() * 4.0).with_boundary_curvature(10.0, 10.0);
        let a = minimize_2d(&g).unwrap();
        let b = brute_force_minimize(&g).unwrap();
        assert_eq!(a.quantized_energy, b.quantized_energy);
        assert_eq!(a.set, b.set);
        assert!(g.separates(&a.set));
    }

    #[test]
    fn straight_boundary_is_a_closed_loop() {
        let g = flat(8, 4, Topology::Cylinder, |_, _| 0.0);
        let set = DiscreteSet::from_fn(g.cell_count(), |c| c / 4 < 3);
        let lines = trace_boundary(&g, &set);
        assert_eq!(lines.len(), 1);
        assert!(lines[0].closed);
        assert_eq!(lines[0].faces.len(), 4);
        assert!(lines[0].faces.iter().all(|f| f.dir == (0, 1)));
        for (_, kappa, _) in stencil_curvatures(&g, &lines[0]) {
            assert_eq!(kappa, 0.0);
        }
    }

    #[test]
    fn square_blob_turns_left() {
        let g = flat(6, 6, Topology::Rectangle, |_, _| 0.0);
        // source collar plus a detached 2×2 block
        let set = DiscreteSet::from_fn(g.cell_count(), |c| {
            let (i, j) = (c / 6, c % 6);
            i == 0 || ((2..4).contains(&i) && (2..4).contains(&j))
        });
        let lines = trace_boundary(&g, &set);
        let blob = lines.iter().find(|l| l.closed).unwrap();
        assert_eq!(blob.faces.len(), 8);
        let total: f64 = stencil_curvatures(&g, blob).iter().map(|(_, k, _)| k * 2.0 * g.delta()).sum();
        // each corner is counted by two stencils: 2·2π
        assert!((total - 4.0 * std::f64::consts::PI).abs() < 1e-12);
        let open: Vec<_> = lines.iter().filter(|l| !l.closed).collect();
        assert_eq!(open.len(), 1);
        assert_eq!(open[0].faces.len(), 6);
    }

    #[test]
    fn budget_error() {
        let g = flat(8, 4, Topology::Cylinder, |_, _| 0.0);
        assert!(matches!(brute_force_minimize(&g), Err(Error::Budget { cells: 24, .. })));
    }

    #[test]
    fn barrier_failure() {
        let g = flat(6, 3, Topology::Cylinder, |_, _| 0.5);
        let r = g.check_barriers();
        assert_eq!(r.plus_margin, -0.5);
        assert!(matches!(minimize_2d(&g), Err(Error::Barrier { .. })));
    }
}
