//! Slices of a warped band `w(t)² g_N + dt²` over `[A, B]`.

use std::fmt;
use std::sync::Arc;

use crate::bubble::BarrierReport;
use crate::error::{Error, Result};
use crate::model_spaces::{Interval, ModelSpace};

type TripleFn = Arc<dyn Fn(f64) -> (f64, f64, f64) + Send + Sync>;
type PairFn = Arc<dyn Fn(f64) -> (f64, f64) + Send + Sync>;

/// Relative spread of F below which the family counts as degenerate.
pub const DEGENERATE_TOL: f64 = 1e-12;

#[derive(Clone)]
pub struct WarpedBand {
    n: usize,
    domain: Interval,
    points: usize,
    collar: usize,
    warping: TripleFn,
    potential: PairFn,
}

impl fmt::Debug for WarpedBand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("WarpedBand")
            .field("n", &self.n)
            .field("domain", &self.domain)
            .field("points", &self.points)
            .field("collar", &self.collar)
            .finish_non_exhaustive()
    }
}

impl WarpedBand {
    /// `warping(t) = (w, w′, w″)`, `potential(t) = (h, h′)`; `points` grid
    /// nodes including both ends.
    pub fn new(
        n: usize,
        domain: Interval,
        points: usize,
        warping: impl Fn(f64) -> (f64, f64, f64) + Send + Sync + 'static,
        potential: impl Fn(f64) -> (f64, f64) + Send + Sync + 'static,
    ) -> Result<Self> {
        if n < 2 {
            return Err(Error::Domain(format!("dimension must be at least 2, got {n}")));
        }
        if !(domain.width() > 0.0) {
            return Err(Error::Domain(format!("empty band [{}, {}]", domain.lo, domain.hi)));
        }
        if points < 5 {
            return Err(Error::Domain(format!("need at least 5 grid points, got {points}")));
        }
        let band = Self { n, domain, points, collar: 1, warping: Arc::new(warping), potential: Arc::new(potential) };
        for i in 0..points {
            let t = band.node(i);
            let (w, _, _) = (band.warping)(t);
            if !(w > 0.0 && w.is_finite()) {
                return Err(Error::Domain(format!("warping must be positive, w({t}) = {w}")));
            }
        }
        Ok(band)
    }

    /// Flat ambient, `w ≡ 1`.
    pub fn flat(
        n: usize,
        domain: Interval,
        points: usize,
        potential: impl Fn(f64) -> (f64, f64) + Send + Sync + 'static,
    ) -> Result<Self> {
        Self::new(n, domain, points, |_| (1.0, 0.0, 0.0), potential)
    }

    /// Ambient warping taken from a model space.
    pub fn from_model(
        ms: &ModelSpace,
        points: usize,
        potential: impl Fn(f64) -> (f64, f64) + Send + Sync + 'static,
    ) -> Result<Self> {
        let m = ms.clone();
        Self::new(ms.dimension(), ms.domain(), points, move |t| m.warping().derivatives(t), potential)
    }

    /// Number of nodes at each end forming the collars (at least 1).
    pub fn with_collar(mut self, nodes: usize) -> Result<Self> {
        if nodes == 0 || 2 * nodes >= self.points {
            return Err(Error::Domain(format!("collar of {nodes} nodes does not fit {} points", self.points)));
        }
        self.collar = nodes;
        Ok(self)
    }

    pub fn dimension(&self) -> usize {
        self.n
    }
    pub fn domain(&self) -> Interval {
        self.domain
    }
    pub fn points(&self) -> usize {
        self.points
    }
    pub fn collar(&self) -> usize {
        self.collar
    }
    pub fn spacing(&self) -> f64 {
        self.domain.width() / (self.points - 1) as f64
    }

    /// Node `i`, computed so that symmetric grids are exactly symmetric.
    pub fn node(&self, i: usize) -> f64 {
        let m = (self.points - 1) as f64;
        let i = i as f64;
        (self.domain.lo * (m - i) + self.domain.hi * i) / m
    }

    pub fn warping(&self, t: f64) -> (f64, f64, f64) {
        (self.warping)(t)
    }

    pub fn potential(&self, t: f64) -> (f64, f64) {
        (self.potential)(t)
    }

    /// `(n−1)w′/w`: mean curvature of the slice through `t`.
    pub fn slice_curvature(&self, t: f64) -> f64 {
        let (w, dw, _) = self.warping(t);
        (self.n as f64 - 1.0) * dw / w
    }

    /// `−2(n−1)w″/w − (n−1)(n−2)(w′/w)²` (flat fiber).
    pub fn ambient_scalar_curvature(&self, t: f64) -> f64 {
        let nf = self.n as f64;
        let (w, dw, ddw) = self.warping(t);
        -2.0 * (nf - 1.0) * ddw / w - (nf - 1.0) * (nf - 2.0) * (dw / w).powi(2)
    }

    /// `F(t_i) = w(t_i)^{n−1} − ∫_A^{t_i} h·w^{n−1}` by the trapezoid rule.
    pub fn functional(&self) -> Vec<f64> {
        let e = self.n as i32 - 1;
        let mut out = Vec::with_capacity(self.points);
        let mut integral = 0.0;
        let mut prev: Option<(f64, f64)> = None;
        for i in 0..self.points {
            let t = self.node(i);
            let (w, _, _) = self.warping(t);
            let area = w.powi(e);
            let g = self.potential(t).0 * area;
            if let Some((tp, gp)) = prev {
                integral += 0.5 * (t - tp) * (gp + g);
            }
            prev = Some((t, g));
            out.push(area - integral);
        }
        out
    }

    /// `H(∂₋) = −(n−1)w′/w(A)`, `H(∂₊) = (n−1)w′/w(B)` against `∓h`.
    pub fn check_barriers(&self) -> BarrierReport {
        let (a, b) = (self.domain.lo, self.domain.hi);
        let minus = -self.slice_curvature(a) + self.potential(a).0;
        let plus = self.slice_curvature(b) - self.potential(b).0;
        BarrierReport::new(minus, plus)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SliceResult {
    pub node: usize,
    pub s_node: f64,
    /// parabolic refinement of the discrete argmin
    pub s_star: f64,
    /// F at the minimizing node, per unit fiber volume
    pub energy: f64,
    pub degenerate: bool,
    pub second_difference: f64,
    pub residual: f64,
    pub barrier: BarrierReport,
}

fn refine(values: &[f64], node: usize, spacing: f64) -> f64 {
    if node == 0 || node + 1 >= values.len() {
        return 0.0;
    }
    let (fm, f0, fp) = (values[node - 1], values[node], values[node + 1]);
    let curvature = fm - 2.0 * f0 + fp;
    let scale = fm.abs().max(f0.abs()).max(fp.abs()).max(f64::MIN_POSITIVE);
    if !(curvature > 0.0) || (fm - fp).abs() <= 8.0 * f64::EPSILON * scale {
        return 0.0;
    }
    (0.5 * spacing * (fm - fp) / curvature).clamp(-0.5 * spacing, 0.5 * spacing)
}

/// Minimizes F over slice positions on the grid.
pub fn minimize_1d(band: &WarpedBand) -> Result<SliceResult> {
    let values = band.functional();
    let spacing = band.spacing();
    let barrier = band.check_barriers();
    let (lo, hi) = values.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), &v| (l.min(v), h.max(v)));
    let scale = lo.abs().max(hi.abs()).max(1.0);
    if hi - lo <= DEGENERATE_TOL * scale {
        let node = (band.points - 1) / 2;
        let s = band.domain.lo + 0.5 * band.domain.width();
        return Ok(SliceResult {
            node,
            s_node: band.node(node),
            s_star: s,
            energy: values[node],
            degenerate: true,
            second_difference: 0.0,
            residual: (band.slice_curvature(s) - band.potential(s).0).abs(),
            barrier,
        });
    }
    if !barrier.passed {
        return Err(Error::Barrier { minus: barrier.minus_margin, plus: barrier.plus_margin });
    }
    let mut node = 0;
    for (i, &v) in values.iter().enumerate() {
        if v < values[node] {
            node = i;
        }
    }
    let s_node = band.node(node);
    if node < band.collar || node >= band.points - band.collar {
        return Err(Error::BoundaryMinimizer { position: s_node });
    }
    let s_star = s_node + refine(&values, node, spacing);
    let second_difference = (values[node - 1] - 2.0 * values[node] + values[node + 1]) / (spacing * spacing);
    Ok(SliceResult {
        node,
        s_node,
        s_star,
        energy: values[node],
        degenerate: false,
        second_difference,
        residual: (band.slice_curvature(s_star) - band.potential(s_star).0).abs(),
        barrier,
    })
}
