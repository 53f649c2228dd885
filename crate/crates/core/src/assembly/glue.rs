use std::fmt;
use std::sync::Arc;

use crate::assembly::band_map::BandCoordinate;
use crate::assembly::smoothing::{smooth_potential, SmoothedPotential, SmoothingSide};
use crate::error::{Error, Result};
use crate::model_spaces::{ModelSpace, DEFAULT_GRID};

/// Tolerance on `H(∂₊M_j) + H(∂₋M_{j+1})`, relative to `max(1, |h|)`.
pub const MATCH_TOL: f64 = 1e-10;
/// Margin floor used by the ε feasibility search.
pub const EPS_MARGIN_FLOOR: f64 = 1e-8;
const EPS_MAX_HALVINGS: usize = 60;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SegmentSpec {
    /// measured width of V_j
    pub width: f64,
    /// lower bound for scal on V_j
    pub scal_lower: f64,
}

/// Measured data of a band cut into `k + 1` segments.
#[derive(Debug, Clone, PartialEq)]
pub struct PartitionedBandSpec {
    pub n: usize,
    pub segments: Vec<SegmentSpec>,
    /// lower bound for H(∂₋X)
    pub h_minus: f64,
    /// lower bound for H(∂₊X)
    pub h_plus: f64,
}

impl PartitionedBandSpec {
    pub fn new(n: usize, segments: Vec<SegmentSpec>, h_minus: f64, h_plus: f64) -> Result<Self> {
        if segments.is_empty() {
            return Err(Error::Domain("a band needs at least one segment".into()));
        }
        for (j, s) in segments.iter().enumerate() {
            if !(s.width > 0.0 && s.width.is_finite()) {
                return Err(Error::Domain(format!("segment {} has non-positive width {}", j + 1, s.width)));
            }
            if s.scal_lower.is_nan() {
                return Err(Error::Domain(format!("segment {} has NaN scalar curvature bound", j + 1)));
            }
        }
        if h_minus.is_nan() || h_plus.is_nan() {
            return Err(Error::Domain("boundary mean curvature bound is NaN".into()));
        }
        Ok(Self { n, segments, h_minus, h_plus })
    }

    /// Number of interior separating hypersurfaces.
    pub fn k(&self) -> usize {
        self.segments.len() - 1
    }

    pub fn total_width(&self) -> f64 {
        self.segments.iter().map(|s| s.width).sum()
    }

    /// Segment index containing `x`; the left segment wins on a junction.
    pub fn segment_at(&self, x: f64) -> usize {
        let mut end = 0.0;
        for (j, s) in self.segments.iter().enumerate() {
            end += s.width;
            if x <= end {
                return j;
            }
        }
        self.segments.len() - 1
    }

    pub fn scal_lower_at(&self, x: f64) -> f64 {
        self.segments[self.segment_at(x)].scal_lower
    }

    /// Segment boundaries `0, d′₁, d′₁+d′₂, …`.
    pub fn offsets(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.segments.len() + 1);
        let mut acc = 0.0;
        out.push(acc);
        for s in &self.segments {
            acc += s.width;
            out.push(acc);
        }
        out
    }
}

/// A potential over the band coordinate `[0, length]`.
pub trait BandPotential {
    fn length(&self) -> f64;
    fn value(&self, x: f64) -> f64;
    /// dh/dx
    fn slope(&self, x: f64) -> f64;
}

type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Potential given by closures; used for hand-made test cases.
#[derive(Clone)]
pub struct FnPotential {
    length: f64,
    value: ScalarFn,
    slope: ScalarFn,
}

impl FnPotential {
    pub fn new(
        length: f64,
        value: impl Fn(f64) -> f64 + Send + Sync + 'static,
        slope: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self { length, value: Arc::new(value), slope: Arc::new(slope) }
    }

    pub fn constant(length: f64, c: f64) -> Self {
        Self::new(length, move |_| c, |_| 0.0)
    }
}

impl fmt::Debug for FnPotential {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FnPotential").field("length", &self.length).finish_non_exhaustive()
    }
}

impl BandPotential for FnPotential {
    fn length(&self) -> f64 {
        self.length
    }
    fn value(&self, x: f64) -> f64 {
        (self.value)(x)
    }
    fn slope(&self, x: f64) -> f64 {
        (self.slope)(x)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Piece {
    pub smoothed: SmoothedPotential,
    pub beta: BandCoordinate,
    pub offset: f64,
}

impl Piece {
    fn eval(&self, x: f64) -> (f64, f64) {
        let (h, dh) = self.smoothed.eval(self.beta.eval(x - self.offset));
        (h, dh * self.beta.lipschitz())
    }
}

/// h = ĥ_j ∘ β_j on the j-th segment of the band.
#[derive(Debug, Clone, PartialEq)]
pub struct AssembledPotential {
    n: usize,
    eps: f64,
    pieces: Vec<Piece>,
    length: f64,
    junction_mismatches: Vec<f64>,
}

impl AssembledPotential {
    pub fn dimension(&self) -> usize {
        self.n
    }

    pub fn epsilon(&self) -> f64 {
        self.eps
    }

    pub fn pieces(&self) -> &[Piece] {
        &self.pieces
    }

    pub fn piece_index(&self, x: f64) -> usize {
        self.pieces
            .iter()
            .position(|p| x <= p.offset + p.beta.source_width())
            .unwrap_or(self.pieces.len() - 1)
    }

    /// `(h(x), dh/dx)`.
    pub fn eval(&self, x: f64) -> (f64, f64) {
        self.pieces[self.piece_index(x)].eval(x)
    }

    /// |ĥ_j(b_j+ε) − ĥ_{j+1}(a_{j+1}−ε)| at each junction.
    pub fn junction_mismatches(&self) -> &[f64] {
        &self.junction_mismatches
    }

    pub fn max_junction_mismatch(&self) -> f64 {
        self.junction_mismatches.iter().copied().fold(0.0, f64::max)
    }

    /// Left and right limits of h at every junction.
    pub fn junction_values(&self) -> Vec<(f64, f64)> {
        self.pieces
            .windows(2)
            .map(|w| {
                let x = w[1].offset;
                (w[0].eval(x).0, w[1].eval(x).0)
            })
            .collect()
    }
}

impl BandPotential for AssembledPotential {
    fn length(&self) -> f64 {
        self.length
    }
    fn value(&self, x: f64) -> f64 {
        self.eval(x).0
    }
    fn slope(&self, x: f64) -> f64 {
        self.eval(x).1
    }
}

fn side_for(j: usize, count: usize) -> SmoothingSide {
    match (j == 0, j + 1 == count) {
        (true, true) => SmoothingSide::Neither,
        (true, false) => SmoothingSide::RightOnly,
        (false, true) => SmoothingSide::LeftOnly,
        (false, false) => SmoothingSide::Both,
    }
}

/// Checks `H(∂₊M_j) = −H(∂₋M_{j+1})` for consecutive models.
pub fn check_matching(models: &[ModelSpace]) -> Result<()> {
    for (j, pair) in models.windows(2).enumerate() {
        let (_, left) = pair[0].boundary_mean_curvatures();
        let (right, _) = pair[1].boundary_mean_curvatures();
        let scale = left.abs().max(right.abs()).max(1.0);
        if !((left + right).abs() <= MATCH_TOL * scale) {
            return Err(Error::Match { junction: j + 1, left, right });
        }
    }
    Ok(())
}

/// Glues the smoothed model potentials along the band.
pub fn assemble(spec: &PartitionedBandSpec, models: &[ModelSpace], eps: f64) -> Result<AssembledPotential> {
    if models.len() != spec.segments.len() {
        return Err(Error::Domain(format!(
            "{} models supplied for {} segments",
            models.len(),
            spec.segments.len()
        )));
    }
    if let Some(m) = models.iter().find(|m| m.dimension() != spec.n) {
        return Err(Error::Domain(format!("model dimension {} differs from band dimension {}", m.dimension(), spec.n)));
    }
    check_matching(models)?;
    for (j, (seg, m)) in spec.segments.iter().zip(models).enumerate() {
        if !(seg.width > m.width_of()) {
            return Err(Error::Width(format!(
                "segment {} width {} does not exceed model width {}",
                j + 1,
                seg.width,
                m.width_of()
            )));
        }
    }

    let count = models.len();
    let mut pieces = Vec::with_capacity(count);
    let mut offset = 0.0;
    for (j, (seg, m)) in spec.segments.iter().zip(models).enumerate() {
        let smoothed = smooth_potential(m, eps, side_for(j, count))?;
        let beta = BandCoordinate::new(seg.width, smoothed.domain())?;
        pieces.push(Piece { smoothed, beta, offset });
        offset += seg.width;
    }
    let junction_mismatches = pieces
        .windows(2)
        .map(|w| {
            let left = w[0].smoothed.value(w[0].smoothed.domain().hi);
            let right = w[1].smoothed.value(w[1].smoothed.domain().lo);
            (left - right).abs()
        })
        .collect();
    Ok(AssembledPotential { n: spec.n, eps, pieces, length: offset, junction_mismatches })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConditionSample {
    pub x: f64,
    pub h: f64,
    pub grad: f64,
    pub scal_lower: f64,
    pub margin: f64,
}

/// Grid evaluation of `scal + n/(n−1)h² − 2|∇h| > 0` and of the barrier
/// condition `H(∂±X) > ±h`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConditionCertificate {
    pub grid_points: usize,
    pub min_margin: f64,
    pub argmin: f64,
    /// H(∂₋X) + h(0)
    pub boundary_minus_margin: f64,
    /// H(∂₊X) − h(L)
    pub boundary_plus_margin: f64,
    pub passed: bool,
}

impl ConditionCertificate {
    pub fn smallest_margin(&self) -> f64 {
        self.min_margin.min(self.boundary_minus_margin).min(self.boundary_plus_margin)
    }
}

/// Grid points: `grid` uniform points per segment, junctions included once.
pub fn condition_samples<P: BandPotential + ?Sized>(
    h: &P,
    spec: &PartitionedBandSpec,
    grid: usize,
) -> Vec<ConditionSample> {
    let coef = spec.n as f64 / (spec.n as f64 - 1.0);
    let offsets = spec.offsets();
    let per = grid.max(2);
    let mut out = Vec::with_capacity(per * spec.segments.len());
    for (j, seg) in spec.segments.iter().enumerate() {
        let start = if j == 0 { 0 } else { 1 };
        for i in start..per {
            let x = if i + 1 == per {
                offsets[j + 1]
            } else {
                offsets[j] + seg.width * i as f64 / (per - 1) as f64
            };
            let value = h.value(x);
            let grad = h.slope(x).abs();
            let margin = seg.scal_lower + coef * value * value - 2.0 * grad;
            out.push(ConditionSample { x, h: value, grad, scal_lower: seg.scal_lower, margin });
        }
    }
    out
}

pub fn certificate_from_samples<P: BandPotential + ?Sized>(
    h: &P,
    spec: &PartitionedBandSpec,
    samples: &[ConditionSample],
) -> ConditionCertificate {
    let (mut min_margin, mut argmin) = (f64::INFINITY, 0.0);
    for s in samples {
        if s.margin < min_margin || min_margin.is_nan() {
            min_margin = s.margin;
            argmin = s.x;
        }
    }
    let boundary_minus_margin = spec.h_minus + h.value(0.0);
    let boundary_plus_margin = spec.h_plus - h.value(h.length());
    let passed = min_margin > 0.0 && boundary_minus_margin > 0.0 && boundary_plus_margin > 0.0;
    ConditionCertificate {
        grid_points: samples.len(),
        min_margin,
        argmin,
        boundary_minus_margin,
        boundary_plus_margin,
        passed,
    }
}

pub fn verify_conditions<P: BandPotential + ?Sized>(h: &P, spec: &PartitionedBandSpec) -> ConditionCertificate {
    verify_conditions_on_grid(h, spec, DEFAULT_GRID)
}

pub fn verify_conditions_on_grid<P: BandPotential + ?Sized>(
    h: &P,
    spec: &PartitionedBandSpec,
    grid: usize,
) -> ConditionCertificate {
    let samples = condition_samples(h, spec, grid);
    certificate_from_samples(h, spec, &samples)
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpsilonAttempt {
    pub eps: f64,
    /// smallest margin reached, or the error that stopped assembly
    pub outcome: std::result::Result<f64, String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpsilonSearch {
    pub eps: f64,
    pub potential: AssembledPotential,
    pub certificate: ConditionCertificate,
    pub trail: Vec<EpsilonAttempt>,
}

/// Starting ε: `min(0.05·(b−a))` over the models, capped below half of the
/// smallest width surplus.
pub fn initial_epsilon(spec: &PartitionedBandSpec, models: &[ModelSpace]) -> f64 {
    let mut eps = f64::INFINITY;
    for (seg, m) in spec.segments.iter().zip(models) {
        eps = eps.min(0.05 * m.width_of());
        let surplus = seg.width - m.width_of();
        if surplus > 0.0 {
            eps = eps.min(0.45 * surplus);
        }
    }
    eps
}

/// Halves ε from [`initial_epsilon`] until assembly succeeds with every
/// margin at least [`EPS_MARGIN_FLOOR`]. Matching and width errors are not
/// ε-dependent and are returned at once.
pub fn default_epsilon(spec: &PartitionedBandSpec, models: &[ModelSpace]) -> Result<EpsilonSearch> {
    default_epsilon_on_grid(spec, models, DEFAULT_GRID)
}

pub fn default_epsilon_on_grid(
    spec: &PartitionedBandSpec,
    models: &[ModelSpace],
    grid: usize,
) -> Result<EpsilonSearch> {
    let mut eps = initial_epsilon(spec, models);
    let mut trail = Vec::new();
    for _ in 0..EPS_MAX_HALVINGS {
        match assemble(spec, models, eps) {
            Ok(potential) => {
                let certificate = verify_conditions_on_grid(&potential, spec, grid);
                let smallest = certificate.smallest_margin();
                trail.push(EpsilonAttempt { eps, outcome: Ok(smallest) });
                if smallest >= EPS_MARGIN_FLOOR {
                    return Ok(EpsilonSearch { eps, potential, certificate, trail });
                }
            }
            Err(e @ (Error::Match { .. } | Error::Width(_))) => return Err(e),
            Err(Error::Domain(msg)) if models.len() != spec.segments.len() => return Err(Error::Domain(msg)),
            Err(e) => trail.push(EpsilonAttempt { eps, outcome: Err(e.to_string()) }),
        }
        eps *= 0.5;
    }
    let last = trail.last().map(|a| format!("{:?}", a.outcome)).unwrap_or_default();
    Err(Error::Certificate(format!(
        "no transition width keeps all margins ≥ {EPS_MARGIN_FLOOR} after {EPS_MAX_HALVINGS} halvings (last: {last})"
    )))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::assembly::matching::{capped_models, CapFamily};
    use std::f64::consts::PI;

    fn cor_setup(scale: f64) -> (PartitionedBandSpec, Vec<ModelSpace>) {
        let c = capped_models(7, 1.0, PI / 7.0, CapFamily::Cone, 0.0, 0.0).unwrap();
        let segments = c
            .models
            .iter()
            .map(|m| SegmentSpec { width: scale * m.width_of(), scal_lower: m.scalar_curvature() })
            .collect();
        (PartitionedBandSpec::new(7, segments, 0.0, 0.0).unwrap(), c.models)
    }

    #[test]
    fn capped_assembly_is_continuous_and_certified() {
        let (spec, models) = cor_setup(1.1);
        let search = default_epsilon(&spec, &models).unwrap();
        assert!(search.potential.max_junction_mismatch() < 1e-12);
        for (l, r) in search.potential.junction_values() {
            assert!((l - r).abs() < 1e-12);
        }
        assert!(search.certificate.passed, "{:?}", search.certificate);
        assert!(search.certificate.min_margin > 0.0);
    }

    #[test]
    fn assembled_potential_is_non_increasing() {
        let (spec, models) = cor_setup(1.1);
        let h = default_epsilon(&spec, &models).unwrap().potential;
        let mut prev = f64::INFINITY;
        for i in 0..=20_000 {
            let x = h.length() * i as f64 / 20_000.0;
            let (v, dv) = h.eval(x);
            assert!(dv <= 0.0);
            assert!(v <= prev + 1e-12);
            prev = v;
        }
    }

    #[test]
    fn composition_bound() {
        let (spec, models) = cor_setup(1.3);
        let h = assemble(&spec, &models, 0.001).unwrap();
        for p in h.pieces() {
            for i in 0..=500 {
                let x = p.offset + p.beta.source_width() * i as f64 / 500.0;
                let outer = p.smoothed.eval(p.beta.eval(x - p.offset)).1.abs();
                assert!(p.eval(x).1.abs() <= outer);
            }
        }
    }

    #[test]
    fn broken_matching_rejected() {
        let (spec, mut models) = cor_setup(1.1);
        let d = models[1].domain();
        models[1] = ModelSpace::spherical(7, 1.0, d.lo + 1e-3, d.hi).unwrap();
        let fixed = SegmentSpec { width: 1.1 * models[1].width_of(), ..spec.segments[1] };
        let mut spec = spec;
        spec.segments[1] = fixed;
        assert!(matches!(assemble(&spec, &models, 0.001), Err(Error::Match { junction: 1, .. })));
    }

    #[test]
    fn no_surplus_rejected() {
        let (spec, models) = cor_setup(1.0);
        assert!(matches!(assemble(&spec, &models, 0.001), Err(Error::Width(_))));
        let (spec, models) = cor_setup(1.001);
        // surplus 0.1% cannot host 2ε = 0.02 in the middle
        assert!(matches!(assemble(&spec, &models, 0.01), Err(Error::Width(_))));
    }

    #[test]
    fn zero_potential_fails_strictness() {
        let spec = PartitionedBandSpec::new(3, vec![SegmentSpec { width: 1.0, scal_lower: 0.0 }], 1.0, 1.0).unwrap();
        let cert = verify_conditions(&FnPotential::constant(1.0, 0.0), &spec);
        assert_eq!(cert.min_margin, 0.0);
        assert!(!cert.passed);
    }

    #[test]
    fn constant_potential_violates_plus_barrier() {
        let spec = PartitionedBandSpec::new(3, vec![SegmentSpec { width: 1.0, scal_lower: 0.0 }], 0.0, 0.0).unwrap();
        let cert = verify_conditions(&FnPotential::constant(1.0, 0.5), &spec);
        assert_eq!(cert.boundary_plus_margin, -0.5);
        assert!(!cert.passed);
    }

    #[test]
    fn single_segment_band() {
        let m = ModelSpace::spherical(3, 1.0, -0.3, 0.3).unwrap();
        let spec = PartitionedBandSpec::new(3, vec![SegmentSpec { width: 0.7, scal_lower: 6.0 }], 10.0, 10.0).unwrap();
        let h = assemble(&spec, std::slice::from_ref(&m), 0.02).unwrap();
        // extended, not clamped: ĥ(a−ε) = h(a−ε)
        let ext = m.with_domain(-0.32, 0.32).unwrap();
        assert!((h.value(0.0) - ext.potential_of(-0.32).unwrap()).abs() < 1e-14);
        assert!(h.junction_mismatches().is_empty());
    }
}
