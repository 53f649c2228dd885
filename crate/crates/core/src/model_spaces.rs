//! Warped-product model spaces `(N × [a,b], φ²·g_N + dt²)` over a scalar-flat
//! fiber, with strictly log-concave warping φ.
//!
//! All quantities are reported per unit fiber volume. The potential of a model
//! is `h = (n−1)·φ′/φ`; its scalar curvature is `−n/(n−1)·h² − 2h′`, which
//! is constant for the three named families:
//!
//! | family     | φ(t)                              | h(t)                                  | scal       |
//! |------------|-----------------------------------|---------------------------------------|------------|
//! | spherical  | cos(√κ·n·t/2)^{2/n}               | −√κ(n−1)·tan(√κ·n·t/2)                 | κ·n(n−1)   |
//! | cone       | t^{2/n}                           | 2(n−1)/(n·t)                           | 0          |
//! | hyperbolic | sinh(√(σn)·t/(2√(n−1)))^{2/n}      | √(σ(n−1)/n)·coth(√(σn)·t/(2√(n−1)))     | −σ         |

use std::f64::consts::FRAC_PI_2;

use crate::error::{Error, Result};
use crate::spline::CubicSpline;

pub const DEFAULT_GRID: usize = 10_000;
pub const MIN_DIMENSION: usize = 2;
pub const MAX_DIMENSION: usize = 7;
/// Strictness margin for the log-concavity check of sampled warpings.
pub const SAMPLED_CONCAVITY_MARGIN: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FiberTag {
    #[default]
    FlatTorus,
    Abstract,
}

/// Closed band-coordinate interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Self {
        Self { lo, hi }
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn contains(&self, t: f64) -> bool {
        t >= self.lo && t <= self.hi
    }

    /// `count ≥ 2` equally spaced points including both ends.
    pub fn grid(&self, count: usize) -> impl Iterator<Item = f64> + '_ {
        let count = count.max(2);
        (0..count).map(move |i| {
            if i + 1 == count {
                self.hi
            } else {
                self.lo + self.width() * (i as f64 / (count - 1) as f64)
            }
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Family {
    Spherical { kappa: f64 },
    Cone,
    Hyperbolic { sigma: f64 },
    Sampled(CubicSpline),
}

impl Family {
    pub fn name(&self) -> &'static str {
        match self {
            Family::Spherical { .. } => "spherical",
            Family::Cone => "cone",
            Family::Hyperbolic { .. } => "hyperbolic",
            Family::Sampled(_) => "sampled",
        }
    }

    fn is_named(&self) -> bool {
        !matches!(self, Family::Sampled(_))
    }
}

/// A positive warping function on a closed interval. `reflected` stores
/// `t ↦ φ(−t)` without re-deriving closed forms.
#[derive(Debug, Clone, PartialEq)]
pub struct WarpingFunction {
    family: Family,
    n: usize,
    domain: Interval,
    reflected: bool,
}

impl WarpingFunction {
    pub fn family(&self) -> &Family {
        &self.family
    }

    pub fn domain(&self) -> Interval {
        self.domain
    }

    pub fn is_reflected(&self) -> bool {
        self.reflected
    }

    /// `(φ, φ′, φ″)` at `t`, without a domain check.
    pub fn derivatives(&self, t: f64) -> (f64, f64, f64) {
        if self.reflected {
            let (p, d1, d2) = self.base_derivatives(-t);
            (p, -d1, d2)
        } else {
            self.base_derivatives(t)
        }
    }

    fn base_derivatives(&self, t: f64) -> (f64, f64, f64) {
        let n = self.n as f64;
        let e = 2.0 / n;
        // φ = g(t)^e with g′, g″ known
        let power = |g: f64, g1: f64, g2: f64| {
            let p = g.powf(e);
            let d1 = e * g.powf(e - 1.0) * g1;
            let d2 = e * (e - 1.0) * g.powf(e - 2.0) * g1 * g1 + e * g.powf(e - 1.0) * g2;
            (p, d1, d2)
        };
        match &self.family {
            Family::Spherical { kappa } => {
                let c = kappa.sqrt() * n / 2.0;
                let (s, co) = (c * t).sin_cos();
                power(co, -c * s, -c * c * co)
            }
            Family::Cone => power(t, 1.0, 0.0),
            Family::Hyperbolic { sigma } => {
                let c = hyperbolic_rate(*sigma, n);
                let (s, co) = ((c * t).sinh(), (c * t).cosh());
                power(s, c * co, c * c * s)
            }
            Family::Sampled(spline) => spline.eval(t),
        }
    }

    /// `h = (n−1)·φ′/φ` without a domain check.
    pub fn potential_unchecked(&self, t: f64) -> f64 {
        let (t, sign) = if self.reflected { (-t, -1.0) } else { (t, 1.0) };
        sign * self.base_potential(t)
    }

    /// `h′` without a domain check. Analytic for named families, spline-based
    /// for sampled ones.
    pub fn potential_slope_unchecked(&self, t: f64) -> f64 {
        let t = if self.reflected { -t } else { t };
        // h_reflected(t) = −h(−t) so h′_reflected(t) = h′(−t)
        self.base_potential_slope(t)
    }

    fn base_potential(&self, t: f64) -> f64 {
        let n = self.n as f64;
        match &self.family {
            Family::Spherical { kappa } => {
                -kappa.sqrt() * (n - 1.0) * (kappa.sqrt() * n * t / 2.0).tan()
            }
            Family::Cone => 2.0 * (n - 1.0) / (n * t),
            Family::Hyperbolic { sigma } => {
                let c = hyperbolic_rate(*sigma, n);
                (sigma * (n - 1.0) / n).sqrt() / (c * t).tanh()
            }
            Family::Sampled(spline) => {
                let (p, d1, _) = spline.eval(t);
                (n - 1.0) * d1 / p
            }
        }
    }

    fn base_potential_slope(&self, t: f64) -> f64 {
        let n = self.n as f64;
        match &self.family {
            Family::Spherical { kappa } => {
                let c = kappa.sqrt() * n / 2.0;
                let sec = 1.0 / (c * t).cos();
                -kappa.sqrt() * (n - 1.0) * c * sec * sec
            }
            Family::Cone => -2.0 * (n - 1.0) / (n * t * t),
            Family::Hyperbolic { sigma } => {
                let c = hyperbolic_rate(*sigma, n);
                let csch = 1.0 / (c * t).sinh();
                -(sigma * (n - 1.0) / n).sqrt() * c * csch * csch
            }
            Family::Sampled(spline) => {
                let (p, d1, d2) = spline.eval(t);
                let q = d1 / p;
                (n - 1.0) * (d2 / p - q * q)
            }
        }
    }

    /// Strict log-concavity on `count` grid points (sample midpoints for
    /// sampled warpings). Returns the largest value of `(φ′/φ)′` seen.
    pub fn log_concavity_certificate(&self, count: usize) -> Result<f64> {
        let n = self.n as f64;
        let worst = match &self.family {
            Family::Sampled(spline) => {
                let margin = SAMPLED_CONCAVITY_MARGIN;
                let worst = spline
                    .knots()
                    .windows(2)
                    .map(|w| 0.5 * (w[0] + w[1]))
                    .filter(|&m| self.domain.contains(if self.reflected { -m } else { m }))
                    .map(|m| self.base_potential_slope(m) / (n - 1.0))
                    .fold(f64::NEG_INFINITY, f64::max);
                if !(worst < -margin) {
                    return Err(Error::Certificate(format!(
                        "sampled warping is not strictly log-concave: (φ′/φ)′ reaches {worst:e}"
                    )));
                }
                worst
            }
            _ => {
                let worst = self
                    .domain
                    .grid(count)
                    .map(|t| self.potential_slope_unchecked(t) / (n - 1.0))
                    .fold(f64::NEG_INFINITY, f64::max);
                if !(worst < 0.0) {
                    return Err(Error::Certificate(format!(
                        "warping is not strictly log-concave: (φ′/φ)′ reaches {worst:e}"
                    )));
                }
                worst
            }
        };
        Ok(worst)
    }
}

fn hyperbolic_rate(sigma: f64, n: f64) -> f64 {
    (sigma * n).sqrt() / (2.0 * (n - 1.0).sqrt())
}

/// Model space of dimension `n` (2 ≤ n ≤ 7).
#[derive(Debug, Clone, PartialEq)]
pub struct ModelSpace {
    n: usize,
    warping: WarpingFunction,
    fiber: FiberTag,
    fiber_volume: f64,
}

impl ModelSpace {
    fn build(n: usize, family: Family, domain: Interval, reflected: bool) -> Result<Self> {
        if !(MIN_DIMENSION..=MAX_DIMENSION).contains(&n) {
            return Err(Error::Domain(format!("dimension {n} outside 2..=7")));
        }
        if !(domain.lo.is_finite() && domain.hi.is_finite()) || !(domain.width() > 0.0) {
            return Err(Error::Domain(format!(
                "interval [{}, {}] must have positive finite width",
                domain.lo, domain.hi
            )));
        }
        let nf = n as f64;
        // singularities are stated in the unreflected coordinate
        let base = if reflected { Interval::new(-domain.hi, -domain.lo) } else { domain };
        match &family {
            Family::Spherical { kappa } => {
                if !(*kappa > 0.0 && kappa.is_finite()) {
                    return Err(Error::Domain(format!("spherical family needs kappa > 0, got {kappa}")));
                }
                let half = FRAC_PI_2 / (kappa.sqrt() * nf / 2.0);
                if !(base.lo > -half && base.hi < half) {
                    return Err(Error::Domain(format!(
                        "spherical domain [{}, {}] must lie inside (−{half}, {half})",
                        base.lo, base.hi
                    )));
                }
            }
            Family::Cone => {
                if !(base.lo > 0.0) {
                    return Err(Error::Domain(format!("cone domain must start at t > 0, got {}", base.lo)));
                }
            }
            Family::Hyperbolic { sigma } => {
                if !(*sigma > 0.0 && sigma.is_finite()) {
                    return Err(Error::Domain(format!("hyperbolic family needs sigma > 0, got {sigma}")));
                }
                if !(base.lo > 0.0) {
                    return Err(Error::Domain(format!(
                        "hyperbolic domain must start at t > 0, got {}",
                        base.lo
                    )));
                }
            }
            Family::Sampled(spline) => {
                let (k0, k1) = spline.domain();
                if base.lo < k0 || base.hi > k1 {
                    return Err(Error::Domain(format!(
                        "domain [{}, {}] exceeds the sample range [{k0}, {k1}]",
                        base.lo, base.hi
                    )));
                }
            }
        }
        let warping = WarpingFunction { family, n, domain, reflected };
        for t in domain.grid(DEFAULT_GRID.min(1001)) {
            let (p, _, _) = warping.derivatives(t);
            if !(p > 0.0 && p.is_finite()) {
                return Err(Error::Domain(format!("warping φ({t}) = {p} is not positive")));
            }
        }
        warping.log_concavity_certificate(DEFAULT_GRID)?;
        Ok(Self { n, warping, fiber: FiberTag::default(), fiber_volume: 1.0 })
    }

    pub fn spherical(n: usize, kappa: f64, a: f64, b: f64) -> Result<Self> {
        Self::build(n, Family::Spherical { kappa }, Interval::new(a, b), false)
    }

    pub fn cone(n: usize, t_minus: f64, b: f64) -> Result<Self> {
        Self::build(n, Family::Cone, Interval::new(t_minus, b), false)
    }

    pub fn hyperbolic(n: usize, sigma: f64, t_minus: f64, b: f64) -> Result<Self> {
        Self::build(n, Family::Hyperbolic { sigma }, Interval::new(t_minus, b), false)
    }

    /// Warping given by `(t, φ)` samples, interpolated by a natural cubic spline.
    pub fn sampled(n: usize, samples: &[(f64, f64)], a: f64, b: f64) -> Result<Self> {
        let (ts, ps): (Vec<f64>, Vec<f64>) = samples.iter().copied().unzip();
        let spline = CubicSpline::new(ts, ps)?;
        Self::build(n, Family::Sampled(spline), Interval::new(a, b), false)
    }

    /// Same model on a different interval; the family's singularities are re-checked.
    pub fn with_domain(&self, a: f64, b: f64) -> Result<Self> {
        let mut out = Self::build(
            self.n,
            self.warping.family.clone(),
            Interval::new(a, b),
            self.warping.reflected,
        )?;
        out.fiber = self.fiber;
        out.fiber_volume = self.fiber_volume;
        Ok(out)
    }

    pub fn with_fiber(mut self, fiber: FiberTag, volume: f64) -> Self {
        self.fiber = fiber;
        self.fiber_volume = volume;
        self
    }

    /// `t ↦ φ(−t)` on `[−b, −a]`; the potential becomes `t ↦ −h(−t)`.
    pub fn reflect(&self) -> Self {
        let d = self.warping.domain;
        Self {
            n: self.n,
            warping: WarpingFunction {
                family: self.warping.family.clone(),
                n: self.n,
                domain: Interval::new(-d.hi, -d.lo),
                reflected: !self.warping.reflected,
            },
            fiber: self.fiber,
            fiber_volume: self.fiber_volume,
        }
    }

    pub fn dimension(&self) -> usize {
        self.n
    }

    pub fn warping(&self) -> &WarpingFunction {
        &self.warping
    }

    pub fn fiber(&self) -> FiberTag {
        self.fiber
    }

    pub fn fiber_volume(&self) -> f64 {
        self.fiber_volume
    }

    pub fn domain(&self) -> Interval {
        self.warping.domain
    }

    fn check(&self, t: f64) -> Result<()> {
        if self.warping.domain.contains(t) {
            Ok(())
        } else {
            let d = self.warping.domain;
            Err(Error::Domain(format!("t = {t} outside [{}, {}]", d.lo, d.hi)))
        }
    }

    pub fn warping_at(&self, t: f64) -> Result<(f64, f64, f64)> {
        self.check(t)?;
        Ok(self.warping.derivatives(t))
    }

    /// Potential `h_φ(t) = (n−1)·φ′(t)/φ(t)`.
    pub fn potential_of(&self, t: f64) -> Result<f64> {
        self.check(t)?;
        Ok(self.warping.potential_unchecked(t))
    }

    pub fn potential_slope_of(&self, t: f64) -> Result<f64> {
        self.check(t)?;
        Ok(self.warping.potential_slope_unchecked(t))
    }

    /// `−n/(n−1)·h² − 2h′`. Named families use the analytic `h′`; sampled
    /// warpings use a central difference of `h` with a scale-aware step.
    pub fn scalar_curvature_of(&self, t: f64) -> Result<f64> {
        self.check(t)?;
        let n = self.n as f64;
        let h = self.warping.potential_unchecked(t);
        let slope = if self.warping.family.is_named() {
            self.warping.potential_slope_unchecked(t)
        } else {
            self.central_difference_slope(t)
        };
        Ok(-n / (n - 1.0) * h * h - 2.0 * slope)
    }

    fn central_difference_slope(&self, t: f64) -> f64 {
        let d = self.warping.domain;
        let step = f64::EPSILON.cbrt() * t.abs().max(d.width()).max(1.0) * 0.1;
        let step = step.min(0.25 * d.width());
        let lo = (t - step).max(d.lo);
        let hi = (t + step).min(d.hi);
        (self.warping.potential_unchecked(hi) - self.warping.potential_unchecked(lo)) / (hi - lo)
    }

    /// The constant scalar curvature of a named family, `None` for sampled ones.
    pub fn constant_scalar_curvature(&self) -> Option<f64> {
        let n = self.n as f64;
        match self.warping.family {
            Family::Spherical { kappa } => Some(kappa * n * (n - 1.0)),
            Family::Cone => Some(0.0),
            Family::Hyperbolic { sigma } => Some(-sigma),
            Family::Sampled(_) => None,
        }
    }

    /// Constant scalar curvature: closed form for named families, otherwise the
    /// mean over the verification grid.
    pub fn scalar_curvature(&self) -> f64 {
        self.constant_scalar_curvature().unwrap_or_else(|| {
            let grid: Vec<f64> = self.domain().grid(201).collect();
            grid.iter().map(|&t| self.scalar_curvature_of(t).unwrap()).sum::<f64>() / grid.len() as f64
        })
    }

    /// `(H₋, H₊) = (−h(a), h(b))` with respect to the interior unit normal.
    pub fn boundary_mean_curvatures(&self) -> (f64, f64) {
        let d = self.warping.domain;
        (-self.warping.potential_unchecked(d.lo), self.warping.potential_unchecked(d.hi))
    }

    pub fn width_of(&self) -> f64 {
        self.warping.domain.width()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn spherical_potential_examples() {
        let ms = ModelSpace::spherical(2, 1.0, -1.0, 1.0).unwrap();
        assert_eq!(ms.potential_of(0.0).unwrap(), 0.0);
        // n = 2, κ = 1: φ = cos t, h = −tan t
        assert!(close(ms.potential_of(PI / 4.0).unwrap(), -1.0, 1e-15));
    }

    #[test]
    fn cone_potential_example() {
        let ms = ModelSpace::cone(2, 0.5, 2.0).unwrap();
        assert_eq!(ms.potential_of(1.0).unwrap(), 1.0);
    }

    #[test]
    fn potential_outside_domain_is_rejected() {
        let ms = ModelSpace::cone(3, 1.0, 2.0).unwrap();
        assert!(matches!(ms.potential_of(2.5), Err(Error::Domain(_))));
        assert!(matches!(ms.scalar_curvature_of(0.9), Err(Error::Domain(_))));
    }

    #[test]
    fn scalar_curvature_examples() {
        let cone = ModelSpace::cone(5, 0.3, 3.0).unwrap();
        assert!(close(cone.scalar_curvature_of(1.7).unwrap(), 0.0, 1e-12));
        let hyp = ModelSpace::hyperbolic(4, 5.0, 0.2, 2.0).unwrap();
        assert!(close(hyp.scalar_curvature_of(1.1).unwrap(), -5.0, 1e-12));
        let sph = ModelSpace::spherical(7, 2.0, -0.15, 0.15).unwrap();
        for t in sph.domain().grid(10) {
            assert!(close(sph.scalar_curvature_of(t).unwrap(), 84.0, 1e-11));
        }
    }

    #[test]
    fn make_spherical_examples() {
        let ms = ModelSpace::spherical(7, 1.0, -PI / 14.0, PI / 14.0).unwrap();
        assert!(close(ms.width_of(), PI / 7.0, 1e-15));
        assert!(matches!(ModelSpace::spherical(2, 1.0, 0.0, 0.0), Err(Error::Domain(_))));
        assert!(matches!(ModelSpace::spherical(7, 1.0, -PI / 7.0, PI / 7.0), Err(Error::Domain(_))));
        assert!(matches!(ModelSpace::spherical(3, 0.0, -0.1, 0.1), Err(Error::Domain(_))));
    }

    #[test]
    fn cone_and_hyperbolic_need_positive_start() {
        assert!(matches!(ModelSpace::cone(3, 0.0, 1.0), Err(Error::Domain(_))));
        assert!(matches!(ModelSpace::hyperbolic(3, 1.0, -0.1, 1.0), Err(Error::Domain(_))));
        assert!(matches!(ModelSpace::hyperbolic(3, -1.0, 0.1, 1.0), Err(Error::Domain(_))));
    }

    #[test]
    fn dimension_bounds() {
        assert!(ModelSpace::cone(1, 1.0, 2.0).is_err());
        assert!(ModelSpace::cone(8, 1.0, 2.0).is_err());
    }

    #[test]
    fn closed_forms_match_generic_potential() {
        let n = 6.0;
        let sph = ModelSpace::spherical(6, 1.5, -0.2, 0.3).unwrap();
        let hyp = ModelSpace::hyperbolic(6, 2.0, 0.1, 1.0).unwrap();
        for t in [-0.1, 0.05, 0.25] {
            let expect = -(1.5f64).sqrt() * (n - 1.0) * ((1.5f64).sqrt() * n * t / 2.0).tan();
            assert!(close(sph.potential_of(t).unwrap(), expect, 1e-13));
            let (p, d1, _) = sph.warping_at(t).unwrap();
            assert!(close((n - 1.0) * d1 / p, expect, 1e-12));
        }
        for t in [0.2, 0.9] {
            let (p, d1, _) = hyp.warping_at(t).unwrap();
            assert!(close(hyp.potential_of(t).unwrap(), (n - 1.0) * d1 / p, 1e-12));
        }
    }

    #[test]
    fn reflect_examples() {
        let cone = ModelSpace::cone(2, 1.0, 2.0).unwrap();
        let r = cone.reflect();
        assert_eq!(r.domain(), Interval::new(-2.0, -1.0));
        assert_eq!(r.potential_of(-1.0).unwrap(), -1.0);
        assert_eq!(r.reflect(), cone);

        let sph = ModelSpace::spherical(4, 1.0, -0.3, 0.3).unwrap().reflect();
        assert_eq!(sph.potential_of(0.0).unwrap(), 0.0);
    }

    #[test]
    fn boundary_mean_curvature_examples() {
        let sph = ModelSpace::spherical(2, 1.0, -PI / 4.0, PI / 4.0).unwrap();
        let (hm, hp) = sph.boundary_mean_curvatures();
        // H₋ = −h(−π/4) = −1 and H₊ = h(π/4) = −1: both boundary spheres of an
        // equatorial band are mean-concave, so an odd potential gives H₋ = H₊.
        assert!(close(hm, -1.0, 1e-14) && close(hp, -1.0, 1e-14));
        assert_eq!(hm, hp);
        let cone = ModelSpace::cone(2, 1.0, 2.0).unwrap();
        assert_eq!(cone.boundary_mean_curvatures(), (-1.0, 0.5));
    }

    #[test]
    fn sampled_warping_tracks_closed_form() {
        let n = 3;
        let kappa: f64 = 1.0;
        let c = kappa.sqrt() * n as f64 / 2.0;
        let samples: Vec<(f64, f64)> = (0..=400)
            .map(|i| {
                let t = -0.5 + i as f64 * 0.0025;
                (t, (c * t).cos().powf(2.0 / n as f64))
            })
            .collect();
        let ms = ModelSpace::sampled(n, &samples, -0.4, 0.4).unwrap();
        for t in [-0.3, 0.0, 0.17] {
            let expect = -(n as f64 - 1.0) * (c * t).tan();
            assert!(close(ms.potential_of(t).unwrap(), expect, 1e-6));
            assert!(close(ms.scalar_curvature_of(t).unwrap(), 6.0, 1e-4));
        }
    }

    #[test]
    fn sampled_convex_warping_is_rejected() {
        // φ = e^{t²} has (log φ)″ = 2 > 0
        let samples: Vec<(f64, f64)> = (0..=20).map(|i| {
            let t = i as f64 * 0.05;
            (t, (t * t).exp())
        }).collect();
        assert!(matches!(ModelSpace::sampled(3, &samples, 0.1, 0.9), Err(Error::Certificate(_))));
    }
}
