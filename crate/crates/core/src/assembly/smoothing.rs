use crate::assembly::cutoff::CutoffProfile;
use crate::error::{Error, Result};
use crate::model_spaces::{Interval, ModelSpace, DEFAULT_GRID};

/// Where the clamping interpolation is applied. On a side without
/// interpolation the model potential is extended by ε instead.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SmoothingSide {
    Both,
    LeftOnly,
    RightOnly,
    /// Single-segment bands: extend both ends, no interpolation.
    Neither,
}

impl SmoothingSide {
    fn flags(self) -> (bool, bool) {
        match self {
            SmoothingSide::Both => (true, true),
            SmoothingSide::LeftOnly => (true, false),
            SmoothingSide::RightOnly => (false, true),
            SmoothingSide::Neither => (false, false),
        }
    }
}

/// Grid summary of the four properties of a smoothed potential ĥ = h∘ρ.
#[derive(Debug, Clone, PartialEq)]
pub struct SmoothingCertificate {
    pub grid_points: usize,
    /// max |ĥ − h| where ρ is the identity (exact zero by construction)
    pub identity_deviation: f64,
    /// ĥ equals the endpoint value throughout the clamped collars
    pub constant_near_ends: bool,
    pub max_slope: f64,
    /// max of (−n/(n−1)ĥ² − 2ĥ′) − σ; must be ≤ tolerance
    pub max_excess: f64,
    /// min of σ − (−n/(n−1)ĥ² − 2ĥ′) over points with ĥ′ = 0
    pub min_strict_margin: f64,
    pub flat_points: usize,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SmoothedPotential {
    base: ModelSpace,
    extended: ModelSpace,
    cutoff: CutoffProfile,
    side: SmoothingSide,
    sigma: f64,
}

/// Relative rounding allowance for the ODE comparison.
const ODE_TOL: f64 = 1e-11;

impl SmoothedPotential {
    pub fn base(&self) -> &ModelSpace {
        &self.base
    }

    pub fn cutoff(&self) -> &CutoffProfile {
        &self.cutoff
    }

    pub fn side(&self) -> SmoothingSide {
        self.side
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn epsilon(&self) -> f64 {
        self.cutoff.epsilon()
    }

    /// `[a − ε, b + ε]`.
    pub fn domain(&self) -> Interval {
        let d = self.base.domain();
        let eps = self.epsilon();
        Interval::new(d.lo - eps, d.hi + eps)
    }

    /// `(ĥ(t), ĥ′(t))`.
    pub fn eval(&self, t: f64) -> (f64, f64) {
        let (r, dr) = self.cutoff.eval(t);
        let w = self.extended.warping();
        let h = w.potential_unchecked(r);
        let slope = if dr == 0.0 { 0.0 } else { w.potential_slope_unchecked(r) * dr };
        (h, slope)
    }

    pub fn value(&self, t: f64) -> f64 {
        self.eval(t).0
    }

    /// `σ + 2h′(ρ)(1 − ρ′)` rearranged: the gap `σ − (−n/(n−1)ĥ² − 2ĥ′)`
    /// predicted by the chain rule.
    pub fn predicted_margin(&self, t: f64) -> f64 {
        let (r, dr) = self.cutoff.eval(t);
        2.0 * self.extended.warping().potential_slope_unchecked(r).abs() * (1.0 - dr)
    }

    pub fn certify(&self, grid: usize) -> SmoothingCertificate {
        let n = self.base.dimension() as f64;
        let coef = n / (n - 1.0);
        let d = self.base.domain();
        let eps = self.epsilon();
        let (clamp_left, clamp_right) = self.side.flags();
        let (h_a, h_b) = (
            self.base.warping().potential_unchecked(d.lo),
            self.base.warping().potential_unchecked(d.hi),
        );

        let mut cert = SmoothingCertificate {
            grid_points: 0,
            identity_deviation: 0.0,
            constant_near_ends: true,
            max_slope: f64::NEG_INFINITY,
            max_excess: f64::NEG_INFINITY,
            min_strict_margin: f64::INFINITY,
            flat_points: 0,
            passed: false,
        };
        let mut tolerance_ok = true;
        for t in self.domain().grid(grid) {
            cert.grid_points += 1;
            let (h_hat, slope) = self.eval(t);

            let identity_lo = if clamp_left { d.lo + eps } else { d.lo - eps };
            let identity_hi = if clamp_right { d.hi - eps } else { d.hi + eps };
            if t >= identity_lo && t <= identity_hi {
                let h = self.extended.warping().potential_unchecked(t);
                cert.identity_deviation = cert.identity_deviation.max((h_hat - h).abs());
            }
            if clamp_left && t <= d.lo - eps / 2.0 && h_hat != h_a {
                cert.constant_near_ends = false;
            }
            if clamp_right && t >= d.hi + eps / 2.0 && h_hat != h_b {
                cert.constant_near_ends = false;
            }

            cert.max_slope = cert.max_slope.max(slope);
            let lhs = -coef * h_hat * h_hat - 2.0 * slope;
            let excess = lhs - self.sigma;
            let scale = self.sigma.abs() + coef * h_hat * h_hat + 2.0 * slope.abs();
            if excess > ODE_TOL * scale.max(1.0) {
                tolerance_ok = false;
            }
            cert.max_excess = cert.max_excess.max(excess);
            if slope == 0.0 {
                cert.flat_points += 1;
                cert.min_strict_margin = cert.min_strict_margin.min(-excess);
                if !(-excess > ODE_TOL * scale.max(1.0)) {
                    tolerance_ok = false;
                }
            }
        }
        cert.passed = tolerance_ok
            && cert.identity_deviation == 0.0
            && cert.constant_near_ends
            && cert.max_slope <= 0.0;
        cert
    }
}

/// Builds ĥ = h∘ρ from the potential of `ms` and certifies its four
/// properties on the default grid.
pub fn smooth_potential(ms: &ModelSpace, eps: f64, side: SmoothingSide) -> Result<SmoothedPotential> {
    smooth_potential_on_grid(ms, eps, side, DEFAULT_GRID)
}

pub fn smooth_potential_on_grid(
    ms: &ModelSpace,
    eps: f64,
    side: SmoothingSide,
    grid: usize,
) -> Result<SmoothedPotential> {
    let d = ms.domain();
    if !(eps > 0.0) || !(eps < d.width() / 2.0) {
        return Err(Error::Certificate(format!(
            "transition width {eps} must lie in (0, {}) for a model of width {}",
            d.width() / 2.0,
            d.width()
        )));
    }
    let (left, right) = side.flags();
    let cutoff = CutoffProfile::one_sided(d.lo, d.hi, eps, left, right)
        .map_err(|e| Error::Certificate(e.to_string()))?;
    let ext_lo = if left { d.lo } else { d.lo - eps };
    let ext_hi = if right { d.hi } else { d.hi + eps };
    let extended = ms.with_domain(ext_lo, ext_hi)?;
    let smoothed = SmoothedPotential {
        base: ms.clone(),
        extended,
        cutoff,
        side,
        sigma: ms.scalar_curvature(),
    };
    let cert = smoothed.certify(grid);
    if !cert.passed {
        return Err(Error::Certificate(format!("smoothed potential fails its grid checks: {cert:?}")));
    }
    Ok(smoothed)
}
