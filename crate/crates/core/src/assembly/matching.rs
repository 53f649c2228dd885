//! Three-segment construction: a spherical middle model flanked by two caps
//! (cone or hyperbolic, the right one reflected) whose potentials are matched
//! at the junctions so that the mean curvatures fit together.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::model_spaces::ModelSpace;
use crate::roots;

/// Smallest admissible cap start; the cap potentials blow up at 0.
pub const T_FLOOR: f64 = 1e-8;
const T_CEIL: f64 = 1e12;
const INITIAL_DELTA_FRACTION: f64 = 0.01;
const MAX_HALVINGS: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CapFamily {
    Cone,
    Hyperbolic { sigma: f64 },
}

/// Result of matching one cap against the middle model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SegmentMatch {
    /// start of the cap model (|t₊| on the reflected side)
    pub t_start: f64,
    /// trimming of the middle model at this junction (δ₁ or δ₃)
    pub delta_middle: f64,
    /// overshoot of the cap endpoint beyond ℓ (δ₂ or δ₄)
    pub delta_cap: f64,
    /// ℓ + δ_cap
    pub matched_endpoint: f64,
    pub ell: f64,
}

impl SegmentMatch {
    pub fn cap_width(&self) -> f64 {
        self.matched_endpoint - self.t_start
    }
}

struct Cap {
    model: ModelSpace,
    /// inf of the potential over t > 0
    floor_value: f64,
}

impl Cap {
    fn new(n: usize, family: CapFamily) -> Result<Self> {
        match family {
            CapFamily::Cone => Ok(Self { model: ModelSpace::cone(n, 1.0, 2.0)?, floor_value: 0.0 }),
            CapFamily::Hyperbolic { sigma } => {
                let nf = n as f64;
                Ok(Self {
                    model: ModelSpace::hyperbolic(n, sigma, 1.0, 2.0)?,
                    floor_value: (sigma * (nf - 1.0) / nf).sqrt(),
                })
            }
        }
    }

    // closed forms hold for every t > 0
    fn potential(&self, t: f64) -> f64 {
        self.model.warping().potential_unchecked(t)
    }

    /// Solves h(t) = value for t in [T_FLOOR, T_CEIL].
    fn inverse(&self, value: f64) -> Result<f64> {
        roots::scan_and_bisect_geometric(|t| self.potential(t) - value, T_FLOOR, T_CEIL).map_err(|e| match e {
            Error::NoRoot { lo, hi, .. } => Error::NoRoot {
                lo,
                hi,
                reason: format!(
                    "cap potential never reaches {value} on [{T_FLOOR}, {T_CEIL}]: the matched endpoint diverges"
                ),
            },
            other => other,
        })
    }
}

fn middle_potential(n: usize, kappa: f64, s: f64) -> f64 {
    let nf = n as f64;
    -kappa.sqrt() * (nf - 1.0) * (kappa.sqrt() * nf * s / 2.0).tan()
}

/// Matches a cap to the left end of the spherical middle model of width `d`.
///
/// Picks `t₋` with `−h_cap(t₋) ≤ h_boundary` (largest such value, capped at
/// ℓ/2, floored at [`T_FLOOR`]), then halves δ₁ from `0.01·d` until the
/// matching equation `h_mid((−d+δ₁)/2) = h_cap(ℓ+δ₂)` has a root with
/// `0 < δ₂ < t₋`.
pub fn match_segments(n: usize, kappa: f64, d: f64, family: CapFamily, h_boundary: f64) -> Result<SegmentMatch> {
    let nf = n as f64;
    if !(kappa > 0.0) {
        return Err(Error::Domain(format!("kappa must be positive, got {kappa}")));
    }
    let d_max = 2.0 * PI / (kappa.sqrt() * nf);
    if !(d > 0.0 && d < d_max) {
        return Err(Error::Domain(format!("middle width d = {d} must lie in (0, {d_max})")));
    }
    if let CapFamily::Hyperbolic { sigma } = family {
        let threshold = crate::comparison::negative_threshold(n, kappa, d);
        if !(sigma > 0.0 && sigma < threshold) {
            return Err(Error::Threshold { sigma, threshold });
        }
    }
    let cap = Cap::new(n, family)?;

    let ell = cap.inverse(middle_potential(n, kappa, -d / 2.0))?;

    let t_limit = if h_boundary == f64::NEG_INFINITY {
        T_FLOOR
    } else if h_boundary.is_nan() {
        return Err(Error::Domain("boundary mean curvature bound is NaN".into()));
    } else if -h_boundary <= cap.floor_value {
        f64::INFINITY
    } else {
        cap.inverse(-h_boundary)?
    };
    let t_start = t_limit.min(ell / 2.0).max(T_FLOOR);

    let mut delta_middle = INITIAL_DELTA_FRACTION * d;
    for _ in 0..MAX_HALVINGS {
        let s = (-d + delta_middle) / 2.0;
        let target = middle_potential(n, kappa, s);
        if target > cap.floor_value {
            let endpoint = cap.inverse(target)?;
            let delta_cap = endpoint - ell;
            if delta_cap > 0.0 && delta_cap < t_start && endpoint > t_start {
                return Ok(SegmentMatch { t_start, delta_middle, delta_cap, matched_endpoint: endpoint, ell });
            }
            if delta_cap <= 0.0 {
                break;
            }
        }
        delta_middle *= 0.5;
    }
    Err(Error::NoRoot {
        lo: T_FLOOR,
        hi: ell,
        reason: format!("no δ with 0 < δ_cap < t_start = {t_start} (last δ_middle = {delta_middle:e})"),
    })
}

/// Cap, round middle and reflected cap, ordered left to right.
#[derive(Debug, Clone, PartialEq)]
pub struct CappedConstruction {
    pub n: usize,
    pub kappa: f64,
    pub d: f64,
    pub family: CapFamily,
    pub left: SegmentMatch,
    pub right: SegmentMatch,
    pub models: Vec<ModelSpace>,
}

pub fn capped_models(
    n: usize,
    kappa: f64,
    d: f64,
    family: CapFamily,
    h_minus: f64,
    h_plus: f64,
) -> Result<CappedConstruction> {
    let left = match_segments(n, kappa, d, family, h_minus)?;
    // the reflected cap satisfies the same inequality with t₊ = −t_start
    let right = match_segments(n, kappa, d, family, h_plus)?;
    let cap = |m: &SegmentMatch| match family {
        CapFamily::Cone => ModelSpace::cone(n, m.t_start, m.matched_endpoint),
        CapFamily::Hyperbolic { sigma } => ModelSpace::hyperbolic(n, sigma, m.t_start, m.matched_endpoint),
    };
    let m1 = cap(&left)?;
    let m3 = cap(&right)?.reflect();
    let m2 = ModelSpace::spherical(n, kappa, (-d + left.delta_middle) / 2.0, (d - right.delta_middle) / 2.0)?;
    Ok(CappedConstruction { n, kappa, d, family, left, right, models: vec![m1, m2, m3] })
}
