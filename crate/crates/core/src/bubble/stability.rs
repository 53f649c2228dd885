use crate::bubble::planar::{stencil_curvatures, CutResult, PlanarGrid};
use crate::bubble::warped::{SliceResult, WarpedBand};

pub const METHOD: &str = "pointwise-min";

/// The constant test function ψ ≡ 1 in the stability inequality. With a
/// scalar-flat Σ the left side vanishes, so any `b > 0` makes the right
/// side larger: the inequality fails, which is the desired contradiction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PsiOneCheck {
    /// ½·∫_Σ scal(Σ)
    pub lhs: f64,
    /// b·vol(Σ)
    pub rhs: f64,
    pub volume: f64,
    pub contradiction: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StabilityCertificate {
    pub b: f64,
    /// min over Σ of scal + n/(n−1)h² − 2|∇h|
    pub min_value: f64,
    pub argmin: (f64, f64),
    pub failed: bool,
    pub method: &'static str,
    pub psi_one: PsiOneCheck,
}

impl StabilityCertificate {
    fn from_min(min_value: f64, argmin: (f64, f64), volume: f64) -> Self {
        let failed = !(min_value > 0.0);
        let b = if failed { 0.0 } else { 0.5 * min_value };
        let (lhs, rhs) = (0.0, b * volume);
        Self {
            b,
            min_value,
            argmin,
            failed,
            method: METHOD,
            psi_one: PsiOneCheck { lhs, rhs, volume, contradiction: rhs > lhs },
        }
    }
}

/// Stability constant on the slice through `s*`.
pub fn stability_1d(band: &WarpedBand, result: &SliceResult, scal_lower: &dyn Fn(f64) -> f64) -> StabilityCertificate {
    let nf = band.dimension() as f64;
    let s = result.s_star;
    let (h, dh) = band.potential(s);
    let value = scal_lower(s) + nf / (nf - 1.0) * h * h - 2.0 * dh.abs();
    let (w, _, _) = band.warping(s);
    StabilityCertificate::from_min(value, (s, 0.0), w.powi(band.dimension() as i32 - 1))
}

/// Stability constant over the faces of Σ. Here n = 2, h and |∇h| are
/// averaged over the two cells sharing each face.
pub fn stability_2d(
    grid: &PlanarGrid,
    result: &CutResult,
    scal_lower: &dyn Fn(f64, f64) -> f64,
) -> StabilityCertificate {
    let mut min_value = f64::INFINITY;
    let mut argmin = (f64::NAN, f64::NAN);
    let mut faces = 0usize;
    for line in &result.boundary {
        for (k, f) in line.faces.iter().enumerate() {
            faces += 1;
            let (p, q) = (line.points[k], line.points[k + 1]);
            let mid = (0.5 * (p.0 + q.0), (0.5 * (p.1 + q.1)).rem_euclid(grid.height().max(f64::MIN_POSITIVE)));
            let h = 0.5 * (grid.h()[f.inside] + grid.h()[f.outside]);
            let (gi, go) = (grid.gradient(f.inside), grid.gradient(f.outside));
            let grad = (0.5 * (gi.0 + go.0)).hypot(0.5 * (gi.1 + go.1));
            let value = scal_lower(mid.0, mid.1) + 2.0 * h * h - 2.0 * grad;
            if value < min_value {
                min_value = value;
                argmin = mid;
            }
        }
    }
    if faces == 0 {
        min_value = f64::NAN;
    }
    StabilityCertificate::from_min(min_value, argmin, faces as f64 * grid.delta())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VariationReport {
    pub max: f64,
    pub mean: f64,
    pub samples: usize,
}

pub fn first_variation_1d(result: &SliceResult) -> VariationReport {
    VariationReport { max: result.residual, mean: result.residual, samples: 1 }
}

/// `|κ − h̄|` over every 3-face stencil of Σ.
pub fn first_variation_2d(grid: &PlanarGrid, result: &CutResult) -> VariationReport {
    let mut max: f64 = 0.0;
    let mut sum = 0.0;
    let mut samples = 0usize;
    for line in &result.boundary {
        for (_, kappa, h) in stencil_curvatures(grid, line) {
            let r = (kappa - h).abs();
            max = max.max(r);
            sum += r;
            samples += 1;
        }
    }
    VariationReport { max, mean: if samples > 0 { sum / samples as f64 } else { 0.0 }, samples }
}
