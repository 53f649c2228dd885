//! Width bounds and the partitioned-band decision procedure.

use std::f64::consts::PI;

use crate::assembly::glue::{check_matching, default_epsilon, EpsilonSearch, PartitionedBandSpec};
use crate::error::{Error, Result};
use crate::model_spaces::ModelSpace;
use crate::roots;

/// Tolerance for the hypothesis bullets, relative to `max(1, |value|)`.
pub const HYPOTHESIS_TOL: f64 = 1e-10;
/// Relative distance to the threshold below which ℓ is reported divergent.
pub const DIVERGENCE_GAP: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WidthKind {
    Classical,
    NonnegAmbient,
    NegativeAmbient,
}

impl WidthKind {
    pub fn name(self) -> &'static str {
        match self {
            WidthKind::Classical => "classical",
            WidthKind::NonnegAmbient => "nonneg-ambient",
            WidthKind::NegativeAmbient => "negative-ambient",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WidthBound {
    pub kind: WidthKind,
    pub n: usize,
    pub kappa: f64,
    pub sigma: Option<f64>,
    pub d: Option<f64>,
    pub value: f64,
    /// |LHS − RHS| of the defining equation at `value`
    pub residual: f64,
}

fn check_n_kappa(n: usize, kappa: f64) -> Result<()> {
    if n < 2 {
        return Err(Error::Domain(format!("dimension must be at least 2, got {n}")));
    }
    if !(kappa > 0.0 && kappa.is_finite()) {
        return Err(Error::Domain(format!("kappa must be positive and finite, got {kappa}")));
    }
    Ok(())
}

fn check_d(n: usize, kappa: f64, d: f64) -> Result<()> {
    check_n_kappa(n, kappa)?;
    let d_max = classical(n, kappa);
    if !(d > 0.0 && d < d_max) {
        return Err(Error::Domain(format!("d = {d} must lie in (0, {d_max})")));
    }
    Ok(())
}

fn classical(n: usize, kappa: f64) -> f64 {
    2.0 * PI / (kappa.sqrt() * n as f64)
}

/// `2π/(√κ n)`.
pub fn classical_bound(n: usize, kappa: f64) -> Result<WidthBound> {
    check_n_kappa(n, kappa)?;
    Ok(WidthBound {
        kind: WidthKind::Classical,
        n,
        kappa,
        sigma: None,
        d: None,
        value: classical(n, kappa),
        residual: 0.0,
    })
}

/// `√κ(n−1)·tan(√κ n d/4)`: the middle potential at the junction.
fn junction_potential(n: usize, kappa: f64, d: f64) -> f64 {
    kappa.sqrt() * (n as f64 - 1.0) * (kappa.sqrt() * n as f64 * d / 4.0).tan()
}

/// `ℓ = 2/(√κ n)·cot(√κ n d/4)`.
pub fn ell_nonneg(n: usize, kappa: f64, d: f64) -> Result<WidthBound> {
    check_d(n, kappa, d)?;
    let nf = n as f64;
    let value = 2.0 / (kappa.sqrt() * nf * (kappa.sqrt() * nf * d / 4.0).tan());
    let residual = (junction_potential(n, kappa, d) - 2.0 * (nf - 1.0) / (nf * value)).abs();
    Ok(WidthBound { kind: WidthKind::NonnegAmbient, n, kappa, sigma: None, d: Some(d), value, residual })
}

/// `κ n(n−1)·tan²(√κ n d/4)`; admissible σ lie strictly below.
pub fn negative_threshold(n: usize, kappa: f64, d: f64) -> f64 {
    let nf = n as f64;
    let t = (kappa.sqrt() * nf * d / 4.0).tan();
    kappa * nf * (nf - 1.0) * t * t
}

/// Solves `√κ(n−1)tan(√κ n d/4) = √(σ(n−1)/n)·coth(√(σn) ℓ/(2√(n−1)))` for ℓ.
pub fn ell_negative(n: usize, kappa: f64, sigma: f64, d: f64) -> Result<WidthBound> {
    check_d(n, kappa, d)?;
    let nf = n as f64;
    let threshold = negative_threshold(n, kappa, d);
    if !(sigma > 0.0) {
        return Err(Error::Domain(format!("sigma must be positive, got {sigma}")));
    }
    if !(sigma < threshold) {
        return Err(Error::Threshold { sigma, threshold });
    }
    if threshold - sigma <= DIVERGENCE_GAP * threshold {
        return Err(Error::Divergent { sigma, threshold });
    }
    let lhs = junction_potential(n, kappa, d);
    let amp = (sigma * (nf - 1.0) / nf).sqrt();
    let rate = (sigma * nf).sqrt() / (2.0 * (nf - 1.0).sqrt());
    let rhs = |ell: f64| amp / (rate * ell).tanh();
    let value = roots::scan_and_bisect_geometric(|ell| rhs(ell) - lhs, 1e-12, 1e12)?;
    Ok(WidthBound {
        kind: WidthKind::NegativeAmbient,
        n,
        kappa,
        sigma: Some(sigma),
        d: Some(d),
        value,
        residual: (lhs - rhs(value)).abs(),
    })
}

/// The analytic half of the contradiction argument. Property (pB) of the
/// band is a topological input that is not checked here.
#[derive(Debug, Clone, PartialEq)]
pub struct ContradictionCertificate {
    pub search: EpsilonSearch,
    pub note: &'static str,
}

pub const PB_NOTE: &str = "analytic conditions only; Property (pB) of the band is assumed, not verified";

#[derive(Debug, Clone, PartialEq)]
pub enum Conclusion {
    /// 1-based index j with width(V_j) ≤ width(M_j)
    Index(usize),
    Contradiction(Box<ContradictionCertificate>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonVerdict {
    /// (measured width, model width) per segment
    pub pairs: Vec<(f64, f64)>,
    pub conclusion: Conclusion,
}

impl ComparisonVerdict {
    pub fn index(&self) -> Option<usize> {
        match self.conclusion {
            Conclusion::Index(j) => Some(j),
            Conclusion::Contradiction(_) => None,
        }
    }

    pub fn certificate(&self) -> Option<&ContradictionCertificate> {
        match &self.conclusion {
            Conclusion::Index(_) => None,
            Conclusion::Contradiction(c) => Some(c),
        }
    }
}

fn below(lhs: f64, rhs: f64) -> bool {
    lhs < rhs - HYPOTHESIS_TOL * rhs.abs().max(1.0)
}

/// Checks the three hypothesis bullets:
/// 1. `scal(V_j) ≥ scal(M_j)`,
/// 2. `H(∂₋X) ≥ H(∂₋M_1)` and `H(∂₊X) ≥ H(∂₊M_{k+1})`,
/// 3. `H(∂₊M_j) = −H(∂₋M_{j+1})`.
pub fn check_hypotheses(spec: &PartitionedBandSpec, models: &[ModelSpace]) -> Result<()> {
    if models.len() != spec.segments.len() {
        return Err(Error::Domain(format!(
            "{} models supplied for k + 1 = {} segments",
            models.len(),
            spec.segments.len()
        )));
    }
    for (j, (seg, m)) in spec.segments.iter().zip(models).enumerate() {
        if m.dimension() != spec.n {
            return Err(Error::Domain(format!("model {} has dimension {}, band has {}", j + 1, m.dimension(), spec.n)));
        }
        let sigma = m.scalar_curvature();
        if below(seg.scal_lower, sigma) {
            return Err(Error::Hypothesis {
                bullet: 1,
                detail: format!("segment {}: scal lower bound {} < model scalar curvature {}", j + 1, seg.scal_lower, sigma),
            });
        }
    }
    let (first_minus, _) = models[0].boundary_mean_curvatures();
    let (_, last_plus) = models[models.len() - 1].boundary_mean_curvatures();
    if below(spec.h_minus, first_minus) {
        return Err(Error::Hypothesis {
            bullet: 2,
            detail: format!("H(∂₋X) bound {} < H(∂₋M_1) = {}", spec.h_minus, first_minus),
        });
    }
    if below(spec.h_plus, last_plus) {
        return Err(Error::Hypothesis {
            bullet: 2,
            detail: format!("H(∂₊X) bound {} < H(∂₊M_{}) = {}", spec.h_plus, models.len(), last_plus),
        });
    }
    check_matching(models).map_err(|e| match e {
        Error::Match { junction, left, right } => Error::Hypothesis {
            bullet: 3,
            detail: format!("junction {junction}: H(∂₊M) = {left} but H(∂₋M) = {right}"),
        },
        other => other,
    })
}

/// Either an index j with width(V_j) ≤ width(M_j) (the smallest one, ties
/// included) or, if every segment is wider than its model, the assembled
/// potential with its condition certificate.
pub fn evaluate_partitioned(spec: &PartitionedBandSpec, models: &[ModelSpace]) -> Result<ComparisonVerdict> {
    check_hypotheses(spec, models)?;
    let pairs: Vec<(f64, f64)> = spec.segments.iter().zip(models).map(|(s, m)| (s.width, m.width_of())).collect();
    if let Some(j) = pairs.iter().position(|(measured, model)| measured <= model) {
        return Ok(ComparisonVerdict { pairs, conclusion: Conclusion::Index(j + 1) });
    }
    let search = default_epsilon(spec, models)?;
    Ok(ComparisonVerdict {
        pairs,
        conclusion: Conclusion::Contradiction(Box::new(ContradictionCertificate { search, note: PB_NOTE })),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::assembly::glue::SegmentSpec;
    use crate::assembly::matching::{capped_models, CapFamily};

    #[test]
    fn classical_examples() {
        assert!((classical_bound(7, 1.0).unwrap().value - 2.0 * PI / 7.0).abs() < 1e-15);
        assert!((classical_bound(5, 4.0).unwrap().value - classical_bound(5, 1.0).unwrap().value / 2.0).abs() < 1e-15);
        assert!((classical_bound(2, 1.0).unwrap().value - PI).abs() < 1e-15);
    }

    #[test]
    fn nonneg_examples() {
        assert!((ell_nonneg(7, 1.0, PI / 7.0).unwrap().value - 2.0 / 7.0).abs() < 1e-12);
        assert!((ell_nonneg(2, 1.0, PI / 2.0).unwrap().value - 1.0).abs() < 1e-12);
        assert!(matches!(ell_nonneg(7, 1.0, 2.0 * PI / 7.0), Err(Error::Domain(_))));
        assert!(matches!(ell_nonneg(7, 1.0, 0.0), Err(Error::Domain(_))));
    }

    #[test]
    fn negative_residual_and_order() {
        let a = ell_negative(7, 1.0, 5.0, PI / 7.0).unwrap();
        let b = ell_negative(7, 1.0, 20.0, PI / 7.0).unwrap();
        assert!(a.residual < 1e-10 && b.residual < 1e-10);
        assert!(a.value < b.value);
        // closed form ℓ = atanh(A/L)/c
        let (nf, s) = (7.0f64, 5.0f64);
        let amp = (s * (nf - 1.0) / nf).sqrt();
        let rate = (s * nf).sqrt() / (2.0 * (nf - 1.0).sqrt());
        let exact = (amp / 6.0).atanh() / rate;
        assert!((a.value - exact).abs() < 1e-12 * exact);
    }

    #[test]
    fn threshold_errors() {
        assert!(matches!(ell_negative(7, 1.0, 42.0, PI / 7.0), Err(Error::Threshold { .. })));
        let t = negative_threshold(7, 1.0, PI / 7.0);
        assert!(matches!(ell_negative(7, 1.0, t * (1.0 - 1e-14), PI / 7.0), Err(Error::Divergent { .. })));
    }

    fn cor(scale: [f64; 3]) -> (PartitionedBandSpec, Vec<ModelSpace>) {
        let c = capped_models(7, 1.0, PI / 7.0, CapFamily::Cone, 0.0, 0.0).unwrap();
        let segments = c
            .models
            .iter()
            .zip(scale)
            .map(|(m, s)| SegmentSpec { width: s * m.width_of(), scal_lower: m.scalar_curvature() })
            .collect();
        (PartitionedBandSpec::new(7, segments, 0.0, 0.0).unwrap(), c.models)
    }

    #[test]
    fn index_verdict_smallest_and_ties() {
        let (spec, models) = cor([1.2, 1.0, 0.5]);
        let v = evaluate_partitioned(&spec, &models).unwrap();
        assert_eq!(v.index(), Some(2));
        assert!(v.certificate().is_none());
    }

    #[test]
    fn contradiction_verdict() {
        let (spec, models) = cor([1.1, 1.1, 1.1]);
        let v = evaluate_partitioned(&spec, &models).unwrap();
        let cert = v.certificate().unwrap();
        assert!(v.index().is_none());
        assert!(cert.search.certificate.passed);
        assert!(cert.search.certificate.min_margin > 0.0);
    }

    #[test]
    fn hypothesis_bullets() {
        let (mut spec, models) = cor([1.1, 1.1, 1.1]);
        spec.segments[1].scal_lower = 41.0;
        assert!(matches!(evaluate_partitioned(&spec, &models), Err(Error::Hypothesis { bullet: 1, .. })));

        let (mut spec, models) = cor([1.1, 1.1, 1.1]);
        spec.h_minus = -1e6;
        assert!(matches!(evaluate_partitioned(&spec, &models), Err(Error::Hypothesis { bullet: 2, .. })));

        let (spec, mut models) = cor([1.1, 1.1, 1.1]);
        let d = models[1].domain();
        models[1] = ModelSpace::spherical(7, 1.0, d.lo, d.hi + 1e-3).unwrap();
        assert!(matches!(evaluate_partitioned(&spec, &models), Err(Error::Hypothesis { bullet: 3, .. })));
    }
}
