//! Discrete μ-bubbles: minimizers of `perimeter(Ω) − ∫_Ω h` among sets
//! containing the source collar and avoiding the sink collar.

pub mod crofton;
pub mod maxflow;
pub mod planar;
pub mod stability;
pub mod warped;

pub use crofton::CroftonWeights;
pub use planar::{brute_force_minimize, enumerate_minimizers, minimize_2d, CutResult, PlanarGrid, Polyline, Topology};
pub use stability::{StabilityCertificate, VariationReport};
pub use warped::{minimize_1d, SliceResult, WarpedBand};

use crate::error::{Error, Result};

/// Membership of grid cells (2D) or slice nodes (1D).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct DiscreteSet {
    members: Vec<bool>,
}

impl DiscreteSet {
    pub fn from_fn(len: usize, f: impl Fn(usize) -> bool) -> Self {
        Self { members: (0..len).map(f).collect() }
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, c: usize) -> bool {
        self.members[c]
    }

    pub fn set(&mut self, c: usize, value: bool) {
        self.members[c] = value;
    }

    pub fn count(&self) -> usize {
        self.members.iter().filter(|&&b| b).count()
    }

    pub fn is_subset(&self, other: &Self) -> bool {
        self.members.iter().zip(&other.members).all(|(a, b)| !a || *b)
    }

    pub fn union(&self, other: &Self) -> Self {
        Self { members: self.members.iter().zip(&other.members).map(|(a, b)| *a || *b).collect() }
    }

    pub fn intersection(&self, other: &Self) -> Self {
        Self { members: self.members.iter().zip(&other.members).map(|(a, b)| *a && *b).collect() }
    }

    pub fn members(&self) -> &[bool] {
        &self.members
    }
}

/// Strict margins of `H(∂₋X) > −h` and `H(∂₊X) > h`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BarrierReport {
    pub minus_margin: f64,
    pub plus_margin: f64,
    pub passed: bool,
}

impl BarrierReport {
    pub fn new(minus_margin: f64, plus_margin: f64) -> Self {
        Self { minus_margin, plus_margin, passed: minus_margin > 0.0 && plus_margin > 0.0 }
    }
}

#[derive(Debug, Clone)]
pub enum GridBand {
    Warped1d(WarpedBand),
    Grid2d(PlanarGrid),
}

#[derive(Debug, Clone, PartialEq)]
pub enum BubbleResult {
    Slice(SliceResult),
    Cut(CutResult),
}

impl BubbleResult {
    pub fn energy(&self) -> f64 {
        match self {
            BubbleResult::Slice(r) => r.energy,
            BubbleResult::Cut(r) => r.energy,
        }
    }
}

impl GridBand {
    /// In 1D the set must be a prefix of nodes `{t_i ≤ s}` with at least
    /// one node on each side.
    pub fn energy(&self, set: &DiscreteSet) -> Result<f64> {
        match self {
            GridBand::Grid2d(g) => g.energy(set),
            GridBand::Warped1d(b) => {
                if set.len() != b.points() {
                    return Err(Error::Admissibility(format!("set has {} nodes, band has {}", set.len(), b.points())));
                }
                let last = set.count();
                if last == 0 || last == b.points() || set.members[..last].iter().any(|m| !m) {
                    return Err(Error::Admissibility("1D sets are proper non-empty prefixes of nodes".into()));
                }
                Ok(b.functional()[last - 1])
            }
        }
    }

    pub fn check_barriers(&self) -> BarrierReport {
        match self {
            GridBand::Warped1d(b) => b.check_barriers(),
            GridBand::Grid2d(g) => g.check_barriers(),
        }
    }

    pub fn minimize(&self) -> Result<BubbleResult> {
        match self {
            GridBand::Warped1d(b) => minimize_1d(b).map(BubbleResult::Slice),
            GridBand::Grid2d(g) => minimize_2d(g).map(BubbleResult::Cut),
        }
    }

    pub fn check_first_variation(&self, result: &BubbleResult) -> Result<VariationReport> {
        match (self, result) {
            (GridBand::Warped1d(_), BubbleResult::Slice(r)) => Ok(stability::first_variation_1d(r)),
            (GridBand::Grid2d(g), BubbleResult::Cut(r)) => Ok(stability::first_variation_2d(g, r)),
            _ => Err(Error::Domain("result does not belong to this band".into())),
        }
    }

    /// `scal_lower` takes a position `(x, y)`; 1D bands pass `(t, 0)`.
    pub fn stability_bound(
        &self,
        result: &BubbleResult,
        scal_lower: &dyn Fn(f64, f64) -> f64,
    ) -> Result<StabilityCertificate> {
        match (self, result) {
            (GridBand::Warped1d(b), BubbleResult::Slice(r)) => Ok(stability::stability_1d(b, r, &|t| scal_lower(t, 0.0))),
            (GridBand::Grid2d(g), BubbleResult::Cut(r)) => Ok(stability::stability_2d(g, r, scal_lower)),
            _ => Err(Error::Domain("result does not belong to this band".into())),
        }
    }

    /// Prefix set of a 1D slice result.
    pub fn minimizer_set(&self, result: &BubbleResult) -> Option<DiscreteSet> {
        match (self, result) {
            (GridBand::Warped1d(b), BubbleResult::Slice(r)) => Some(DiscreteSet::from_fn(b.points(), |i| i <= r.node)),
            (GridBand::Grid2d(_), BubbleResult::Cut(r)) => Some(r.set.clone()),
            _ => None,
        }
    }
}
