use crate::error::{Error, Result};
use crate::model_spaces::Interval;

/// Affine band coordinate β: [0, d′] → [lo, hi] with Lip(β) = (hi − lo)/d′ < 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BandCoordinate {
    source_width: f64,
    target: Interval,
    slope: f64,
}

impl BandCoordinate {
    pub fn new(source_width: f64, target: Interval) -> Result<Self> {
        let span = target.width();
        if !(span > 0.0) {
            return Err(Error::Width(format!("target interval [{}, {}] is empty", target.lo, target.hi)));
        }
        if !(source_width > span) {
            return Err(Error::Width(format!(
                "band width {source_width} has no surplus over target length {span}; Lip < 1 impossible"
            )));
        }
        Ok(Self { source_width, target, slope: span / source_width })
    }

    pub fn source_width(&self) -> f64 {
        self.source_width
    }

    pub fn target(&self) -> Interval {
        self.target
    }

    pub fn lipschitz(&self) -> f64 {
        self.slope
    }

    /// β(x); the endpoints map exactly onto the target endpoints.
    pub fn eval(&self, x: f64) -> f64 {
        if x >= self.source_width {
            self.target.hi
        } else if x <= 0.0 {
            self.target.lo
        } else {
            self.target.lo + self.slope * x
        }
    }
}
