use crate::error::{Error, Result};

/// Quintic smoothstep `6u⁵ − 15u⁴ + 10u³`; C² with zero first and second
/// derivatives at both ends.
pub fn smoothstep(u: f64) -> f64 {
    let u = u.clamp(0.0, 1.0);
    u * u * u * (u * (6.0 * u - 15.0) + 10.0)
}

/// Antiderivative of [`smoothstep`] vanishing at 0; equals 1/2 at 1.
fn smoothstep_integral(u: f64) -> f64 {
    let u = u.clamp(0.0, 1.0);
    u * u * u * u * (u * (u - 3.0) + 2.5)
}

/// Clamping reparametrization ρ of the band coordinate.
///
/// On an active side, ρ′ is the smoothstep across a transition zone of width
/// ε centred on the endpoint: ρ equals the endpoint outside the zone and the
/// identity inside. An inactive side leaves ρ(t) = t beyond the endpoint.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CutoffProfile {
    a: f64,
    b: f64,
    eps: f64,
    left: bool,
    right: bool,
}

impl CutoffProfile {
    pub fn new(a: f64, b: f64, eps: f64) -> Result<Self> {
        Self::one_sided(a, b, eps, true, true)
    }

    pub fn one_sided(a: f64, b: f64, eps: f64, left: bool, right: bool) -> Result<Self> {
        if !(eps > 0.0) || !(eps < (b - a) / 2.0) {
            return Err(Error::Domain(format!(
                "transition width {eps} must lie in (0, (b−a)/2) = (0, {})",
                (b - a) / 2.0
            )));
        }
        Ok(Self { a, b, eps, left, right })
    }

    pub fn endpoints(&self) -> (f64, f64) {
        (self.a, self.b)
    }

    pub fn epsilon(&self) -> f64 {
        self.eps
    }

    pub fn clamps_left(&self) -> bool {
        self.left
    }

    pub fn clamps_right(&self) -> bool {
        self.right
    }

    /// `(ρ(t), ρ′(t))`.
    pub fn eval(&self, t: f64) -> (f64, f64) {
        let half = 0.5 * self.eps;
        if self.left && t < self.a + half {
            if t <= self.a - half {
                return (self.a, 0.0);
            }
            let u = (t - (self.a - half)) / self.eps;
            return (self.a + self.eps * smoothstep_integral(u), smoothstep(u));
        }
        if self.right && t > self.b - half {
            if t >= self.b + half {
                return (self.b, 0.0);
            }
            let v = ((self.b + half) - t) / self.eps;
            return (self.b - self.eps * smoothstep_integral(v), smoothstep(v));
        }
        (t, 1.0)
    }

    /// The open transition zones of the active sides.
    pub fn transition_zones(&self) -> Vec<(f64, f64)> {
        let half = 0.5 * self.eps;
        let mut zones = Vec::new();
        if self.left {
            zones.push((self.a - half, self.a + half));
        }
        if self.right {
            zones.push((self.b - half, self.b + half));
        }
        zones
    }
}
