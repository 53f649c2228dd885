//! Bracketed root finding.
//!
//! Every equation solved in this crate is monotone on its bracket, so plain
//! bisection after a uniform bracket scan is enough. Bisection runs until the
//! relative width drops below [`REL_TOL`] and then keeps halving while the
//! midpoint is still representable, which pins roots to about one ulp.

use crate::error::{Error, Result};

pub const SCAN_SUBDIVISIONS: usize = 64;
pub const REL_TOL: f64 = 1e-12;
pub const MAX_ITER: usize = 200;

/// Bisection on `[lo, hi]`; `f(lo)` and `f(hi)` must differ in sign.
pub fn bisect<F>(f: F, mut lo: f64, mut hi: f64) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    let mut f_lo = f(lo);
    let f_hi = f(hi);
    if f_lo == 0.0 {
        return Ok(lo);
    }
    if f_hi == 0.0 {
        return Ok(hi);
    }
    if !(f_lo.is_finite() && f_hi.is_finite()) || f_lo.signum() == f_hi.signum() {
        return Err(Error::NoRoot {
            lo,
            hi,
            reason: format!("no sign change (f(lo) = {f_lo}, f(hi) = {f_hi})"),
        });
    }
    for _ in 0..MAX_ITER {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let f_mid = f(mid);
        if f_mid == 0.0 {
            return Ok(mid);
        }
        if f_mid.signum() == f_lo.signum() {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    let mid = 0.5 * (lo + hi);
    if (hi - lo) > REL_TOL * mid.abs().max(f64::MIN_POSITIVE) {
        return Err(Error::NoRoot {
            lo,
            hi,
            reason: "iteration limit reached before tolerance".into(),
        });
    }
    Ok(mid)
}

/// Scans `[lo, hi]` in [`SCAN_SUBDIVISIONS`] equal pieces for the first sign
/// change and bisects inside it.
pub fn scan_and_bisect<F>(f: F, lo: f64, hi: f64) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    scan_with(&f, lo, hi, |i| lo + (hi - lo) * i as f64 / SCAN_SUBDIVISIONS as f64)
}

/// Like [`scan_and_bisect`] but with geometrically spaced scan points, for
/// brackets spanning many orders of magnitude. Requires `0 < lo < hi`.
pub fn scan_and_bisect_geometric<F>(f: F, lo: f64, hi: f64) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    debug_assert!(lo > 0.0 && hi > lo);
    let ratio = (hi / lo).ln();
    scan_with(&f, lo, hi, |i| {
        if i == SCAN_SUBDIVISIONS {
            hi
        } else {
            lo * (ratio * i as f64 / SCAN_SUBDIVISIONS as f64).exp()
        }
    })
}

fn scan_with<F, P>(f: &F, lo: f64, hi: f64, point: P) -> Result<f64>
where
    F: Fn(f64) -> f64,
    P: Fn(usize) -> f64,
{
    let mut x0 = point(0);
    let mut f0 = f(x0);
    if f0 == 0.0 {
        return Ok(x0);
    }
    for i in 1..=SCAN_SUBDIVISIONS {
        let x1 = point(i);
        let f1 = f(x1);
        if f1 == 0.0 {
            return Ok(x1);
        }
        if f0.is_finite() && f1.is_finite() && f0.signum() != f1.signum() {
            return bisect(f, x0, x1);
        }
        x0 = x1;
        f0 = f1;
    }
    Err(Error::NoRoot {
        lo,
        hi,
        reason: format!("no sign change among {SCAN_SUBDIVISIONS} scan subdivisions"),
    })
}
