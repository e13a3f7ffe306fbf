//! Closed-form one-dimensional optimal synthesis: the piecewise value
//! function of the worst-case control problem, the switching and dispersion
//! curves, and the resulting step-length and bound formulas.

use crate::error::{Error, Result};

/// Point in the scaled `(t, y)` plane, `t` in `[-1, 0]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Plane1DPoint {
    pub t: f64,
    pub y: f64,
}

impl Plane1DPoint {
    pub fn new(t: f64, y: f64) -> Result<Self> {
        if !(-1.0..=0.0).contains(&t) || !t.is_finite() || !y.is_finite() {
            return Err(Error::Domain(format!(
                "Plane1DPoint requires t in [-1, 0] and finite y, got t = {t}, y = {y}"
            )));
        }
        Ok(Self { t, y })
    }
}

/// Which branch of the value function applies at a point.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Region1D {
    BelowDispersion,
    Middle,
    AboveSwitching,
}

/// Dispersion curve `y = 2(-1 + sqrt(1 + t^3)) / t^2` with its `t -> 0` limit.
pub fn dispersion_curve(t: f64) -> f64 {
    if t.abs() < 1e-3 {
        // 2(sqrt(1+t^3)-1)/t^2 = t - t^4/4 + t^7/8 - ...
        return t - t.powi(4) / 4.0 + t.powi(7) / 8.0;
    }
    let s = 1.0 + t * t * t;
    debug_assert!(s >= 0.0, "1 + t^3 negative on [-1, 0]");
    2.0 * (s.sqrt() - 1.0) / (t * t)
}

/// Switching curve `y = -t`.
pub fn switching_curve(t: f64) -> f64 {
    -t
}

/// Branch classification; exact boundary points go to the middle branch,
/// where the values coincide.
pub fn classify_1d(pt: Plane1DPoint) -> Region1D {
    if pt.y < dispersion_curve(pt.t) {
        Region1D::BelowDispersion
    } else if pt.y > switching_curve(pt.t) {
        Region1D::AboveSwitching
    } else {
        Region1D::Middle
    }
}

/// Value function of the 1D worst-case problem on `[-1, 0] x R`.
pub fn bellman_1d(pt: Plane1DPoint) -> f64 {
    let (t, y) = (pt.t, pt.y);
    match classify_1d(pt) {
        Region1D::BelowDispersion => -y + t + t * y,
        Region1D::AboveSwitching => y - t - t * y,
        Region1D::Middle => {
            let prod = (1.0 - y) * (1.0 + t);
            debug_assert!(prod >= 0.0);
            4.0 - y + t - t * y - 4.0 * prod.sqrt()
        }
    }
}

fn check_decrement(a: f64) -> Result<()> {
    if !(a > 0.0 && a <= 1.0) {
        return Err(Error::Domain(format!(
            "decrement must lie in (0, 1], got {a}"
        )));
    }
    Ok(())
}

/// Worst-case decrement after a full Newton step in one dimension:
/// `4 - a^2 - 4 sqrt(1 - a^2)`.
pub fn full_step_bound_1d(a: f64) -> Result<f64> {
    check_decrement(a)?;
    if a < 1e-3 {
        // 4 - a^2 - 4 sqrt(1-a^2) = a^2 + a^4/2 + a^6/4 + 5a^8/32 + ...
        let a2 = a * a;
        return Ok(a2 + a2 * a2 / 2.0 + a2 * a2 * a2 / 4.0 + 5.0 * a2.powi(4) / 32.0);
    }
    Ok(bellman_1d(Plane1DPoint { t: -a, y: -a }))
}

/// Damping coefficient minimizing the 1D bound: `2(sqrt(1 + a^3) - 1) / a^3`.
pub fn optimal_gamma_1d(a: f64) -> Result<f64> {
    check_decrement(a)?;
    let s = a * a * a;
    if s < 1e-4 {
        return Ok(1.0 - s / 4.0 + s * s / 8.0 - s * s * s * 5.0 / 64.0);
    }
    Ok(2.0 * ((1.0 + s).sqrt() - 1.0) / s)
}

/// Minimal 1D bound over the step length:
/// `(2(1 - a)(1 - sqrt(1 + a^3)) + a^3) / a^2`.
pub fn optimal_bound_1d(a: f64) -> Result<f64> {
    check_decrement(a)?;
    if a < 1e-2 {
        // Series form; the direct expression cancels at order a^3.
        let a3 = a * a * a;
        return Ok(a * a + (1.0 - a) * a3 * a / 4.0 - (1.0 - a) * a3 * a3 * a / 8.0);
    }
    let s = 1.0 + a * a * a;
    Ok((2.0 * (1.0 - a) * (1.0 - s.sqrt()) + a * a * a) / (a * a))
}
