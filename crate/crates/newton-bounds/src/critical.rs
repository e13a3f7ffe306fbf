//! Focal points of the nominal in-plane trajectories: the linearized
//! perturbation delta_y2, the critical curve in the (t, y1) plane, and the
//! regime classifier deciding whether the in-plane solution is still optimal.

use crate::error::{Error, Result};
use crate::ode::Dopri5;
use serde::Serialize;

/// Parameter of the nominal in-plane trajectory, `c = y1(0)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NominalParam(pub f64);

/// A point of the critical curve together with the parameter it came from.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct CriticalPoint {
    pub t_crit: f64,
    pub y1: f64,
    pub c: f64,
}

/// Regime of the worst case at a query point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Regime {
    OneDim,
    FullDim,
}

/// Nominal trajectory coordinate `y1(t) = (c + t) / (1 - t)`.
pub fn nominal_y1(t: f64, c: f64) -> f64 {
    (c + t) / (1.0 - t)
}

fn check_t(t: f64) -> Result<()> {
    if !(t > -1.0 && t <= 0.0) {
        return Err(Error::Domain(format!("t must lie in (-1, 0], got {t}")));
    }
    Ok(())
}

/// Closed-form solution of the linearized perturbation with
/// `delta_y2(0) = 1`, in three branches by the sign of `c + 1`.
pub fn delta_y2(t: f64, c: NominalParam) -> Result<f64> {
    let c = c.0;
    check_t(t)?;
    if !c.is_finite() {
        return Err(Error::Domain(format!("nominal parameter must be finite, got {c}")));
    }
    let omt = 1.0 - t;
    if (c + 1.0).abs() <= 1e-7 {
        return Ok(4.0 / (3.0 * omt * omt) - omt / 3.0);
    }

    let q = c + 2.0 * t - t * t;
    let arg1 = c * omt * omt / q;
    if arg1 <= 0.0 {
        return Err(Error::Domain(format!(
            "nonpositive logarithm argument c(1-t)^2/(c+2t-t^2) = {arg1} at t = {t}, c = {c}"
        )));
    }
    let cp1 = c + 1.0;
    let common = -(c * c + 5.0 * c + 16.0) * omt / (3.0 * c * cp1)
        + 4.0 * (c + 2.0) / (c * cp1)
        - 4.0 / (c * omt)
        + 4.0 * cp1 / (3.0 * c * omt * omt)
        + 4.0 * omt * arg1.ln() / (c * cp1);

    if c > -1.0 {
        let r = cp1.sqrt();
        let arg2 = q * (r + 1.0) * (r + 1.0) / (c * (r + 1.0 - t) * (r + 1.0 - t));
        if arg2 <= 0.0 {
            return Err(Error::Domain(format!(
                "nonpositive logarithm argument in the c > -1 branch at t = {t}, c = {c}"
            )));
        }
        Ok(common + 2.0 * (c + 2.0) * omt * arg2.ln() / (c * cp1 * r))
    } else {
        let r = (-cp1).sqrt();
        Ok(common
            + 4.0 * (c + 2.0) * omt * ((1.0 / r).atan() - (omt / r).atan())
                / (c * (-cp1) * r))
    }
}

/// Largest `t < 0` with `delta_y2(t; c) = 0`, located by a sign-change scan
/// from `t = 0` downward followed by bisection.
pub fn focal_time(c: NominalParam) -> Result<f64> {
    const T_LO: f64 = -0.95;
    const T_HI: f64 = -1e-6;
    const SCAN: usize = 400;

    let mut prev_t = T_HI;
    let mut prev_v = delta_y2(prev_t, c)?;
    for i in 1..=SCAN {
        let t = T_HI + (T_LO - T_HI) * i as f64 / SCAN as f64;
        let v = delta_y2(t, c)?;
        if prev_v > 0.0 && v <= 0.0 {
            // bisection on [t, prev_t]
            let (mut lo, mut hi) = (t, prev_t);
            for _ in 0..100 {
                let mid = 0.5 * (lo + hi);
                if mid == lo || mid == hi || (hi - lo).abs() < 1e-13 {
                    break;
                }
                if delta_y2(mid, c)? > 0.0 {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            return Ok(0.5 * (lo + hi));
        }
        prev_t = t;
        prev_v = v;
    }
    Err(Error::FocalPointNotFound(c.0))
}

/// Sample the critical curve on a uniform grid of `n >= 2` parameters
/// `c` in `[c_min, c_max]`.
pub fn critical_curve_samples_in(c_min: f64, c_max: f64, n: usize) -> Result<Vec<CriticalPoint>> {
    if n < 2 {
        return Err(Error::Domain(format!("need at least 2 samples, got {n}")));
    }
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let c = c_min + (c_max - c_min) * i as f64 / (n - 1) as f64;
        let t_crit = focal_time(NominalParam(c))?;
        out.push(CriticalPoint {
            t_crit,
            y1: nominal_y1(t_crit, c),
            c,
        });
    }
    Ok(out)
}

/// Default sampling range covering the arc plotted against the 1D curves.
pub fn critical_curve_samples(n: usize) -> Result<Vec<CriticalPoint>> {
    critical_curve_samples_in(-6.0, -0.05, n)
}

/// Decide whether the worst case at `(a, gamma)` is attained by the in-plane
/// solution. The query corresponds to the point `(t, y1) = (-a gamma, -a)`,
/// i.e. `c = -a(1 + a gamma) + a gamma`; the in-plane solution is optimal as
/// long as the focal point has not been reached when integrating backward
/// from `t = 0`, i.e. `delta_y2 >= 0` there.
pub fn classify_regime(a: f64, gamma: f64) -> Result<Regime> {
    if !(a > 0.0 && a < 1.0) {
        return Err(Error::Domain(format!("a must lie in (0, 1), got {a}")));
    }
    if !(gamma > 0.0 && gamma <= 1.0) {
        return Err(Error::Domain(format!("gamma must lie in (0, 1], got {gamma}")));
    }
    let c = -a * (1.0 + a * gamma) + a * gamma;
    let d = delta_y2(-a * gamma, NominalParam(c))?;
    Ok(if d >= 0.0 { Regime::OneDim } else { Regime::FullDim })
}

/// Residual of the printed implicit relation for the `c > -1` arc of the
/// critical curve, in the variables `Y = sqrt(1 + y1)`, `T = sqrt(1 - t)`.
/// Kept as a secondary cross-check; roots of `delta_y2` are the primary
/// definition of the curve.
pub fn critical_relation_above(t: f64, y1: f64) -> f64 {
    let yy = (1.0 + y1).sqrt();
    let tt = (1.0 - t).sqrt();
    (-yy.powi(4) * tt.powi(6) + 4.0 * yy.powi(4) - 3.0 * yy * yy * tt.powi(4) - 12.0 * y1 * t)
        * yy
        + 24.0 * tt * tt * yy * tt.ln()
        + 6.0 * tt * (yy * tt - 1.0).powi(2) * ((yy - tt) / (yy * tt - 1.0)).ln()
        + 6.0 * tt * (yy * tt + 1.0).powi(2) * ((yy * tt + 1.0) / (yy + tt)).ln()
}

/// Residual of the printed implicit relation for the `c < -1` arc, in the
/// variables `Y = sqrt(-(1 + y1)(1 - t))`, `T = 1 - t`.
pub fn critical_relation_below(t: f64, y1: f64) -> f64 {
    let yy = (-(1.0 + y1) * (1.0 - t)).sqrt();
    let tt = 1.0 - t;
    -yy.powi(4) * tt.powi(3) + 4.0 * yy.powi(4) + 3.0 * yy * yy * tt.powi(3)
        - 12.0 * tt * tt * y1 * t
        + 12.0
            * tt.powi(3)
            * (2.0 * tt.ln()
                + (yy * yy - 1.0) * ((1.0 / yy).atan() - (tt / yy).atan()) / yy
                + ((yy * yy + 1.0) / (yy * yy + tt * tt)).ln())
}

/// Numerically integrate the linearized perturbation ODE backward from
/// `t = 0` (where it equals 1); independent oracle for the closed forms.
pub fn delta_y2_numeric(t_end: f64, c: NominalParam) -> Result<f64> {
    check_t(t_end)?;
    let c = c.0;
    let rhs = move |t: f64, y: &[f64; 1]| -> Result<[f64; 1]> {
        let omt = 1.0 - t;
        let q = c + 2.0 * t - t * t;
        if q == 0.0 {
            return Err(Error::Domain(format!("singular linearized ODE at t = {t}")));
        }
        Ok([-y[0] / omt + 4.0 * (c + t) * (c + t) / (c * q * omt * omt * omt)])
    };
    let ode = Dopri5::with_tol(1e-12);
    let traj = ode.integrate(&rhs, 0.0, [1.0], t_end)?;
    Ok(traj.end_state()[0])
}
