//! Optimal damping via the H = 0 reduction: the planar ODE for the sigma
//! curve, the linear time ODE along it, and the composed optimal-step
//! computation.

use crate::error::{Error, Result};
use crate::ode::Dopri5;
use serde::Serialize;

/// Point in the reduced `(y1, y2)` plane, `|y1| < 1`, `y2 >= 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PlanarPoint {
    pub y1: f64,
    pub y2: f64,
}

/// Output of the optimal-step computation at a given initial decrement.
#[derive(Debug, Clone, Serialize)]
pub struct OptimalStepResult {
    pub a: f64,
    pub gamma_star: f64,
    pub lambda_out: f64,
    pub y_star: PlanarPoint,
    /// Sampled sigma curve, `(y1, y2)` pairs from `(-a, 0)` to `y_star`.
    pub sigma: Vec<(f64, f64)>,
    /// Time profile `(y1, t)` along sigma, `t(y_star) = 0`.
    pub t_profile: Vec<(f64, f64)>,
}

fn check_strip(y1: f64) -> Result<()> {
    if y1.abs() >= 1.0 {
        return Err(Error::Domain(format!("|y1| must be < 1, got {y1}")));
    }
    Ok(())
}

/// Slope `dy2/dy1 = (sqrt(4 y1^2 (1 - y1^2) + y2^2) + y1 y2) / (1 - y1^2)`.
pub fn planar_rhs(pt: &PlanarPoint) -> Result<f64> {
    check_strip(pt.y1)?;
    let q = 4.0 * pt.y1 * pt.y1 * (1.0 - pt.y1 * pt.y1) + pt.y2 * pt.y2;
    Ok((q.sqrt() + pt.y1 * pt.y2) / (1.0 - pt.y1 * pt.y1))
}

/// Slope of the time variable along sigma (the linear companion ODE).
pub fn damping_rhs(pt: &PlanarPoint, t: f64) -> Result<f64> {
    check_strip(pt.y1)?;
    let (y1, y2) = (pt.y1, pt.y2);
    let q = (-4.0 * y1.powi(4) + 4.0 * y1 * y1 + y2 * y2).sqrt();
    if q == 0.0 {
        return Err(Error::Domain(format!(
            "degenerate damping ODE at y1 = {y1}, y2 = {y2}"
        )));
    }
    Ok((y2 * (y1 + t) + (y1 * t + 1.0) * q) / ((1.0 - y1 * y1) * q))
}

/// Signed distance from the endpoint circle `(y1 + 1/2)^2 + y2^2 = 1/4`,
/// written as `y1^2 + y1 + y2^2`.
fn circle_residual(y1: f64, y2: f64) -> f64 {
    y1 * y1 + y1 + y2 * y2
}

/// The sigma curve from `(-a, 0)` up to its crossing of the endpoint circle.
#[derive(Debug, Clone)]
pub struct SigmaCurve {
    pub a: f64,
    pub y_star: PlanarPoint,
    pub samples: Vec<(f64, f64)>,
    traj: crate::ode::Trajectory<1>,
}

impl SigmaCurve {
    pub fn y2_at(&self, y1: f64) -> f64 {
        self.traj.sample(y1)[0]
    }
}

/// Integrate the planar ODE from `y0 = (-a, 0)` in increasing `y1` until the
/// trajectory crosses the endpoint circle in the upper half-plane.
pub fn integrate_sigma(a: f64, tol: f64) -> Result<SigmaCurve> {
    if !(a > 0.0 && a < 1.0) {
        return Err(Error::Domain(format!("a must lie in (0, 1), got {a}")));
    }
    let rhs = |y1: f64, y: &[f64; 1]| -> Result<[f64; 1]> {
        Ok([planar_rhs(&PlanarPoint { y1, y2: y[0] })?])
    };
    let ode = Dopri5 {
        rtol: tol,
        atol: tol * 1e-4,
        max_steps: 1_000_000,
    };
    let event = |y1: f64, y: &[f64; 1]| circle_residual(y1, y[0]);

    // A one-step Taylor bootstrap keeps the starting slope exact for very
    // small decrements where the whole integration span is comparable to
    // the step size.
    let (mut y1_start, mut y2_start) = (-a, 0.0);
    if a < 1e-4 {
        let h = a * 1e-3;
        y2_start = 2.0 * a / (1.0 - a * a).sqrt() * h;
        y1_start += h;
    }

    let (traj, fired) = ode.integrate_to_event(&rhs, y1_start, [y2_start], 0.0, &event)?;
    if !fired {
        return Err(Error::MissedCircle);
    }
    let y1_star = traj.t_end();
    let y2_star = traj.end_state()[0];
    let samples = traj
        .nodes()
        .into_iter()
        .map(|(y1, y)| (y1, y[0]))
        .collect();
    Ok(SigmaCurve {
        a,
        y_star: PlanarPoint {
            y1: y1_star,
            y2: y2_star,
        },
        samples,
        traj,
    })
}

/// Integrate the time ODE backward along sigma from `t(y_star) = 0` down to
/// `y0 = (-a, 0)`. The pair `(y2, t)` is integrated jointly so no curve
/// re-interpolation is involved. Returns `(t0, gamma_star)` and the sampled
/// time profile.
#[allow(clippy::type_complexity)]
pub fn integrate_damping(sigma: &SigmaCurve, tol: f64) -> Result<(f64, f64, Vec<(f64, f64)>)> {
    let a = sigma.a;
    let rhs = |y1: f64, s: &[f64; 2]| -> Result<[f64; 2]> {
        let pt = PlanarPoint { y1, y2: s[0] };
        Ok([planar_rhs(&pt)?, damping_rhs(&pt, s[1])?])
    };
    let ode = Dopri5 {
        rtol: tol,
        atol: tol * 1e-4,
        max_steps: 1_000_000,
    };
    let traj = ode.integrate(
        &rhs,
        sigma.y_star.y1,
        [sigma.y_star.y2, 0.0],
        -a,
    )?;
    let end = traj.end_state();
    // Backward pass must land on the forward start point.
    if end[0].abs() > 1e-9 * (1.0 + a) {
        return Err(Error::Domain(format!(
            "forward/backward sigma passes disagree at y0: y2 = {}",
            end[0]
        )));
    }
    let t0 = end[1];
    let profile = traj
        .nodes()
        .into_iter()
        .rev()
        .map(|(y1, s)| (y1, s[1]))
        .collect();
    Ok((t0, -t0 / a, profile))
}

/// Optimal damping coefficient and minimal bound at decrement `a`.
pub fn optimal_step(a: f64) -> Result<OptimalStepResult> {
    optimal_step_with_tol(a, 1e-12)
}

pub fn optimal_step_with_tol(a: f64, tol: f64) -> Result<OptimalStepResult> {
    let sigma = integrate_sigma(a, tol)?;
    let (_t0, gamma_star, t_profile) = integrate_damping(&sigma, tol)?;
    let lambda_out = (-sigma.y_star.y1).sqrt();
    Ok(OptimalStepResult {
        a,
        gamma_star,
        lambda_out,
        y_star: sigma.y_star,
        sigma: sigma.samples.clone(),
        t_profile,
    })
}
