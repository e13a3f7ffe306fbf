//! The 4-dimensional Hamiltonian system governing the worst-case evolution
//! of the scaled gradient: the maximized Hamiltonian, its closed-form
//! gradient, the validity inequalities, and the adaptive flow integrator.

use crate::error::{Error, Result};
use crate::ode::{Dopri5, Trajectory};
use serde::Serialize;

/// State of the extended phase space `(t, y, p)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PhasePoint {
    pub t: f64,
    pub y1: f64,
    pub y2: f64,
    pub p1: f64,
    pub p2: f64,
}

impl PhasePoint {
    pub fn new(t: f64, y: [f64; 2], p: [f64; 2]) -> Self {
        Self {
            t,
            y1: y[0],
            y2: y[1],
            p1: p[0],
            p2: p[1],
        }
    }

    pub fn state(&self) -> [f64; 4] {
        [self.y1, self.y2, self.p1, self.p2]
    }

    pub fn from_state(t: f64, s: &[f64; 4]) -> Self {
        Self {
            t,
            y1: s[0],
            y2: s[1],
            p1: s[2],
            p2: s[3],
        }
    }

    /// Radicand under the Hamiltonian square root; nonnegative algebraically.
    pub fn radicand(&self) -> f64 {
        let b = self.p1 * self.y1 - self.p2 * self.y2 + self.p1 * self.t;
        b * b + 4.0 * self.p2 * self.p2 * self.y1 * self.y1 * (1.0 - self.t * self.t)
    }
}

fn check_time(t: f64) -> Result<()> {
    if t.abs() >= 1.0 {
        return Err(Error::Domain(format!("|t| must be < 1, got {t}")));
    }
    Ok(())
}

/// Maximized Hamiltonian
/// `H = (p1 + (p1 y1 - p2 y2) t + sqrt(R)) / (1 - t^2)`.
pub fn hamiltonian_value(pt: &PhasePoint) -> Result<f64> {
    check_time(pt.t)?;
    let a = pt.p1 * pt.y1 - pt.p2 * pt.y2;
    let r = pt.radicand();
    debug_assert!(r >= -1e-30, "radicand negative: {r}");
    Ok((pt.p1 + a * pt.t + r.max(0.0).sqrt()) / (1.0 - pt.t * pt.t))
}

/// Scale against which the radicand is judged degenerate.
fn radicand_scale(pt: &PhasePoint) -> f64 {
    let b = pt.p1.abs() * (pt.y1.abs() + pt.t.abs()) + pt.p2.abs() * pt.y2.abs();
    b * b + 4.0 * pt.p2 * pt.p2 * pt.y1 * pt.y1 * (1.0 - pt.t * pt.t) + 1e-300
}

/// Closed-form gradient flow `(dy1, dy2, dp1, dp2)/dt` of the Hamiltonian.
/// Signals a degenerate point when the radicand collapses (square-root
/// branch point); the caller must handle that case.
pub fn hamiltonian_rhs(pt: &PhasePoint) -> Result<[f64; 4]> {
    check_time(pt.t)?;
    let (t, y1, y2, p1, p2) = (pt.t, pt.y1, pt.y2, pt.p1, pt.p2);
    let d = 1.0 - t * t;
    let b = p1 * y1 - p2 * y2 + p1 * t;
    let r = pt.radicand();
    if r < 1e-14 * radicand_scale(pt) {
        return Err(Error::DegeneratePoint { t, radicand: r });
    }
    let s = r.sqrt();
    let dr_dy1 = 2.0 * b * p1 + 8.0 * p2 * p2 * y1 * d;
    let dr_dy2 = -2.0 * b * p2;
    let dr_dp1 = 2.0 * b * (y1 + t);
    let dr_dp2 = -2.0 * b * y2 + 8.0 * p2 * y1 * y1 * d;
    let dh_dy1 = (p1 * t + dr_dy1 / (2.0 * s)) / d;
    let dh_dy2 = (-p2 * t + dr_dy2 / (2.0 * s)) / d;
    let dh_dp1 = (1.0 + y1 * t + dr_dp1 / (2.0 * s)) / d;
    let dh_dp2 = (-y2 * t + dr_dp2 / (2.0 * s)) / d;
    Ok([dh_dp1, dh_dp2, -dh_dy1, -dh_dy2])
}

/// Explicit time derivative of `H` along the flow (`dH/dt = dH/dt|_explicit`).
pub fn hamiltonian_dt(pt: &PhasePoint) -> Result<f64> {
    check_time(pt.t)?;
    let h = hamiltonian_value(pt)?;
    let b = pt.p1 * pt.y1 - pt.p2 * pt.y2 + pt.p1 * pt.t;
    let r = pt.radicand();
    if r < 1e-14 * radicand_scale(pt) {
        return Err(Error::DegeneratePoint { t: pt.t, radicand: r });
    }
    let s = r.sqrt();
    let d = 1.0 - pt.t * pt.t;
    Ok(h * (b + pt.t * s) / (s * d))
}

/// The two square-root inequalities under which the maximization over the
/// restricted control set agrees with the maximization over the full one.
pub fn check_control_inequalities(pt: &PhasePoint) -> bool {
    let (t, y1, y2, p1, p2) = (pt.t, pt.y1, pt.y2, pt.p1, pt.p2);
    let s = pt.radicand().max(0.0).sqrt();
    let lhs1 = -p1 * t - p1 * y1 - p2 * y2 + 2.0 * p2 * y2 * t;
    let lhs2 = p1 * t + p1 * y1 + p2 * y2 + 2.0 * p2 * y2 * t;
    let slack = 1e-9 * (1.0 + s.abs() + lhs1.abs() + lhs2.abs());
    s >= lhs1 - slack && s >= lhs2 - slack
}

/// Integrate the Hamiltonian flow from `start` to `t_end` with local error
/// per step bounded by `tol`. Returns the accepted-step phase points.
pub fn integrate_flow(start: &PhasePoint, t_end: f64, tol: f64) -> Result<Vec<PhasePoint>> {
    let traj = integrate_flow_raw(start, t_end, tol)?;
    Ok(traj
        .nodes()
        .into_iter()
        .map(|(t, s)| PhasePoint::from_state(t, &s))
        .collect())
}

pub(crate) fn integrate_flow_raw(
    start: &PhasePoint,
    t_end: f64,
    tol: f64,
) -> Result<Trajectory<4>> {
    check_time(start.t)?;
    check_time(t_end.clamp(-0.999_999, 0.0))?;
    let rhs = |t: f64, s: &[f64; 4]| hamiltonian_rhs(&PhasePoint::from_state(t, s));
    let ode = Dopri5 {
        rtol: tol,
        atol: tol * 1e-2,
        max_steps: 1_000_000,
    };
    ode.integrate(&rhs, start.t, start.state(), t_end)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pt(t: f64, y1: f64, y2: f64, p1: f64, p2: f64) -> PhasePoint {
        PhasePoint { t, y1, y2, p1, p2 }
    }

    #[test]
    fn reduced_in_plane_formula() {
        // On the symmetry plane with p1 < 0, y1 + t < 0:
        // H = p1 (1 + y1) / (1 - t).
        let p = pt(-0.3, -0.5, 0.0, -1.0, 0.0);
        let h = hamiltonian_value(&p).unwrap();
        assert!((h - (-0.5 / 1.3)).abs() < 1e-15);
    }

    #[test]
    fn endpoint_circle_has_zero_hamiltonian() {
        // y(0) on the circle (y1 + 1/2)^2 + y2^2 = 1/4, p(0) = y/||y||.
        let y = [-0.5f64, 0.5];
        let n = (y[0] * y[0] + y[1] * y[1]).sqrt();
        let p = pt(0.0, y[0], y[1], y[0] / n, y[1] / n);
        assert!(hamiltonian_value(&p).unwrap().abs() < 1e-14);
    }

    #[test]
    fn direct_evaluation_at_t_zero() {
        let p = pt(0.0, -0.4, 0.1, 1.0, 0.0);
        assert!((hamiltonian_value(&p).unwrap() - 1.4).abs() < 1e-15);
    }

    #[test]
    fn domain_error_at_unit_time() {
        assert!(hamiltonian_value(&pt(1.0, 0.0, 0.0, 1.0, 0.0)).is_err());
        assert!(hamiltonian_rhs(&pt(-1.0, 0.0, 0.0, 1.0, 0.0)).is_err());
    }

    #[test]
    fn symmetry_plane_is_invariant() {
        let p = pt(-0.2, -0.5, 0.0, -0.9, 0.0);
        let rhs = hamiltonian_rhs(&p).unwrap();
        assert_eq!(rhs[1], 0.0);
        assert_eq!(rhs[3], 0.0);
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let p = pt(-0.2, -0.3, 0.1, -0.8, 0.05);
        let rhs = hamiltonian_rhs(&p).unwrap();
        let eps = 1e-6;
        let num = |i: usize| {
            let mut hi = p;
            let mut lo = p;
            match i {
                0 => {
                    hi.y1 += eps;
                    lo.y1 -= eps;
                }
                1 => {
                    hi.y2 += eps;
                    lo.y2 -= eps;
                }
                2 => {
                    hi.p1 += eps;
                    lo.p1 -= eps;
                }
                _ => {
                    hi.p2 += eps;
                    lo.p2 -= eps;
                }
            }
            (hamiltonian_value(&hi).unwrap() - hamiltonian_value(&lo).unwrap()) / (2.0 * eps)
        };
        // dy/dt = dH/dp, dp/dt = -dH/dy
        assert!((rhs[0] - num(2)).abs() / num(2).abs().max(1.0) < 1e-6);
        assert!((rhs[1] - num(3)).abs() / num(3).abs().max(1.0) < 1e-6);
        assert!((rhs[2] + num(0)).abs() / num(0).abs().max(1.0) < 1e-6);
        assert!((rhs[3] + num(1)).abs() / num(1).abs().max(1.0) < 1e-6);
    }

    #[test]
    fn nominal_trajectory_velocity() {
        // y = ((c + t)/(1 - t), 0), p = (c(1-t)/|c|, 0): dy1/dt = (1+c)/(1-t)^2.
        let c: f64 = -0.2;
        let t = -0.1;
        let y1 = (c + t) / (1.0 - t);
        let p1 = c * (1.0 - t) / c.abs();
        let rhs = hamiltonian_rhs(&pt(t, y1, 0.0, p1, 0.0)).unwrap();
        let expect = (1.0 + c) / ((1.0 - t) * (1.0 - t));
        assert!((rhs[0] - expect).abs() < 1e-13);
    }

    #[test]
    fn control_inequalities_hold_on_reference_points() {
        // endpoint on the circle
        let y = [-0.5f64, 0.5];
        let n = (y[0] * y[0] + y[1] * y[1]).sqrt();
        assert!(check_control_inequalities(&pt(0.0, y[0], y[1], y[0] / n, y[1] / n)));
        // generic interior point
        assert!(check_control_inequalities(&pt(-0.2, -0.3, 0.1, -0.8, -0.05)));
        // and one outside the validity region
        assert!(!check_control_inequalities(&pt(-0.2, -0.3, 0.1, -0.8, 0.05)));
        // nominal in-plane point
        let c: f64 = -0.2;
        let t = -0.1;
        assert!(check_control_inequalities(&pt(
            t,
            (c + t) / (1.0 - t),
            0.0,
            c * (1.0 - t) / c.abs(),
            0.0
        )));
    }

    #[test]
    fn in_plane_flow_follows_closed_form() {
        let c: f64 = -0.3;
        let start = pt(0.0, c, 0.0, -1.0, 0.0);
        let pts = integrate_flow(&start, -0.4, 1e-11).unwrap();
        for q in &pts {
            assert!(q.y2.abs() < 1e-12 && q.p2.abs() < 1e-12);
            let expect = (c + q.t) / (1.0 - q.t);
            assert!((q.y1 - expect).abs() < 1e-9, "t = {}", q.t);
        }
    }

    #[test]
    fn hamiltonian_drift_matches_explicit_derivative() {
        // Start off the H = 0 surface and compare H along the flow with the
        // integral of the explicit dH/dt formula.
        let start = pt(0.0, -0.4, 0.2, -0.7, 0.35);
        let h0 = hamiltonian_value(&start).unwrap();
        assert!(h0.abs() > 1e-3);
        // Integrate the flow jointly with h' = dH/dt.
        let rhs = |t: f64, s: &[f64; 5]| -> crate::error::Result<[f64; 5]> {
            let p = PhasePoint::from_state(t, &[s[0], s[1], s[2], s[3]]);
            let f = hamiltonian_rhs(&p)?;
            let dh = hamiltonian_dt(&p)?;
            Ok([f[0], f[1], f[2], f[3], dh])
        };
        let ode = Dopri5::with_tol(1e-11);
        let traj = ode
            .integrate(&rhs, 0.0, [start.y1, start.y2, start.p1, start.p2, h0], -0.3)
            .unwrap();
        for (t, s) in traj.nodes() {
            let p = PhasePoint::from_state(t, &[s[0], s[1], s[2], s[3]]);
            let h = hamiltonian_value(&p).unwrap();
            assert!(
                (h - s[4]).abs() / h.abs().max(1e-6) < 1e-6,
                "t = {t}: H = {h}, integrated = {}",
                s[4]
            );
        }
    }
}
