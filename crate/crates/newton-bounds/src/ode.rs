//! Adaptive Dormand-Prince 5(4) integrator over fixed-size state vectors,
//! with cubic Hermite sampling of the stored steps and event localization
//! by bisection.

use crate::error::{Error, Result};

const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];

const A: [[f64; 6]; 7] = [
    [0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];

/// Fifth order weights (identical to the last row of `A`, FSAL).
const B5: [f64; 7] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
    0.0,
];

const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

pub type Rhs<'a, const N: usize> = dyn Fn(f64, &[f64; N]) -> Result<[f64; N]> + 'a;

/// One accepted integration step with the derivatives at both ends,
/// enough for cubic Hermite interpolation inside the step.
#[derive(Debug, Clone)]
pub struct Step<const N: usize> {
    pub t0: f64,
    pub t1: f64,
    pub y0: [f64; N],
    pub y1: [f64; N],
    pub f0: [f64; N],
    pub f1: [f64; N],
}

impl<const N: usize> Step<N> {
    /// Cubic Hermite interpolation at `t` inside `[t0, t1]`.
    pub fn sample(&self, t: f64) -> [f64; N] {
        let h = self.t1 - self.t0;
        let s = (t - self.t0) / h;
        let h00 = (1.0 + 2.0 * s) * (1.0 - s) * (1.0 - s);
        let h10 = s * (1.0 - s) * (1.0 - s);
        let h01 = s * s * (3.0 - 2.0 * s);
        let h11 = s * s * (s - 1.0);
        let mut out = [0.0; N];
        for (i, o) in out.iter_mut().enumerate() {
            *o = h00 * self.y0[i]
                + h10 * h * self.f0[i]
                + h01 * self.y1[i]
                + h11 * h * self.f1[i];
        }
        out
    }
}

/// Result of an integration: the accepted steps in order.
#[derive(Debug, Clone)]
pub struct Trajectory<const N: usize> {
    pub steps: Vec<Step<N>>,
}

impl<const N: usize> Trajectory<N> {
    pub fn t_start(&self) -> f64 {
        self.steps.first().map_or(f64::NAN, |s| s.t0)
    }

    pub fn t_end(&self) -> f64 {
        self.steps.last().map_or(f64::NAN, |s| s.t1)
    }

    pub fn end_state(&self) -> [f64; N] {
        self.steps.last().map_or([f64::NAN; N], |s| s.y1)
    }

    /// Interpolated state at `t`; `t` is clamped to the covered interval.
    pub fn sample(&self, t: f64) -> [f64; N] {
        let step = self
            .steps
            .iter()
            .find(|s| (t - s.t0) * (t - s.t1) <= 0.0)
            .unwrap_or_else(|| self.steps.last().expect("empty trajectory"));
        step.sample(t)
    }

    /// States at the accepted step endpoints, starting point included.
    pub fn nodes(&self) -> Vec<(f64, [f64; N])> {
        let mut out = Vec::with_capacity(self.steps.len() + 1);
        if let Some(first) = self.steps.first() {
            out.push((first.t0, first.y0));
        }
        for s in &self.steps {
            out.push((s.t1, s.y1));
        }
        out
    }
}

/// Adaptive embedded Runge-Kutta 5(4) pair.
#[derive(Debug, Clone, Copy)]
pub struct Dopri5 {
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
}

impl Default for Dopri5 {
    fn default() -> Self {
        Self {
            rtol: 1e-9,
            atol: 1e-12,
            max_steps: 1_000_000,
        }
    }
}

impl Dopri5 {
    pub fn with_tol(tol: f64) -> Self {
        Self {
            rtol: tol,
            atol: tol * 1e-3,
            max_steps: 1_000_000,
        }
    }

    /// Integrate from `t0` to `t_end` (either direction).
    pub fn integrate<const N: usize>(
        &self,
        rhs: &Rhs<N>,
        t0: f64,
        y0: [f64; N],
        t_end: f64,
    ) -> Result<Trajectory<N>> {
        self.run(rhs, t0, y0, t_end, None).map(|(traj, _)| traj)
    }

    /// Integrate until `event` changes sign relative to its value at the
    /// start, then localize the crossing by bisection inside the bracketing
    /// step. Returns the trajectory truncated at the event together with a
    /// flag telling whether the event fired before `t_end`.
    pub fn integrate_to_event<const N: usize>(
        &self,
        rhs: &Rhs<N>,
        t0: f64,
        y0: [f64; N],
        t_end: f64,
        event: &dyn Fn(f64, &[f64; N]) -> f64,
    ) -> Result<(Trajectory<N>, bool)> {
        self.run(rhs, t0, y0, t_end, Some(event))
    }

    #[allow(clippy::type_complexity)]
    fn run<const N: usize>(
        &self,
        rhs: &Rhs<N>,
        t0: f64,
        y0: [f64; N],
        t_end: f64,
        event: Option<&dyn Fn(f64, &[f64; N]) -> f64>,
    ) -> Result<(Trajectory<N>, bool)> {
        let span = t_end - t0;
        let mut steps = Vec::new();
        if span == 0.0 {
            return Ok((Trajectory { steps }, false));
        }
        let dir = span.signum();
        let mut t = t0;
        let mut y = y0;
        let mut f = rhs(t, &y)?;
        let mut h = dir * (span.abs() / 100.0).clamp(1e-10, 1e-2);
        let event_sign = event.map(|g| g(t0, &y0).signum());

        for _ in 0..self.max_steps {
            if (t - t_end) * dir >= 0.0 {
                return Ok((Trajectory { steps }, false));
            }
            let mut clamped = false;
            if (t + h - t_end) * dir > 0.0 {
                h = t_end - t;
                clamped = true;
            }
            if !clamped && h.abs() < 1e-15 * (1.0 + t.abs()) {
                return Err(Error::StepUnderflow(t));
            }

            let mut k = [[0.0; N]; 7];
            k[0] = f;
            let mut failed = false;
            for stage in 1..7 {
                let mut ys = y;
                for i in 0..N {
                    let mut acc = 0.0;
                    for (j, kj) in k.iter().enumerate().take(stage) {
                        acc += A[stage][j] * kj[i];
                    }
                    ys[i] += h * acc;
                }
                match rhs(t + C[stage] * h, &ys) {
                    Ok(ks) => k[stage] = ks,
                    Err(Error::DegeneratePoint { .. }) => {
                        // Retry with a smaller step before giving up.
                        failed = true;
                        break;
                    }
                    Err(e) => return Err(e),
                }
            }
            if failed {
                h *= 0.25;
                if h.abs() < 1e-15 * (1.0 + t.abs()) {
                    return Err(Error::StepUnderflow(t));
                }
                continue;
            }

            let mut y_new = y;
            let mut err_norm = 0.0f64;
            for i in 0..N {
                let mut acc5 = 0.0;
                let mut acc4 = 0.0;
                for j in 0..7 {
                    acc5 += B5[j] * k[j][i];
                    acc4 += B4[j] * k[j][i];
                }
                y_new[i] = y[i] + h * acc5;
                let e = h * (acc5 - acc4);
                let sc = self.atol + self.rtol * y[i].abs().max(y_new[i].abs());
                err_norm += (e / sc) * (e / sc);
            }
            err_norm = (err_norm / N as f64).sqrt();

            if err_norm <= 1.0 {
                // FSAL: the last stage is the derivative at the new point.
                let f_new = k[6];
                let step = Step {
                    t0: t,
                    t1: t + h,
                    y0: y,
                    y1: y_new,
                    f0: f,
                    f1: f_new,
                };

                if let (Some(g), Some(s0)) = (event, event_sign) {
                    let g1 = g(step.t1, &step.y1);
                    if g1 != 0.0 && g1.signum() != s0 {
                        let located = self.locate_event(rhs, &step, g, s0)?;
                        steps.push(located);
                        return Ok((Trajectory { steps }, true));
                    }
                }

                steps.push(step);
                t += h;
                y = y_new;
                f = f_new;
                let factor = if err_norm == 0.0 {
                    5.0
                } else {
                    (0.9 * err_norm.powf(-0.2)).clamp(0.2, 5.0)
                };
                h *= factor;
            } else {
                h *= (0.9 * err_norm.powf(-0.2)).clamp(0.2, 0.9);
            }
        }
        Err(Error::MaxStepsExceeded)
    }

    /// Bisection inside a bracketing step. Each probe re-integrates from the
    /// step start, so the localized state carries integrator accuracy rather
    /// than interpolant accuracy.
    fn locate_event<const N: usize>(
        &self,
        rhs: &Rhs<N>,
        step: &Step<N>,
        event: &dyn Fn(f64, &[f64; N]) -> f64,
        start_sign: f64,
    ) -> Result<Step<N>> {
        let mut lo = step.t0;
        let mut hi = step.t1;
        for _ in 0..80 {
            let mid = 0.5 * (lo + hi);
            if mid == lo || mid == hi {
                break;
            }
            let traj = self.integrate(rhs, step.t0, step.y0, mid)?;
            let y_mid = traj.end_state();
            let g = event(mid, &y_mid);
            if g == 0.0 {
                lo = mid;
                hi = mid;
                break;
            }
            if g.signum() == start_sign {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let t_ev = 0.5 * (lo + hi);
        let traj = self.integrate(rhs, step.t0, step.y0, t_ev)?;
        let y_ev = if traj.steps.is_empty() {
            step.y0
        } else {
            traj.end_state()
        };
        let f_ev = rhs(t_ev, &y_ev)?;
        Ok(Step {
            t0: step.t0,
            t1: t_ev,
            y0: step.y0,
            y1: y_ev,
            f0: step.f0,
            f1: f_ev,
        })
    }
}
