//! Short-step primal path-following over a pluggable barrier oracle.

use crate::approx::approx_opt_gamma;
use crate::error::{Error, Result};
use crate::pathfollow::barrier::BarrierOracle;
use crate::pathfollow::tune::gamma_star_exact;
use nalgebra::{Cholesky, DVector, Dyn};
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum StepPolicy {
    FullStep,
    FixedDamping(f64),
    /// gamma = (1 + rho) / (1 + rho + rho^2)
    TraditionalDamping,
    /// gamma = gamma*(rho) from the exact pipeline (or its cheap
    /// polynomial stand-in, see `PathFollowConfig::approx_gamma`).
    OptimalDamping,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct PathFollowConfig {
    pub lambda_bar: f64,
    pub step_policy: StepPolicy,
    pub tau0: f64,
    pub tau_max: f64,
    pub max_iters: usize,
    /// Use the polynomial fit for gamma*(rho) instead of the exact
    /// pipeline interpolant. Cheaper, slightly conservative.
    pub approx_gamma: bool,
}

impl PathFollowConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.lambda_bar > 0.0 && self.lambda_bar < 1.0) {
            return Err(Error::Domain(format!(
                "lambda_bar must lie in (0, 1), got {}",
                self.lambda_bar
            )));
        }
        if !(self.tau0 > 0.0 && self.tau0 < self.tau_max) {
            return Err(Error::Domain(format!(
                "need 0 < tau0 < tau_max, got tau0={}, tau_max={}",
                self.tau0, self.tau_max
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct IterationRecord {
    pub k: usize,
    pub tau: f64,
    pub rho_before: f64,
    pub rho_after: f64,
    pub gamma_used: f64,
}

fn factor(
    f: &dyn BarrierOracle,
    x: &DVector<f64>,
) -> Result<(DVector<f64>, Cholesky<f64, Dyn>)> {
    let (_, grad, hess) = f.eval(x)?;
    let chol = hess.cholesky().ok_or(Error::Factorization)?;
    Ok((grad, chol))
}

/// Newton decrement sqrt(d^T H^{-1} d) of F(x) + tau <c, x>.
pub fn decrement(f: &dyn BarrierOracle, x: &DVector<f64>, tau: f64, c: &DVector<f64>) -> Result<f64> {
    let (grad, chol) = factor(f, x)?;
    let d = grad + c * tau;
    Ok(d.dot(&chol.solve(&d)).max(0.0).sqrt())
}

/// Largest tau with decrement(tau) = lambda_bar. The squared decrement is
/// a nonnegative quadratic in tau, so this is a root formula.
pub fn next_tau(
    f: &dyn BarrierOracle,
    x: &DVector<f64>,
    tau_prev: f64,
    c: &DVector<f64>,
    lambda_bar: f64,
) -> Result<f64> {
    let (grad, chol) = factor(f, x)?;
    let hinv_c = chol.solve(c);
    let hinv_g = chol.solve(&grad);
    let qa = c.dot(&hinv_c);
    let qb = 2.0 * grad.dot(&hinv_c);
    let qc = grad.dot(&hinv_g) - lambda_bar * lambda_bar;
    let disc = qb * qb - 4.0 * qa * qc;
    assert!(
        disc >= 0.0,
        "rho(tau_prev) exceeds lambda_bar: precondition violated"
    );
    let tau = (-qb + disc.sqrt()) / (2.0 * qa);
    assert!(tau >= tau_prev - 1e-12 * tau_prev.abs().max(1.0));
    Ok(tau.max(tau_prev))
}

/// One damped Newton step on F(x) + tau <c, x>.
pub fn newton_step(
    f: &dyn BarrierOracle,
    x: &DVector<f64>,
    tau: f64,
    c: &DVector<f64>,
    gamma: f64,
) -> Result<DVector<f64>> {
    assert!(gamma > 0.0 && gamma <= 1.0);
    let (grad, chol) = factor(f, x)?;
    let d = grad + c * tau;
    let x_next = x - chol.solve(&d) * gamma;
    if !f.domain_check(&x_next) {
        return Err(Error::Factorization);
    }
    Ok(x_next)
}

pub fn gamma_for(policy: StepPolicy, rho: f64, approx: bool) -> f64 {
    match policy {
        StepPolicy::FullStep => 1.0,
        StepPolicy::FixedDamping(g) => g,
        StepPolicy::TraditionalDamping => (1.0 + rho) / (1.0 + rho + rho * rho),
        StepPolicy::OptimalDamping => {
            if approx {
                approx_opt_gamma(rho)
            } else {
                gamma_star_exact(rho)
            }
        }
    }
}

/// Follow the central path of F(x) + tau <c, x> from (x0, tau0) until
/// tau >= tau_max. The caller must start near the center: the decrement
/// at tau0 has to be at most lambda_bar.
pub fn run(
    f: &dyn BarrierOracle,
    c: &DVector<f64>,
    x0: &DVector<f64>,
    config: &PathFollowConfig,
) -> Result<Vec<IterationRecord>> {
    config.validate()?;
    let mut x = x0.clone();
    let mut tau = config.tau0;
    let rho0 = decrement(f, &x, tau, c)?;
    if rho0 > config.lambda_bar + 1e-9 {
        return Err(Error::Domain(format!(
            "initial decrement {rho0} exceeds lambda_bar {}",
            config.lambda_bar
        )));
    }
    let mut log = Vec::new();
    for k in 0..config.max_iters {
        tau = next_tau(f, &x, tau, c, config.lambda_bar)?;
        let rho_before = decrement(f, &x, tau, c)?;
        let gamma = gamma_for(config.step_policy, rho_before, config.approx_gamma);
        x = newton_step(f, &x, tau, c, gamma)?;
        let rho_after = decrement(f, &x, tau, c)?;
        if rho_after >= 1.0 {
            return Err(Error::Diverged(rho_after));
        }
        log.push(IterationRecord {
            k,
            tau,
            rho_before,
            rho_after,
            gamma_used: gamma,
        });
        if tau >= config.tau_max {
            break;
        }
    }
    if tau < config.tau_max {
        return Err(Error::MaxStepsExceeded);
    }
    Ok(log)
}

/// The four benchmark setups: classical and tight targets, full and
/// damped steps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Setup {
    TraditionalFull,
    TightFull,
    TraditionalDamped,
    TightOptimal,
}

impl Setup {
    pub const ALL: [Setup; 4] = [
        Setup::TraditionalFull,
        Setup::TightFull,
        Setup::TraditionalDamped,
        Setup::TightOptimal,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Setup::TraditionalFull => "traditional-full",
            Setup::TightFull => "tight-full",
            Setup::TraditionalDamped => "traditional-damped",
            Setup::TightOptimal => "tight-optimal",
        }
    }

    pub fn from_name(s: &str) -> Option<Setup> {
        Setup::ALL.into_iter().find(|v| v.name() == s)
    }

    pub fn lambda_bar(&self) -> f64 {
        match self {
            Setup::TraditionalFull => 0.2291,
            Setup::TightFull => 0.394257,
            Setup::TraditionalDamped => 0.2910,
            Setup::TightOptimal => 0.442946,
        }
    }

    pub fn step_policy(&self) -> StepPolicy {
        match self {
            Setup::TraditionalFull | Setup::TightFull => StepPolicy::FullStep,
            Setup::TraditionalDamped => StepPolicy::TraditionalDamping,
            Setup::TightOptimal => StepPolicy::OptimalDamping,
        }
    }

    pub fn config(&self, tau0: f64, tau_max: f64) -> PathFollowConfig {
        PathFollowConfig {
            lambda_bar: self.lambda_bar(),
            step_policy: self.step_policy(),
            tau0,
            tau_max,
            max_iters: 1_000_000,
            approx_gamma: false,
        }
    }
}

/// Classical decrement bounds after one Newton step at decrement `lam`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ClassicalVariant {
    Full,
    Damped,
}

pub fn classical_bound(lam: f64, variant: ClassicalVariant) -> Result<f64> {
    match variant {
        ClassicalVariant::Full => {
            if lam >= 1.0 {
                return Err(Error::Domain(format!(
                    "full-step classical bound needs lam < 1, got {lam}"
                )));
            }
            Ok((lam / (1.0 - lam)).powi(2))
        }
        ClassicalVariant::Damped => {
            Ok(lam * lam * (1.0 + lam + lam / (1.0 + lam + lam * lam)))
        }
    }
}
