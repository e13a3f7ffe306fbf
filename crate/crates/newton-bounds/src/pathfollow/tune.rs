//! Tuning of the target decrement lambda_bar: maximize the per-iteration
//! progress gap lambda_bar - lambda_low(lambda_bar) for each step policy.

use crate::bvp::Shooter;
use crate::damping::optimal_step;
use crate::error::Result;
use crate::interp::Pchip;
use crate::pathfollow::solver::{classical_bound, ClassicalVariant};
use once_cell::sync::Lazy;
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum TunePolicy {
    /// Tight full-step bound from the shooting pipeline.
    FullStep,
    /// Tight bound with the optimal damping coefficient.
    OptimalDamping,
    /// (lam / (1 - lam))^2 baseline.
    ClassicalFull,
    /// lam^2 (1 + lam + lam / (1 + lam + lam^2)) baseline.
    ClassicalDamped,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct TunerResult {
    pub step_policy: TunePolicy,
    pub lambda_star: f64,
    pub lambda_low: f64,
    pub gap: f64,
    pub gamma_at_star: f64,
}

const GRID_STEP: f64 = 1e-3;
const GRID_LO: f64 = 0.02;
const GRID_HI: f64 = 0.95;

fn grid() -> Vec<f64> {
    let n = ((GRID_HI - GRID_LO) / GRID_STEP).round() as usize;
    (0..=n).map(|i| GRID_LO + GRID_STEP * i as f64).collect()
}

/// lambda_low(lambda_bar) for the full step, interpolated from a warm-started
/// shooting sweep. Direct pipeline calls per tuner iterate would be slow.
static FULL_BOUND: Lazy<Pchip> = Lazy::new(|| {
    let xs = grid();
    let shooter = Shooter::default();
    let results = shooter.sweep_full_step(&xs);
    let mut gx = Vec::with_capacity(xs.len());
    let mut gy = Vec::with_capacity(xs.len());
    for (a, r) in xs.iter().zip(results) {
        if let Ok(res) = r {
            gx.push(*a);
            gy.push(res.lambda_out);
        }
    }
    Pchip::new(gx, gy).expect("full-step sweep grid")
});

/// (lambda_low(lambda_bar), gamma*(lambda_bar)) for the optimal step.
static OPT_SWEEP: Lazy<(Pchip, Pchip)> = Lazy::new(|| {
    let xs = grid();
    let mut gx = Vec::with_capacity(xs.len());
    let mut bound = Vec::with_capacity(xs.len());
    let mut gamma = Vec::with_capacity(xs.len());
    for &a in &xs {
        if let Ok(res) = optimal_step(a) {
            gx.push(a);
            bound.push(res.lambda_out);
            gamma.push(res.gamma_star);
        }
    }
    (
        Pchip::new(gx.clone(), bound).expect("optimal-step sweep grid"),
        Pchip::new(gx, gamma).expect("optimal-gamma sweep grid"),
    )
});

/// Exact-pipeline gamma*(rho), interpolated. Below the sweep range the
/// small-decrement expansion takes over.
pub fn gamma_star_exact(rho: f64) -> f64 {
    let (lo, hi) = OPT_SWEEP.1.range();
    if rho < lo {
        crate::approx::asymptotic_opt_gamma(rho)
    } else {
        OPT_SWEEP.1.eval(rho.min(hi))
    }
}

/// Interpolated tight lower bound lambda_low(rho, gamma = gamma*(rho)).
pub fn optimal_bound_exact(rho: f64) -> f64 {
    let (lo, hi) = OPT_SWEEP.0.range();
    if rho < lo {
        rho * rho
    } else {
        OPT_SWEEP.0.eval(rho.min(hi))
    }
}

/// Interpolated tight full-step bound.
pub fn full_bound_exact(rho: f64) -> f64 {
    let (lo, hi) = FULL_BOUND.range();
    if rho < lo {
        rho * rho
    } else {
        FULL_BOUND.eval(rho.min(hi))
    }
}

fn lambda_low(policy: TunePolicy, lam: f64) -> f64 {
    match policy {
        TunePolicy::FullStep => full_bound_exact(lam),
        TunePolicy::OptimalDamping => optimal_bound_exact(lam),
        TunePolicy::ClassicalFull => classical_bound(lam, ClassicalVariant::Full).unwrap(),
        TunePolicy::ClassicalDamped => classical_bound(lam, ClassicalVariant::Damped).unwrap(),
    }
}

/// Golden-section maximization of lam - lambda_low(lam) on [0.05, 0.8].
pub fn tune(policy: TunePolicy) -> Result<TunerResult> {
    let gap = |lam: f64| lam - lambda_low(policy, lam);
    let (mut lo, mut hi) = (0.05f64, 0.8f64);
    let phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - phi * (hi - lo);
    let mut x2 = lo + phi * (hi - lo);
    let mut f1 = gap(x1);
    let mut f2 = gap(x2);
    while hi - lo > 1e-6 {
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + phi * (hi - lo);
            f2 = gap(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - phi * (hi - lo);
            f1 = gap(x1);
        }
    }
    let lambda_star = 0.5 * (lo + hi);
    let low = lambda_low(policy, lambda_star);
    let gamma_at_star = match policy {
        TunePolicy::FullStep | TunePolicy::ClassicalFull => 1.0,
        TunePolicy::OptimalDamping => gamma_star_exact(lambda_star),
        TunePolicy::ClassicalDamped => {
            (1.0 + lambda_star) / (1.0 + lambda_star + lambda_star * lambda_star)
        }
    };
    Ok(TunerResult {
        step_policy: policy,
        lambda_star,
        lambda_low: low,
        gap: lambda_star - low,
        gamma_at_star,
    })
}
