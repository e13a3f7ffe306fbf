use thiserror::Error;

/// Errors surfaced by the bound pipeline and the path-following solver.
#[derive(Debug, Error)]
pub enum Error {
    #[error("argument out of domain: {0}")]
    Domain(String),

    /// The radicand of the Hamiltonian square root collapsed; the flow is not
    /// differentiable at this point.
    #[error("degenerate phase point at t = {t} (radicand {radicand:e})")]
    DegeneratePoint { t: f64, radicand: f64 },

    #[error("step size underflow at t = {0}")]
    StepUnderflow(f64),

    #[error("maximum number of integration steps exceeded")]
    MaxStepsExceeded,

    #[error(
        "shooting did not converge: residual {residual:e} after {iterations} iterations \
         (last iterate r = {r}, theta = {theta})"
    )]
    NoConvergence {
        residual: f64,
        iterations: usize,
        r: f64,
        theta: f64,
    },

    #[error("no root of delta_y2 found in (-1, 0) for c = {0}")]
    FocalPointNotFound(f64),

    #[error("control inequalities violated on the converged trajectory at t = {0}")]
    OutsideValidity(f64),

    #[error("bound {lambda} exceeds the certified range (limit {limit})")]
    BeyondCertifiedRange { lambda: f64, limit: f64 },

    #[error("sigma curve failed to reach the endpoint circle")]
    MissedCircle,

    #[error("Cholesky factorization failed: point outside the barrier domain")]
    Factorization,

    #[error("problem generation failed after {0} attempts")]
    Generation(usize),

    #[error("path following diverged: decrement {0} exceeds 1")]
    Diverged(f64),
}

pub type Result<T> = std::result::Result<T, Error>;
