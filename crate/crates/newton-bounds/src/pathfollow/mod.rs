//! Short-step path-following solver, barrier oracles, seeded test
//! problems, and the lambda_bar tuner.

pub mod barrier;
pub mod problem;
pub mod solver;
pub mod tune;

pub use barrier::{BarrierOracle, LogBarrierLp, LogDetSdp};
pub use problem::{make_problem, Problem, ProblemKind, ProblemSize};
pub use solver::{
    classical_bound, decrement, newton_step, next_tau, run, ClassicalVariant, IterationRecord,
    PathFollowConfig, Setup, StepPolicy,
};
pub use tune::{tune, TunePolicy, TunerResult};
