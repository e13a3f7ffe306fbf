//! Tight decrement bounds for damped Newton steps on self-concordant
//! functions, and a short-step path-following solver that uses them.
//!
//! The core question: starting from Newton decrement `a` and stepping with
//! damping `gamma`, how large can the decrement be afterwards, in the worst
//! case over all self-concordant functions? The answer is the value of an
//! optimal control problem. In a one-dimensional regime it has a closed
//! form ([`onedim`]); beyond a critical curve ([`critical`]) it requires
//! integrating a Hamiltonian boundary value problem ([`bvp`]). The optimal
//! damping coefficient and its bound come from a planar reduction of the
//! same system ([`damping`]). [`approx`] carries cheap polynomial fits,
//! and [`pathfollow`] applies the tuned bounds inside an interior-point
//! path-following loop.

pub mod approx;
pub mod bvp;
pub mod critical;
pub mod damping;
pub mod error;
pub mod hamiltonian;
pub mod interp;
pub mod ode;
pub mod onedim;
pub mod pathfollow;

pub use bvp::{solve_bvp, BoundResult, Shooter, StepQuery};
pub use critical::{classify_regime, focal_time, Regime};
pub use damping::{optimal_step, OptimalStepResult};
pub use error::{Error, Result};
