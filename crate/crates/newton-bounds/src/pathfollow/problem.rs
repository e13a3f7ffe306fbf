//! Seeded random test problems: a dense LP log-barrier and a dense SDP
//! with the log-det barrier on its feasible affine subspace.

use crate::error::{Error, Result};
use crate::pathfollow::barrier::{svec, BarrierOracle, LogBarrierLp, LogDetSdp};
use crate::pathfollow::solver::{decrement, gamma_for, newton_step, StepPolicy};
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ProblemKind {
    LogBarrierLp,
    LogDetSdp,
}

#[derive(Debug, Clone, Serialize)]
pub enum ProblemOracle {
    Lp(LogBarrierLp),
    Sdp(LogDetSdp),
}

impl ProblemOracle {
    pub fn as_oracle(&self) -> &dyn BarrierOracle {
        match self {
            ProblemOracle::Lp(f) => f,
            ProblemOracle::Sdp(f) => f,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Problem {
    pub kind: ProblemKind,
    pub seed: u64,
    pub oracle: ProblemOracle,
    pub c: DVector<f64>,
    pub x0: DVector<f64>,
    pub tau0: f64,
}

/// Dimensions: LP uses (n variables, m inequality rows in addition to the
/// box); SDP uses (order, number of equality constraints).
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ProblemSize {
    pub primary: usize,
    pub secondary: usize,
}

const CENTER_TOL: f64 = 0.05;
const MAX_ATTEMPTS: usize = 8;

fn random_unit(rng: &mut ChaCha8Rng, n: usize) -> DVector<f64> {
    let v = DVector::from_fn(n, |_, _| rng.gen_range(-1.0..1.0f64));
    let norm = v.norm();
    if norm < 1e-12 {
        DVector::from_fn(n, |i, _| if i == 0 { 1.0 } else { 0.0 })
    } else {
        v / norm
    }
}

fn random_symmetric(rng: &mut ChaCha8Rng, n: usize) -> DMatrix<f64> {
    let m = DMatrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0f64));
    (&m + m.transpose()) * 0.5
}

/// Damped Newton centering until the decrement at tau0 drops below
/// CENTER_TOL. Uses the conservative classical step, which converges from
/// any interior point of a bounded feasible set.
fn center(
    f: &dyn BarrierOracle,
    c: &DVector<f64>,
    x_start: &DVector<f64>,
    tau0: f64,
) -> Result<DVector<f64>> {
    let mut x = x_start.clone();
    for _ in 0..500 {
        let rho = decrement(f, &x, tau0, c)?;
        if rho <= CENTER_TOL {
            return Ok(x);
        }
        let gamma = gamma_for(StepPolicy::TraditionalDamping, rho, false);
        x = newton_step(f, &x, tau0, c, gamma)?;
    }
    Err(Error::NoConvergence {
        residual: decrement(f, &x, tau0, c)?,
        iterations: 500,
        r: 0.0,
        theta: 0.0,
    })
}

fn make_lp(rng: &mut ChaCha8Rng, n: usize, m: usize) -> (LogBarrierLp, DVector<f64>) {
    // m random rows through a ball around the origin, plus a box to keep
    // the polytope bounded whatever the draw.
    let rows = m + 2 * n;
    let mut a = DMatrix::zeros(rows, n);
    let mut b = DVector::zeros(rows);
    for i in 0..m {
        let row = random_unit(rng, n);
        a.row_mut(i).copy_from(&row.transpose());
        b[i] = rng.gen_range(0.5..1.5);
    }
    for j in 0..n {
        a[(m + 2 * j, j)] = 1.0;
        b[m + 2 * j] = 10.0;
        a[(m + 2 * j + 1, j)] = -1.0;
        b[m + 2 * j + 1] = 10.0;
    }
    let c = random_unit(rng, n);
    (LogBarrierLp { a, b }, c)
}

fn make_sdp(
    rng: &mut ChaCha8Rng,
    order: usize,
    constraints: usize,
) -> Result<(LogDetSdp, DVector<f64>)> {
    let full_dim = order * (order + 1) / 2;
    if constraints >= full_dim {
        return Err(Error::Generation(constraints));
    }
    // Equality constraints tr(A_i X) = tr(A_i) with A_1 = I; X0 = I is
    // feasible and tr X = order keeps the feasible slice bounded.
    let mut rows = DMatrix::zeros(constraints, full_dim);
    rows.row_mut(0)
        .copy_from(&svec(&DMatrix::identity(order, order)).transpose());
    for i in 1..constraints {
        rows.row_mut(i)
            .copy_from(&svec(&random_symmetric(rng, order)).transpose());
    }
    // Orthonormal basis of the null space in svec coordinates, taken as
    // the unit eigenvectors of the projector I - Q Q^T where Q spans the
    // row space.
    let qr = rows.transpose().qr();
    let q = qr.q();
    let r = qr.r();
    let min_diag = (0..constraints)
        .map(|i| r[(i, i)].abs())
        .fold(f64::INFINITY, f64::min);
    if min_diag < 1e-10 {
        return Err(Error::Generation(order));
    }
    let proj = DMatrix::identity(full_dim, full_dim) - &q * q.transpose();
    let eig = nalgebra::SymmetricEigen::new(proj);
    let null_dim = full_dim - constraints;
    let mut idx: Vec<usize> = (0..full_dim).collect();
    idx.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    if eig.eigenvalues[idx[null_dim - 1]] < 0.5 {
        return Err(Error::Generation(order));
    }
    let mut basis = Vec::with_capacity(null_dim);
    for &i in &idx[..null_dim] {
        let col = eig.eigenvectors.column(i).into_owned();
        basis.push(crate::pathfollow::barrier::unsvec(&col, order));
    }
    let x0 = DMatrix::identity(order, order);
    // Objective tr(C X) reduced to the slice coordinates.
    let c_mat = random_symmetric(rng, order);
    let c_vec = svec(&c_mat);
    let c = DVector::from_iterator(
        null_dim,
        (0..null_dim).map(|j| c_vec.dot(&svec(&basis[j]))),
    );
    Ok((
        LogDetSdp {
            order,
            x0,
            basis,
        },
        c,
    ))
}

pub fn make_problem(kind: ProblemKind, seed: u64, size: ProblemSize) -> Result<Problem> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for attempt in 0..MAX_ATTEMPTS {
        let built: Result<(ProblemOracle, DVector<f64>, DVector<f64>)> = match kind {
            ProblemKind::LogBarrierLp => {
                let (lp, c) = make_lp(&mut rng, size.primary, size.secondary);
                let x = DVector::zeros(size.primary);
                Ok((ProblemOracle::Lp(lp), c, x))
            }
            ProblemKind::LogDetSdp => {
                match make_sdp(&mut rng, size.primary, size.secondary) {
                    Ok((sdp, c)) => {
                        let x = DVector::zeros(sdp.dim());
                        Ok((ProblemOracle::Sdp(sdp), c, x))
                    }
                    Err(e) => Err(e),
                }
            }
        };
        let (oracle, c, x_feas) = match built {
            Ok(t) => t,
            Err(_) if attempt + 1 < MAX_ATTEMPTS => continue,
            Err(e) => return Err(e),
        };
        let tau0 = 0.1 / c.norm().max(1e-12);
        match center(oracle.as_oracle(), &c, &x_feas, tau0) {
            Ok(x0) => {
                return Ok(Problem {
                    kind,
                    seed,
                    oracle,
                    c,
                    x0,
                    tau0,
                })
            }
            Err(_) if attempt + 1 < MAX_ATTEMPTS => continue,
            Err(e) => return Err(e),
        }
    }
    Err(Error::Generation(size.primary))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pathfollow::barrier::finite_diff_check;

    #[test]
    fn lp_instance_is_centered_and_deterministic() {
        let size = ProblemSize { primary: 20, secondary: 40 };
        let p = make_problem(ProblemKind::LogBarrierLp, 1, size).unwrap();
        let q = make_problem(ProblemKind::LogBarrierLp, 1, size).unwrap();
        assert_eq!(p.x0, q.x0);
        assert_eq!(p.c, q.c);
        let rho = decrement(p.oracle.as_oracle(), &p.x0, p.tau0, &p.c).unwrap();
        assert!(rho <= CENTER_TOL);
        finite_diff_check(p.oracle.as_oracle(), &p.x0, 1e-5);
    }

    #[test]
    fn sdp_instance_is_centered_and_deterministic() {
        let size = ProblemSize { primary: 10, secondary: 10 };
        let p = make_problem(ProblemKind::LogDetSdp, 1, size).unwrap();
        let q = make_problem(ProblemKind::LogDetSdp, 1, size).unwrap();
        assert_eq!(p.x0, q.x0);
        let rho = decrement(p.oracle.as_oracle(), &p.x0, p.tau0, &p.c).unwrap();
        assert!(rho <= CENTER_TOL);
        finite_diff_check(p.oracle.as_oracle(), &p.x0, 1e-5);
    }

    #[test]
    fn sdp_slice_respects_constraints() {
        let size = ProblemSize { primary: 8, secondary: 6 };
        let p = make_problem(ProblemKind::LogDetSdp, 3, size).unwrap();
        let ProblemOracle::Sdp(sdp) = &p.oracle else { panic!() };
        // trace is pinned by the A_1 = I constraint along every basis direction
        for b in &sdp.basis {
            assert!(b.trace().abs() < 1e-9);
        }
        let z = DVector::from_fn(sdp.dim(), |i, _| 0.01 * (i as f64 + 1.0));
        let x = sdp.matrix_at(&z);
        assert!((x.trace() - 8.0).abs() < 1e-9);
        // basis orthonormality in the scaled vectorization
        for i in 0..sdp.dim() {
            for j in 0..sdp.dim() {
                let dot = svec(&sdp.basis[i]).dot(&svec(&sdp.basis[j]));
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((dot - want).abs() < 1e-10);
            }
        }
    }
}
