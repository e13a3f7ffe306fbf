//! Barrier oracles: value, gradient and Hessian of self-concordant
//! barriers. Self-concordance is the responsibility of each concrete
//! implementation; the solver only assumes it.

use crate::error::{Error, Result};
use nalgebra::{DMatrix, DVector};
use serde::Serialize;

pub trait BarrierOracle: Sync {
    fn dim(&self) -> usize;

    /// Value, gradient and (positive definite) Hessian at `x`.
    fn eval(&self, x: &DVector<f64>) -> Result<(f64, DVector<f64>, DMatrix<f64>)>;

    fn domain_check(&self, x: &DVector<f64>) -> bool;
}

/// `-sum_i log(b_i - a_i^T x)` over a polytope `A x < b`.
#[derive(Debug, Clone, Serialize)]
pub struct LogBarrierLp {
    pub a: DMatrix<f64>,
    pub b: DVector<f64>,
}

impl LogBarrierLp {
    pub fn slacks(&self, x: &DVector<f64>) -> DVector<f64> {
        &self.b - &self.a * x
    }
}

impl BarrierOracle for LogBarrierLp {
    fn dim(&self) -> usize {
        self.a.ncols()
    }

    fn eval(&self, x: &DVector<f64>) -> Result<(f64, DVector<f64>, DMatrix<f64>)> {
        let s = self.slacks(x);
        if s.iter().any(|&v| v <= 0.0) {
            return Err(Error::Factorization);
        }
        let value = -s.iter().map(|v| v.ln()).sum::<f64>();
        let n = self.dim();
        let mut grad = DVector::zeros(n);
        let mut hess = DMatrix::zeros(n, n);
        for (i, &si) in s.iter().enumerate() {
            let row = self.a.row(i);
            for j in 0..n {
                grad[j] += row[j] / si;
                for k in 0..n {
                    hess[(j, k)] += row[j] * row[k] / (si * si);
                }
            }
        }
        Ok((value, grad, hess))
    }

    fn domain_check(&self, x: &DVector<f64>) -> bool {
        self.slacks(x).iter().all(|&v| v > 0.0)
    }
}

/// `-log det X(z)` on an affine slice `X(z) = X0 + sum_j z_j B_j` of the
/// positive definite cone. The slice basis is orthonormal in the scaled
/// symmetric vectorization, so `z` are orthonormal coordinates.
#[derive(Debug, Clone, Serialize)]
pub struct LogDetSdp {
    pub order: usize,
    pub x0: DMatrix<f64>,
    pub basis: Vec<DMatrix<f64>>,
}

impl LogDetSdp {
    pub fn matrix_at(&self, z: &DVector<f64>) -> DMatrix<f64> {
        let mut x = self.x0.clone();
        for (j, b) in self.basis.iter().enumerate() {
            x += b * z[j];
        }
        x
    }
}

impl BarrierOracle for LogDetSdp {
    fn dim(&self) -> usize {
        self.basis.len()
    }

    fn eval(&self, z: &DVector<f64>) -> Result<(f64, DVector<f64>, DMatrix<f64>)> {
        let x = self.matrix_at(z);
        let chol = x.cholesky().ok_or(Error::Factorization)?;
        let value = -2.0 * chol.l().diagonal().iter().map(|v| v.ln()).sum::<f64>();
        let d = self.dim();
        let x_inv = chol.inverse();
        let mut grad = DVector::zeros(d);
        // grad_j = -tr(X^{-1} B_j)
        for (j, b) in self.basis.iter().enumerate() {
            grad[j] = -(&x_inv * b).trace();
        }
        // hess_jk = tr(X^{-1} B_j X^{-1} B_k) = <M_j, M_k>_F with
        // M_j = L^{-1} B_j L^{-T}
        let l = chol.l();
        let l_inv = l
            .clone()
            .try_inverse()
            .ok_or(Error::Factorization)?;
        let mats: Vec<DMatrix<f64>> = self
            .basis
            .iter()
            .map(|b| &l_inv * b * l_inv.transpose())
            .collect();
        let mut hess = DMatrix::zeros(d, d);
        for j in 0..d {
            for k in j..d {
                let v = mats[j].iter().zip(mats[k].iter()).map(|(a, b)| a * b).sum();
                hess[(j, k)] = v;
                hess[(k, j)] = v;
            }
        }
        Ok((value, grad, hess))
    }

    fn domain_check(&self, z: &DVector<f64>) -> bool {
        self.matrix_at(z).cholesky().is_some()
    }
}

/// `-sum_i log x_i` on the positive orthant; used by the soundness tests.
#[derive(Debug, Clone, Serialize)]
pub struct OrthantBarrier {
    pub n: usize,
}

impl BarrierOracle for OrthantBarrier {
    fn dim(&self) -> usize {
        self.n
    }

    fn eval(&self, x: &DVector<f64>) -> Result<(f64, DVector<f64>, DMatrix<f64>)> {
        if x.iter().any(|&v| v <= 0.0) {
            return Err(Error::Factorization);
        }
        let value = -x.iter().map(|v| v.ln()).sum::<f64>();
        let grad = DVector::from_iterator(self.n, x.iter().map(|v| -1.0 / v));
        let hess = DMatrix::from_diagonal(&DVector::from_iterator(
            self.n,
            x.iter().map(|v| 1.0 / (v * v)),
        ));
        Ok((value, grad, hess))
    }

    fn domain_check(&self, x: &DVector<f64>) -> bool {
        x.iter().all(|&v| v > 0.0)
    }
}

/// Scaled symmetric vectorization: off-diagonal entries carry sqrt(2) so the
/// Frobenius inner product becomes the dot product of coordinates.
pub fn svec(m: &DMatrix<f64>) -> DVector<f64> {
    let n = m.nrows();
    let mut out = DVector::zeros(n * (n + 1) / 2);
    let mut idx = 0;
    let root2 = 2f64.sqrt();
    for i in 0..n {
        for j in i..n {
            out[idx] = if i == j { m[(i, i)] } else { root2 * m[(i, j)] };
            idx += 1;
        }
    }
    out
}

pub fn unsvec(v: &DVector<f64>, n: usize) -> DMatrix<f64> {
    let mut out = DMatrix::zeros(n, n);
    let mut idx = 0;
    let inv_root2 = 1.0 / 2f64.sqrt();
    for i in 0..n {
        for j in i..n {
            if i == j {
                out[(i, i)] = v[idx];
            } else {
                out[(i, j)] = v[idx] * inv_root2;
                out[(j, i)] = v[idx] * inv_root2;
            }
            idx += 1;
        }
    }
    out
}

/// `-log det X` with `X` free over all symmetric matrices in svec
/// coordinates; used by the soundness tests.
#[derive(Debug, Clone, Serialize)]
pub struct LogDetFull {
    pub order: usize,
}

impl BarrierOracle for LogDetFull {
    fn dim(&self) -> usize {
        self.order * (self.order + 1) / 2
    }

    fn eval(&self, z: &DVector<f64>) -> Result<(f64, DVector<f64>, DMatrix<f64>)> {
        let n = self.order;
        let x = unsvec(z, n);
        let chol = x.cholesky().ok_or(Error::Factorization)?;
        let value = -2.0 * chol.l().diagonal().iter().map(|v| v.ln()).sum::<f64>();
        let x_inv = chol.inverse();
        let grad = -svec(&x_inv);
        let d = self.dim();
        let mut hess = DMatrix::zeros(d, d);
        for j in 0..d {
            let mut e = DVector::zeros(d);
            e[j] = 1.0;
            let bj = unsvec(&e, n);
            let mj = &x_inv * bj * &x_inv;
            hess.set_column(j, &svec(&mj));
        }
        // symmetrize against roundoff
        let hess = (&hess + hess.transpose()) * 0.5;
        Ok((value, grad, hess))
    }

    fn domain_check(&self, z: &DVector<f64>) -> bool {
        unsvec(z, self.order).cholesky().is_some()
    }
}

#[cfg(test)]
pub(crate) fn finite_diff_check(f: &dyn BarrierOracle, x: &DVector<f64>, tol: f64) {
    let n = f.dim();
    let (_, grad, hess) = f.eval(x).unwrap();
    for j in 0..n {
        let h = 1e-6 * (1.0 + x[j].abs());
        let mut xp = x.clone();
        let mut xm = x.clone();
        xp[j] += h;
        xm[j] -= h;
        let (vp, gp, _) = f.eval(&xp).unwrap();
        let (vm, gm, _) = f.eval(&xm).unwrap();
        let g_num = (vp - vm) / (2.0 * h);
        assert!(
            (grad[j] - g_num).abs() / g_num.abs().max(1.0) < tol,
            "grad[{j}]: {} vs {g_num}",
            grad[j]
        );
        for k in 0..n {
            let h_num = (gp[k] - gm[k]) / (2.0 * h);
            assert!(
                (hess[(k, j)] - h_num).abs() / h_num.abs().max(1.0) < tol,
                "hess[({k},{j})]: {} vs {h_num}",
                hess[(k, j)]
            );
        }
    }
}
