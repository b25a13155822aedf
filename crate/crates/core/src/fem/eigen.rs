//! Extreme eigenpairs of `A v = lambda B v` by Lanczos iteration in the
//! `B` inner product with full reorthogonalization.
//!
//! The largest eigenvalue comes from the `B`-self-adjoint operator `B^-1 A`,
//! the smallest from `A^-1 B` (whose largest eigenvalue is `1/lambda_min`).
//! Inner solves use preconditioned CG.

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use super::solve::cg_solve;
use super::sparse::SparseOperator;
use crate::config::CG_MAXIT;
use crate::error::{Error, Result};
use crate::numeric::{axpy, dot, halton};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Which {
    Smallest,
    Largest,
}

#[derive(Debug, Clone)]
pub struct EigenPair {
    pub value: f64,
    /// `B`-normalized eigenvector.
    pub vector: Vec<f64>,
    pub iterations: usize,
    /// Relative Ritz residual estimate at exit.
    pub residual: f64,
}

const MAX_BASIS: usize = 160;
const MAX_RESTARTS: usize = 30;
const INNER_TOL: f64 = 1e-13;

pub fn generalized_eig_extreme(
    a: &SparseOperator,
    b: &SparseOperator,
    which: Which,
    tol: f64,
) -> Result<EigenPair> {
    let n = a.n();
    if n == 0 || b.n() != n {
        return Err(Error::InvalidArgument(
            "eigenproblem needs two square operators of equal size".into(),
        ));
    }
    let op = |x: &[f64]| -> Result<Vec<f64>> {
        match which {
            Which::Largest => {
                let ax = a.matvec(x);
                Ok(cg_solve(b, &ax, INNER_TOL, CG_MAXIT)?.x)
            }
            Which::Smallest => {
                let bx = b.matvec(x);
                Ok(cg_solve(a, &bx, INNER_TOL, CG_MAXIT)?.x)
            }
        }
    };
    let start: Vec<f64> = (0..n)
        .map(|i| 1.0 + 0.5 * halton(i as u64 + 1, 2))
        .collect();
    let mut v0 = start;
    let mut iterations = 0;
    let mut last_res = f64::INFINITY;
    for _ in 0..MAX_RESTARTS {
        let (theta, y, res, its, exact) = lanczos(&op, b, &v0, tol)?;
        iterations += its;
        last_res = res;
        v0 = y;
        if res <= tol || exact {
            let bv = b.matvec(&v0);
            let nb = dot(&v0, &bv).sqrt();
            for vi in v0.iter_mut() {
                *vi /= nb;
            }
            // Rayleigh quotient of the B-normalized Ritz vector; more accurate
            // than the Ritz value itself for the shift-inverted branch.
            let value = a.form(&v0, &v0);
            debug_assert!(match which {
                Which::Largest => (value - theta).abs() <= 1e-6 * theta.abs().max(1.0),
                Which::Smallest => (value * theta - 1.0).abs() <= 1e-6,
            });
            return Ok(EigenPair {
                value,
                vector: v0,
                iterations,
                residual: res,
            });
        }
    }
    Err(Error::NotConverged {
        iterations,
        residual: last_res,
    })
}

type LanczosOut = (f64, Vec<f64>, f64, usize, bool);

/// One Lanczos cycle; returns the largest Ritz value, its Ritz vector, the
/// relative residual estimate, the step count, and whether the Krylov space
/// became invariant.
fn lanczos<F>(op: &F, b: &SparseOperator, v0: &[f64], tol: f64) -> Result<LanczosOut>
where
    F: Fn(&[f64]) -> Result<Vec<f64>>,
{
    let n = v0.len();
    let m_max = MAX_BASIS.min(n);
    let mut vs: Vec<Vec<f64>> = Vec::new();
    let mut bvs: Vec<Vec<f64>> = Vec::new();
    let mut alpha: Vec<f64> = Vec::new();
    let mut beta: Vec<f64> = Vec::new();

    let bv = b.matvec(v0);
    let nrm = dot(v0, &bv).sqrt();
    if !(nrm > 0.0) {
        return Err(Error::InvalidArgument(
            "B is not positive definite on the start vector".into(),
        ));
    }
    vs.push(v0.iter().map(|x| x / nrm).collect());
    bvs.push(bv.iter().map(|x| x / nrm).collect());

    for j in 0..m_max {
        let mut w = op(&vs[j])?;
        let aj = dot(&w, &bvs[j]);
        alpha.push(aj);
        for _ in 0..2 {
            for i in 0..=j {
                let c = dot(&w, &bvs[i]);
                axpy(-c, &vs[i], &mut w);
            }
        }
        let bw = b.matvec(&w);
        let bj = dot(&w, &bw).max(0.0).sqrt();
        let k = j + 1;
        let t = DMatrix::from_fn(k, k, |r, c| {
            if r == c {
                alpha[r]
            } else if r == c + 1 {
                beta[c]
            } else if c == r + 1 {
                beta[r]
            } else {
                0.0
            }
        });
        let eig = SymmetricEigen::new(t);
        let (imax, &theta) = eig
            .eigenvalues
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.total_cmp(y.1))
            .expect("nonempty tridiagonal");
        let s = eig.eigenvectors.column(imax);
        let res = (bj * s[k - 1]).abs() / theta.abs().max(f64::MIN_POSITIVE);
        let invariant = bj <= 1e-14 * theta.abs().max(1.0);
        if res <= tol || invariant || j + 1 == m_max {
            let mut y = vec![0.0; n];
            for (i, vi) in vs.iter().enumerate() {
                axpy(s[i], vi, &mut y);
            }
            return Ok((theta, y, res, k, invariant));
        }
        beta.push(bj);
        vs.push(w.iter().map(|x| x / bj).collect());
        bvs.push(bw.iter().map(|x| x / bj).collect());
    }
    unreachable!("the loop returns at j + 1 == m_max")
}
