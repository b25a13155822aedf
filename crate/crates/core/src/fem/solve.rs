//! Krylov solvers: Jacobi-preconditioned CG and restarted GMRES.

use super::sparse::{LinearOperator, SparseOperator};
use crate::error::{Error, Result};
use crate::numeric::{axpy, dot, norm2};

#[derive(Debug, Clone)]
pub struct SolveInfo {
    pub x: Vec<f64>,
    pub iterations: usize,
    pub residual: f64,
}

/// Solves `A x = b` for symmetric positive definite `A` to relative residual `tol`.
pub fn cg_solve(a: &SparseOperator, b: &[f64], tol: f64, maxit: usize) -> Result<SolveInfo> {
    let d = a.diagonal();
    if let Some(&v) = d.iter().find(|&&v| v <= 0.0) {
        return Err(Error::Indefinite {
            iteration: 0,
            curvature: v,
        });
    }
    let inv: Vec<f64> = d.iter().map(|v| 1.0 / v).collect();
    cg_with(a, b, tol, maxit, |r, z| {
        for ((zi, ri), di) in z.iter_mut().zip(r).zip(&inv) {
            *zi = ri * di;
        }
    })
}

/// Preconditioned CG with a caller-supplied preconditioner `z = P r`.
pub fn cg_with<P>(
    a: &dyn LinearOperator,
    b: &[f64],
    tol: f64,
    maxit: usize,
    precond: P,
) -> Result<SolveInfo>
where
    P: Fn(&[f64], &mut [f64]),
{
    let n = a.dim();
    let bnorm = norm2(b);
    let mut x = vec![0.0; n];
    if bnorm == 0.0 {
        return Ok(SolveInfo {
            x,
            iterations: 0,
            residual: 0.0,
        });
    }
    let mut r = b.to_vec();
    let mut z = vec![0.0; n];
    precond(&r, &mut z);
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut ap = vec![0.0; n];
    for it in 1..=maxit {
        a.apply(&p, &mut ap);
        let curv = dot(&p, &ap);
        if curv <= 0.0 {
            return Err(Error::Indefinite {
                iteration: it,
                curvature: curv,
            });
        }
        let alpha = rz / curv;
        axpy(alpha, &p, &mut x);
        axpy(-alpha, &ap, &mut r);
        let res = norm2(&r) / bnorm;
        if res <= tol {
            return Ok(SolveInfo {
                x,
                iterations: it,
                residual: res,
            });
        }
        precond(&r, &mut z);
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for (pi, zi) in p.iter_mut().zip(&z) {
            *pi = zi + beta * *pi;
        }
    }
    let res = norm2(&r) / bnorm;
    Err(Error::NotConverged {
        iterations: maxit,
        residual: res,
    })
}

#[derive(Debug, Clone)]
pub struct GmresInfo {
    pub x: Vec<f64>,
    pub iterations: usize,
    pub residual: f64,
    /// Smallest `v^T A v` over the unit Arnoldi basis vectors; a nonpositive
    /// value means the symmetric part of `A` is not positive definite.
    pub min_rayleigh: f64,
}

/// Restarted GMRES(m) with Jacobi scaling from `diag` (pass ones for none).
pub fn gmres(
    a: &dyn LinearOperator,
    diag: &[f64],
    b: &[f64],
    tol: f64,
    restart: usize,
    maxit: usize,
) -> Result<GmresInfo> {
    let n = a.dim();
    let bnorm = norm2(b);
    let mut x = vec![0.0; n];
    let mut min_rayleigh = f64::INFINITY;
    if bnorm == 0.0 {
        return Ok(GmresInfo {
            x,
            iterations: 0,
            residual: 0.0,
            min_rayleigh,
        });
    }
    let inv: Vec<f64> = diag
        .iter()
        .map(|&d| if d != 0.0 { 1.0 / d } else { 1.0 })
        .collect();
    let m = restart.max(1).min(n);
    let mut total = 0;
    let mut tmp = vec![0.0; n];
    loop {
        // r = b - A x
        a.apply(&x, &mut tmp);
        let r: Vec<f64> = b.iter().zip(&tmp).map(|(bi, ti)| bi - ti).collect();
        let beta = norm2(&r);
        if beta / bnorm <= tol {
            return Ok(GmresInfo {
                x,
                iterations: total,
                residual: beta / bnorm,
                min_rayleigh,
            });
        }
        if total >= maxit {
            return Err(Error::NotConverged {
                iterations: total,
                residual: beta / bnorm,
            });
        }
        let mut v: Vec<Vec<f64>> = vec![r.iter().map(|ri| ri / beta).collect()];
        let mut h = vec![vec![0.0; m]; m + 1];
        let mut cs = vec![0.0; m];
        let mut sn = vec![0.0; m];
        let mut g = vec![0.0; m + 1];
        g[0] = beta;
        let mut k_used = 0;
        for j in 0..m {
            total += 1;
            // Right preconditioning: w = A D^-1 v_j.
            let z: Vec<f64> = v[j].iter().zip(&inv).map(|(vi, di)| vi * di).collect();
            let mut w = vec![0.0; n];
            a.apply(&z, &mut w);
            let znorm = norm2(&z);
            if znorm > 0.0 {
                min_rayleigh = min_rayleigh.min(dot(&z, &w) / (znorm * znorm));
            }
            for _ in 0..2 {
                for i in 0..=j {
                    let hij = dot(&w, &v[i]);
                    h[i][j] += hij;
                    axpy(-hij, &v[i], &mut w);
                }
            }
            let wn = norm2(&w);
            h[j + 1][j] = wn;
            for i in 0..j {
                let t = cs[i] * h[i][j] + sn[i] * h[i + 1][j];
                h[i + 1][j] = -sn[i] * h[i][j] + cs[i] * h[i + 1][j];
                h[i][j] = t;
            }
            let rho = h[j][j].hypot(h[j + 1][j]);
            cs[j] = h[j][j] / rho;
            sn[j] = h[j + 1][j] / rho;
            h[j][j] = rho;
            h[j + 1][j] = 0.0;
            g[j + 1] = -sn[j] * g[j];
            g[j] *= cs[j];
            k_used = j + 1;
            if g[j + 1].abs() / bnorm <= tol || wn == 0.0 || total >= maxit {
                break;
            }
            v.push(w.iter().map(|wi| wi / wn).collect());
        }
        // Back substitution for y, then x += D^-1 V y.
        let mut y = vec![0.0; k_used];
        for i in (0..k_used).rev() {
            let mut s = g[i];
            for k in (i + 1)..k_used {
                s -= h[i][k] * y[k];
            }
            y[i] = s / h[i][i];
        }
        for (i, yi) in y.iter().enumerate() {
            for ((xk, vk), dk) in x.iter_mut().zip(&v[i]).zip(&inv) {
                *xk += yi * vk * dk;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cg_examples() {
        let id = SparseOperator::identity(4);
        let b = vec![1.0, -2.0, 3.0, 0.5];
        assert_eq!(cg_solve(&id, &b, 1e-14, 10).unwrap().x, b);
        let lap = SparseOperator::from_dense(
            &[
                vec![2.0, -1.0, 0.0],
                vec![-1.0, 2.0, -1.0],
                vec![0.0, -1.0, 2.0],
            ],
            true,
        );
        // Inverse of tridiag(-1,2,-1) (n = 3) has first column (3, 2, 1)/4.
        let x = cg_solve(&lap, &[1.0, 0.0, 0.0], 1e-15, 10).unwrap().x;
        for (xi, ei) in x.iter().zip([0.75, 0.5, 0.25]) {
            assert!((xi - ei).abs() < 1e-15);
        }
        assert_eq!(
            cg_solve(&lap, &[0.0; 3], 1e-12, 10).unwrap().x,
            vec![0.0; 3]
        );
    }

    #[test]
    fn cg_detects_indefiniteness_and_iteration_cap() {
        let a = SparseOperator::from_dense(&[vec![1.0, 2.0], vec![2.0, 1.0]], true);
        assert!(matches!(
            cg_solve(&a, &[1.0, 0.0], 1e-12, 10),
            Err(Error::Indefinite { .. })
        ));
        let lap = SparseOperator::from_dense(
            &[
                vec![2.0, -1.0, 0.0],
                vec![-1.0, 2.0, -1.0],
                vec![0.0, -1.0, 2.0],
            ],
            true,
        );
        assert!(matches!(
            cg_solve(&lap, &[1.0, 1.0, 0.0], 1e-15, 1),
            Err(Error::NotConverged { .. })
        ));
    }

    #[test]
    fn gmres_solves_nonsymmetric_system() {
        let a = SparseOperator::from_dense(
            &[
                vec![4.0, 1.0, 0.0],
                vec![-1.0, 4.0, 1.0],
                vec![0.0, -1.0, 4.0],
            ],
            false,
        );
        let x_true = [1.0, -2.0, 0.5];
        let b = a.matvec(&x_true);
        let info = gmres(&a, &a.diagonal(), &b, 1e-14, 2, 100).unwrap();
        for (x, e) in info.x.iter().zip(x_true) {
            assert!((x - e).abs() < 1e-12);
        }
        assert!(info.min_rayleigh > 0.0);
    }
}
