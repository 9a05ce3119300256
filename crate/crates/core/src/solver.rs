//! Linear solvers for the assembled SPD systems.
//!
//! The workhorse is conjugate gradients with Jacobi (diagonal)
//! preconditioning. Convergence is declared on the recurrence residual and
//! then re-verified against a freshly computed b - A x; if rounding drift in
//! the recurrence left the true residual above tolerance, the iteration
//! restarts from the current iterate. A dense Cholesky path provides an
//! independent cross-check on small systems.
//!
//! Boundary conditions enter through the constrained variants: the system is
//! solved on the reduced coordinates of a [`TangentialBc`] change of
//! variables, applying T^T A T matrix-free (expand, sparse matvec, contract)
//! and adding the boundary-data lift back onto the result.

use crate::constraints::TangentialBc;
use crate::dense;
use crate::error::MwgError;
use crate::field::DofMap;
use crate::sparse::SparseSymMatrix;

/// Size guard for the dense cross-check solver.
pub const DENSE_LIMIT: usize = 5000;

#[derive(Debug, Clone)]
pub struct SolveReport {
    pub iterations: usize,
    /// ||b - A x|| / ||b|| of the returned iterate (0 when b = 0).
    pub relative_residual: f64,
    pub method: &'static str,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Core preconditioned CG loop over an abstract SPD operator.
fn cg_core(
    mut apply: impl FnMut(&[f64], &mut [f64]),
    minv: &[f64],
    b: &[f64],
    tol: f64,
    maxit: usize,
) -> Result<(Vec<f64>, SolveReport), MwgError> {
    let n = b.len();
    let norm_b = norm(b);
    if norm_b == 0.0 {
        return Ok((
            vec![0.0; n],
            SolveReport {
                iterations: 0,
                relative_residual: 0.0,
                method: "cg",
            },
        ));
    }

    let mut x = vec![0.0; n];
    let mut r = b.to_vec();
    let mut z = vec![0.0; n];
    let mut p = vec![0.0; n];
    let mut ap = vec![0.0; n];
    let mut total_iters = 0usize;

    loop {
        for i in 0..n {
            z[i] = minv[i] * r[i];
        }
        p.copy_from_slice(&z);
        let mut rz = dot(&r, &z);
        while total_iters < maxit {
            apply(&p, &mut ap);
            let pap = dot(&p, &ap);
            if pap <= 0.0 {
                return Err(MwgError::NotPositiveDefinite { index: total_iters });
            }
            let alpha = rz / pap;
            for i in 0..n {
                x[i] += alpha * p[i];
                r[i] -= alpha * ap[i];
            }
            total_iters += 1;
            if norm(&r) <= tol * norm_b {
                break;
            }
            for i in 0..n {
                z[i] = minv[i] * r[i];
            }
            let rz_new = dot(&r, &z);
            let beta = rz_new / rz;
            rz = rz_new;
            for i in 0..n {
                p[i] = z[i] + beta * p[i];
            }
        }

        // Verify against the true residual; the recurrence may have drifted.
        apply(&x, &mut ap);
        for i in 0..n {
            r[i] = b[i] - ap[i];
        }
        let true_rel = norm(&r) / norm_b;
        if true_rel <= tol {
            return Ok((
                x,
                SolveReport {
                    iterations: total_iters,
                    relative_residual: true_rel,
                    method: "cg",
                },
            ));
        }
        if total_iters >= maxit {
            return Err(MwgError::CgDiverged {
                iterations: total_iters,
                residual: true_rel,
                best: x,
            });
        }
        // Restart from the current iterate with the fresh residual.
    }
}

fn jacobi_inverse(diag: &[f64]) -> Result<Vec<f64>, MwgError> {
    let mut minv = vec![0.0; diag.len()];
    for (i, &d) in diag.iter().enumerate() {
        if d <= 0.0 {
            return Err(MwgError::NotPositiveDefinite { index: i });
        }
        minv[i] = 1.0 / d;
    }
    Ok(minv)
}

/// Jacobi-preconditioned conjugate gradients for A x = b.
///
/// Returns the solution and a report once ||b - A x|| <= tol * ||b||; a zero
/// right-hand side returns the exact zero vector without iterating. If the
/// method has not converged after `maxit` iterations the error carries the
/// best iterate found.
pub fn cg_solve(
    a: &SparseSymMatrix,
    b: &[f64],
    tol: f64,
    maxit: usize,
) -> Result<(Vec<f64>, SolveReport), MwgError> {
    assert_eq!(b.len(), a.n(), "rhs length mismatch");
    let minv = jacobi_inverse(&a.diagonal())?;
    cg_core(|x, y| a.matvec(x, y), &minv, b, tol, maxit)
}

/// Direct dense Cholesky solve of the sparse system (n <= DENSE_LIMIT),
/// used to cross-check the iterative path.
pub fn dense_cholesky_solve(
    a: &SparseSymMatrix,
    b: &[f64],
) -> Result<(Vec<f64>, SolveReport), MwgError> {
    let d = a.to_dense(DENSE_LIMIT)?;
    let x = dense::cholesky_solve(&d, b)?;
    let mut ax = vec![0.0; a.n()];
    a.matvec(&x, &mut ax);
    let norm_b = norm(b);
    let rel = if norm_b == 0.0 {
        0.0
    } else {
        let r: f64 = ax
            .iter()
            .zip(b)
            .map(|(y, bi)| (bi - y) * (bi - y))
            .sum::<f64>()
            .sqrt();
        r / norm_b
    };
    Ok((
        x,
        SolveReport {
            iterations: 0,
            relative_residual: rel,
            method: "cholesky",
        },
    ))
}

/// Reduced right-hand side T^T (b - A u_g) together with the lift u_g.
fn reduced_rhs(
    a: &SparseSymMatrix,
    b: &[f64],
    bc: &TangentialBc,
    dofs: &DofMap,
) -> (Vec<f64>, Vec<f64>) {
    let lift = bc.lift_full(dofs);
    let mut work = vec![0.0; a.n()];
    a.matvec(&lift, &mut work);
    for (w, bi) in work.iter_mut().zip(b) {
        *w = bi - *w;
    }
    let mut br = vec![0.0; bc.n_reduced()];
    bc.contract(dofs, &work, &mut br);
    (br, lift)
}

/// Recover the full-coordinate solution u = T x + u_g.
fn expand_solution(bc: &TangentialBc, dofs: &DofMap, xr: &[f64], lift: Vec<f64>) -> Vec<f64> {
    let mut tx = vec![0.0; lift.len()];
    bc.expand(dofs, xr, &mut tx);
    let mut u = lift;
    for (ui, ti) in u.iter_mut().zip(&tx) {
        *ui += ti;
    }
    u
}

/// Conjugate gradients on the boundary-constrained system: solves
/// T^T A T x = T^T (b - A u_g) matrix-free and returns u = T x + u_g.
pub fn constrained_cg_solve(
    a: &SparseSymMatrix,
    b: &[f64],
    bc: &TangentialBc,
    dofs: &DofMap,
    tol: f64,
    maxit: usize,
) -> Result<(Vec<f64>, SolveReport), MwgError> {
    assert_eq!(b.len(), a.n(), "rhs length mismatch");
    let (br, lift) = reduced_rhs(a, b, bc, dofs);
    let minv = jacobi_inverse(&bc.reduced_diagonal(a, dofs))?;
    let mut full = vec![0.0; a.n()];
    let mut af = vec![0.0; a.n()];
    let apply = |x: &[f64], y: &mut [f64]| {
        bc.expand(dofs, x, &mut full);
        a.matvec(&full, &mut af);
        bc.contract(dofs, &af, y);
    };
    match cg_core(apply, &minv, &br, tol, maxit) {
        Ok((xr, report)) => Ok((expand_solution(bc, dofs, &xr, lift), report)),
        Err(MwgError::CgDiverged {
            iterations,
            residual,
            best,
        }) => Err(MwgError::CgDiverged {
            iterations,
            residual,
            best: expand_solution(bc, dofs, &best, lift),
        }),
        Err(e) => Err(e),
    }
}

/// Dense Cholesky on the boundary-constrained system (reduced size must stay
/// within DENSE_LIMIT); same contract as [`constrained_cg_solve`].
pub fn constrained_cholesky_solve(
    a: &SparseSymMatrix,
    b: &[f64],
    bc: &TangentialBc,
    dofs: &DofMap,
) -> Result<(Vec<f64>, SolveReport), MwgError> {
    assert_eq!(b.len(), a.n(), "rhs length mismatch");
    let nr = bc.n_reduced();
    if nr > DENSE_LIMIT {
        return Err(MwgError::DenseTooLarge {
            n: nr,
            limit: DENSE_LIMIT,
        });
    }
    let (br, lift) = reduced_rhs(a, b, bc, dofs);
    let red = bc.reduced_dense(a, dofs);
    let xr = dense::cholesky_solve(&red, &br)?;
    let rx = red.matvec(&xr);
    let norm_b = norm(&br);
    let rel = if norm_b == 0.0 {
        0.0
    } else {
        let r: f64 = rx
            .iter()
            .zip(&br)
            .map(|(y, bi)| (bi - y) * (bi - y))
            .sum::<f64>()
            .sqrt();
        r / norm_b
    };
    Ok((
        expand_solution(bc, dofs, &xr, lift),
        SolveReport {
            iterations: 0,
            relative_residual: rel,
            method: "cholesky",
        },
    ))
}
