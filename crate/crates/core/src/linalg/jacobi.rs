//! Cyclic two-sided Jacobi for complex Hermitian matrices.

use num_complex::Complex64;

use super::{ComplexMatrix, ToleranceConfig};
use crate::error::{Error, Result};

pub const DEFAULT_MAX_SWEEPS: usize = 100;

/// Eigenvalues of a Hermitian matrix in ascending order, with multiplicity.
pub fn hermitian_eigenvalues(a: &ComplexMatrix, tol: &ToleranceConfig) -> Result<Vec<f64>> {
    hermitian_eigenvalues_with(a, tol, DEFAULT_MAX_SWEEPS)
}

/// Same as [`hermitian_eigenvalues`] with an explicit sweep cap.
///
/// Sweeps stop once the off-diagonal Frobenius norm drops to
/// `eig_tol * ||A||_F`.
pub fn hermitian_eigenvalues_with(
    a: &ComplexMatrix,
    tol: &ToleranceConfig,
    max_sweeps: usize,
) -> Result<Vec<f64>> {
    let residual = a.hermitian_residual();
    if residual > tol.structural_tol {
        return Err(Error::NotHermitian { residual });
    }
    let n = a.dim();
    let mut w = a.hermitian_part();
    let target = tol.eig_tol * a.frobenius_norm();

    let mut converged = false;
    let mut off = off_diagonal_norm(&w);
    for _ in 0..max_sweeps {
        if off <= target {
            converged = true;
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                rotate(&mut w, p, q);
            }
        }
        off = off_diagonal_norm(&w);
    }
    if !converged && off > target {
        return Err(Error::NoConvergence {
            sweeps: max_sweeps,
            off_norm: off,
        });
    }

    let mut eig = w.real_diagonal();
    eig.sort_by(f64::total_cmp);
    Ok(eig)
}

fn off_diagonal_norm(w: &ComplexMatrix) -> f64 {
    let n = w.dim();
    let mut s = 0.0;
    for r in 0..n {
        for c in 0..n {
            if r != c {
                s += w[(r, c)].norm_sqr();
            }
        }
    }
    s.sqrt()
}

/// Annihilates the (p, q) entry.
///
/// With `A_pq = r e^{i phi}`, the phase `diag(1, e^{-i phi})` makes the
/// 2x2 block real symmetric, and a classical Jacobi rotation finishes it.
fn rotate(w: &mut ComplexMatrix, p: usize, q: usize) {
    let apq = w[(p, q)];
    let r = apq.norm();
    if r == 0.0 {
        return;
    }
    let app = w[(p, p)].re;
    let aqq = w[(q, q)].re;
    let phase = apq / r;

    let theta = (aqq - app) / (2.0 * r);
    let t = if theta.is_finite() {
        theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
    } else {
        // r is negligible next to the diagonal gap
        r / (aqq - app)
    };
    let c = 1.0 / (t * t + 1.0).sqrt();
    let s = t * c;

    // G = D R with R = [[c, s], [-s, c]]; the update is A <- G* A G,
    // i.e. W A W* with W = G*.
    let g = [
        [Complex64::new(c, 0.0), Complex64::new(s, 0.0)],
        [-phase.conj() * s, phase.conj() * c],
    ];
    let w_block = [
        [g[0][0].conj(), g[1][0].conj()],
        [g[0][1].conj(), g[1][1].conj()],
    ];
    w.conjugate_pair_in_place(p, q, w_block);
    let zero = Complex64::new(0.0, 0.0);
    w.set(p, q, zero);
    w.set(q, p, zero);
    w.set(p, p, Complex64::new(w[(p, p)].re, 0.0));
    w.set(q, q, Complex64::new(w[(q, q)].re, 0.0));
}
