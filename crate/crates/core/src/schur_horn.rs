//! Finite Schur-Horn machinery.
//!
//! A T-transform of the diagonal of a Hermitian matrix can always be realised
//! by a unitary conjugation supported on two coordinates (Kadison's 2x2
//! rotation). Chaining these along a T-transform decomposition of `x` out of
//! `y` turns `D_y` into a Hermitian matrix with diagonal `x` and spectrum `y`.
//! With `y` a 0/1 vector this builds projections with a prescribed diagonal.

use std::f64::consts::FRAC_PI_2;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{hermitian_eigenvalues, ComplexMatrix, ToleranceConfig};
use crate::majorization::{decompose_t_transforms, majorization_profile, TTransform};

type Block = [[Complex64; 2]; 2];

const PHASE_TOL: f64 = 1e-13;

fn check_hermitian(a: &ComplexMatrix, tol: f64) -> Result<()> {
    let residual = a.hermitian_residual();
    if residual > tol {
        return Err(Error::NotHermitian { residual });
    }
    Ok(())
}

/// Unit scalar `c` with `c a12 = -conj(c) a21`.
fn rotation_phase(a12: Complex64, a21: Complex64) -> Result<Complex64> {
    let r = a12.norm();
    if r == 0.0 {
        return Ok(Complex64::new(1.0, 0.0));
    }
    let residual = |c: Complex64| (c * a12 + c.conj() * a21).norm();
    let bound = PHASE_TOL * r.max(1.0);
    let base = Complex64::from_polar(1.0, FRAC_PI_2 - a12.arg());
    if residual(base) <= bound {
        return Ok(base);
    }
    let i = Complex64::new(0.0, 1.0);
    [base, base * i, -base, -base * i]
        .into_iter()
        .map(|c| (residual(c), c))
        .filter(|(res, _)| *res <= bound)
        .min_by(|a, b| a.0.total_cmp(&b.0))
        .map(|(_, c)| c)
        .ok_or_else(|| Error::Numerical(format!("no rotation phase for off-diagonal {a12}")))
}

fn rotation_block(a12: Complex64, a21: Complex64, t: f64) -> Result<Block> {
    if !(0.0..=1.0).contains(&t) {
        return Err(Error::InvalidParameter(format!("rotation weight {t} outside [0, 1]")));
    }
    let c = rotation_phase(a12, a21)?;
    // sin^2(theta) = t puts t*A11 + (1-t)*A22 in the first slot
    let theta = t.sqrt().asin();
    let (s, co) = theta.sin_cos();
    Ok([
        [c * s, Complex64::new(-co, 0.0)],
        [c * co, Complex64::new(s, 0.0)],
    ])
}

fn block_to_matrix(b: &Block) -> ComplexMatrix {
    ComplexMatrix::new(2, vec![b[0][0], b[0][1], b[1][0], b[1][1]]).expect("finite 2x2 block")
}

/// Kadison's 2x2 rotation: a unitary `U` such that the diagonal of `U A U*`
/// is `(t A11 + (1-t) A22, (1-t) A11 + t A22)`.
pub fn kadison_rotation(a: &ComplexMatrix, t: f64, tol: &ToleranceConfig) -> Result<ComplexMatrix> {
    if a.dim() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            found: a.dim(),
        });
    }
    check_hermitian(a, tol.structural_tol)?;
    Ok(block_to_matrix(&rotation_block(a[(0, 1)], a[(1, 0)], t)?))
}

/// `n x n` unitary acting as `u2` on coordinates `(j, k)`, `j < k`
/// (zero-based), identity elsewhere.
pub fn embed_rotation(u2: &ComplexMatrix, n: usize, j: usize, k: usize) -> Result<ComplexMatrix> {
    if u2.dim() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            found: u2.dim(),
        });
    }
    if j >= k {
        return Err(Error::InvalidParameter(format!("expected j < k, got ({j}, {k})")));
    }
    if k >= n {
        return Err(Error::IndexOutOfRange { index: k, len: n });
    }
    ComplexMatrix::embed(u2, n, &[j, k])
}

/// Rotates `a` in place so its diagonal undergoes `tr`; `acc` is
/// left-multiplied by the same unitary.
fn apply_t_transform_in_place(a: &mut ComplexMatrix, acc: &mut ComplexMatrix, tr: &TTransform) -> Result<()> {
    // T(j, k, t) = T(k, j, t)
    let (j, k) = (tr.j().min(tr.k()), tr.j().max(tr.k()));
    if k >= a.dim() {
        return Err(Error::IndexOutOfRange { index: k, len: a.dim() });
    }
    let g = rotation_block(a[(j, k)], a[(k, j)], tr.t())?;
    a.conjugate_pair_in_place(j, k, g);
    acc.left_multiply_pair_in_place(j, k, g);
    Ok(())
}

/// Realises a T-transform of the diagonal of a Hermitian `a`: returns
/// `(V A V*, V)` where the diagonal of `V A V*` is `T diag(A)`.
pub fn apply_t_transform_unitarily(
    a: &ComplexMatrix,
    tr: &TTransform,
    tol: &ToleranceConfig,
) -> Result<(ComplexMatrix, ComplexMatrix)> {
    check_hermitian(a, tol.structural_tol)?;
    let mut out = a.clone();
    let mut v = ComplexMatrix::identity(a.dim());
    apply_t_transform_in_place(&mut out, &mut v, tr)?;
    Ok((out, v))
}

/// Conjugates the Hermitian `a` (diagonal `y`) to one with diagonal `x`,
/// following a T-transform decomposition and a final coordinate permutation.
fn conjugate_along_decomposition(
    mut a: ComplexMatrix,
    x: &[f64],
    y: &[f64],
    major_tol: f64,
) -> Result<(ComplexMatrix, ComplexMatrix)> {
    let dec = decompose_t_transforms(x, y, major_tol)?;
    let mut v = ComplexMatrix::identity(a.dim());
    for tr in &dec.transforms {
        apply_t_transform_in_place(&mut a, &mut v, tr)?;
    }
    let perm = ComplexMatrix::permutation(&dec.assignment)?;
    let a = perm.conjugate(&a)?.hermitian_part();
    let v = perm.matmul(&v)?;
    Ok((a, v))
}

/// A Hermitian matrix with prescribed diagonal and spectrum.
#[derive(Debug, Clone)]
pub struct SynthesisResult {
    /// Hermitian, diagonal `target_diagonal`, eigenvalues `spectrum`.
    pub a: ComplexMatrix,
    /// Unitary with `a = u D_spectrum u*`.
    pub u: ComplexMatrix,
    pub target_diagonal: Vec<f64>,
    pub spectrum: Vec<f64>,
}

/// Residuals of the four [`SynthesisResult`] invariants.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SynthesisResiduals {
    pub hermitian: f64,
    pub unitary: f64,
    /// `|A - U D U*|_max`.
    pub reconstruction: f64,
    /// `|diag(A) - target|_max`.
    pub diagonal: f64,
}

impl SynthesisResult {
    pub fn residuals(&self) -> Result<SynthesisResiduals> {
        let d = ComplexMatrix::from_real_diagonal(&self.spectrum)?;
        let reconstruction = self.u.conjugate(&d)?.sub(&self.a)?.max_abs();
        let diagonal = (0..self.a.dim())
            .map(|i| (self.a[(i, i)] - self.target_diagonal[i]).norm())
            .fold(0.0, f64::max);
        Ok(SynthesisResiduals {
            hermitian: self.a.hermitian_residual(),
            unitary: self.u.unitary_residual(),
            reconstruction,
            diagonal,
        })
    }
}

/// Hermitian `A` with diagonal `x` and eigenvalues `y`, for `x ≺ y`.
pub fn synthesize_hermitian(x: &[f64], y: &[f64], tol: &ToleranceConfig) -> Result<SynthesisResult> {
    synthesize_with(x, y, tol.structural_tol)
}

fn synthesize_with(x: &[f64], y: &[f64], major_tol: f64) -> Result<SynthesisResult> {
    let d = ComplexMatrix::from_real_diagonal(y)?;
    let (a, u) = conjugate_along_decomposition(d, x, y, major_tol)?;
    Ok(SynthesisResult {
        a,
        u,
        target_diagonal: x.to_vec(),
        spectrum: y.to_vec(),
    })
}

/// `(V A V*, V)` with diagonal `x`, for Hermitian `A` whose diagonal
/// majorises `x`. The spectrum is untouched.
pub fn conjugate_to_diagonal(
    a: &ComplexMatrix,
    x: &[f64],
    tol: &ToleranceConfig,
) -> Result<(ComplexMatrix, ComplexMatrix)> {
    check_hermitian(a, tol.structural_tol)?;
    let y = a.diagonal(tol.structural_tol)?;
    conjugate_along_decomposition(a.clone(), x, &y, tol.structural_tol)
}

/// Distance from `s` to the nearest integer, and that integer.
pub(crate) fn integer_defect(s: f64) -> (f64, f64) {
    let m = s.round();
    ((s - m).abs(), m)
}

/// A projection with diagonal `a`, for `a` in `[0, 1]^n` with integer sum.
///
/// Realised as the Schur-Horn synthesis of `a` out of `(1, .., 1, 0, .., 0)`.
pub fn carpenter_finite(a: &[f64], tol: &ToleranceConfig) -> Result<ComplexMatrix> {
    if a.is_empty() {
        return Err(Error::Empty);
    }
    if let Some(index) = a.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite { index });
    }
    let slack = tol.structural_tol;
    if let Some(index) = a.iter().position(|&v| !(-slack..=1.0 + slack).contains(&v)) {
        return Err(Error::OutsideUnitInterval { index, value: a[index] });
    }
    let (defect, m) = integer_defect(a.iter().sum());
    if defect > tol.integer_tol {
        return Err(Error::NonIntegerSum { defect });
    }
    let m = m as usize;
    let y: Vec<f64> = (0..a.len()).map(|i| if i < m { 1.0 } else { 0.0 }).collect();
    let major_tol = tol.integer_tol.max(tol.structural_tol);
    Ok(synthesize_with(a, &y, major_tol)?.a)
}

/// Outcome of [`schur_check`].
#[derive(Debug, Clone, PartialEq)]
pub struct SchurCheck {
    pub diagonal: Vec<f64>,
    pub eigenvalues: Vec<f64>,
    /// `diagonal ≺ eigenvalues` within `structural_tol`.
    pub ok: bool,
    /// Smallest partial-sum slack, totals counted as `-|gap|`.
    pub worst_slack: f64,
}

/// The Schur direction: the diagonal of a Hermitian matrix is majorised by
/// its eigenvalues. `ok` is false only if the numerics are broken.
pub fn schur_check(a: &ComplexMatrix, tol: &ToleranceConfig) -> Result<SchurCheck> {
    check_hermitian(a, tol.structural_tol)?;
    let diagonal = a.diagonal(tol.structural_tol)?;
    let eigenvalues = hermitian_eigenvalues(a, tol)?;
    let profile = majorization_profile(&diagonal, &eigenvalues)?;
    let scale = a.max_abs().max(1.0);
    Ok(SchurCheck {
        ok: profile.holds(tol.structural_tol * scale),
        worst_slack: profile.worst_slack(),
        diagonal,
        eigenvalues,
    })
}
