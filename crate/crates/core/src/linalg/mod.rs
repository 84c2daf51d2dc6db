//! Dense complex matrices and the structural predicates used to verify every
//! construction in this crate.
//!
//! Matrices are small (a few hundred rows at most) and stored densely in
//! row-major order. All operations return new values.

mod jacobi;

use std::fmt;
use std::ops::Index;

use num_complex::Complex64;

use crate::error::{Error, Result};

pub use jacobi::{hermitian_eigenvalues, hermitian_eigenvalues_with, DEFAULT_MAX_SWEEPS};

/// Scalar entry type.
pub type ComplexScalar = Complex64;

/// Tolerances shared by the verification predicates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ToleranceConfig {
    /// Max-entry residual allowed for Hermitian/unitary/projection checks.
    pub structural_tol: f64,
    /// Relative off-diagonal Frobenius norm at which Jacobi stops.
    pub eig_tol: f64,
    /// Distance to the nearest integer accepted as "integer".
    pub integer_tol: f64,
}

impl Default for ToleranceConfig {
    fn default() -> Self {
        Self {
            structural_tol: 1e-10,
            eig_tol: 1e-12,
            integer_tol: 1e-9,
        }
    }
}

impl ToleranceConfig {
    pub fn validate(&self) -> Result<()> {
        let all = [self.structural_tol, self.eig_tol, self.integer_tol];
        if all.iter().any(|t| !t.is_finite() || *t <= 0.0) {
            return Err(Error::InvalidParameter(
                "tolerances must be finite and strictly positive".into(),
            ));
        }
        if self.integer_tol >= 0.25 {
            return Err(Error::InvalidParameter("integer_tol must be below 1/4".into()));
        }
        Ok(())
    }
}

/// Dense square complex matrix, row-major.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    n: usize,
    data: Vec<Complex64>,
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix({}x{})", self.n, self.n)?;
        for r in 0..self.n {
            let row: Vec<String> = (0..self.n)
                .map(|c| {
                    let z = self[(r, c)];
                    format!("{:+.6}{:+.6}i", z.re, z.im)
                })
                .collect();
            writeln!(f, "  [{}]", row.join(", "))?;
        }
        Ok(())
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = Complex64;

    fn index(&self, (r, c): (usize, usize)) -> &Complex64 {
        &self.data[r * self.n + c]
    }
}

impl ComplexMatrix {
    /// Builds an `n x n` matrix from row-major data.
    pub fn new(n: usize, data: Vec<Complex64>) -> Result<Self> {
        if n == 0 {
            return Err(Error::Empty);
        }
        if data.len() != n * n {
            return Err(Error::BadShape {
                expected: n * n,
                found: data.len(),
            });
        }
        if let Some(index) = data.iter().position(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite { index });
        }
        Ok(Self { n, data })
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Result<Self> {
        let mut data = Vec::with_capacity(n * n);
        for r in 0..n {
            for c in 0..n {
                data.push(f(r, c));
            }
        }
        Self::new(n, data)
    }

    /// Real matrix from rows.
    pub fn from_real_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if let Some(bad) = rows.iter().find(|r| r.len() != n) {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: bad.len(),
            });
        }
        Self::from_fn(n, |r, c| Complex64::new(rows[r][c], 0.0))
    }

    pub fn zeros(n: usize) -> Self {
        assert!(n > 0, "dimension must be positive");
        Self {
            n,
            data: vec![Complex64::new(0.0, 0.0); n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.data[i * n + i] = Complex64::new(1.0, 0.0);
        }
        m
    }

    /// `D_x`: the diagonal matrix with diagonal `x`.
    pub fn from_real_diagonal(x: &[f64]) -> Result<Self> {
        if x.is_empty() {
            return Err(Error::Empty);
        }
        if let Some(index) = x.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { index });
        }
        let mut m = Self::zeros(x.len());
        for (i, &v) in x.iter().enumerate() {
            m.data[i * x.len() + i] = Complex64::new(v, 0.0);
        }
        Ok(m)
    }

    /// Permutation matrix `P` with `P[i][perm[i]] = 1`, so that
    /// `(P A P*)_{ii} = A_{perm[i], perm[i]}`.
    pub fn permutation(perm: &[usize]) -> Result<Self> {
        let n = perm.len();
        if n == 0 {
            return Err(Error::Empty);
        }
        let mut seen = vec![false; n];
        for &p in perm {
            if p >= n || seen[p] {
                return Err(Error::InvalidParameter(format!("{perm:?} is not a permutation")));
            }
            seen[p] = true;
        }
        let mut m = Self::zeros(n);
        for (i, &p) in perm.iter().enumerate() {
            m.data[i * n + p] = Complex64::new(1.0, 0.0);
        }
        Ok(m)
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    pub fn get(&self, r: usize, c: usize) -> Option<Complex64> {
        (r < self.n && c < self.n).then(|| self.data[r * self.n + c])
    }

    pub(crate) fn set(&mut self, r: usize, c: usize, v: Complex64) {
        self.data[r * self.n + c] = v;
    }

    fn check_same_dim(&self, other: &Self) -> Result<()> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                found: other.n,
            });
        }
        Ok(())
    }

    pub fn matmul(&self, other: &Self) -> Result<Self> {
        self.check_same_dim(other)?;
        let n = self.n;
        let mut out = vec![Complex64::new(0.0, 0.0); n * n];
        for r in 0..n {
            for k in 0..n {
                let a = self.data[r * n + k];
                if a.re == 0.0 && a.im == 0.0 {
                    continue;
                }
                let row = &other.data[k * n..(k + 1) * n];
                for (o, b) in out[r * n..(r + 1) * n].iter_mut().zip(row) {
                    *o += a * b;
                }
            }
        }
        Ok(Self { n, data: out })
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        let n = self.n;
        let mut data = Vec::with_capacity(n * n);
        for r in 0..n {
            for c in 0..n {
                data.push(self.data[c * n + r].conj());
            }
        }
        Self { n, data }
    }

    /// `U A U*` with `self` playing `U`.
    pub fn conjugate(&self, a: &Self) -> Result<Self> {
        self.matmul(a)?.matmul(&self.adjoint())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_same_dim(other)?;
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect();
        Ok(Self { n: self.n, data })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_same_dim(other)?;
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect();
        Ok(Self { n: self.n, data })
    }

    pub fn scale(&self, s: f64) -> Self {
        Self {
            n: self.n,
            data: self.data.iter().map(|z| z * s).collect(),
        }
    }

    /// `(A + A*) / 2`.
    pub fn hermitian_part(&self) -> Self {
        let adj = self.adjoint();
        Self {
            n: self.n,
            data: self
                .data
                .iter()
                .zip(&adj.data)
                .map(|(a, b)| (a + b) * 0.5)
                .collect(),
        }
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.n).map(|i| self.data[i * self.n + i]).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Zero-padded copy of dimension `m >= n`; the new diagonal entries are
    /// `fill`.
    pub fn padded(&self, m: usize, fill: f64) -> Result<Self> {
        if m < self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                found: m,
            });
        }
        let mut out = Self::zeros(m);
        for r in 0..self.n {
            for c in 0..self.n {
                out.data[r * m + c] = self.data[r * self.n + c];
            }
        }
        for i in self.n..m {
            out.data[i * m + i] = Complex64::new(fill, 0.0);
        }
        Ok(out)
    }

    /// Compression onto the coordinates `idx` (in the given order).
    pub fn principal_submatrix(&self, idx: &[usize]) -> Result<Self> {
        if let Some(&bad) = idx.iter().find(|&&i| i >= self.n) {
            return Err(Error::IndexOutOfRange {
                index: bad,
                len: self.n,
            });
        }
        Self::from_fn(idx.len(), |r, c| self[(idx[r], idx[c])])
    }

    /// Block-diagonal direct sum.
    pub fn direct_sum(blocks: &[ComplexMatrix]) -> Result<Self> {
        let n: usize = blocks.iter().map(|b| b.n).sum();
        if n == 0 {
            return Err(Error::Empty);
        }
        let mut out = Self::zeros(n);
        let mut off = 0;
        for b in blocks {
            for r in 0..b.n {
                for c in 0..b.n {
                    out.data[(off + r) * n + off + c] = b.data[r * b.n + c];
                }
            }
            off += b.n;
        }
        Ok(out)
    }

    /// Identity everywhere except on the coordinates `idx`, where it acts as
    /// `block` (coordinate `idx[a]` plays the role of row/column `a`).
    pub fn embed(block: &ComplexMatrix, n: usize, idx: &[usize]) -> Result<Self> {
        if idx.len() != block.n {
            return Err(Error::DimensionMismatch {
                expected: block.n,
                found: idx.len(),
            });
        }
        let mut seen = vec![false; n];
        for &i in idx {
            if i >= n {
                return Err(Error::IndexOutOfRange { index: i, len: n });
            }
            if seen[i] {
                return Err(Error::InvalidParameter(format!("repeated coordinate {i}")));
            }
            seen[i] = true;
        }
        let mut out = Self::identity(n);
        for (a, &r) in idx.iter().enumerate() {
            for (b, &c) in idx.iter().enumerate() {
                out.data[r * n + c] = block.data[a * block.n + b];
            }
        }
        Ok(out)
    }

    pub fn hermitian_residual(&self) -> f64 {
        let n = self.n;
        let mut worst: f64 = 0.0;
        for r in 0..n {
            for c in r..n {
                let d = self.data[r * n + c] - self.data[c * n + r].conj();
                worst = worst.max(d.norm());
            }
        }
        worst
    }

    /// `max(|UU* - I|_max, |U*U - I|_max)`.
    pub fn unitary_residual(&self) -> f64 {
        let adj = self.adjoint();
        let id = Self::identity(self.n);
        let left = self.matmul(&adj).and_then(|m| m.sub(&id));
        let right = adj.matmul(self).and_then(|m| m.sub(&id));
        match (left, right) {
            (Ok(l), Ok(r)) => l.max_abs().max(r.max_abs()),
            _ => f64::INFINITY,
        }
    }

    /// `max(|P^2 - P|_max, |P - P*|_max)`.
    pub fn projection_residual(&self) -> f64 {
        let idem = self
            .matmul(self)
            .and_then(|p2| p2.sub(self))
            .map(|d| d.max_abs())
            .unwrap_or(f64::INFINITY);
        idem.max(self.hermitian_residual())
    }

    pub fn idempotence_residual(&self) -> f64 {
        self.matmul(self)
            .and_then(|p2| p2.sub(self))
            .map(|d| d.max_abs())
            .unwrap_or(f64::INFINITY)
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermitian_residual() <= tol
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        self.unitary_residual() <= tol
    }

    pub fn is_projection(&self, tol: f64) -> bool {
        self.projection_residual() <= tol
    }

    /// Real parts of the diagonal, rejecting imaginary residue above `tol`.
    pub fn diagonal(&self, tol: f64) -> Result<Vec<f64>> {
        (0..self.n)
            .map(|i| {
                let z = self.data[i * self.n + i];
                if z.im.abs() > tol {
                    Err(Error::ComplexDiagonal {
                        index: i,
                        imag: z.im,
                    })
                } else {
                    Ok(z.re)
                }
            })
            .collect()
    }

    /// Real parts of the diagonal without any check.
    pub fn real_diagonal(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.data[i * self.n + i].re).collect()
    }

    /// Applies the 2x2 unitary `g` on coordinates `(p, q)` as `W A W*`,
    /// where `W` is `g` embedded in the identity. O(n) per call.
    pub(crate) fn conjugate_pair_in_place(&mut self, p: usize, q: usize, g: [[Complex64; 2]; 2]) {
        let n = self.n;
        // rows: A <- W A
        for c in 0..n {
            let ap = self.data[p * n + c];
            let aq = self.data[q * n + c];
            self.data[p * n + c] = g[0][0] * ap + g[0][1] * aq;
            self.data[q * n + c] = g[1][0] * ap + g[1][1] * aq;
        }
        // columns: A <- A W*
        for r in 0..n {
            let ap = self.data[r * n + p];
            let aq = self.data[r * n + q];
            self.data[r * n + p] = ap * g[0][0].conj() + aq * g[0][1].conj();
            self.data[r * n + q] = ap * g[1][0].conj() + aq * g[1][1].conj();
        }
    }

    /// `W A W*` where `W` is `v` embedded on the coordinates `idx`.
    /// Equivalent to `embed(v, n, idx).conjugate(self)` in O(n |idx|^2).
    pub fn conjugate_on(&self, v: &ComplexMatrix, idx: &[usize]) -> Result<Self> {
        // validates idx
        Self::embed(&Self::identity(v.n), self.n, idx)?;
        if idx.len() != v.n {
            return Err(Error::DimensionMismatch {
                expected: v.n,
                found: idx.len(),
            });
        }
        let n = self.n;
        let m = v.n;
        let zero = Complex64::new(0.0, 0.0);
        let mut out = self.clone();
        // rows: A <- W A
        let mut row = vec![zero; m];
        for c in 0..n {
            for (a, slot) in row.iter_mut().enumerate() {
                *slot = (0..m).map(|b| v.data[a * m + b] * self.data[idx[b] * n + c]).sum();
            }
            for (a, &r) in idx.iter().enumerate() {
                out.data[r * n + c] = row[a];
            }
        }
        // columns: A <- A W*
        let mut col = vec![zero; m];
        for r in 0..n {
            for (a, slot) in col.iter_mut().enumerate() {
                *slot = (0..m)
                    .map(|b| out.data[r * n + idx[b]] * v.data[a * m + b].conj())
                    .sum();
            }
            for (a, &c) in idx.iter().enumerate() {
                out.data[r * n + c] = col[a];
            }
        }
        Ok(out)
    }

    /// `W U` where `W` is `g` embedded on `(p, q)`.
    pub(crate) fn left_multiply_pair_in_place(&mut self, p: usize, q: usize, g: [[Complex64; 2]; 2]) {
        let n = self.n;
        for c in 0..n {
            let up = self.data[p * n + c];
            let uq = self.data[q * n + c];
            self.data[p * n + c] = g[0][0] * up + g[0][1] * uq;
            self.data[q * n + c] = g[1][0] * up + g[1][1] * uq;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn random_matrix(rng: &mut ChaCha8Rng, n: usize) -> ComplexMatrix {
        ComplexMatrix::from_fn(n, |_, _| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).unwrap()
    }

    #[test]
    fn identity_is_neutral() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let a = random_matrix(&mut rng, 4);
        let i = ComplexMatrix::identity(4);
        assert_eq!(i.matmul(&a).unwrap(), a);
        assert_eq!(a.matmul(&i).unwrap(), a);
    }

    #[test]
    fn zero_annihilates() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let a = random_matrix(&mut rng, 3);
        let z = ComplexMatrix::zeros(3);
        assert_eq!(a.matmul(&z).unwrap().max_abs(), 0.0);
    }

    #[test]
    fn product_matches_triple_loop() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let a = random_matrix(&mut rng, 3);
        let b = random_matrix(&mut rng, 3);
        let p = a.matmul(&b).unwrap();
        for r in 0..3 {
            for col in 0..3 {
                let mut acc = c(0.0, 0.0);
                for k in 0..3 {
                    let (x, y) = (a[(r, k)], b[(k, col)]);
                    acc += c(x.re * y.re - x.im * y.im, x.re * y.im + x.im * y.re);
                }
                assert!((acc - p[(r, col)]).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn dimension_mismatch() {
        let a = ComplexMatrix::identity(2);
        let b = ComplexMatrix::identity(3);
        assert!(matches!(a.matmul(&b), Err(Error::DimensionMismatch { .. })));
        assert!(b.conjugate(&a).is_err());
    }

    #[test]
    fn adjoint_examples() {
        let sym = ComplexMatrix::from_real_rows(&[vec![1.0, 2.0], vec![2.0, 5.0]]).unwrap();
        assert_eq!(sym.adjoint(), sym);
        let a = ComplexMatrix::new(2, vec![c(0.0, 0.0), c(0.0, 1.0), c(0.0, 0.0), c(0.0, 0.0)]).unwrap();
        let expected = ComplexMatrix::new(2, vec![c(0.0, 0.0), c(0.0, 0.0), c(0.0, -1.0), c(0.0, 0.0)]).unwrap();
        assert_eq!(a.adjoint(), expected);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let r = random_matrix(&mut rng, 5);
        assert_eq!(r.adjoint().adjoint(), r);
    }

    #[test]
    fn conjugation_by_permutation_permutes_diagonal() {
        let d = ComplexMatrix::from_real_diagonal(&[1.0, 2.0, 3.0]).unwrap();
        let p = ComplexMatrix::permutation(&[2, 0, 1]).unwrap();
        let out = p.conjugate(&d).unwrap();
        assert_eq!(out.real_diagonal(), vec![3.0, 1.0, 2.0]);
        assert_eq!(ComplexMatrix::identity(3).conjugate(&d).unwrap(), d);
    }

    #[test]
    fn predicates() {
        let i = ComplexMatrix::identity(3);
        assert!(i.is_hermitian(1e-12) && i.is_unitary(1e-12) && i.is_projection(1e-12));
        let half = ComplexMatrix::from_real_rows(&[vec![0.5, 0.5], vec![0.5, 0.5]]).unwrap();
        assert!(half.is_projection(1e-15));
        let nil = ComplexMatrix::from_real_rows(&[vec![0.0, 1.0], vec![0.0, 0.0]]).unwrap();
        assert!(!nil.is_hermitian(1e-10));
        assert!(!nil.is_unitary(1e-10));
        assert!(!nil.is_projection(1e-10));
    }

    #[test]
    fn diagonal_read_off() {
        assert_eq!(ComplexMatrix::identity(4).diagonal(1e-10).unwrap(), vec![1.0; 4]);
        let y = [0.3, -2.0, 7.5];
        assert_eq!(ComplexMatrix::from_real_diagonal(&y).unwrap().diagonal(1e-10).unwrap(), y);
        let half = ComplexMatrix::from_real_rows(&[vec![0.5, 0.5], vec![0.5, 0.5]]).unwrap();
        assert_eq!(half.diagonal(1e-10).unwrap(), vec![0.5, 0.5]);
        let bad = ComplexMatrix::new(1, vec![c(1.0, 1e-3)]).unwrap();
        assert!(matches!(bad.diagonal(1e-10), Err(Error::ComplexDiagonal { index: 0, .. })));
    }

    #[test]
    fn rejects_bad_construction() {
        assert!(matches!(ComplexMatrix::new(0, vec![]), Err(Error::Empty)));
        assert!(matches!(ComplexMatrix::new(2, vec![c(0.0, 0.0); 3]), Err(Error::BadShape { .. })));
        assert!(matches!(
            ComplexMatrix::new(1, vec![c(f64::NAN, 0.0)]),
            Err(Error::NonFinite { index: 0 })
        ));
        assert!(ComplexMatrix::permutation(&[0, 0]).is_err());
    }

    #[test]
    fn tolerance_validation() {
        assert!(ToleranceConfig::default().validate().is_ok());
        let bad = ToleranceConfig {
            integer_tol: 0.3,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
        let neg = ToleranceConfig {
            eig_tol: -1.0,
            ..Default::default()
        };
        assert!(neg.validate().is_err());
    }

    #[test]
    fn pair_conjugation_matches_embedding() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let a = random_matrix(&mut rng, 5);
        let g = [
            [c(0.6, 0.0), c(0.0, -0.8)],
            [c(0.0, -0.8), c(0.6, 0.0)],
        ];
        let block = ComplexMatrix::new(2, vec![g[0][0], g[0][1], g[1][0], g[1][1]]).unwrap();
        let w = ComplexMatrix::embed(&block, 5, &[3, 1]).unwrap();
        let expected = w.conjugate(&a).unwrap();
        let mut got = a.clone();
        got.conjugate_pair_in_place(3, 1, g);
        assert!(got.sub(&expected).unwrap().max_abs() < 1e-14);
    }

    #[test]
    fn subset_conjugation_matches_embedding() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let a = random_matrix(&mut rng, 6);
        let v = random_matrix(&mut rng, 3);
        let idx = [4, 0, 2];
        let expected = ComplexMatrix::embed(&v, 6, &idx).unwrap().conjugate(&a).unwrap();
        let got = a.conjugate_on(&v, &idx).unwrap();
        assert!(got.sub(&expected).unwrap().max_abs() < 1e-12);
        assert!(a.conjugate_on(&v, &[4, 0]).is_err());
        assert!(a.conjugate_on(&v, &[4, 0, 4]).is_err());
    }

    #[test]
    fn matmul_is_associative() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for n in [1, 2, 5, 9, 16] {
            let (a, b, d) = (random_matrix(&mut rng, n), random_matrix(&mut rng, n), random_matrix(&mut rng, n));
            let left = a.matmul(&b).unwrap().matmul(&d).unwrap();
            let right = a.matmul(&b.matmul(&d).unwrap()).unwrap();
            assert!(left.sub(&right).unwrap().max_abs() < 1e-9);
        }
    }
}
