//! Majorisation of real vectors.
//!
//! `x ≺ y` when the sorted partial sums of `x` are dominated by those of `y`
//! and the totals agree. Besides the predicate this module carries an
//! independent oracle (sums of distances to every breakpoint), the T-transform
//! decomposition of `x` out of `y`, and the doubly stochastic matrices that
//! link the two.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::ComplexMatrix;

fn check_vector(x: &[f64]) -> Result<()> {
    if x.is_empty() {
        return Err(Error::Empty);
    }
    if let Some(index) = x.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite { index });
    }
    Ok(())
}

fn check_pair(x: &[f64], y: &[f64]) -> Result<()> {
    check_vector(x)?;
    check_vector(y)?;
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch {
            expected: x.len(),
            found: y.len(),
        });
    }
    Ok(())
}

fn sorted_desc(x: &[f64]) -> Vec<f64> {
    let mut v = x.to_vec();
    v.sort_by(|a, b| b.total_cmp(a));
    v
}

/// Indices of `x` ordered by non-increasing value; ties keep index order.
pub(crate) fn argsort_desc(x: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..x.len()).collect();
    idx.sort_by(|&a, &b| x[b].total_cmp(&x[a]).then(a.cmp(&b)));
    idx
}

/// Sum of the `k` largest entries.
pub fn top_k_sum(x: &[f64], k: usize) -> Result<f64> {
    check_vector(x)?;
    if k == 0 || k > x.len() {
        return Err(Error::IndexOutOfRange { index: k, len: x.len() });
    }
    Ok(sorted_desc(x).iter().take(k).sum())
}

/// Sum of the `k` smallest entries.
pub fn bottom_k_sum(x: &[f64], k: usize) -> Result<f64> {
    check_vector(x)?;
    if k == 0 || k > x.len() {
        return Err(Error::IndexOutOfRange { index: k, len: x.len() });
    }
    Ok(sorted_desc(x).iter().rev().take(k).sum())
}

/// Per-level slack of the majorisation inequalities.
#[derive(Debug, Clone, PartialEq)]
pub struct MajorizationProfile {
    /// `top_k(y) - top_k(x)` for `k = 1..n-1`.
    pub slacks: Vec<f64>,
    /// `sum(y) - sum(x)`.
    pub total_gap: f64,
}

impl MajorizationProfile {
    /// Smallest slack, with the total counted as `-|gap|`.
    pub fn worst_slack(&self) -> f64 {
        self.slacks
            .iter()
            .copied()
            .fold(-self.total_gap.abs(), f64::min)
    }

    pub fn holds(&self, tol: f64) -> bool {
        self.total_gap.abs() <= tol && self.slacks.iter().all(|s| *s >= -tol)
    }
}

pub fn majorization_profile(x: &[f64], y: &[f64]) -> Result<MajorizationProfile> {
    check_pair(x, y)?;
    let (xs, ys) = (sorted_desc(x), sorted_desc(y));
    let mut slacks = Vec::with_capacity(x.len().saturating_sub(1));
    let (mut sx, mut sy) = (0.0, 0.0);
    for k in 0..x.len() - 1 {
        sx += xs[k];
        sy += ys[k];
        slacks.push(sy - sx);
    }
    let total_gap = y.iter().sum::<f64>() - x.iter().sum::<f64>();
    Ok(MajorizationProfile { slacks, total_gap })
}

/// `x ≺ y` up to an additive tolerance on every partial sum and the total.
pub fn majorizes(x: &[f64], y: &[f64], tol: f64) -> Result<bool> {
    Ok(majorization_profile(x, y)?.holds(tol))
}

/// Independent check of `x ≺ y`: equal totals and
/// `sum |x_j - t| <= sum |y_j - t|` at every breakpoint `t`.
///
/// Both sides are piecewise linear in `t` with kinks only at entries of `x`
/// or `y`, and agree outside their range once the totals match, so the
/// breakpoints suffice. The distance inequality is allowed `2 * tol`, which
/// is what `tol` on the partial sums turns into.
pub fn majorizes_abs_oracle(x: &[f64], y: &[f64], tol: f64) -> Result<bool> {
    check_pair(x, y)?;
    let total: f64 = x.iter().sum::<f64>() - y.iter().sum::<f64>();
    if total.abs() > tol {
        return Ok(false);
    }
    let spread = |v: &[f64], t: f64| v.iter().map(|a| (a - t).abs()).sum::<f64>();
    Ok(x
        .iter()
        .chain(y)
        .all(|&t| spread(x, t) <= spread(y, t) + 2.0 * tol))
}

/// One T-transform: mixes coordinates `j` and `k` with weight `t`.
///
/// Indices are zero-based here; the file format uses one-based indices.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "TTransformRecord", into = "TTransformRecord")]
pub struct TTransform {
    j: usize,
    k: usize,
    t: f64,
}

#[derive(Serialize, Deserialize)]
struct TTransformRecord {
    j: usize,
    k: usize,
    t: f64,
}

impl TryFrom<TTransformRecord> for TTransform {
    type Error = Error;

    fn try_from(r: TTransformRecord) -> Result<Self> {
        if r.j == 0 || r.k == 0 {
            return Err(Error::Format("T-transform indices are 1-based".into()));
        }
        TTransform::new(r.j - 1, r.k - 1, r.t)
    }
}

impl From<TTransform> for TTransformRecord {
    fn from(t: TTransform) -> Self {
        Self {
            j: t.j + 1,
            k: t.k + 1,
            t: t.t,
        }
    }
}

impl TTransform {
    pub fn new(j: usize, k: usize, t: f64) -> Result<Self> {
        if j == k {
            return Err(Error::InvalidParameter("T-transform needs two distinct indices".into()));
        }
        if !(0.0..=1.0).contains(&t) {
            return Err(Error::InvalidParameter(format!("T-transform weight {t} outside [0, 1]")));
        }
        Ok(Self { j, k, t })
    }

    pub fn j(&self) -> usize {
        self.j
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn t(&self) -> f64 {
        self.t
    }
}

/// `T x = (.., t x_j + (1-t) x_k, .., (1-t) x_j + t x_k, ..)`.
pub fn apply_t_transform(tr: &TTransform, x: &[f64]) -> Result<Vec<f64>> {
    check_vector(x)?;
    for idx in [tr.j, tr.k] {
        if idx >= x.len() {
            return Err(Error::IndexOutOfRange { index: idx, len: x.len() });
        }
    }
    let mut out = x.to_vec();
    let (a, b) = (x[tr.j], x[tr.k]);
    out[tr.j] = tr.t * a + (1.0 - tr.t) * b;
    out[tr.k] = (1.0 - tr.t) * a + tr.t * b;
    Ok(out)
}

/// Output of [`decompose_t_transforms`].
#[derive(Debug, Clone, PartialEq)]
pub struct TDecomposition {
    /// Applied to `y` in order.
    pub transforms: Vec<TTransform>,
    /// `assignment[i]` is the coordinate of `T_r..T_1 y` that carries `x[i]`.
    pub assignment: Vec<usize>,
}

impl TDecomposition {
    /// Replays the transforms on `y` and reads the result in `x`'s order.
    pub fn replay(&self, y: &[f64]) -> Result<Vec<f64>> {
        let mut w = y.to_vec();
        for tr in &self.transforms {
            w = apply_t_transform(tr, &w)?;
        }
        Ok(self.assignment.iter().map(|&p| w[p]).collect())
    }
}

/// T-transforms `T_1..T_r` (`r <= n - 1`) with `T_r..T_1 y` a rearrangement
/// of `x`.
///
/// Each step places the largest remaining `x` value: with the remaining
/// coordinates sorted non-increasingly, the top one is mixed with the first
/// coordinate whose value does not exceed the target, and the top coordinate
/// is then retired.
pub fn decompose_t_transforms(x: &[f64], y: &[f64], tol: f64) -> Result<TDecomposition> {
    let profile = majorization_profile(x, y)?;
    if !profile.holds(tol) {
        return Err(Error::NotMajorized {
            slack: profile.worst_slack(),
        });
    }
    let n = x.len();
    let mut w = y.to_vec();
    let mut active: Vec<usize> = (0..n).collect();
    let mut assignment = vec![0; n];
    let mut transforms = Vec::new();

    for &xi in &argsort_desc(x) {
        active.sort_by(|&a, &b| w[b].total_cmp(&w[a]).then(a.cmp(&b)));
        let top = active[0];
        if active.len() > 1 {
            let target = x[xi];
            let partner = match active.iter().position(|&p| w[p] <= target) {
                Some(0) => None,
                Some(pos) => Some(active[pos]),
                // rounding left every remaining value a hair above target
                None => active.last().copied(),
            };
            if let Some(other) = partner {
                let (hi, lo) = (w[top], w[other]);
                let t = if hi > lo {
                    ((target - lo) / (hi - lo)).clamp(0.0, 1.0)
                } else {
                    1.0
                };
                let tr = TTransform::new(top, other, t)?;
                w = apply_t_transform(&tr, &w)?;
                transforms.push(tr);
            }
        }
        assignment[xi] = top;
        active.remove(0);
    }
    Ok(TDecomposition {
        transforms,
        assignment,
    })
}

/// Square matrix with non-negative entries whose rows and columns sum to 1.
#[derive(Debug, Clone, PartialEq)]
pub struct DoublyStochasticMatrix {
    n: usize,
    entries: Vec<f64>,
}

impl DoublyStochasticMatrix {
    pub fn new(n: usize, entries: Vec<f64>, tol: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::Empty);
        }
        if entries.len() != n * n {
            return Err(Error::BadShape {
                expected: n * n,
                found: entries.len(),
            });
        }
        if let Some(index) = entries.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { index });
        }
        if let Some(i) = entries.iter().position(|&v| v < -tol) {
            return Err(Error::NotDoublyStochastic(format!(
                "negative entry {} at ({}, {})",
                entries[i],
                i / n,
                i % n
            )));
        }
        for r in 0..n {
            let row: f64 = entries[r * n..(r + 1) * n].iter().sum();
            let col: f64 = (0..n).map(|c| entries[c * n + r]).sum();
            if (row - 1.0).abs() > tol || (col - 1.0).abs() > tol {
                return Err(Error::NotDoublyStochastic(format!(
                    "line {r} sums to {row} (row) / {col} (column)"
                )));
            }
        }
        Ok(Self { n, entries })
    }

    pub fn identity(n: usize) -> Self {
        let mut entries = vec![0.0; n * n];
        for i in 0..n {
            entries[i * n + i] = 1.0;
        }
        Self { n, entries }
    }

    /// The matrix of a single T-transform on `n` coordinates.
    pub fn from_t_transform(n: usize, tr: &TTransform) -> Result<Self> {
        if tr.j >= n || tr.k >= n {
            return Err(Error::IndexOutOfRange {
                index: tr.j.max(tr.k),
                len: n,
            });
        }
        let mut m = Self::identity(n);
        m.entries[tr.j * n + tr.j] = tr.t;
        m.entries[tr.k * n + tr.k] = tr.t;
        m.entries[tr.j * n + tr.k] = 1.0 - tr.t;
        m.entries[tr.k * n + tr.j] = 1.0 - tr.t;
        Ok(m)
    }

    /// `self * other`; doubly stochastic matrices are closed under products.
    pub fn compose(&self, other: &Self) -> Result<Self> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                found: other.n,
            });
        }
        let n = self.n;
        let mut entries = vec![0.0; n * n];
        for r in 0..n {
            for k in 0..n {
                let a = self.entries[r * n + k];
                for c in 0..n {
                    entries[r * n + c] += a * other.entries[k * n + c];
                }
            }
        }
        Ok(Self { n, entries })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.entries[r * self.n + c]
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }
}

/// `A y`; the result is always majorised by `y`.
pub fn apply_doubly_stochastic(a: &DoublyStochasticMatrix, y: &[f64]) -> Result<Vec<f64>> {
    check_vector(y)?;
    if y.len() != a.n {
        return Err(Error::DimensionMismatch {
            expected: a.n,
            found: y.len(),
        });
    }
    Ok((0..a.n)
        .map(|r| (0..a.n).map(|c| a.get(r, c) * y[c]).sum())
        .collect())
}

/// `(1, .., 1, δ, 0, .., 0)` with `sum(x) = k + δ`: the vector of the same
/// total that majorises every `[0, 1]`-vector with that total.
///
/// `δ <= integer_tol` is dropped, so an integer total gives a 0/1 vector.
pub fn flag_majorant(x: &[f64], integer_tol: f64) -> Result<Vec<f64>> {
    check_vector(x)?;
    if let Some(index) = x
        .iter()
        .position(|&v| v < -integer_tol || v > 1.0 + integer_tol)
    {
        return Err(Error::OutsideUnitInterval { index, value: x[index] });
    }
    let n = x.len();
    let s: f64 = x.iter().sum();
    let k = ((s + integer_tol).floor() as usize).min(n);
    let delta = s - k as f64;
    let mut out = vec![0.0; n];
    out[..k].iter_mut().for_each(|v| *v = 1.0);
    if delta > integer_tol && k < n {
        out[k] = delta;
    }
    Ok(out)
}

/// Checks the hypotheses under which `(x, y) ≺ (x', y')`: `x' >= x`,
/// `y >= y'` entrywise, `min x >= max y`, and equal totals.
pub fn verify_concentration(
    x: &[f64],
    x_prime: &[f64],
    y: &[f64],
    y_prime: &[f64],
    tol: f64,
) -> Result<bool> {
    if x.len() != x_prime.len() {
        return Err(Error::DimensionMismatch {
            expected: x.len(),
            found: x_prime.len(),
        });
    }
    if y.len() != y_prime.len() {
        return Err(Error::DimensionMismatch {
            expected: y.len(),
            found: y_prime.len(),
        });
    }
    let dominated_x = x.iter().zip(x_prime).all(|(a, b)| *b >= a - tol);
    let dominated_y = y.iter().zip(y_prime).all(|(a, b)| *a >= b - tol);
    let min_x = x.iter().copied().fold(f64::INFINITY, f64::min);
    let max_y = y.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let before: f64 = x.iter().chain(y).sum();
    let after: f64 = x_prime.iter().chain(y_prime).sum();
    Ok(dominated_x && dominated_y && min_x >= max_y - tol && (before - after).abs() <= tol)
}

/// `B_jk = |U_jk|^2` for a unitary `U`.
pub fn orthostochastic_from_unitary(u: &ComplexMatrix, tol: f64) -> Result<DoublyStochasticMatrix> {
    let residual = u.unitary_residual();
    if residual > tol {
        return Err(Error::NotUnitary { residual });
    }
    let entries = u.as_slice().iter().map(|z| z.norm_sqr()).collect();
    // row/column sums of |U|^2 are diagonal entries of UU*, U*U
    DoublyStochasticMatrix::new(u.dim(), entries, 4.0 * tol * u.dim() as f64)
}
