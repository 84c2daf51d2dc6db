//! Diagonals of projections on `l^2`: Kadison's obstruction and the two
//! constructive cases, realised at finite truncation depth.

mod case_a;
mod case_b;
mod tools;
mod spec;
mod sums;

pub use case_a::{build_case_a, plan_case_a, CaseABlock, CaseAPlan, MAX_CASE_A_DIM};
pub use case_b::build_case_b;
pub use tools::{
    block_projection_from_partition, chebyshev_coefficients, monotone_divergent_subsequence, Chebyshev, Direction,
    MonotoneSubsequence,
};
pub use spec::{Certificate, Generator, SequenceSpec, TailRule};
pub use sums::{feasibility, kadison_sums, FeasibilityCase, KadisonReport, SideSum};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, ToleranceConfig};
use crate::schur_horn::integer_defect;

/// What the infinite operator looks like beyond the truncation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Continuation {
    Zeros,
    Identity,
}

/// A finite projection whose diagonal reproduces part of a sequence.
#[derive(Debug, Clone, PartialEq)]
pub struct TruncatedProjection {
    pub matrix: ComplexMatrix,
    pub depth: usize,
    /// For each diagonal slot, the one-based sequence index it carries, or
    /// `None` for bookkeeping slots.
    pub positions: Vec<Option<u64>>,
    /// Bound on `|(P_{k+r} - P_k) e_t|^2` for covered `t`; case B only.
    pub residual_bound: Option<f64>,
    pub continuation: Continuation,
}

impl TruncatedProjection {
    /// Sequence indices present on the diagonal, in slot order.
    pub fn covered(&self) -> Vec<u64> {
        self.positions.iter().flatten().copied().collect()
    }

    /// `I - P`.
    pub fn complement(&self) -> Self {
        let n = self.matrix.dim();
        TruncatedProjection {
            matrix: ComplexMatrix::identity(n)
                .sub(&self.matrix)
                .expect("same dimension"),
            continuation: match self.continuation {
                Continuation::Zeros => Continuation::Identity,
                Continuation::Identity => Continuation::Zeros,
            },
            ..self.clone()
        }
    }

    /// The matrix extended to dimension `m` by its continuation.
    pub fn extended(&self, m: usize) -> Result<ComplexMatrix> {
        let fill = match self.continuation {
            Continuation::Zeros => 0.0,
            Continuation::Identity => 1.0,
        };
        self.matrix.padded(m, fill)
    }

    /// Largest `|P_tt - a_n|` over covered slots.
    pub fn diagonal_mismatch(&self, spec: &SequenceSpec) -> Result<f64> {
        let mut worst: f64 = 0.0;
        for (slot, pos) in self.positions.iter().enumerate() {
            if let Some(i) = pos {
                worst = worst.max((self.matrix[(slot, slot)] - spec.term(*i)?).norm());
            }
        }
        Ok(worst)
    }
}

/// `|(later - earlier) e_t|^2` with both matrices extended to a common size.
pub fn column_residual_sq(later: &TruncatedProjection, earlier: &TruncatedProjection, t: usize) -> Result<f64> {
    let m = later.matrix.dim().max(earlier.matrix.dim());
    if t >= m {
        return Err(Error::IndexOutOfRange { index: t, len: m });
    }
    let a = later.extended(m)?;
    let b = earlier.extended(m)?;
    Ok((0..m).map(|s| (a[(s, t)] - b[(s, t)]).norm_sqr()).sum())
}

/// Worst violation of the entry bounds every projection satisfies:
/// `|P_st|^2 <= min(P_tt, P_ss, 1 - P_tt, 1 - P_ss)` and
/// `sum_{s != t} |P_st|^2 <= min(P_tt, 1 - P_tt)`. Zero when all hold.
pub fn entry_bound_excess(p: &ComplexMatrix) -> f64 {
    let n = p.dim();
    let d = p.real_diagonal();
    let room = |i: usize| d[i].min(1.0 - d[i]);
    let mut worst: f64 = 0.0;
    for t in 0..n {
        let mut column = 0.0;
        for s in 0..n {
            if s == t {
                continue;
            }
            let e = p[(s, t)].norm_sqr();
            column += e;
            worst = worst.max(e - room(s).min(room(t)));
        }
        worst = worst.max(column - room(t));
    }
    worst
}

/// A finite-rank projection with diagonal `spec`, whose terms sum to an
/// integer `m`; its trace is `m`.
pub fn kadison13(spec: &SequenceSpec, depth: usize, tol: &ToleranceConfig) -> Result<TruncatedProjection> {
    let total = spec
        .total()
        .ok_or_else(|| Error::InvalidSpec("the terms must have a finite sum".into()))?;
    let (defect, _) = integer_defect(total);
    if defect > tol.integer_tol {
        return Err(Error::NonIntegerSum { defect });
    }
    let mut chain = build_case_b(spec, 0.5, depth, tol)?;
    Ok(chain.pop().expect("depth >= 1"))
}

/// A projection with diagonal `spec` whose complement has trace `m`, for
/// `sum (1 - t_j) = m`.
pub fn kadison14(spec: &SequenceSpec, depth: usize, tol: &ToleranceConfig) -> Result<TruncatedProjection> {
    Ok(kadison13(&spec.complement(), depth, tol)?.complement())
}
