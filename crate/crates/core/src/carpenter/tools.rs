//! Building blocks for the infinite constructions.

use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, ToleranceConfig};
use crate::schur_horn::{carpenter_finite, integer_defect};

use super::spec::SequenceSpec;

/// Convex weights spreading `delta` over the first `n` terms of a stream.
#[derive(Debug, Clone, PartialEq)]
pub struct Chebyshev {
    pub n: usize,
    /// `t_j = b_j / (b_1 + .. + b_n)`; sums to 1 and `delta t_j <= b_j`.
    pub t: Vec<f64>,
}

/// Smallest `n` with `b_1 + .. + b_n >= delta`, examining at most `budget`
/// terms.
pub fn chebyshev_coefficients(
    b: impl IntoIterator<Item = f64>,
    delta: f64,
    budget: usize,
) -> Result<Chebyshev> {
    if !(delta.is_finite() && delta > 0.0) {
        return Err(Error::InvalidParameter(format!("delta = {delta} must be positive")));
    }
    let mut taken = Vec::new();
    let mut sum = 0.0;
    for v in b.into_iter().take(budget) {
        if !(v.is_finite() && v >= 0.0) {
            return Err(Error::InvalidParameter(format!("stream value {v} is not a nonnegative number")));
        }
        taken.push(v);
        sum += v;
        if sum >= delta {
            return Ok(Chebyshev {
                n: taken.len(),
                t: taken.iter().map(|v| v / sum).collect(),
            });
        }
    }
    Err(Error::BudgetExhausted {
        budget,
        what: format!("partial sums stay below {delta}"),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    NonIncreasing,
    NonDecreasing,
}

/// A monotone reordering of selected sequence terms.
#[derive(Debug, Clone, PartialEq)]
pub struct MonotoneSubsequence {
    /// One-based sequence indices, in monotone order.
    pub indices: Vec<u64>,
    pub values: Vec<f64>,
    pub direction: Direction,
    /// Detected nonzero accumulation point.
    pub accumulation: Option<f64>,
    pub partial_sum: f64,
}

/// Heuristic selection among the first `budget` terms of a sequence with a
/// divergent tail.
///
/// A nonzero accumulation point is declared when the low-side certificate is
/// a constant, or when the largest term of the last quarter of the sample is
/// at least 0.9 times the largest of the second quarter. It is then taken to
/// be that last-quarter maximum `c`, and the terms within `c/4` on the more
/// populated side of `c` are kept (ties go to the side above). Otherwise all
/// sampled terms in `(0, 1)` are reordered non-increasingly.
pub fn monotone_divergent_subsequence(spec: &SequenceSpec, budget: usize) -> Result<MonotoneSubsequence> {
    if !spec.tail().has_divergent() {
        return Err(Error::WrongCase {
            expected: "a divergent tail",
            found: "a summable tail",
        });
    }
    let mut sample: Vec<(u64, f64)> = Vec::new();
    for i in 1..=budget as u64 {
        let v = spec.term(i)?;
        if v > 0.0 && v < 1.0 {
            sample.push((i, v));
        }
    }
    if sample.is_empty() {
        return Err(Error::BudgetExhausted {
            budget,
            what: "no terms in (0, 1)".into(),
        });
    }

    let max_of = |s: &[(u64, f64)]| s.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max);
    let q = sample.len() / 4;
    let constant_cert = spec.tail().low_certificate().is_some_and(|c| c.is_constant());
    let accumulation = if q == 0 {
        constant_cert.then(|| max_of(&sample))
    } else {
        let late = max_of(&sample[3 * q..]);
        (constant_cert || late >= 0.9 * max_of(&sample[q..2 * q])).then_some(late)
    };

    let (mut chosen, direction) = match accumulation {
        Some(c) => {
            let eps = c / 4.0;
            let above: Vec<_> = sample.iter().copied().filter(|&(_, v)| v >= c && v <= c + eps).collect();
            let below: Vec<_> = sample.iter().copied().filter(|&(_, v)| v <= c && v >= c - eps).collect();
            if above.len() >= below.len() {
                (above, Direction::NonIncreasing)
            } else {
                (below, Direction::NonDecreasing)
            }
        }
        None => (sample, Direction::NonIncreasing),
    };
    match direction {
        Direction::NonIncreasing => chosen.sort_by(|a, b| b.1.total_cmp(&a.1)),
        Direction::NonDecreasing => chosen.sort_by(|a, b| a.1.total_cmp(&b.1)),
    }
    Ok(MonotoneSubsequence {
        partial_sum: chosen.iter().map(|p| p.1).sum(),
        indices: chosen.iter().map(|p| p.0).collect(),
        values: chosen.iter().map(|p| p.1).collect(),
        direction,
        accumulation,
    })
}

/// Block-diagonal (up to the coordinate grouping) projection with diagonal
/// `d`; each block is a finite Carpenter projection.
///
/// `blocks` are zero-based index sets partitioning `0..d.len()`.
pub fn block_projection_from_partition(
    d: &[f64],
    blocks: &[Vec<usize>],
    tol: &ToleranceConfig,
) -> Result<ComplexMatrix> {
    let n = d.len();
    if n == 0 {
        return Err(Error::Empty);
    }
    let mut owner = vec![None; n];
    for (b, block) in blocks.iter().enumerate() {
        for &i in block {
            if i >= n {
                return Err(Error::IndexOutOfRange { index: i, len: n });
            }
            if owner[i].replace(b).is_some() {
                return Err(Error::InvalidParameter(format!("coordinate {i} lies in two blocks")));
            }
        }
    }
    if let Some(i) = owner.iter().position(Option::is_none) {
        return Err(Error::InvalidParameter(format!("coordinate {i} lies in no block")));
    }

    let mut out = ComplexMatrix::zeros(n);
    for (b, block) in blocks.iter().enumerate() {
        if block.is_empty() {
            continue;
        }
        let values: Vec<f64> = block.iter().map(|&i| d[i]).collect();
        let (defect, _) = integer_defect(values.iter().sum());
        if defect > tol.integer_tol {
            return Err(Error::NonIntegerBlock { block: b, defect });
        }
        let p = carpenter_finite(&values, tol)?;
        for (r, &gr) in block.iter().enumerate() {
            for (c, &gc) in block.iter().enumerate() {
                out.set(gr, gc, p[(r, c)]);
            }
        }
    }
    Ok(out)
}
