//! A divergent sum: blocks with integer sums built from a monotone divergent
//! subsequence, then local conjugations that restore the true values.

use crate::error::{Error, Result};
use crate::linalg::ToleranceConfig;
use crate::majorization::verify_concentration;
use crate::schur_horn::{conjugate_to_diagonal, integer_defect};

use super::tools::{block_projection_from_partition, chebyshev_coefficients, monotone_divergent_subsequence, Direction};
use super::spec::SequenceSpec;
use super::sums::{feasibility, FeasibilityCase};
use super::{Continuation, TruncatedProjection};

/// Largest matrix the construction will assemble.
pub const MAX_CASE_A_DIM: usize = 2048;

/// One diagonal block: the `t`-part absorbs the previous excess, then one
/// leftover term, then the `s`-part carries the new excess.
#[derive(Debug, Clone, PartialEq)]
pub struct CaseABlock {
    pub t_indices: Vec<u64>,
    pub t_weights: Vec<f64>,
    /// Excess absorbed by the `t`-part (zero for the first block).
    pub delta_in: f64,
    pub c_index: Option<u64>,
    pub s_indices: Vec<u64>,
    pub s_weights: Vec<f64>,
    /// Least positive amount making the block sum an integer.
    pub delta_out: f64,
    /// Perturbed values in slot order: `t`-part, leftover, `s`-part.
    pub entries: Vec<f64>,
}

impl CaseABlock {
    fn len(&self) -> usize {
        self.entries.len()
    }

    fn indices(&self) -> impl Iterator<Item = u64> + '_ {
        self.t_indices.iter().chain(&self.c_index).chain(&self.s_indices).copied()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CaseAPlan {
    /// The construction runs on the complementary sequence.
    pub flipped: bool,
    /// Oriented (possibly complemented) sequence the blocks refer to.
    pub oriented: SequenceSpec,
    pub blocks: Vec<CaseABlock>,
}

fn least_positive_gap(s: f64) -> f64 {
    let g = s.ceil() - s;
    if g == 0.0 {
        1.0
    } else {
        g
    }
}

/// Bookkeeping for `depth` blocks, sampling at most `budget` terms.
pub fn plan_case_a(spec: &SequenceSpec, depth: usize, budget: usize, tol: &ToleranceConfig) -> Result<CaseAPlan> {
    if depth == 0 {
        return Err(Error::InvalidParameter("depth must be at least 1".into()));
    }
    let report = feasibility(spec, 0.5, tol)?;
    if report.case != FeasibilityCase::CaseA {
        return Err(Error::WrongCase {
            expected: "a divergent sum",
            found: "both sums finite",
        });
    }
    let mut flipped = !spec.tail().has_divergent_low();
    let mut oriented = if flipped { spec.complement() } else { spec.clone() };
    let mut sub = monotone_divergent_subsequence(&oriented, budget)?;
    if sub.direction == Direction::NonDecreasing {
        flipped = !flipped;
        oriented = oriented.complement();
        sub.values.iter_mut().for_each(|v| *v = 1.0 - *v);
    }

    let b: Vec<(u64, f64)> = sub.indices.iter().copied().zip(sub.values.iter().copied()).collect();
    let in_b: std::collections::HashSet<u64> = sub.indices.iter().copied().collect();
    let mut leftovers = (1..=budget as u64).filter(|i| !in_b.contains(i));

    let b1 = b[0].1;
    let threshold = 1.0 / (1.0 - b1);
    let exhausted = |what: &str| Error::BudgetExhausted {
        budget,
        what: what.to_string(),
    };

    let delta1 = least_positive_gap(b1);
    let mut blocks = vec![CaseABlock {
        t_indices: vec![],
        t_weights: vec![],
        delta_in: 0.0,
        c_index: None,
        s_indices: vec![b[0].0],
        s_weights: vec![1.0],
        delta_out: delta1,
        entries: vec![b1 + delta1],
    }];
    let mut next = 1;
    let mut size = 1;

    for _ in 2..=depth {
        let delta_in = blocks.last().expect("first block").delta_out;
        let cheb = chebyshev_coefficients(b[next..].iter().map(|p| p.1), delta_in, b.len())
            .map_err(|_| exhausted("subsequence too short for the t-part"))?;
        let t_part = &b[next..next + cheb.n];
        next += cheb.n;
        let mut entries: Vec<f64> = t_part.iter().zip(&cheb.t).map(|(p, t)| p.1 - t * delta_in).collect();

        let c_index = leftovers.next();
        if let Some(c) = c_index {
            entries.push(oriented.term(c)?);
        }

        let mut m = 0;
        let mut s_sum = 0.0;
        while s_sum < threshold {
            let &(_, v) = b.get(next + m).ok_or_else(|| exhausted("subsequence too short for the s-part"))?;
            s_sum += v;
            m += 1;
        }
        let s_part = &b[next..next + m];
        next += m;
        let s_weights: Vec<f64> = s_part.iter().map(|p| p.1 / s_sum).collect();
        let delta_out = least_positive_gap(entries.iter().sum::<f64>() + s_sum);
        entries.extend(s_part.iter().zip(&s_weights).map(|(p, s)| p.1 + s * delta_out));

        size += entries.len();
        if size > MAX_CASE_A_DIM {
            return Err(exhausted("matrix dimension limit reached"));
        }
        blocks.push(CaseABlock {
            t_indices: t_part.iter().map(|p| p.0).collect(),
            t_weights: cheb.t,
            delta_in,
            c_index,
            s_indices: s_part.iter().map(|p| p.0).collect(),
            s_weights,
            delta_out,
            entries,
        });
    }

    for (k, block) in blocks.iter().enumerate() {
        let slack = tol.structural_tol;
        if let Some(v) = block.entries.iter().find(|v| !(-slack..=1.0 + slack).contains(*v)) {
            return Err(Error::Numerical(format!("block {k} has entry {v} outside [0, 1]")));
        }
        let (defect, _) = integer_defect(block.entries.iter().sum());
        if defect > tol.integer_tol {
            return Err(Error::NonIntegerBlock { block: k, defect });
        }
    }
    Ok(CaseAPlan {
        flipped,
        oriented,
        blocks,
    })
}

/// Projection on the constructed blocks. The `s`-part of the last block
/// still carries its excess and is reported as uncovered.
pub fn build_case_a(
    spec: &SequenceSpec,
    depth: usize,
    budget: usize,
    tol: &ToleranceConfig,
) -> Result<TruncatedProjection> {
    let plan = plan_case_a(spec, depth, budget, tol)?;
    let d: Vec<f64> = plan.blocks.iter().flat_map(|b| b.entries.iter().copied()).collect();
    let mut ranges = Vec::with_capacity(plan.blocks.len());
    let mut off = 0;
    for b in &plan.blocks {
        ranges.push((off..off + b.len()).collect::<Vec<usize>>());
        off += b.len();
    }
    let mut p = block_projection_from_partition(&d, &ranges, tol)?;

    let s_slots = |k: usize| -> Vec<usize> {
        let b = &plan.blocks[k];
        ranges[k][b.len() - b.s_indices.len()..].to_vec()
    };
    let t_slots = |k: usize| -> Vec<usize> { ranges[k][..plan.blocks[k].t_indices.len()].to_vec() };
    let value = |i: &u64| plan.oriented.term(*i);

    for k in 0..plan.blocks.len().saturating_sub(1) {
        let (s, t) = (s_slots(k), t_slots(k + 1));
        let x: Vec<f64> = plan.blocks[k].s_indices.iter().map(value).collect::<Result<_>>()?;
        let y: Vec<f64> = plan.blocks[k + 1].t_indices.iter().map(value).collect::<Result<_>>()?;
        let x_prime: Vec<f64> = s.iter().map(|&i| d[i]).collect();
        let y_prime: Vec<f64> = t.iter().map(|&i| d[i]).collect();
        if !verify_concentration(&x, &x_prime, &y, &y_prime, tol.structural_tol)? {
            return Err(Error::Numerical(format!("group {k} fails the concentration check")));
        }
        let slots: Vec<usize> = s.iter().chain(&t).copied().collect();
        let target: Vec<f64> = x.iter().chain(&y).copied().collect();
        let (_, v) = conjugate_to_diagonal(&p.principal_submatrix(&slots)?, &target, tol)?;
        p = p.conjugate_on(&v, &slots)?;
    }
    let p = p.hermitian_part();

    let last = plan.blocks.len() - 1;
    let mut positions: Vec<Option<u64>> = plan.blocks.iter().flat_map(|b| b.indices().map(Some)).collect();
    for slot in s_slots(last) {
        positions[slot] = None;
    }
    let out = TruncatedProjection {
        matrix: p,
        depth,
        positions,
        residual_bound: None,
        continuation: Continuation::Zeros,
    };
    Ok(if plan.flipped { out.complement() } else { out })
}
