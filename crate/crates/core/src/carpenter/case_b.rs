//! Both sums finite with integer difference: an increasing chain of finite
//! projections whose columns converge.

use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, ToleranceConfig};
use crate::schur_horn::{carpenter_finite, conjugate_to_diagonal};
use crate::Complex64;

use super::spec::SequenceSpec;
use super::sums::{feasibility, positive_infinitely_often, side_last, sums_after, FeasibilityCase, Side};
use super::{Continuation, TruncatedProjection};

/// Sequence indices examined per selection step.
const SCAN_BUDGET: u64 = 1_000_000;

struct Cursor {
    side: Side,
    /// Every member of the side up to this index has been taken.
    at: u64,
    last: Option<u64>,
}

impl Cursor {
    fn rest(&self, spec: &SequenceSpec, alpha: f64) -> Result<f64> {
        let (low, high) = sums_after(spec, self.at, alpha)?;
        let s = match self.side {
            Side::Low => low,
            Side::High => high,
        };
        s.finite()
            .ok_or_else(|| Error::Numerical("unexpected divergent side in a summable construction".into()))
    }

    fn next_member(&self, spec: &SequenceSpec, alpha: f64) -> Result<Option<u64>> {
        let mut i = self.at + 1;
        loop {
            if self.last.is_some_and(|l| i > l) {
                return Ok(None);
            }
            if i - self.at > SCAN_BUDGET {
                return Err(Error::BudgetExhausted {
                    budget: SCAN_BUDGET as usize,
                    what: "no further member of the side found".into(),
                });
            }
            if self.side.contains(spec.term(i)?, alpha) {
                return Ok(Some(i));
            }
            i += 1;
        }
    }

    /// Takes members in index order (at least one while any remain) until
    /// `done(rest)` holds. Returns the new members and the final rest.
    fn advance(
        &mut self,
        spec: &SequenceSpec,
        alpha: f64,
        done: impl Fn(f64) -> bool,
    ) -> Result<(Vec<u64>, f64)> {
        let mut picked = Vec::new();
        loop {
            let rest = self.rest(spec, alpha)?;
            if !picked.is_empty() && done(rest) {
                return Ok((picked, rest));
            }
            match self.next_member(spec, alpha)? {
                Some(i) => {
                    picked.push(i);
                    self.at = i;
                }
                None if done(rest) => return Ok((picked, rest)),
                None => {
                    return Err(Error::Numerical(format!(
                        "side exhausted with residual {rest} still too large"
                    )))
                }
            }
        }
    }
}

/// `P_1 .. P_depth`. `P_k` carries the terms of the first `k` selections on
/// its leading diagonal, then the residual `delta_k - mu_k < 2^-k`.
///
/// When only finitely many low terms are positive but infinitely many high
/// terms are, the chain is built for the complement and `I - P_k` returned.
pub fn build_case_b(
    spec: &SequenceSpec,
    alpha: f64,
    depth: usize,
    tol: &ToleranceConfig,
) -> Result<Vec<TruncatedProjection>> {
    if depth == 0 {
        return Err(Error::InvalidParameter("depth must be at least 1".into()));
    }
    let report = feasibility(spec, alpha, tol)?;
    match report.case {
        FeasibilityCase::CaseBFeasible => {}
        FeasibilityCase::Infeasible => {
            return Err(Error::Infeasible {
                defect: report.defect.unwrap_or(f64::NAN),
            })
        }
        FeasibilityCase::CaseA => {
            return Err(Error::WrongCase {
                expected: "both sums finite",
                found: "a divergent sum",
            })
        }
    }
    let low_forever = positive_infinitely_often(spec.tail(), Side::Low);
    let high_forever = positive_infinitely_often(spec.tail(), Side::High);
    if !low_forever && high_forever {
        let chain = chain(&spec.complement(), alpha, depth, tol)?;
        return Ok(chain.iter().map(TruncatedProjection::complement).collect());
    }
    chain(spec, alpha, depth, tol)
}

fn chain(spec: &SequenceSpec, alpha: f64, depth: usize, tol: &ToleranceConfig) -> Result<Vec<TruncatedProjection>> {
    let mut low = Cursor {
        side: Side::Low,
        at: 0,
        last: side_last(spec, Side::Low, alpha),
    };
    let mut high = Cursor {
        side: Side::High,
        at: 0,
        last: side_last(spec, Side::High, alpha),
    };
    let mut out: Vec<TruncatedProjection> = Vec::with_capacity(depth);
    let mut p = ComplexMatrix::zeros(1);
    let mut positions: Vec<Option<u64>> = Vec::new();

    for k in 1..=depth {
        let target = 0.5f64.powi(k as i32);
        let (n_new, delta) = low.advance(spec, alpha, |rest| rest < target)?;
        let (m_new, mu) = high.advance(spec, alpha, |rest| rest < delta || rest == 0.0)?;
        let beta = delta - mu;

        let mut fresh: Vec<u64> = n_new.iter().chain(&m_new).copied().collect();
        fresh.sort_unstable();
        let mut x: Vec<f64> = fresh.iter().map(|&i| spec.term(i)).collect::<Result<_>>()?;
        x.push(beta);

        if k == 1 {
            p = carpenter_finite(&x, tol)?;
            positions = fresh.iter().map(|&i| Some(i)).collect();
            positions.push(None);
        } else if !fresh.is_empty() {
            let l = p.dim();
            let grown = l + fresh.len();
            let mut q = p.padded(grown, 0.0)?;
            // promote |M| of the new zero slots to ones
            for s in l..l + m_new.len() {
                q.set(s, s, Complex64::new(1.0, 0.0));
            }
            let slots: Vec<usize> = std::iter::once(l - 1).chain(l..grown).collect();
            let block = q.principal_submatrix(&slots)?;
            let (_, v) = conjugate_to_diagonal(&block, &x, tol)?;
            p = q.conjugate_on(&v, &slots)?.hermitian_part();
            positions[l - 1] = Some(fresh[0]);
            positions.extend(fresh[1..].iter().map(|&i| Some(i)));
            positions.push(None);
        }
        out.push(TruncatedProjection {
            matrix: p.clone(),
            depth: k,
            positions: positions.clone(),
            residual_bound: Some(6.0 * target),
            continuation: Continuation::Zeros,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::carpenter::spec::TailRule;
    use crate::carpenter::{column_residual_sq, entry_bound_excess};

    fn tol() -> ToleranceConfig {
        ToleranceConfig::default()
    }

    fn interleaved() -> SequenceSpec {
        SequenceSpec::new(
            vec![],
            TailRule::interleave(
                TailRule::GeometricLow { c: 0.5, r: 0.5 },
                TailRule::GeometricHigh { c: 0.5, r: 0.5 },
            ),
        )
        .unwrap()
    }

    fn check_chain(spec: &SequenceSpec, chain: &[TruncatedProjection]) {
        for p in chain {
            assert!(p.matrix.is_projection(1e-9), "depth {}", p.depth);
            assert!(p.diagonal_mismatch(spec).unwrap() <= 1e-9);
            assert!(entry_bound_excess(&p.matrix) <= 1e-9);
        }
        for (k, pk) in chain.iter().enumerate() {
            let bound = pk.residual_bound.unwrap();
            assert_eq!(bound, 6.0 / 2f64.powi(k as i32 + 1));
            for later in &chain[k + 1..] {
                for t in 0..pk.covered().len() {
                    assert!(column_residual_sq(later, pk, t).unwrap() <= bound + 1e-9);
                }
            }
        }
    }

    #[test]
    fn zero_sequence_gives_zero_projections() {
        let s = SequenceSpec::finite(&[]).unwrap();
        let chain = build_case_b(&s, 0.5, 4, &tol()).unwrap();
        for p in &chain {
            assert_eq!(p.matrix.max_abs(), 0.0);
        }
        assert_eq!(chain[3].covered(), vec![1, 2, 3, 4]);
    }

    #[test]
    fn interleaved_chain() {
        let s = interleaved();
        let chain = build_case_b(&s, 0.5, 8, &tol()).unwrap();
        check_chain(&s, &chain);
        // each step covers more of the sequence
        for w in chain.windows(2) {
            assert!(w[1].covered().len() > w[0].covered().len());
            let c0 = w[0].covered();
            assert_eq!(&w[1].covered()[..c0.len()], &c0[..]);
        }
        // the leading block is frozen once covered
        let c = chain[2].covered().len();
        let idx: Vec<usize> = (0..c).collect();
        let a = chain[2].matrix.principal_submatrix(&idx).unwrap();
        let b = chain[7].matrix.principal_submatrix(&idx).unwrap();
        assert!(a.sub(&b).unwrap().max_abs() < 1e-12);
    }

    #[test]
    fn other_alphas_and_prefixes() {
        let s = SequenceSpec::new(
            vec![1.0, 0.3, 0.7, 0.0],
            TailRule::interleave(TailRule::GeometricLow { c: 0.5, r: 0.5 }, TailRule::GeometricHigh { c: 0.5, r: 0.5 }),
        )
        .unwrap();
        for alpha in [0.3, 0.5, 0.7] {
            let chain = build_case_b(&s, alpha, 6, &tol()).unwrap();
            check_chain(&s, &chain);
        }
    }

    #[test]
    fn high_only_tail_goes_through_complement() {
        // 1/2, then 1 - 2^-i: a_f = 1/2, b_f = 1/2
        let s = SequenceSpec::new(vec![0.5], TailRule::GeometricHigh { c: 0.5, r: 0.5 }).unwrap();
        let chain = build_case_b(&s, 0.5, 6, &tol()).unwrap();
        assert_eq!(chain[0].continuation, Continuation::Identity);
        check_chain(&s, &chain);
    }

    #[test]
    fn one_tail_and_finite_support() {
        let s = SequenceSpec::new(vec![0.5, 0.5], TailRule::One).unwrap();
        let chain = build_case_b(&s, 0.5, 5, &tol()).unwrap();
        check_chain(&s, &chain);
        assert!(chain[4].covered().len() >= 6);
    }

    #[test]
    fn rejects_other_cases() {
        let bad = SequenceSpec::new(vec![0.5], interleaved().tail().clone()).unwrap();
        match build_case_b(&bad, 0.5, 3, &tol()) {
            Err(Error::Infeasible { defect }) => assert!((defect - 0.5).abs() < 1e-12),
            other => panic!("{other:?}"),
        }
        assert!(build_case_b(&interleaved(), 0.5, 0, &tol()).is_err());
    }
}
