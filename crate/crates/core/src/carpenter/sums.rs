//! Kadison's sums `a_f` (terms at most `alpha`) and `b_f` (one minus the
//! terms above `alpha`), computed from closed-form tails.

use std::fmt;

use crate::error::{Error, Result};
use crate::linalg::ToleranceConfig;

use super::spec::{geometric, SequenceSpec, TailRule};

/// One of Kadison's two sums.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SideSum {
    Finite(f64),
    Divergent,
    /// Only produced by divergent tails whose split at `alpha` is not
    /// certified; at least one of the two sides then diverges.
    Indeterminate,
}

impl SideSum {
    pub fn finite(self) -> Option<f64> {
        match self {
            SideSum::Finite(v) => Some(v),
            _ => None,
        }
    }

    fn plus(self, other: SideSum) -> SideSum {
        use SideSum::*;
        match (self, other) {
            (Finite(a), Finite(b)) => Finite(a + b),
            (Divergent, _) | (_, Divergent) => Divergent,
            _ => Indeterminate,
        }
    }
}

impl fmt::Display for SideSum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SideSum::Finite(v) => write!(f, "{v}"),
            SideSum::Divergent => f.write_str("inf"),
            SideSum::Indeterminate => f.write_str("indeterminate"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FeasibilityCase {
    /// `a_f + b_f` diverges.
    CaseA,
    /// Both sums finite, `a_f - b_f` an integer.
    CaseBFeasible,
    Infeasible,
}

impl FeasibilityCase {
    pub fn name(self) -> &'static str {
        match self {
            FeasibilityCase::CaseA => "CaseA",
            FeasibilityCase::CaseBFeasible => "CaseB-feasible",
            FeasibilityCase::Infeasible => "Infeasible",
        }
    }
}

impl fmt::Display for FeasibilityCase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KadisonReport {
    pub alpha: f64,
    pub a_f: SideSum,
    pub b_f: SideSum,
    /// Distance from `a_f - b_f` to the nearest integer, when both are finite.
    pub defect: Option<f64>,
    pub case: FeasibilityCase,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Side {
    Low,
    High,
}

impl Side {
    pub(crate) fn contains(self, v: f64, alpha: f64) -> bool {
        match self {
            Side::Low => v <= alpha,
            Side::High => v > alpha,
        }
    }
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidParameter(format!("alpha = {alpha} must lie in (0, 1)")));
    }
    Ok(())
}

/// `(low, high)` sums over tail indices `i > j`.
fn tail_sums_after(t: &TailRule, j: u64, alpha: f64) -> Result<(SideSum, SideSum)> {
    use SideSum::*;
    Ok(match t {
        TailRule::Zero | TailRule::One => (Finite(0.0), Finite(0.0)),
        TailRule::GeometricLow { c, r } => {
            let mut i = j + 1;
            let mut high = 0.0;
            while geometric(*c, *r, i) > alpha {
                high += 1.0 - geometric(*c, *r, i);
                i += 1;
            }
            (Finite(geometric(*c, *r, i) / (1.0 - r)), Finite(high))
        }
        TailRule::GeometricHigh { c, r } => {
            let mut i = j + 1;
            let mut low = 0.0;
            while 1.0 - geometric(*c, *r, i) <= alpha {
                low += 1.0 - geometric(*c, *r, i);
                i += 1;
            }
            (Finite(low), Finite(geometric(*c, *r, i) / (1.0 - r)))
        }
        TailRule::Interleave(a, b) => {
            let (al, ah) = tail_sums_after(a, j.div_ceil(2), alpha)?;
            let (bl, bh) = tail_sums_after(b, j / 2, alpha)?;
            (al.plus(bl), ah.plus(bh))
        }
        TailRule::DivergentLow { generator, certificate } => {
            if alpha >= 0.5 {
                (Divergent, Finite(0.0))
            } else if certificate.is_constant() && certificate.p() > alpha {
                // eventually every term exceeds alpha and contributes >= 1/2
                let mut low = 0.0;
                for i in (j + 1)..certificate.from() {
                    let v = generator.eval(i)?;
                    if v <= alpha {
                        low += v;
                    }
                }
                (Finite(low), Divergent)
            } else {
                (Indeterminate, Indeterminate)
            }
        }
        TailRule::DivergentHigh { generator, certificate } => {
            if alpha < 0.5 {
                (Finite(0.0), Divergent)
            } else if certificate.is_constant() && certificate.p() >= 1.0 - alpha {
                let mut high = 0.0;
                for i in (j + 1)..certificate.from() {
                    let v = 1.0 - generator.eval(i)?;
                    if v > alpha {
                        high += 1.0 - v;
                    }
                }
                (Divergent, Finite(high))
            } else {
                (Indeterminate, Indeterminate)
            }
        }
    })
}

/// `(low, high)` sums over sequence indices `n > idx`.
pub(crate) fn sums_after(spec: &SequenceSpec, idx: u64, alpha: f64) -> Result<(SideSum, SideSum)> {
    let p = spec.prefix().len() as u64;
    let (mut low, mut high) = (0.0, 0.0);
    for &v in spec.prefix().iter().skip(idx.min(p) as usize) {
        if v <= alpha {
            low += v;
        } else {
            high += 1.0 - v;
        }
    }
    let (tl, th) = tail_sums_after(spec.tail(), idx.saturating_sub(p), alpha)?;
    Ok((SideSum::Finite(low).plus(tl), SideSum::Finite(high).plus(th)))
}

/// Last tail index whose term lies on `side`; `None` for infinitely many,
/// `Some(0)` for none.
fn tail_side_last(t: &TailRule, side: Side, alpha: f64) -> Option<u64> {
    let scan = |f: &dyn Fn(u64) -> f64| {
        let mut i = 0;
        while side.contains(f(i + 1), alpha) {
            i += 1;
        }
        Some(i)
    };
    match (t, side) {
        (TailRule::Zero, Side::High) | (TailRule::One, Side::Low) => Some(0),
        (TailRule::Zero, Side::Low) | (TailRule::One, Side::High) => None,
        (TailRule::GeometricLow { .. }, Side::Low) | (TailRule::GeometricHigh { .. }, Side::High) => None,
        (TailRule::GeometricLow { c, r }, Side::High) => scan(&|i| geometric(*c, *r, i)),
        (TailRule::GeometricHigh { c, r }, Side::Low) => scan(&|i| 1.0 - geometric(*c, *r, i)),
        (TailRule::Interleave(a, b), _) => {
            let la = tail_side_last(a, side, alpha)?;
            let lb = tail_side_last(b, side, alpha)?;
            Some((2 * la).saturating_sub(1).max(2 * lb))
        }
        (TailRule::DivergentLow { .. } | TailRule::DivergentHigh { .. }, _) => None,
    }
}

/// Last sequence index on `side`, as for the tail version.
pub(crate) fn side_last(spec: &SequenceSpec, side: Side, alpha: f64) -> Option<u64> {
    let p = spec.prefix().len() as u64;
    match tail_side_last(spec.tail(), side, alpha)? {
        0 => Some(
            spec.prefix()
                .iter()
                .rposition(|&v| side.contains(v, alpha))
                .map_or(0, |i| i as u64 + 1),
        ),
        t => Some(p + t),
    }
}

/// Whether infinitely many tail terms contribute a positive amount to `side`.
pub(crate) fn positive_infinitely_often(t: &TailRule, side: Side) -> bool {
    match (t, side) {
        (TailRule::GeometricLow { c, .. }, Side::Low) | (TailRule::GeometricHigh { c, .. }, Side::High) => *c > 0.0,
        (TailRule::Interleave(a, b), _) => positive_infinitely_often(a, side) || positive_infinitely_often(b, side),
        (TailRule::DivergentLow { .. } | TailRule::DivergentHigh { .. }, _) => true,
        _ => false,
    }
}

/// `a_f`, `b_f`, defect and case at threshold `alpha`, with the default
/// integer tolerance.
pub fn kadison_sums(spec: &SequenceSpec, alpha: f64) -> Result<KadisonReport> {
    feasibility(spec, alpha, &ToleranceConfig::default())
}

/// Decides which of the three cases applies at threshold `alpha`.
pub fn feasibility(spec: &SequenceSpec, alpha: f64, tol: &ToleranceConfig) -> Result<KadisonReport> {
    check_alpha(alpha)?;
    let (a_f, b_f) = sums_after(spec, 0, alpha)?;
    let (defect, case) = match (a_f, b_f) {
        (SideSum::Finite(a), SideSum::Finite(b)) => {
            let d = a - b;
            let defect = (d - d.round()).abs();
            let case = if defect <= tol.integer_tol {
                FeasibilityCase::CaseBFeasible
            } else {
                FeasibilityCase::Infeasible
            };
            (Some(defect), case)
        }
        _ => (None, FeasibilityCase::CaseA),
    };
    Ok(KadisonReport {
        alpha,
        a_f,
        b_f,
        defect,
        case,
    })
}
