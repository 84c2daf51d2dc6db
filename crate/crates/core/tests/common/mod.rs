#![allow(dead_code)]

use diagonals::carpenter::{SequenceSpec, TailRule};
use diagonals::{Complex64, ComplexMatrix};
use rand::Rng;

pub fn random_hermitian<R: Rng>(rng: &mut R, n: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(n, |_, _| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        .unwrap()
        .hermitian_part()
}

/// Gram-Schmidt on a random complex matrix.
pub fn random_unitary<R: Rng>(rng: &mut R, n: usize) -> ComplexMatrix {
    let mut cols: Vec<Vec<Complex64>> = Vec::with_capacity(n);
    while cols.len() < n {
        let mut v: Vec<Complex64> = (0..n)
            .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        for _ in 0..2 {
            for u in &cols {
                let dot: Complex64 = u.iter().zip(&v).map(|(a, b)| a.conj() * b).sum();
                for (vi, ui) in v.iter_mut().zip(u) {
                    *vi -= dot * ui;
                }
            }
        }
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm > 1e-6 {
            cols.push(v.into_iter().map(|z| z / norm).collect());
        }
    }
    ComplexMatrix::from_fn(n, |r, c| cols[c][r]).unwrap()
}

/// `x ≺ y` with `x` the diagonal of `U diag(y) U*` for a random unitary.
pub fn random_majorized_pair<R: Rng>(rng: &mut R, n: usize) -> (Vec<f64>, Vec<f64>) {
    let y: Vec<f64> = (0..n).map(|_| rng.gen_range(-5.0..5.0)).collect();
    let u = random_unitary(rng, n);
    let x = u
        .conjugate(&ComplexMatrix::from_real_diagonal(&y).unwrap())
        .unwrap()
        .real_diagonal();
    (x, y)
}

/// Random `[0, 1]^n` vector rescaled to an integer sum.
pub fn random_integer_sum_vector<R: Rng>(rng: &mut R, n: usize) -> Vec<f64> {
    let v: Vec<f64> = (0..n).map(|_| rng.gen::<f64>()).collect();
    let s: f64 = v.iter().sum();
    let m = s.round().clamp(0.0, n as f64);
    if s == 0.0 || m == s {
        return v;
    }
    if m < s {
        return v.iter().map(|x| x * m / s).collect();
    }
    // pull the complement down instead so entries stay below 1
    let nf = n as f64;
    v.iter().map(|x| 1.0 - (1.0 - x) * (nf - m) / (nf - s)).collect()
}

/// The interleaved sequence 1/4, 3/4, 1/8, 7/8, ...
pub fn interleaved_spec() -> SequenceSpec {
    SequenceSpec::new(
        vec![],
        TailRule::interleave(
            TailRule::GeometricLow { c: 0.5, r: 0.5 },
            TailRule::GeometricHigh { c: 0.5, r: 0.5 },
        ),
    )
    .unwrap()
}

/// A random summable tail.
pub fn random_summable_tail<R: Rng>(rng: &mut R, depth: u32) -> TailRule {
    let geometric = |rng: &mut R| {
        let r = rng.gen_range(0.1..0.9);
        let c = rng.gen_range(0.0..1.0 / r);
        (c, r)
    };
    match rng.gen_range(0..if depth == 0 { 4 } else { 5 }) {
        0 => TailRule::Zero,
        1 => TailRule::One,
        2 => {
            let (c, r) = geometric(rng);
            TailRule::GeometricLow { c, r }
        }
        3 => {
            let (c, r) = geometric(rng);
            TailRule::GeometricHigh { c, r }
        }
        _ => TailRule::interleave(random_summable_tail(rng, depth - 1), random_summable_tail(rng, depth - 1)),
    }
}
