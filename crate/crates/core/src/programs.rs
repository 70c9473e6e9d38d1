//! Builtin programs, circuits and instance families.

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_4, PI, TAU};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::circuit::{Gate, QueryCircuit};
use crate::error::{Error, Result};
use crate::linalg::{self, is_power_of_two, CMatrix};
use crate::model::{InputString, Program, RestrictedLevel};

/// The width-2 parity program.
///
/// The top row queries `x₀, x₂, …` and the bottom row `x₁, x₃, …`; every
/// level multiplies the amplitude of a node reading a 1 by −1. The last level
/// recombines both rows with a Hadamard so the final node is the parity.
pub fn parity_program(n: usize) -> Result<Program> {
    if n < 2 || !n.is_multiple_of(2) {
        return Err(Error::InvalidArgument(format!("parity program needs an even n >= 2, got {n}")));
    }
    let h = Complex64::new(FRAC_1_SQRT_2, 0.0);
    let hadamard = CMatrix::from_columns(&[vec![h, h], vec![h, -h]]).expect("2x2");
    let len = n / 2;
    let levels = (0..len)
        .map(|t| {
            let base = if t + 1 == len { hadamard.clone() } else { CMatrix::identity(2) };
            RestrictedLevel::new(vec![2 * t, 2 * t + 1], base, vec![PI, PI])
        })
        .collect::<Result<Vec<_>>>()?;
    Program::restricted(n, vec![h, h], levels, [1])
}

/// Number of Grover iterations `⌊(π/4)√n⌋`.
pub fn grover_iterations(n: usize) -> usize {
    (FRAC_PI_4 * (n as f64).sqrt()).floor() as usize
}

/// Analytic success probability on a marked instance, `sin²((2T+1)·arcsin(1/√n))`.
pub fn grover_success(n: usize) -> f64 {
    let t = grover_iterations(n) as f64;
    ((2.0 * t + 1.0) * (1.0 / (n as f64).sqrt()).asin()).sin().powi(2)
}

/// Grover search over `log₂ n` index wires plus one answer wire, finished by a
/// bit-oracle call that copies the found bit into the answer wire.
pub fn grover_promise_or(n: usize) -> Result<QueryCircuit> {
    if n < 2 || !is_power_of_two(n) {
        return Err(Error::InvalidArgument(format!("Grover circuit needs a power of two n >= 2, got {n}")));
    }
    let m = linalg::ceil_log2(n);
    let amp = 1.0 / (n as f64).sqrt();
    let hadamards = CMatrix::from_fn(n, n, |i, j| {
        let sign = if (i & j).count_ones() % 2 == 1 { -1.0 } else { 1.0 };
        Complex64::new(sign * amp, 0.0)
    });
    let diffusion = CMatrix::from_fn(n, n, |i, j| {
        let delta = if i == j { 1.0 } else { 0.0 };
        Complex64::new(2.0 / n as f64 - delta, 0.0)
    });
    let answer = CMatrix::identity(2);
    let mut gates = vec![Gate::unitary(hadamards.kron(&answer))];
    let diffuse = Gate::unitary(diffusion.kron(&answer));
    for _ in 0..grover_iterations(n) {
        gates.push(Gate::PhaseOracle);
        gates.push(diffuse.clone());
    }
    gates.push(Gate::BitOracle { index_wires: (0..m).collect(), target_wire: m });
    let accept = (0..2 * n).filter(|j| j % 2 == 1);
    QueryCircuit::new(m + 1, n, gates, accept)
}

fn complex_gaussian(rng: &mut impl Rng) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im) * FRAC_1_SQRT_2
}

/// Haar-random unit vector in `ℂ^dim`.
pub fn haar_vector(dim: usize, rng: &mut impl Rng) -> Vec<Complex64> {
    loop {
        let v: Vec<Complex64> = (0..dim).map(|_| complex_gaussian(rng)).collect();
        let norm = linalg::norm(&v);
        if norm > 1e-12 {
            return v.into_iter().map(|z| z / norm).collect();
        }
    }
}

/// Haar-random unitary: the Q factor of a complex Gaussian matrix with the
/// diagonal of R made real positive. Gram-Schmidt produces that R directly;
/// each column is orthogonalized twice to keep `Q†Q` at machine precision.
pub fn haar_unitary(dim: usize, rng: &mut impl Rng) -> CMatrix {
    'retry: loop {
        let mut cols: Vec<Vec<Complex64>> = Vec::with_capacity(dim);
        for _ in 0..dim {
            let mut v: Vec<Complex64> = (0..dim).map(|_| complex_gaussian(rng)).collect();
            let raw = linalg::norm(&v);
            for _ in 0..2 {
                for q in &cols {
                    let proj: Complex64 = q.iter().zip(&v).map(|(a, b)| a.conj() * b).sum();
                    for (vi, qi) in v.iter_mut().zip(q) {
                        *vi -= proj * qi;
                    }
                }
            }
            let norm = linalg::norm(&v);
            if norm < 1e-10 * raw.max(1.0) {
                continue 'retry;
            }
            cols.push(v.into_iter().map(|z| z / norm).collect());
        }
        return CMatrix::from_columns(&cols).expect("square");
    }
}

/// A random restricted program: Haar bases, uniform phases in `[0, 2π)`,
/// uniform labels, Haar initial vector, accept set the first `⌈s/2⌉` nodes.
pub fn random_rgqbp(width: usize, len: usize, n: usize, seed: u64) -> Result<Program> {
    if width == 0 || n == 0 {
        return Err(Error::InvalidArgument(format!("random program needs s, n >= 1 (got s = {width}, n = {n})")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let initial = haar_vector(width, &mut rng);
    let levels = (0..len)
        .map(|_| {
            let base = haar_unitary(width, &mut rng);
            let thetas = (0..width).map(|_| rng.random_range(0.0..TAU)).collect();
            let labels = (0..width).map(|_| rng.random_range(0..n)).collect();
            RestrictedLevel::new(labels, base, thetas)
        })
        .collect::<Result<Vec<_>>>()?;
    Program::restricted(n, initial, levels, 0..width.div_ceil(2))
}

/// `C(n, k)`, saturating at `u128::MAX`.
pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = match acc.checked_mul((n - i) as u128) {
            Some(v) => v / (i as u128 + 1),
            None => return u128::MAX,
        };
    }
    acc
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HammingSide {
    /// The fixed string has weight `k`; members add δ ones on its zero positions.
    FixYes,
    /// The fixed string has weight `k + δ`; members drop δ of its ones.
    FixNo,
}

/// The hard instance set around a fixed string for the `(k, k+δ)` weight
/// decision, addressable by index in lexicographic order of flipped positions.
#[derive(Clone, Debug, PartialEq)]
pub struct HammingFamily {
    pub n: usize,
    pub k: usize,
    pub delta: usize,
    pub side: HammingSide,
    fixed: InputString,
    /// Positions of `fixed` eligible for flipping.
    pool: Vec<usize>,
}

impl HammingFamily {
    pub fn fixed(&self) -> &InputString {
        &self.fixed
    }

    pub fn len(&self) -> u128 {
        binomial(self.pool.len(), self.delta)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Member number `index`; panics when out of range.
    pub fn member(&self, index: u128) -> InputString {
        assert!(index < self.len(), "family index out of range");
        let mut bits = self.fixed.bits().to_vec();
        for pos in unrank_combination(self.pool.len(), self.delta, index) {
            let p = self.pool[pos];
            bits[p] = !bits[p];
        }
        InputString::new(bits)
    }

    pub fn iter(&self) -> impl Iterator<Item = InputString> + '_ {
        (0..self.len()).map(move |i| self.member(i))
    }
}

/// The `index`-th `d`-subset of `0..m` in lexicographic order.
fn unrank_combination(m: usize, d: usize, mut index: u128) -> Vec<usize> {
    let mut out = Vec::with_capacity(d);
    let mut next = 0;
    for remaining in (1..=d).rev() {
        loop {
            let with_next = binomial(m - next - 1, remaining - 1);
            if index < with_next {
                out.push(next);
                next += 1;
                break;
            }
            index -= with_next;
            next += 1;
        }
    }
    out
}

/// Builds the family for a fixed string of weight `k` (members of weight
/// `k + δ`) or weight `k + δ` (members of weight `k`).
pub fn hamming_family(n: usize, k: usize, delta: usize, fixed: &InputString) -> Result<HammingFamily> {
    if fixed.len() != n {
        return Err(Error::InputLength { got: fixed.len(), expected: n });
    }
    if k + delta > n {
        return Err(Error::InvalidArgument(format!("k + delta = {} exceeds n = {n}", k + delta)));
    }
    let weight = fixed.weight();
    let (side, want) = if weight == k {
        (HammingSide::FixYes, false)
    } else if weight == k + delta {
        (HammingSide::FixNo, true)
    } else {
        return Err(Error::WeightMismatch { weight, k, k_plus_delta: k + delta });
    };
    let pool = (0..n).filter(|&i| fixed.bit(i) == want).collect();
    Ok(HammingFamily { n, k, delta, side, fixed: fixed.clone(), pool })
}
