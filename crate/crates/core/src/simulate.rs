//! Exact state-vector evolution of branching programs.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::linalg::{self, CMatrix};
use crate::model::{InputString, Level, Program};

/// Default bounded-error threshold.
pub const BOUNDED_ERROR: f64 = 2.0 / 3.0;

/// The states `ψ_0 … ψ_L` of one run.
#[derive(Clone, Debug, PartialEq)]
pub struct RunTrace {
    pub states: Vec<Vec<Complex64>>,
}

impl RunTrace {
    pub fn final_state(&self) -> &[Complex64] {
        self.states.last().expect("a trace always holds the initial state")
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Decision {
    Accept,
    Reject,
    Inconclusive,
}

/// The level's transition matrix on input `x`.
pub fn transition_matrix(level: &Level, x: &InputString) -> CMatrix {
    let bit_of = |label: usize| x.bit(label);
    match level {
        Level::General(g) => g.assemble(bit_of),
        Level::Restricted(r) => r.assemble(bit_of),
    }
}

/// `transition_matrix(level, x) · state` without materializing the matrix.
pub fn apply_level(level: &Level, x: &InputString, state: &[Complex64]) -> Vec<Complex64> {
    match level {
        Level::Restricted(r) => {
            let phased: Vec<Complex64> = r
                .phases(|label| x.bit(label))
                .into_iter()
                .zip(state)
                .map(|(p, &a)| p * a)
                .collect();
            r.base().apply(&phased)
        }
        Level::General(g) => {
            let s = g.width();
            let mut out = vec![linalg::ZERO; s];
            for (j, &a) in state.iter().enumerate() {
                if a == linalg::ZERO {
                    continue;
                }
                let m = if x.bit(g.labels()[j]) { g.a1() } else { g.a0() };
                for (i, o) in out.iter_mut().enumerate() {
                    *o += m[(i, j)] * a;
                }
            }
            out
        }
    }
}

pub fn run(program: &Program, x: &InputString) -> Result<RunTrace> {
    program.check_input(x)?;
    let mut states = Vec::with_capacity(program.len() + 1);
    states.push(program.initial().to_vec());
    for level in program.levels() {
        let next = apply_level(level, x, states.last().unwrap());
        states.push(next);
    }
    Ok(RunTrace { states })
}

/// Final state only; skips keeping intermediate states.
pub fn final_state(program: &Program, x: &InputString) -> Result<Vec<Complex64>> {
    program.check_input(x)?;
    Ok(program
        .levels()
        .iter()
        .fold(program.initial().to_vec(), |state, level| apply_level(level, x, &state)))
}

pub fn acceptance_of_state(state: &[Complex64], accept: impl IntoIterator<Item = usize>) -> f64 {
    accept.into_iter().map(|v| state[v].norm_sqr()).sum()
}

pub fn acceptance_probability(program: &Program, x: &InputString) -> Result<f64> {
    let state = final_state(program, x)?;
    Ok(acceptance_of_state(&state, program.accept().iter().copied()))
}

/// Classifies a probability under the bounded-error convention.
pub fn decide_probability(prob: f64, threshold: f64) -> Decision {
    if prob >= threshold {
        Decision::Accept
    } else if prob <= 1.0 - threshold {
        Decision::Reject
    } else {
        Decision::Inconclusive
    }
}

pub fn decide(program: &Program, x: &InputString, threshold: f64) -> Result<Decision> {
    if !(threshold > 0.5 && threshold <= 1.0) {
        return Err(crate::Error::InvalidArgument(format!(
            "threshold must lie in (1/2, 1], got {threshold}"
        )));
    }
    Ok(decide_probability(acceptance_probability(program, x)?, threshold))
}

/// Draws a standard-basis outcome from `|state|²`.
fn draw(state: &[Complex64], rng: &mut impl Rng) -> usize {
    let total: f64 = state.iter().map(Complex64::norm_sqr).sum();
    let mut r = rng.random::<f64>() * total;
    let mut last_nonzero = 0;
    for (i, a) in state.iter().enumerate() {
        let p = a.norm_sqr();
        if p > 0.0 {
            last_nonzero = i;
            if r < p {
                return i;
            }
            r -= p;
        }
    }
    last_nonzero
}

/// One measurement of the final state.
///
/// The generator is ChaCha8 seeded via `seed_from_u64`; sequences are
/// reproducible within this crate, and only the outcome distribution is
/// meaningful across implementations.
pub fn sample_measurement(program: &Program, x: &InputString, seed: u64) -> Result<usize> {
    let state = final_state(program, x)?;
    Ok(draw(&state, &mut ChaCha8Rng::seed_from_u64(seed)))
}

/// `shots` measurements drawn from one seeded stream.
pub fn sample_measurements(
    program: &Program,
    x: &InputString,
    seed: u64,
    shots: usize,
) -> Result<Vec<usize>> {
    let state = final_state(program, x)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok((0..shots).map(|_| draw(&state, &mut rng)).collect())
}
