//! Compilers between quantum query circuits and restricted branching programs.
//!
//! Circuit → program: a `q`-wire circuit `Ũ_t O Ũ_{t−1} ⋯ O Ũ_0` becomes a
//! width-`2^q` program of length `t`. Node `j` of every layer stands for basis
//! state `|j⟩`; the initial vector is `Ũ_0|0⟩` and level `i` applies the oracle
//! phase followed by `Ũ_i`.
//!
//! Program → circuit: three registers `R₁` (node, `⌈log₂ w⌉` wires), `R₂`
//! (variable index, `⌈log₂ n⌉` wires) and `R₃` (one answer wire). Each level
//! loads its label into `R₂`, fetches the queried bit into `R₃`, kicks back the
//! node phase, then uncomputes `R₃` and `R₂` before applying the base on `R₁`.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::circuit::{circuit_acceptance, complete_unitary, Gate, QueryCircuit};
use crate::error::Result;
use crate::linalg::{self, ceil_log2, CMatrix};
use crate::model::{InputString, Program, RestrictedLevel, DEFAULT_TOL};
use crate::simulate::acceptance_probability;
use crate::transform::pad_width;

/// Hadamard on a single wire of a `q`-wire register.
fn hadamard_on(qubits: usize, wire: usize) -> CMatrix {
    let mask = 1usize << (qubits - 1 - wire);
    let h = FRAC_1_SQRT_2;
    CMatrix::from_fn(1 << qubits, 1 << qubits, |i, j| {
        if i & !mask != j & !mask {
            linalg::ZERO
        } else if i & j & mask != 0 {
            Complex64::new(-h, 0.0)
        } else {
            Complex64::new(h, 0.0)
        }
    })
}

/// Per-node `(label, theta)` for the phase an oracle imprints on basis states.
/// Indices at or beyond `n` read 0, so those nodes get label 0 and θ = 0.
fn oracle_phases(circuit: &QueryCircuit, gate: &Gate) -> Vec<(usize, f64)> {
    let q = circuit.qubits();
    let n = circuit.n();
    let wire_bit = |j: usize, w: usize| (j >> (q - 1 - w)) & 1;
    (0..circuit.dim())
        .map(|j| {
            let (index, active) = match gate {
                Gate::PhaseOracle => (j >> (q - ceil_log2(n)), true),
                Gate::BitOracle { index_wires, target_wire } => {
                    let k = index_wires.iter().fold(0, |k, &w| (k << 1) | wire_bit(j, w));
                    (k, wire_bit(j, *target_wire) == 1)
                }
                Gate::Unitary(_) => unreachable!("only oracles carry phases"),
            };
            if active && index < n {
                (index, PI)
            } else {
                (0, 0.0)
            }
        })
        .collect()
}

/// Compiles a query circuit into an equivalent restricted program.
///
/// Runs of adjacent unitaries are fused and missing segments filled with the
/// identity, so any gate sequence is accepted. A bit oracle on target wire `a`
/// is lowered as `H_a · diag((−1)^{x_k·a}) · H_a`, with the two Hadamards folded
/// into the neighbouring segments.
pub fn circuit_to_rgqbp(circuit: &QueryCircuit) -> Result<Program> {
    let dim = circuit.dim();
    let q = circuit.qubits();
    let mut segments = vec![CMatrix::identity(dim)];
    let mut oracles = Vec::new();
    for gate in circuit.gates() {
        match gate {
            Gate::Unitary(u) => {
                let last = segments.last_mut().expect("at least one segment");
                *last = u.matrix().matmul(last);
            }
            oracle => {
                oracles.push(oracle.clone());
                segments.push(CMatrix::identity(dim));
            }
        }
    }
    for (i, oracle) in oracles.iter().enumerate() {
        if let Gate::BitOracle { target_wire, .. } = oracle {
            let h = hadamard_on(q, *target_wire);
            segments[i] = h.matmul(&segments[i]);
            segments[i + 1] = segments[i + 1].matmul(&h);
        }
    }
    let initial = segments[0].column(0);
    let levels = oracles
        .iter()
        .zip(segments.into_iter().skip(1))
        .map(|(oracle, base)| {
            let (labels, thetas) = oracle_phases(circuit, oracle).into_iter().unzip();
            RestrictedLevel::new(labels, base, thetas)
        })
        .collect::<Result<Vec<_>>>()?;
    Program::restricted(circuit.n(), initial, levels, circuit.accept().iter().copied())
}

/// Register layout of a compiled program.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RegisterLayout {
    pub node_wires: usize,
    pub index_wires: usize,
}

impl RegisterLayout {
    pub fn for_program(width: usize, n: usize) -> Self {
        RegisterLayout { node_wires: ceil_log2(width), index_wires: ceil_log2(n) }
    }

    pub fn qubits(&self) -> usize {
        self.node_wires + self.index_wires + 1
    }

    /// Basis index of `|node⟩|index⟩|answer⟩`.
    pub fn encode(&self, node: usize, index: usize, answer: usize) -> usize {
        (node << (self.index_wires + 1)) | (index << 1) | answer
    }

    fn decode(&self, j: usize) -> (usize, usize, usize) {
        (j >> (self.index_wires + 1), (j >> 1) & ((1 << self.index_wires) - 1), j & 1)
    }

    /// `A ⊗ I` with `A` acting on the node register.
    fn on_nodes(&self, m: &CMatrix) -> CMatrix {
        m.kron(&CMatrix::identity(1 << (self.index_wires + 1)))
    }

    /// `|q⟩|y⟩|a⟩ → |q⟩|y ⊕ label(q)⟩|a⟩`, a self-inverse permutation.
    fn label_loader(&self, labels: &[usize]) -> CMatrix {
        let dim = 1 << self.qubits();
        let mut m = CMatrix::zeros(dim, dim);
        for j in 0..dim {
            let (node, index, answer) = self.decode(j);
            m[(self.encode(node, index ^ labels[node], answer), j)] = linalg::ONE;
        }
        m
    }

    /// `|q⟩|k⟩|a⟩ → e^{i·a·θ_q}|q⟩|k⟩|a⟩`.
    fn phase_kickback(&self, thetas: &[f64]) -> CMatrix {
        let diag: Vec<Complex64> = (0..1usize << self.qubits())
            .map(|j| {
                let (node, _, answer) = self.decode(j);
                if answer == 1 {
                    Complex64::from_polar(1.0, thetas[node])
                } else {
                    linalg::ONE
                }
            })
            .collect();
        CMatrix::diagonal(&diag)
    }

    fn oracle(&self) -> Gate {
        Gate::BitOracle {
            index_wires: (self.node_wires..self.node_wires + self.index_wires).collect(),
            target_wire: self.qubits() - 1,
        }
    }
}

/// Compiles a restricted program into a `⌈log₂ w⌉ + ⌈log₂ n⌉ + 1`-wire
/// circuit making exactly two oracle calls per level.
pub fn rgqbp_to_circuit(program: &Program) -> Result<QueryCircuit> {
    program.require_restricted()?;
    let layout = RegisterLayout::for_program(program.width(), program.n());
    let padded = pad_width(program, 1 << layout.node_wires)?;
    let levels = padded.require_restricted()?;

    let mut gates = Vec::with_capacity(1 + 6 * levels.len());
    let prep = complete_unitary(padded.initial(), DEFAULT_TOL)?;
    gates.push(Gate::unitary(layout.on_nodes(&prep)));
    for level in levels {
        let loader = Gate::unitary(layout.label_loader(level.labels()));
        gates.push(loader.clone());
        gates.push(layout.oracle());
        gates.push(Gate::unitary(layout.phase_kickback(level.thetas())));
        gates.push(layout.oracle());
        gates.push(loader);
        gates.push(Gate::unitary(layout.on_nodes(level.base())));
    }
    let accept = program.accept().iter().map(|&node| layout.encode(node, 0, 0));
    QueryCircuit::new(layout.qubits(), program.n(), gates, accept)
}

#[derive(Clone, Debug, PartialEq)]
pub struct RoundtripReport {
    pub inputs_checked: usize,
    pub exhaustive: bool,
    pub max_deviation: f64,
    pub worst_input: Option<InputString>,
    pub passed: bool,
}

/// Inputs with `n` up to this are checked exhaustively; beyond it a seeded sample is used.
pub const EXHAUSTIVE_LIMIT: usize = 16;
const SAMPLED_INPUTS: usize = 256;

/// The inputs a roundtrip or equivalence check should cover.
pub fn check_inputs(n: usize, seed: u64) -> (Vec<InputString>, bool) {
    if n <= EXHAUSTIVE_LIMIT {
        (InputString::all(n).collect(), true)
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let inputs = (0..SAMPLED_INPUTS)
            .map(|_| InputString::new((0..n).map(|_| rng.random::<bool>()).collect()))
            .collect();
        (inputs, false)
    }
}

/// Compares program acceptance with the acceptance of its compiled circuit.
pub fn roundtrip_check(program: &Program, tol: f64) -> Result<RoundtripReport> {
    let circuit = rgqbp_to_circuit(program)?;
    let (inputs, exhaustive) = check_inputs(program.n(), 0);
    let mut max_deviation = 0.0f64;
    let mut worst_input = None;
    for x in &inputs {
        let dev = (acceptance_probability(program, x)? - circuit_acceptance(&circuit, x)?).abs();
        if dev > max_deviation {
            max_deviation = dev;
            worst_input = Some(x.clone());
        }
    }
    Ok(RoundtripReport {
        inputs_checked: inputs.len(),
        exhaustive,
        max_deviation,
        worst_input,
        passed: max_deviation <= tol,
    })
}
