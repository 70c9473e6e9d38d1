//! Quantum query circuits: dense unitaries interleaved with oracle calls.
//!
//! Wire 0 is the most significant bit of a basis index, so on `q` wires the
//! basis state `|j⟩` has wire `w` equal to bit `q − 1 − w` of `j`. The phase
//! oracle reads its index from the top `⌈log₂ n⌉` wires, i.e. the high bits
//! of `j`. Oracle reads at indices `k ≥ n` return 0.

use std::collections::BTreeSet;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{self, ceil_log2, CMatrix};
use crate::model::InputString;

/// Largest register the simulator will allocate.
pub const MAX_QUBITS: usize = 16;

/// A dense unitary with a cached column-sparse view for fast application.
/// Clones share storage.
#[derive(Clone, Debug)]
pub struct UnitaryGate(Arc<UnitaryData>);

#[derive(Debug)]
struct UnitaryData {
    matrix: CMatrix,
    columns: Vec<Vec<(usize, Complex64)>>,
}

impl UnitaryGate {
    pub fn new(matrix: CMatrix) -> Self {
        let columns = (0..matrix.cols())
            .map(|j| {
                (0..matrix.rows())
                    .filter_map(|i| {
                        let v = matrix[(i, j)];
                        (v != linalg::ZERO).then_some((i, v))
                    })
                    .collect()
            })
            .collect();
        UnitaryGate(Arc::new(UnitaryData { matrix, columns }))
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.0.matrix
    }

    pub fn apply(&self, state: &[Complex64]) -> Vec<Complex64> {
        let mut out = vec![linalg::ZERO; self.0.matrix.rows()];
        for (col, &a) in self.0.columns.iter().zip(state) {
            if a == linalg::ZERO {
                continue;
            }
            for &(i, v) in col {
                out[i] += v * a;
            }
        }
        out
    }
}

impl PartialEq for UnitaryGate {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0) || self.0.matrix == other.0.matrix
    }
}

impl From<CMatrix> for UnitaryGate {
    fn from(matrix: CMatrix) -> Self {
        UnitaryGate::new(matrix)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Gate {
    Unitary(UnitaryGate),
    /// `|i⟩ → (−1)^{x_i}|i⟩` on the top `⌈log₂ n⌉` wires.
    PhaseOracle,
    /// `|k⟩|a⟩ → |k⟩|a ⊕ x_k⟩`; `index_wires[0]` is the most significant bit of `k`.
    BitOracle { index_wires: Vec<usize>, target_wire: usize },
}

impl Gate {
    pub fn unitary(matrix: CMatrix) -> Self {
        Gate::Unitary(UnitaryGate::new(matrix))
    }

    pub fn is_oracle(&self) -> bool {
        !matches!(self, Gate::Unitary(_))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct QueryCircuit {
    qubits: usize,
    n: usize,
    gates: Vec<Gate>,
    accept: BTreeSet<usize>,
}

impl QueryCircuit {
    /// Checks gate dimensions, wire indices and the accept set. Unitarity of
    /// the dense gates is checked by [`validate_circuit`].
    pub fn new(
        qubits: usize,
        n: usize,
        gates: Vec<Gate>,
        accept: impl IntoIterator<Item = usize>,
    ) -> Result<Self> {
        if qubits > MAX_QUBITS {
            return Err(Error::Circuit(format!("{qubits} qubits exceeds the limit of {MAX_QUBITS}")));
        }
        if n == 0 {
            return Err(Error::InvalidArgument("oracle input length n must be at least 1".into()));
        }
        let dim = 1usize << qubits;
        for (g, gate) in gates.iter().enumerate() {
            match gate {
                Gate::Unitary(u) => {
                    let m = u.matrix();
                    if m.rows() != dim || m.cols() != dim {
                        return Err(Error::Dimension(format!(
                            "gate {g}: unitary is {}x{}, expected {dim}x{dim}",
                            m.rows(),
                            m.cols()
                        )));
                    }
                    if !m.is_finite() {
                        return Err(Error::NonFinite(format!("gate {g}")));
                    }
                }
                Gate::PhaseOracle => {
                    if ceil_log2(n) > qubits {
                        return Err(Error::Circuit(format!(
                            "gate {g}: phase oracle needs {} index wires but the circuit has {qubits}",
                            ceil_log2(n)
                        )));
                    }
                }
                Gate::BitOracle { index_wires, target_wire } => {
                    let mut seen = BTreeSet::new();
                    for &w in index_wires.iter().chain(std::iter::once(target_wire)) {
                        if w >= qubits {
                            return Err(Error::Circuit(format!("gate {g}: wire {w} out of range")));
                        }
                        if !seen.insert(w) {
                            return Err(Error::Circuit(format!("gate {g}: wire {w} used twice")));
                        }
                    }
                }
            }
        }
        let accept: BTreeSet<usize> = accept.into_iter().collect();
        if let Some(&index) = accept.iter().find(|&&a| a >= dim) {
            return Err(Error::AcceptOutOfRange { index, bound: dim });
        }
        Ok(QueryCircuit { qubits, n, gates, accept })
    }

    pub fn qubits(&self) -> usize {
        self.qubits
    }

    pub fn dim(&self) -> usize {
        1 << self.qubits
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn accept(&self) -> &BTreeSet<usize> {
        &self.accept
    }

    pub fn with_accept(self, accept: impl IntoIterator<Item = usize>) -> Result<Self> {
        QueryCircuit::new(self.qubits, self.n, self.gates, accept)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CircuitValidation {
    pub passed: bool,
    pub tol: f64,
    pub max_deviation: f64,
    pub worst_gate: Option<usize>,
}

pub fn validate_circuit(circuit: &QueryCircuit, tol: f64) -> CircuitValidation {
    let mut max_deviation = 0.0f64;
    let mut worst_gate = None;
    for (g, gate) in circuit.gates().iter().enumerate() {
        if let Gate::Unitary(u) = gate {
            let dev = u.matrix().unitarity_deviation();
            if dev > max_deviation {
                max_deviation = dev;
                worst_gate = Some(g);
            }
        }
    }
    CircuitValidation { passed: max_deviation <= tol, tol, max_deviation, worst_gate }
}

fn wire_mask(qubits: usize, wire: usize) -> usize {
    1 << (qubits - 1 - wire)
}

/// Applies one gate in place.
pub fn apply_gate(circuit: &QueryCircuit, gate: &Gate, x: &InputString, state: &mut Vec<Complex64>) {
    let q = circuit.qubits();
    match gate {
        Gate::Unitary(u) => *state = u.apply(state),
        Gate::PhaseOracle => {
            let shift = q - ceil_log2(circuit.n());
            for (j, a) in state.iter_mut().enumerate() {
                if x.bit_or_zero(j >> shift) {
                    *a = -*a;
                }
            }
        }
        Gate::BitOracle { index_wires, target_wire } => {
            let target = wire_mask(q, *target_wire);
            for j in 0..state.len() {
                if j & target != 0 {
                    continue;
                }
                let k = index_wires
                    .iter()
                    .fold(0usize, |k, &w| (k << 1) | usize::from(j & wire_mask(q, w) != 0));
                if x.bit_or_zero(k) {
                    state.swap(j, j | target);
                }
            }
        }
    }
}

/// Applies the gates left to right to `|0^q⟩`.
pub fn run_circuit(circuit: &QueryCircuit, x: &InputString) -> Result<Vec<Complex64>> {
    if x.len() != circuit.n() {
        return Err(Error::InputLength { got: x.len(), expected: circuit.n() });
    }
    let mut state = vec![linalg::ZERO; circuit.dim()];
    state[0] = linalg::ONE;
    for gate in circuit.gates() {
        apply_gate(circuit, gate, x, &mut state);
    }
    Ok(state)
}

pub fn circuit_acceptance(circuit: &QueryCircuit, x: &InputString) -> Result<f64> {
    let state = run_circuit(circuit, x)?;
    Ok(circuit.accept().iter().map(|&j| state[j].norm_sqr()).sum())
}

/// Number of oracle gates of either kind.
pub fn count_queries(circuit: &QueryCircuit) -> usize {
    circuit.gates().iter().filter(|g| g.is_oracle()).count()
}

/// A unitary whose first column is `first_column`.
///
/// With `φ = arg v₀` and `w = e^{−iφ}v`, the Householder reflection
/// `H = I − 2uu†/‖u‖²`, `u = w − e₀`, swaps `w` and `e₀`; the result is `e^{iφ}H`.
pub fn complete_unitary(first_column: &[Complex64], tol: f64) -> Result<CMatrix> {
    let dim = first_column.len();
    if dim == 0 {
        return Err(Error::Dimension("empty vector".into()));
    }
    let norm = linalg::norm(first_column);
    if !norm.is_finite() || (norm - 1.0).abs() > tol {
        return Err(Error::Unnormalized(norm));
    }
    let phase = if first_column[0].norm() == 0.0 {
        linalg::ONE
    } else {
        first_column[0] / first_column[0].norm()
    };
    let mut u: Vec<Complex64> = first_column.iter().map(|&v| v / (phase * norm)).collect();
    let sigma: f64 = u[1..].iter().map(Complex64::norm_sqr).sum();
    if sigma == 0.0 {
        return Ok(CMatrix::identity(dim).scale(phase));
    }
    // w₀ − 1 without cancellation, using ‖w‖ = 1.
    u[0] = Complex64::new(-sigma / (1.0 + u[0].re), 0.0);
    let u_norm2: f64 = u.iter().map(Complex64::norm_sqr).sum();
    let scale = 2.0 / u_norm2;
    let mut h = CMatrix::identity(dim);
    for i in 0..dim {
        for j in 0..dim {
            h[(i, j)] -= u[i] * u[j].conj() * scale;
        }
    }
    Ok(h.scale(phase))
}
