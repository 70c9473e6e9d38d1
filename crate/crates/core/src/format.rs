//! JSON documents for programs (`gqbp-v1`) and query circuits (`qqc-v1`).
//!
//! Complex numbers are `[re, im]` pairs and matrices are row-major, so column
//! `j` of a level matrix is node `j`'s transition vector. Output has sorted
//! keys, two-space indentation, shortest round-trip decimals and a trailing
//! newline. Structural problems are reported as [`Error::Parse`] with the
//! path of the offending field; norm and unitarity are left to validation.

use num_complex::Complex64;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::circuit::{Gate, QueryCircuit, MAX_QUBITS};
use crate::error::{Error, Result};
use crate::linalg::CMatrix;
use crate::model::{GeneralLevel, Level, Program, ProgramKind, RestrictedLevel};
use crate::transform::pad_level;

pub const PROGRAM_FORMAT: &str = "gqbp-v1";
pub const CIRCUIT_FORMAT: &str = "qqc-v1";

type Pair = [f64; 2];
type MatrixDoc = Vec<Vec<Pair>>;

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ProgramDoc {
    format: String,
    n: usize,
    kind: KindDoc,
    width: usize,
    initial: Vec<Pair>,
    levels: Vec<LevelDoc>,
    accept: Vec<usize>,
}

#[derive(Serialize, Deserialize, Clone, Copy, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
enum KindDoc {
    General,
    Restricted,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct LevelDoc {
    labels: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    base: Option<MatrixDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    thetas: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    a0: Option<MatrixDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    a1: Option<MatrixDoc>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CircuitDoc {
    format: String,
    qubits: usize,
    n: usize,
    gates: Vec<GateDoc>,
    accept: Vec<usize>,
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
enum GateDoc {
    Unitary { matrix: MatrixDoc },
    PhaseOracle,
    BitOracle { index_wires: Vec<usize>, target_wire: usize },
}

fn parse_error(path: impl Into<String>, message: impl Into<String>) -> Error {
    Error::Parse { path: path.into(), message: message.into() }
}

fn decode<T: DeserializeOwned>(text: &str) -> Result<T> {
    let mut de = serde_json::Deserializer::from_str(text);
    let value = serde_path_to_error::deserialize(&mut de).map_err(|e| {
        let path = e.path().to_string();
        parse_error(path, e.into_inner().to_string())
    })?;
    de.end().map_err(|e| parse_error(".", e.to_string()))?;
    Ok(value)
}

fn encode<T: Serialize>(doc: &T) -> String {
    // Round-tripping through `Value` sorts object keys.
    let value = serde_json::to_value(doc).expect("documents contain only finite numbers");
    let mut text = serde_json::to_string_pretty(&value).expect("values always serialize");
    text.push('\n');
    text
}

fn check_format(found: &str, expected: &str) -> Result<()> {
    if found != expected {
        return Err(parse_error("format", format!("expected \"{expected}\", found \"{found}\"")));
    }
    Ok(())
}

fn complex(p: &Pair) -> Complex64 {
    Complex64::new(p[0], p[1])
}

fn pair(z: &Complex64) -> Pair {
    [z.re, z.im]
}

fn matrix_from_doc(rows: &MatrixDoc, path: &str) -> Result<CMatrix> {
    let rows: Vec<Vec<Complex64>> = rows.iter().map(|r| r.iter().map(complex).collect()).collect();
    let m = CMatrix::from_rows(&rows).ok_or_else(|| parse_error(path, "rows have unequal lengths"))?;
    if !m.is_square() {
        return Err(parse_error(path, format!("matrix is {}x{}, expected square", m.rows(), m.cols())));
    }
    Ok(m)
}

fn matrix_to_doc(m: &CMatrix) -> MatrixDoc {
    m.to_rows().iter().map(|r| r.iter().map(pair).collect()).collect()
}

fn require<T>(field: &Option<T>, path: String) -> Result<&T> {
    field.as_ref().ok_or_else(|| parse_error(path, "missing field"))
}

fn forbid<T>(field: &Option<T>, path: String, kind: &str) -> Result<()> {
    match field {
        Some(_) => Err(parse_error(path, format!("not allowed in a {kind} level"))),
        None => Ok(()),
    }
}

fn level_from_doc(doc: &LevelDoc, t: usize, kind: KindDoc, width: usize, n: usize) -> Result<Level> {
    let at = |field: &str| format!("levels[{t}].{field}");
    if let Some(j) = doc.labels.iter().position(|&l| l >= n) {
        return Err(parse_error(at(&format!("labels[{j}]")), format!("label {} is not below n = {n}", doc.labels[j])));
    }
    let level = match kind {
        KindDoc::Restricted => {
            forbid(&doc.a0, at("a0"), "restricted")?;
            forbid(&doc.a1, at("a1"), "restricted")?;
            let base = matrix_from_doc(require(&doc.base, at("base"))?, &at("base"))?;
            let thetas = require(&doc.thetas, at("thetas"))?.clone();
            RestrictedLevel::new(doc.labels.clone(), base, thetas)
                .map(Level::Restricted)
                .map_err(|e| parse_error(at("base"), e.to_string()))?
        }
        KindDoc::General => {
            forbid(&doc.base, at("base"), "general")?;
            forbid(&doc.thetas, at("thetas"), "general")?;
            let a0 = matrix_from_doc(require(&doc.a0, at("a0"))?, &at("a0"))?;
            let a1 = matrix_from_doc(require(&doc.a1, at("a1"))?, &at("a1"))?;
            GeneralLevel::new(doc.labels.clone(), a0, a1)
                .map(Level::General)
                .map_err(|e| parse_error(at("a0"), e.to_string()))?
        }
    };
    match level.width() {
        w if w > width => Err(parse_error(at("labels"), format!("level has {w} nodes but width is {width}"))),
        w if w < width => pad_level(&level, width),
        _ => Ok(level),
    }
}

/// Parses a `gqbp-v1` document. Levels narrower than `width` are padded with
/// identity self-transitions.
pub fn parse_program(text: &str) -> Result<Program> {
    let doc: ProgramDoc = decode(text)?;
    check_format(&doc.format, PROGRAM_FORMAT)?;
    if doc.n == 0 {
        return Err(parse_error("n", "must be at least 1"));
    }
    if doc.width == 0 {
        return Err(parse_error("width", "must be at least 1"));
    }
    if doc.initial.len() != doc.width {
        return Err(parse_error(
            "initial",
            format!("has {} amplitudes but width is {}", doc.initial.len(), doc.width),
        ));
    }
    if let Some(i) = doc.accept.iter().position(|&a| a >= doc.width) {
        return Err(parse_error(
            format!("accept[{i}]"),
            format!("index {} is not below width {}", doc.accept[i], doc.width),
        ));
    }
    let levels = doc
        .levels
        .iter()
        .enumerate()
        .map(|(t, l)| level_from_doc(l, t, doc.kind, doc.width, doc.n))
        .collect::<Result<Vec<_>>>()?;
    let kind = match doc.kind {
        KindDoc::General => ProgramKind::General,
        KindDoc::Restricted => ProgramKind::Restricted,
    };
    let initial = doc.initial.iter().map(complex).collect();
    Program::new(doc.n, kind, initial, levels, doc.accept).map_err(|e| parse_error(".", e.to_string()))
}

/// Serializes a program. The alternating-form marker is not stored.
pub fn serialize_program(program: &Program) -> String {
    let levels = program
        .levels()
        .iter()
        .map(|level| match level {
            Level::Restricted(r) => LevelDoc {
                labels: r.labels().to_vec(),
                base: Some(matrix_to_doc(r.base())),
                thetas: Some(r.thetas().to_vec()),
                a0: None,
                a1: None,
            },
            Level::General(g) => LevelDoc {
                labels: g.labels().to_vec(),
                base: None,
                thetas: None,
                a0: Some(matrix_to_doc(g.a0())),
                a1: Some(matrix_to_doc(g.a1())),
            },
        })
        .collect();
    encode(&ProgramDoc {
        format: PROGRAM_FORMAT.into(),
        n: program.n(),
        kind: match program.kind() {
            ProgramKind::General => KindDoc::General,
            ProgramKind::Restricted => KindDoc::Restricted,
        },
        width: program.width(),
        initial: program.initial().iter().map(pair).collect(),
        levels,
        accept: program.accept().iter().copied().collect(),
    })
}

/// Parses a `qqc-v1` document.
pub fn parse_circuit(text: &str) -> Result<QueryCircuit> {
    let doc: CircuitDoc = decode(text)?;
    check_format(&doc.format, CIRCUIT_FORMAT)?;
    if doc.qubits > MAX_QUBITS {
        return Err(parse_error("qubits", format!("{} exceeds the limit of {MAX_QUBITS}", doc.qubits)));
    }
    let dim = 1usize << doc.qubits;
    if let Some(i) = doc.accept.iter().position(|&a| a >= dim) {
        return Err(parse_error(
            format!("accept[{i}]"),
            format!("index {} is not below 2^qubits = {dim}", doc.accept[i]),
        ));
    }
    let gates = doc
        .gates
        .iter()
        .enumerate()
        .map(|(g, gate)| match gate {
            GateDoc::Unitary { matrix } => {
                let path = format!("gates[{g}].matrix");
                let m = matrix_from_doc(matrix, &path)?;
                if m.rows() != dim {
                    return Err(parse_error(path, format!("matrix is {0}x{0}, expected {dim}x{dim}", m.rows())));
                }
                Ok(Gate::unitary(m))
            }
            GateDoc::PhaseOracle => Ok(Gate::PhaseOracle),
            GateDoc::BitOracle { index_wires, target_wire } => Ok(Gate::BitOracle {
                index_wires: index_wires.clone(),
                target_wire: *target_wire,
            }),
        })
        .collect::<Result<Vec<_>>>()?;
    QueryCircuit::new(doc.qubits, doc.n, gates, doc.accept).map_err(|e| parse_error("gates", e.to_string()))
}

pub fn serialize_circuit(circuit: &QueryCircuit) -> String {
    let gates = circuit
        .gates()
        .iter()
        .map(|gate| match gate {
            Gate::Unitary(u) => GateDoc::Unitary { matrix: matrix_to_doc(u.matrix()) },
            Gate::PhaseOracle => GateDoc::PhaseOracle,
            Gate::BitOracle { index_wires, target_wire } => GateDoc::BitOracle {
                index_wires: index_wires.clone(),
                target_wire: *target_wire,
            },
        })
        .collect();
    encode(&CircuitDoc {
        format: CIRCUIT_FORMAT.into(),
        qubits: circuit.qubits(),
        n: circuit.n(),
        gates,
        accept: circuit.accept().iter().copied().collect(),
    })
}

/// A parsed document of either kind.
#[derive(Clone, Debug)]
pub enum Document {
    Program(Program),
    Circuit(QueryCircuit),
}

/// Dispatches on the `format` field.
pub fn parse_document(text: &str) -> Result<Document> {
    #[derive(Deserialize)]
    struct Header {
        format: String,
    }
    let header: Header = decode(text)?;
    match header.format.as_str() {
        PROGRAM_FORMAT => parse_program(text).map(Document::Program),
        CIRCUIT_FORMAT => parse_circuit(text).map(Document::Circuit),
        other => Err(parse_error(
            "format",
            format!("unknown format \"{other}\", expected \"{PROGRAM_FORMAT}\" or \"{CIRCUIT_FORMAT}\""),
        )),
    }
}
