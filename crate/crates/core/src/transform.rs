//! Semantics-preserving rewrites of programs.

use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix};
use crate::model::{GeneralLevel, Level, Program, RestrictedLevel};

/// Splits every restricted level into a query-dependent phase level
/// (`base = I`, original thetas and labels) followed by a query-independent
/// level (original base, zero thetas, label 0).
///
/// The output has length `2L` and is marked alternating. Splitting an
/// already-alternating program returns it unchanged.
pub fn split_layers(program: &Program) -> Result<Program> {
    let levels = program.require_restricted()?;
    if program.is_alternating() {
        return Ok(program.clone());
    }
    let s = program.width();
    let mut out = Vec::with_capacity(2 * levels.len());
    for level in levels {
        out.push(RestrictedLevel::new(
            level.labels().to_vec(),
            CMatrix::identity(s),
            level.thetas().to_vec(),
        )?);
        out.push(RestrictedLevel::fixed(level.base().clone())?);
    }
    Ok(Program::restricted(program.n(), program.initial().to_vec(), out, program.accept().iter().copied())?
        .with_alternating(true))
}

fn pad_matrix(m: &CMatrix, target: usize) -> CMatrix {
    let s = m.rows();
    CMatrix::from_fn(target, target, |i, j| {
        if i < s && j < s {
            m[(i, j)]
        } else if i == j {
            linalg::ONE
        } else {
            linalg::ZERO
        }
    })
}

fn pad_labels(labels: &[usize], target: usize) -> Vec<usize> {
    let mut out = labels.to_vec();
    out.resize(target, 0);
    out
}

/// Pads a single level to `target` nodes with identity self-transitions.
pub fn pad_level(level: &Level, target: usize) -> Result<Level> {
    let s = level.width();
    if target < s {
        return Err(Error::InvalidArgument(format!("cannot pad width {s} down to {target}")));
    }
    Ok(match level {
        Level::Restricted(r) => {
            let mut thetas = r.thetas().to_vec();
            thetas.resize(target, 0.0);
            Level::Restricted(RestrictedLevel::new(
                pad_labels(r.labels(), target),
                pad_matrix(r.base(), target),
                thetas,
            )?)
        }
        Level::General(g) => Level::General(GeneralLevel::new(
            pad_labels(g.labels(), target),
            pad_matrix(g.a0(), target),
            pad_matrix(g.a1(), target),
        )?),
    })
}

/// Widens every level to `target` nodes. Dummy nodes carry zero initial
/// amplitude, identity self-transitions, label 0 and θ = 0.
pub fn pad_width(program: &Program, target: usize) -> Result<Program> {
    let s = program.width();
    if target < s {
        return Err(Error::InvalidArgument(format!(
            "target width {target} is smaller than the program width {s}"
        )));
    }
    if target == s {
        return Ok(program.clone());
    }
    let mut initial = program.initial().to_vec();
    initial.resize(target, linalg::ZERO);
    let levels = program
        .levels()
        .iter()
        .map(|l| pad_level(l, target))
        .collect::<Result<Vec<_>>>()?;
    Ok(Program::new(program.n(), program.kind(), initial, levels, program.accept().iter().copied())?
        .with_alternating(program.is_alternating()))
}
