//! Branching-program domain types and the well-behavedness checks.
//!
//! A [`Program`] is a levelled branching program of uniform width `s`. Level
//! `t` maps the node amplitudes on layer `t` to layer `t + 1`; node `j` of a
//! level reads the input bit `x[labels[j]]` and contributes its 0- or
//! 1-transition vector (a matrix column) accordingly.
//!
//! Two encodings of a level exist. [`GeneralLevel`] stores both transition
//! matrices explicitly. [`RestrictedLevel`] stores a base matrix and one phase
//! per node: the 1-transition of node `j` is `e^{iθ_j}` times its
//! 0-transition, so the transition on input `x` is `base · diag(e^{iθ_j x_{labels[j]}})`.

use std::collections::BTreeSet;
use std::f64::consts::TAU;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix};

pub type Amplitude = Complex64;

pub const DEFAULT_TOL: f64 = 1e-9;
pub const DEFAULT_MAX_DISTINCT: usize = 20;

/// A classical input `x ∈ {0,1}^n`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct InputString(Vec<bool>);

impl InputString {
    pub fn new(bits: Vec<bool>) -> Self {
        InputString(bits)
    }

    pub fn zeros(n: usize) -> Self {
        InputString(vec![false; n])
    }

    /// The Promise-OR instance with a single 1 at position `p` (0-based).
    pub fn unit(n: usize, p: usize) -> Self {
        let mut bits = vec![false; n];
        bits[p] = true;
        InputString(bits)
    }

    /// Bit `i` of the binary expansion of `value`, most significant first.
    pub fn from_index(value: u64, n: usize) -> Self {
        InputString((0..n).map(|i| (value >> (n - 1 - i)) & 1 == 1).collect())
    }

    /// All `2^n` strings in lexicographic order.
    pub fn all(n: usize) -> impl Iterator<Item = InputString> {
        assert!(n < 64, "exhaustive enumeration needs n < 64");
        (0..1u64 << n).map(move |v| InputString::from_index(v, n))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn bit(&self, i: usize) -> bool {
        self.0[i]
    }

    /// Oracle lookup with the padding convention: indices past the end read 0.
    pub fn bit_or_zero(&self, i: usize) -> bool {
        self.0.get(i).copied().unwrap_or(false)
    }

    pub fn bits(&self) -> &[bool] {
        &self.0
    }

    pub fn weight(&self) -> usize {
        self.0.iter().filter(|&&b| b).count()
    }

    pub fn parity(&self) -> bool {
        self.weight() % 2 == 1
    }
}

impl FromStr for InputString {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s.is_empty() {
            return Err(Error::BitString("empty string".into()));
        }
        s.chars()
            .enumerate()
            .map(|(i, c)| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(Error::BitString(format!("character {other:?} at position {i}"))),
            })
            .collect::<Result<Vec<_>>>()
            .map(InputString)
    }
}

impl fmt::Display for InputString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.0 {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

/// A level given by explicit 0- and 1-transition matrices.
#[derive(Clone, Debug, PartialEq)]
pub struct GeneralLevel {
    labels: Vec<usize>,
    a0: CMatrix,
    a1: CMatrix,
}

impl GeneralLevel {
    pub fn new(labels: Vec<usize>, a0: CMatrix, a1: CMatrix) -> Result<Self> {
        let s = labels.len();
        for (name, m) in [("a0", &a0), ("a1", &a1)] {
            if m.rows() != s || m.cols() != s {
                return Err(Error::Dimension(format!(
                    "{name} is {}x{} but the level has {s} labels",
                    m.rows(),
                    m.cols()
                )));
            }
            if !m.is_finite() {
                return Err(Error::NonFinite(name.into()));
            }
        }
        Ok(GeneralLevel { labels, a0, a1 })
    }

    pub fn width(&self) -> usize {
        self.labels.len()
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn a0(&self) -> &CMatrix {
        &self.a0
    }

    pub fn a1(&self) -> &CMatrix {
        &self.a1
    }

    /// Column `j` taken from `a0` or `a1` according to `bit_of(labels[j])`.
    pub fn assemble(&self, bit_of: impl Fn(usize) -> bool) -> CMatrix {
        let s = self.width();
        CMatrix::from_fn(s, s, |i, j| {
            if bit_of(self.labels[j]) {
                self.a1[(i, j)]
            } else {
                self.a0[(i, j)]
            }
        })
    }
}

/// A level in restricted (phase) form.
#[derive(Clone, Debug, PartialEq)]
pub struct RestrictedLevel {
    labels: Vec<usize>,
    base: CMatrix,
    thetas: Vec<f64>,
}

impl RestrictedLevel {
    pub fn new(labels: Vec<usize>, base: CMatrix, thetas: Vec<f64>) -> Result<Self> {
        let s = labels.len();
        if base.rows() != s || base.cols() != s {
            return Err(Error::Dimension(format!(
                "base is {}x{} but the level has {s} labels",
                base.rows(),
                base.cols()
            )));
        }
        if thetas.len() != s {
            return Err(Error::Dimension(format!(
                "{} thetas for {s} labels",
                thetas.len()
            )));
        }
        if !base.is_finite() {
            return Err(Error::NonFinite("base".into()));
        }
        if thetas.iter().any(|t| !t.is_finite()) {
            return Err(Error::NonFinite("thetas".into()));
        }
        Ok(RestrictedLevel { labels, base, thetas })
    }

    /// A query-independent level: `base` applied regardless of input.
    pub fn fixed(base: CMatrix) -> Result<Self> {
        let s = base.cols();
        Self::new(vec![0; s], base, vec![0.0; s])
    }

    pub fn width(&self) -> usize {
        self.labels.len()
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn base(&self) -> &CMatrix {
        &self.base
    }

    pub fn thetas(&self) -> &[f64] {
        &self.thetas
    }

    /// Per-node phase factors `e^{iθ_j·bit}`.
    pub fn phases(&self, bit_of: impl Fn(usize) -> bool) -> Vec<Complex64> {
        self.labels
            .iter()
            .zip(&self.thetas)
            .map(|(&l, &t)| if bit_of(l) { Complex64::from_polar(1.0, t) } else { linalg::ONE })
            .collect()
    }

    pub fn assemble(&self, bit_of: impl Fn(usize) -> bool) -> CMatrix {
        self.base.scale_columns(&self.phases(bit_of))
    }

    /// True when no node carries a nonzero phase.
    pub fn is_query_independent(&self) -> bool {
        self.thetas.iter().all(|&t| t == 0.0)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Level {
    General(GeneralLevel),
    Restricted(RestrictedLevel),
}

impl Level {
    pub fn width(&self) -> usize {
        match self {
            Level::General(l) => l.width(),
            Level::Restricted(l) => l.width(),
        }
    }

    pub fn labels(&self) -> &[usize] {
        match self {
            Level::General(l) => l.labels(),
            Level::Restricted(l) => l.labels(),
        }
    }

    pub fn kind(&self) -> ProgramKind {
        match self {
            Level::General(_) => ProgramKind::General,
            Level::Restricted(_) => ProgramKind::Restricted,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ProgramKind {
    General,
    Restricted,
}

/// A levelled branching program of uniform width.
#[derive(Clone, Debug, PartialEq)]
pub struct Program {
    n: usize,
    width: usize,
    kind: ProgramKind,
    initial: Vec<Amplitude>,
    levels: Vec<Level>,
    accept: BTreeSet<usize>,
    alternating: bool,
}

impl Program {
    /// Checks the structural invariants: every level has the program's width
    /// and kind, labels are below `n`, accept indices below the width, and all
    /// amplitudes are finite. Normalization and unitarity are left to
    /// [`validate_program`].
    pub fn new(
        n: usize,
        kind: ProgramKind,
        initial: Vec<Amplitude>,
        levels: Vec<Level>,
        accept: impl IntoIterator<Item = usize>,
    ) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument("input length n must be at least 1".into()));
        }
        let width = initial.len();
        if width == 0 {
            return Err(Error::Dimension("program width must be positive".into()));
        }
        if initial.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite("initial".into()));
        }
        for (t, level) in levels.iter().enumerate() {
            if level.width() != width {
                return Err(Error::Dimension(format!(
                    "level {t} has width {} but the program has width {width}",
                    level.width()
                )));
            }
            if level.kind() != kind {
                return Err(Error::Dimension(format!(
                    "level {t} is {:?} in a {kind:?} program",
                    level.kind()
                )));
            }
            if let Some(&label) = level.labels().iter().find(|&&l| l >= n) {
                return Err(Error::LabelOutOfRange { level: t, label, n });
            }
        }
        let accept: BTreeSet<usize> = accept.into_iter().collect();
        if let Some(&index) = accept.iter().find(|&&a| a >= width) {
            return Err(Error::AcceptOutOfRange { index, bound: width });
        }
        Ok(Program { n, width, kind, initial, levels, accept, alternating: false })
    }

    pub fn restricted(
        n: usize,
        initial: Vec<Amplitude>,
        levels: Vec<RestrictedLevel>,
        accept: impl IntoIterator<Item = usize>,
    ) -> Result<Self> {
        let levels = levels.into_iter().map(Level::Restricted).collect();
        Self::new(n, ProgramKind::Restricted, initial, levels, accept)
    }

    pub fn general(
        n: usize,
        initial: Vec<Amplitude>,
        levels: Vec<GeneralLevel>,
        accept: impl IntoIterator<Item = usize>,
    ) -> Result<Self> {
        let levels = levels.into_iter().map(Level::General).collect();
        Self::new(n, ProgramKind::General, initial, levels, accept)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn width(&self) -> usize {
        self.width
    }

    /// Number of levels (transitions).
    pub fn len(&self) -> usize {
        self.levels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }

    pub fn kind(&self) -> ProgramKind {
        self.kind
    }

    pub fn initial(&self) -> &[Amplitude] {
        &self.initial
    }

    pub fn levels(&self) -> &[Level] {
        &self.levels
    }

    pub fn accept(&self) -> &BTreeSet<usize> {
        &self.accept
    }

    /// Set when the levels alternate query-dependent / query-independent.
    pub fn is_alternating(&self) -> bool {
        self.alternating
    }

    pub fn with_alternating(mut self, alternating: bool) -> Self {
        self.alternating = alternating;
        self
    }

    pub fn with_accept(mut self, accept: impl IntoIterator<Item = usize>) -> Result<Self> {
        let accept: BTreeSet<usize> = accept.into_iter().collect();
        if let Some(&index) = accept.iter().find(|&&a| a >= self.width) {
            return Err(Error::AcceptOutOfRange { index, bound: self.width });
        }
        self.accept = accept;
        Ok(self)
    }

    pub fn with_initial(mut self, initial: Vec<Amplitude>) -> Result<Self> {
        if initial.len() != self.width {
            return Err(Error::Dimension(format!(
                "initial has length {} for width {}",
                initial.len(),
                self.width
            )));
        }
        self.initial = initial;
        Ok(self)
    }

    /// Restricted levels, or `None` for a general program.
    pub fn restricted_levels(&self) -> Option<Vec<&RestrictedLevel>> {
        self.levels
            .iter()
            .map(|l| match l {
                Level::Restricted(r) => Some(r),
                Level::General(_) => None,
            })
            .collect()
    }

    pub fn require_restricted(&self) -> Result<Vec<&RestrictedLevel>> {
        if self.kind != ProgramKind::Restricted {
            return Err(Error::NotRestricted);
        }
        self.restricted_levels().ok_or(Error::NotRestricted)
    }

    /// Number of query-dependent transitions. For an alternating program this
    /// is half its length; otherwise every level counts.
    pub fn query_levels(&self) -> usize {
        if self.alternating {
            self.levels.len() / 2
        } else {
            self.levels.len()
        }
    }

    pub fn check_input(&self, x: &InputString) -> Result<()> {
        if x.len() != self.n {
            return Err(Error::InputLength { got: x.len(), expected: self.n });
        }
        Ok(())
    }
}

/// Outcome of a unitarity / well-behavedness check.
#[derive(Clone, Debug, PartialEq)]
pub struct ValidationReport {
    pub passed: bool,
    pub tol: f64,
    /// Largest max-entry deviation of `M†M − I` over everything checked.
    pub max_deviation: f64,
    /// Number of bit assignments whose transition matrix was assembled.
    pub assignments_checked: u64,
    /// The worst assignment as `(variable, bit)` pairs, when it failed.
    pub failing_assignment: Option<Vec<(usize, bool)>>,
    /// How well-behavedness was interpreted for this check.
    pub reading: &'static str,
}

const READING_RESTRICTED: &str = "restricted: base unitary implies unitary transition on every input";
const READING_ALL_ASSIGNMENTS: &str =
    "general: unitary for all 2^d assignments of the d distinct variables queried at the level";

pub fn validate_restricted(level: &RestrictedLevel, tol: f64) -> Result<ValidationReport> {
    if tol.is_nan() || tol <= 0.0 {
        return Err(Error::InvalidArgument(format!("tolerance must be positive, got {tol}")));
    }
    let dev = level.base().unitarity_deviation();
    Ok(ValidationReport {
        passed: dev <= tol,
        tol,
        max_deviation: dev,
        assignments_checked: 1,
        failing_assignment: None,
        reading: READING_RESTRICTED,
    })
}

/// Exhaustively checks a general level over every assignment to its distinct
/// labels.
pub fn validate_general(
    level: &GeneralLevel,
    tol: f64,
    max_distinct: usize,
) -> Result<ValidationReport> {
    validate_general_at(level, 0, tol, max_distinct)
}

fn validate_general_at(
    level: &GeneralLevel,
    level_index: usize,
    tol: f64,
    max_distinct: usize,
) -> Result<ValidationReport> {
    if tol.is_nan() || tol <= 0.0 {
        return Err(Error::InvalidArgument(format!("tolerance must be positive, got {tol}")));
    }
    let distinct: Vec<usize> = level.labels().iter().copied().collect::<BTreeSet<_>>().into_iter().collect();
    let d = distinct.len();
    if d > max_distinct || d >= 64 {
        return Err(Error::TooManyLabels { level: level_index, distinct: d, max: max_distinct });
    }
    let mut worst = 0.0f64;
    let mut worst_mask = 0u64;
    let total = 1u64 << d;
    for mask in 0..total {
        let bit_of = |label: usize| {
            let pos = distinct.binary_search(&label).expect("label collected above");
            (mask >> pos) & 1 == 1
        };
        let dev = level.assemble(bit_of).unitarity_deviation();
        if dev > worst {
            worst = dev;
            worst_mask = mask;
        }
    }
    let passed = worst <= tol;
    let failing_assignment = (!passed).then(|| {
        distinct
            .iter()
            .enumerate()
            .map(|(pos, &label)| (label, (worst_mask >> pos) & 1 == 1))
            .collect()
    });
    Ok(ValidationReport {
        passed,
        tol,
        max_deviation: worst,
        assignments_checked: total,
        failing_assignment,
        reading: READING_ALL_ASSIGNMENTS,
    })
}

/// Whole-program validation: initial norm plus every level.
#[derive(Clone, Debug)]
pub struct ProgramValidation {
    pub passed: bool,
    pub initial_norm: f64,
    pub levels: Vec<ValidationReport>,
}

impl ProgramValidation {
    pub fn max_deviation(&self) -> f64 {
        self.levels.iter().map(|r| r.max_deviation).fold(0.0, f64::max)
    }
}

pub fn validate_program(program: &Program, tol: f64, max_distinct: usize) -> Result<ProgramValidation> {
    let initial_norm = linalg::norm(program.initial());
    let levels = program
        .levels()
        .iter()
        .enumerate()
        .map(|(t, level)| match level {
            Level::Restricted(r) => validate_restricted(r, tol),
            Level::General(g) => validate_general_at(g, t, tol, max_distinct),
        })
        .collect::<Result<Vec<_>>>()?;
    let passed = (initial_norm - 1.0).abs() <= tol && levels.iter().all(|r| r.passed);
    Ok(ProgramValidation { passed, initial_norm, levels })
}

/// Canonical phase angle in `[0, 2π)`.
pub(crate) fn canonical_angle(theta: f64) -> f64 {
    let t = theta.rem_euclid(TAU);
    if t >= TAU {
        0.0
    } else {
        t
    }
}

/// Converts a general program whose 0/1 transition columns differ by a phase
/// into restricted form.
pub fn restrict(program: &Program, tol: f64) -> Result<Program> {
    let levels = match program.kind() {
        ProgramKind::Restricted => return Ok(program.clone()),
        ProgramKind::General => program.levels(),
    };
    let mut out = Vec::with_capacity(levels.len());
    for (t, level) in levels.iter().enumerate() {
        let Level::General(g) = level else { unreachable!("kind checked") };
        let s = g.width();
        let mut thetas = Vec::with_capacity(s);
        for j in 0..s {
            let c0 = g.a0().column(j);
            let c1 = g.a1().column(j);
            let pivot = c0
                .iter()
                .enumerate()
                .max_by(|a, b| a.1.norm().total_cmp(&b.1.norm()))
                .map(|(i, _)| i)
                .expect("width is positive");
            let theta = if c0[pivot].norm() == 0.0 {
                0.0
            } else {
                canonical_angle((c1[pivot] / c0[pivot]).arg())
            };
            let phase = Complex64::from_polar(1.0, theta);
            let residual = c0
                .iter()
                .zip(&c1)
                .map(|(&a, &b)| (b - phase * a).norm())
                .fold(0.0, f64::max);
            if residual > tol {
                return Err(Error::NotPhaseRelated { level: t, node: j, residual });
            }
            thetas.push(theta);
        }
        out.push(RestrictedLevel::new(g.labels().to_vec(), g.a0().clone(), thetas)?);
    }
    Ok(Program::restricted(program.n(), program.initial().to_vec(), out, program.accept().iter().copied())?
        .with_alternating(program.is_alternating()))
}

/// Expands a restricted program into explicit 0/1 transition matrices.
pub fn generalize(program: &Program) -> Result<Program> {
    let levels = program.require_restricted()?;
    let out = levels
        .iter()
        .map(|r| {
            let phases: Vec<Complex64> =
                r.thetas().iter().map(|&t| Complex64::from_polar(1.0, t)).collect();
            GeneralLevel::new(r.labels().to_vec(), r.base().clone(), r.base().scale_columns(&phases))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Program::general(program.n(), program.initial().to_vec(), out, program.accept().iter().copied())?
        .with_alternating(program.is_alternating()))
}
