//! Hybrid-argument measurements.
//!
//! For a restricted program in alternating form, let `α_t` be the state just
//! before the `t`-th query-dependent level on the base input `x`. Switching
//! that one level from `x` to `y` moves the state by at most
//! `2·Σ_{j∈Δ(x,y,t)} |α_{j,t}|`, where `Δ(x,y,t)` holds the nodes whose label
//! points at a position where `x` and `y` differ. Telescoping over the levels
//! bounds `‖ψ(x) − ψ(y)‖`; averaging over Promise-OR or Hamming instance
//! families and capping `Σ_j |α_{j,t}|` by `√s` gives the closed-form bounds
//! reported here.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::convert::{check_inputs, circuit_to_rgqbp};
use crate::error::{Error, Result};
use crate::linalg;
use crate::model::{InputString, Level, Program};
use crate::programs::{grover_promise_or, hamming_family, parity_program, HammingSide};
use crate::simulate::{acceptance_of_state, apply_level, final_state, BOUNDED_ERROR};
use crate::transform::split_layers;

/// Slack below which a bound counts as violated.
pub const SLACK_TOL: f64 = 1e-9;

/// Final-state distance required between inputs whose acceptance
/// probabilities differ by at least 1/3: `|P(x) − P(y)| ≤ 2‖ψ_x − ψ_y‖`.
pub const DISTINGUISHABILITY_FLOOR: f64 = 1.0 / 6.0;

/// Attached to every distinguishability report.
pub const FLOOR_NOTE: &str = "floor 1/6 is a chosen constant: |P(x) - P(y)| <= 2|psi_x - psi_y| at gap 1/3";

/// Minimum acceptance-probability gap for a pair to be tested against the floor.
pub const PROBABILITY_GAP: f64 = 1.0 / 3.0;

/// Families larger than this are sampled instead of enumerated.
pub const EXHAUSTIVE_FAMILY_LIMIT: u128 = 100_000;
pub const FAMILY_SAMPLE_SIZE: usize = 10_000;

/// Evolves `program` reading `x_base` for the first `L − k` query-dependent
/// levels and `x_alt` for the last `k`.
pub fn hybrid_run(program: &Program, x_base: &InputString, x_alt: &InputString, k: usize) -> Result<Vec<Complex64>> {
    program.check_input(x_base)?;
    program.check_input(x_alt)?;
    let split = split_layers(program)?;
    let queries = split.query_levels();
    if k > queries {
        return Err(Error::SwitchOutOfRange { k, levels: queries });
    }
    let switch_at = queries - k;
    let mut state = split.initial().to_vec();
    for (i, level) in split.levels().iter().enumerate() {
        let x = if i / 2 < switch_at { x_base } else { x_alt };
        state = apply_level(level, x, &state);
    }
    Ok(state)
}

/// Amplitudes `α_t` just before each query-dependent level of the run on `x`.
fn query_snapshots(split: &Program, x: &InputString) -> (Vec<Vec<Complex64>>, Vec<Complex64>) {
    let mut alpha = Vec::with_capacity(split.query_levels());
    let mut state = split.initial().to_vec();
    for (i, level) in split.levels().iter().enumerate() {
        if i % 2 == 0 {
            alpha.push(state.clone());
        }
        state = apply_level(level, x, &state);
    }
    (alpha, state)
}

#[derive(Clone, Debug, PartialEq)]
pub struct HybridTrace {
    /// `α_t` for each query-dependent level `t`, from the run on the base input.
    pub alpha: Vec<Vec<Complex64>>,
    /// `2·Σ_{j∈Δ(x,y,t)} |α_{j,t}|` per level.
    pub deviations: Vec<f64>,
    /// `Σ_j |α_{j,t}|` per level; never exceeds `√s`.
    pub level_l1: Vec<f64>,
    /// Distances between consecutive hybrids, one per switched level.
    pub step_distances: Vec<f64>,
    pub final_distance: f64,
    /// Sum of `deviations`.
    pub bound: f64,
    pub holds: bool,
}

impl HybridTrace {
    /// Whether `Σ_j |α_{j,t}| ≤ √s` at every level.
    pub fn cauchy_schwarz_holds(&self, width: usize) -> bool {
        let cap = (width as f64).sqrt() + SLACK_TOL;
        self.level_l1.iter().all(|&v| v <= cap)
    }
}

/// Per-level deviation accounting for the pair `(x, y)`.
pub fn hybrid_deviation(program: &Program, x: &InputString, y: &InputString) -> Result<HybridTrace> {
    program.check_input(x)?;
    program.check_input(y)?;
    let split = split_layers(program)?;
    let (alpha, final_x) = query_snapshots(&split, x);
    let final_y = final_state(&split, y)?;

    let mut deviations = Vec::with_capacity(alpha.len());
    let mut level_l1 = Vec::with_capacity(alpha.len());
    for (t, a) in alpha.iter().enumerate() {
        let labels = split.levels()[2 * t].labels();
        let delta: f64 = labels
            .iter()
            .zip(a)
            .filter(|(&l, _)| x.bit(l) != y.bit(l))
            .map(|(_, z)| z.norm())
            .sum();
        deviations.push(2.0 * delta);
        level_l1.push(a.iter().map(|z| z.norm()).sum());
    }

    let queries = alpha.len();
    let hybrids = (0..=queries)
        .map(|k| hybrid_run(&split, x, y, k))
        .collect::<Result<Vec<_>>>()?;
    let step_distances = hybrids.windows(2).map(|w| linalg::distance(&w[0], &w[1])).collect();

    let final_distance = linalg::distance(&final_x, &final_y);
    let bound: f64 = deviations.iter().sum();
    Ok(HybridTrace {
        alpha,
        deviations,
        level_l1,
        step_distances,
        final_distance,
        bound,
        holds: final_distance <= bound + SLACK_TOL,
    })
}

/// An empirical quantity paired with its analytic bound.
#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentReport {
    pub name: String,
    pub empirical: f64,
    pub bound: f64,
    pub slack: f64,
    pub passed: bool,
    pub metadata: BTreeMap<String, String>,
}

impl ExperimentReport {
    fn new(name: &str, empirical: f64, bound: f64, metadata: BTreeMap<String, String>) -> Self {
        let slack = bound - empirical;
        ExperimentReport {
            name: name.to_string(),
            empirical,
            bound,
            slack,
            passed: slack >= -SLACK_TOL,
            metadata,
        }
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{}", self.name);
        let _ = writeln!(out, "  empirical    {:.12}", self.empirical);
        let _ = writeln!(out, "  bound        {:.12}", self.bound);
        let _ = writeln!(out, "  slack        {:.12}", self.slack);
        let _ = writeln!(out, "  verdict      {}", if self.passed { "pass" } else { "FAIL" });
        for (k, v) in &self.metadata {
            let _ = writeln!(out, "  {k:<12} {v}");
        }
        out
    }
}

/// `Σ_t Σ_j |α_{j,t}|` and the largest per-level sum for the run on `x`.
fn alpha_mass(split: &Program, x: &InputString) -> (f64, f64) {
    let (alpha, _) = query_snapshots(split, x);
    let sums: Vec<f64> = alpha.iter().map(|a| a.iter().map(|z| z.norm()).sum()).collect();
    (sums.iter().sum(), sums.iter().copied().fold(0.0, f64::max))
}

/// Mean final-state distance between `0^n` and the `n` single-one inputs,
/// against `2(L+1)√s / n`.
pub fn promise_or_expectation(program: &Program) -> Result<ExperimentReport> {
    let split = split_layers(program)?;
    let n = program.n();
    let s = program.width();
    let queries = split.query_levels();
    let zero = InputString::zeros(n);
    let base = final_state(&split, &zero)?;
    let distances: Vec<f64> = (0..n)
        .into_par_iter()
        .map(|p| final_state(&split, &InputString::unit(n, p)).map(|f| linalg::distance(&base, &f)))
        .collect::<Result<_>>()?;
    let empirical = distances.iter().sum::<f64>() / n as f64;
    let bound = 2.0 * (queries as f64 + 1.0) * (s as f64).sqrt() / n as f64;
    let (mass, max_l1) = alpha_mass(&split, &zero);

    let mut meta = BTreeMap::new();
    meta.insert("n".into(), n.to_string());
    meta.insert("s".into(), s.to_string());
    meta.insert("L".into(), queries.to_string());
    meta.insert("alpha_bound".into(), format!("{:.12}", 2.0 * mass / n as f64));
    meta.insert("max_l1".into(), format!("{max_l1:.12}"));
    meta.insert("sqrt_s".into(), format!("{:.12}", (s as f64).sqrt()));
    meta.insert(
        "cs_cap".into(),
        if max_l1 <= (s as f64).sqrt() + SLACK_TOL { "ok" } else { "violated" }.into(),
    );
    let mut report = ExperimentReport::new("promise-or expectation", empirical, bound, meta);
    if max_l1 > (s as f64).sqrt() + SLACK_TOL {
        report.passed = false;
    }
    Ok(report)
}

/// Mean final-state distance between `fixed` and its Hamming family, against
/// `2(L+1)δ√s/(n−k)` when `fixed` has weight `k` and `2(L+1)δ√s/k` when it
/// has weight `k + δ`.
pub fn hamming_expectation(program: &Program, k: usize, delta: usize, fixed: &InputString, seed: u64) -> Result<ExperimentReport> {
    let split = split_layers(program)?;
    let n = program.n();
    let s = program.width();
    let queries = split.query_levels();
    let family = hamming_family(n, k, delta, fixed)?;
    let size = family.len();
    if size == 0 {
        return Err(Error::InvalidArgument(format!(
            "the (n = {n}, k = {k}, delta = {delta}) family around {fixed} is empty"
        )));
    }
    let (members, mode): (Vec<InputString>, String) = if size <= EXHAUSTIVE_FAMILY_LIMIT {
        (family.iter().collect(), "exhaustive".into())
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let sample = (0..FAMILY_SAMPLE_SIZE)
            .map(|_| family.member(rng.random_range(0..size)))
            .collect();
        (sample, format!("sampled {FAMILY_SAMPLE_SIZE} (seed {seed})"))
    };
    let base = final_state(&split, fixed)?;
    let distances: Vec<f64> = members
        .par_iter()
        .map(|m| final_state(&split, m).map(|f| linalg::distance(&base, &f)))
        .collect::<Result<_>>()?;
    let empirical = distances.iter().sum::<f64>() / distances.len() as f64;

    let numerator = 2.0 * (queries as f64 + 1.0) * delta as f64 * (s as f64).sqrt();
    let (case, denominator) = match family.side {
        HammingSide::FixYes => ("fix weight k", (n - k) as f64),
        HammingSide::FixNo => ("fix weight k+delta", k as f64),
    };
    let bound = if delta == 0 { 0.0 } else { numerator / denominator };

    let mut meta = BTreeMap::new();
    meta.insert("n".into(), n.to_string());
    meta.insert("s".into(), s.to_string());
    meta.insert("L".into(), queries.to_string());
    meta.insert("k".into(), k.to_string());
    meta.insert("delta".into(), delta.to_string());
    meta.insert("case".into(), case.into());
    meta.insert("family".into(), size.to_string());
    meta.insert("mode".into(), mode);
    Ok(ExperimentReport::new("hamming expectation", empirical, bound, meta))
}

#[derive(Clone, Debug, PartialEq)]
pub struct DistinguishabilityReport {
    pub pairs_checked: usize,
    /// Pairs whose acceptance probabilities differ by at least 1/3.
    pub gapped_pairs: usize,
    pub min_gapped_distance: Option<f64>,
    pub distance_violations: Vec<(InputString, InputString, f64)>,
    /// Inputs the program misclassifies under the 2/3 convention.
    pub decision_failures: Vec<(InputString, f64)>,
    pub floor: f64,
    pub note: &'static str,
    pub passed: bool,
}

/// Checks the final-state distance floor over all cross-class pairs and
/// reports inputs that miss the bounded-error threshold.
pub fn distinguishability_check(program: &Program, yes: &[InputString], no: &[InputString]) -> Result<DistinguishabilityReport> {
    let evaluate = |xs: &[InputString]| -> Result<Vec<(Vec<Complex64>, f64)>> {
        xs.par_iter()
            .map(|x| {
                let f = final_state(program, x)?;
                let p = acceptance_of_state(&f, program.accept().iter().copied());
                Ok((f, p))
            })
            .collect()
    };
    let yes_runs = evaluate(yes)?;
    let no_runs = evaluate(no)?;

    let mut decision_failures = Vec::new();
    for (x, (_, p)) in yes.iter().zip(&yes_runs) {
        if *p < BOUNDED_ERROR {
            decision_failures.push((x.clone(), *p));
        }
    }
    for (x, (_, p)) in no.iter().zip(&no_runs) {
        if *p > 1.0 - BOUNDED_ERROR {
            decision_failures.push((x.clone(), *p));
        }
    }

    let mut pairs_checked = 0;
    let mut gapped_pairs = 0;
    let mut min_gapped_distance: Option<f64> = None;
    let mut distance_violations = Vec::new();
    for (x, (fx, px)) in yes.iter().zip(&yes_runs) {
        for (y, (fy, py)) in no.iter().zip(&no_runs) {
            pairs_checked += 1;
            if (px - py).abs() + SLACK_TOL < PROBABILITY_GAP {
                continue;
            }
            gapped_pairs += 1;
            let d = linalg::distance(fx, fy);
            min_gapped_distance = Some(min_gapped_distance.map_or(d, |m| m.min(d)));
            if d < DISTINGUISHABILITY_FLOOR - SLACK_TOL {
                distance_violations.push((x.clone(), y.clone(), d));
            }
        }
    }
    let passed = decision_failures.is_empty() && distance_violations.is_empty();
    Ok(DistinguishabilityReport {
        pairs_checked,
        gapped_pairs,
        min_gapped_distance,
        distance_violations,
        decision_failures,
        floor: DISTINGUISHABILITY_FLOOR,
        note: FLOOR_NOTE,
        passed,
    })
}

/// One program of a family together with its promise set.
#[derive(Clone, Debug)]
pub struct FamilyInstance {
    pub program: Program,
    /// `(input, expected answer)` pairs.
    pub promise: Vec<(InputString, bool)>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Family {
    Parity,
    GroverOr,
}

impl Family {
    pub fn instance(self, n: usize) -> Result<FamilyInstance> {
        match self {
            Family::Parity => {
                let program = parity_program(n)?;
                let (inputs, _) = check_inputs(n, 0);
                let promise = inputs.into_iter().map(|x| {
                    let parity = x.parity();
                    (x, parity)
                });
                Ok(FamilyInstance { program, promise: promise.collect() })
            }
            Family::GroverOr => {
                let program = circuit_to_rgqbp(&grover_promise_or(n)?)?;
                Ok(FamilyInstance { program, promise: promise_or_inputs(n) })
            }
        }
    }
}

/// `0^n` (answer 0) followed by every `1_p` (answer 1).
pub fn promise_or_inputs(n: usize) -> Vec<(InputString, bool)> {
    std::iter::once((InputString::zeros(n), false))
        .chain((0..n).map(|p| (InputString::unit(n, p), true)))
        .collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct TradeoffRow {
    pub n: usize,
    pub width: usize,
    pub length: usize,
    pub min_success: f64,
    pub l_sqrt_s: f64,
    pub ratio: f64,
}

/// Smallest probability of answering correctly over the promise set.
pub fn min_success(instance: &FamilyInstance) -> Result<f64> {
    let program = &instance.program;
    let probs: Vec<f64> = instance
        .promise
        .par_iter()
        .map(|(x, answer)| {
            let f = final_state(program, x)?;
            let p = acceptance_of_state(&f, program.accept().iter().copied());
            Ok(if *answer { p } else { 1.0 - p })
        })
        .collect::<Result<_>>()?;
    Ok(probs.into_iter().fold(1.0, f64::min))
}

/// Rows `(n, s, L, min success, L·√s, L·√s/n)` for each size.
pub fn tradeoff_scan<F>(family: F, sizes: &[usize]) -> Result<Vec<TradeoffRow>>
where
    F: Fn(usize) -> Result<FamilyInstance>,
{
    sizes
        .iter()
        .map(|&n| {
            let instance = family(n)?;
            let width = instance.program.width();
            let length = instance.program.query_levels();
            let l_sqrt_s = length as f64 * (width as f64).sqrt();
            Ok(TradeoffRow {
                n,
                width,
                length,
                min_success: min_success(&instance)?,
                l_sqrt_s,
                ratio: l_sqrt_s / n as f64,
            })
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TableFormat {
    Csv,
    Text,
}

pub fn render_tradeoff(rows: &[TradeoffRow], format: TableFormat) -> String {
    let header = ["n", "s", "L", "min_success", "L_sqrt_s", "L_sqrt_s_over_n"];
    let cells: Vec<[String; 6]> = rows
        .iter()
        .map(|r| {
            [
                r.n.to_string(),
                r.width.to_string(),
                r.length.to_string(),
                format!("{:.9}", r.min_success),
                format!("{:.9}", r.l_sqrt_s),
                format!("{:.9}", r.ratio),
            ]
        })
        .collect();
    let mut out = String::new();
    match format {
        TableFormat::Csv => {
            out.push_str(&header.join(","));
            out.push('\n');
            for row in &cells {
                out.push_str(&row.join(","));
                out.push('\n');
            }
        }
        TableFormat::Text => {
            let widths: Vec<usize> = (0..header.len())
                .map(|c| cells.iter().map(|r| r[c].len()).chain([header[c].len()]).max().unwrap_or(0))
                .collect();
            let mut line = |fields: Vec<&str>| {
                let padded: Vec<String> =
                    fields.iter().zip(&widths).map(|(f, w)| format!("{f:>w$}")).collect();
                out.push_str(padded.join("  ").trim_end());
                out.push('\n');
            };
            line(header.to_vec());
            for row in &cells {
                line(row.iter().map(String::as_str).collect());
            }
        }
    }
    out
}

/// True when every level of the program is query-independent.
pub fn is_input_independent(program: &Program) -> bool {
    program.levels().iter().all(|l| match l {
        Level::Restricted(r) => r.is_query_independent(),
        Level::General(g) => g.a0() == g.a1(),
    })
}
