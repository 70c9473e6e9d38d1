//! Acceptance criteria, one line per criterion.

use std::f64::consts::FRAC_1_SQRT_2;
use std::process::ExitCode;
use std::time::Instant;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use gqbp::circuit::{circuit_acceptance, count_queries, Gate, QueryCircuit};
use gqbp::convert::{check_inputs, circuit_to_rgqbp, rgqbp_to_circuit};
use gqbp::experiments::{
    distinguishability_check, hamming_expectation, promise_or_expectation, promise_or_inputs, tradeoff_scan, Family,
    FLOOR_NOTE,
};
use gqbp::format::{parse_circuit, parse_program, serialize_circuit, serialize_program};
use gqbp::linalg::{self, ceil_log2, CMatrix};
use gqbp::model::{validate_program, InputString, Program, DEFAULT_MAX_DISTINCT, DEFAULT_TOL};
use gqbp::programs::{binomial, grover_promise_or, grover_success, hamming_family, parity_program, random_rgqbp, HammingSide};
use gqbp::simulate::{acceptance_probability, final_state};
use gqbp::transform::split_layers;

type Verdict = Result<String, String>;
type Criterion = (&'static str, fn() -> Verdict);

fn ensure(cond: bool, message: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(message())
    }
}

/// Random shape with `s ≤ 8`, `L ≤ 8`, `n ≤ 8`.
fn random_program(rng: &mut ChaCha8Rng) -> Program {
    let s = rng.random_range(1..=8);
    let len = rng.random_range(1..=8);
    let n = rng.random_range(1..=8);
    random_rgqbp(s, len, n, rng.random()).unwrap()
}

fn hadamard() -> CMatrix {
    let h = Complex64::new(FRAC_1_SQRT_2, 0.0);
    CMatrix::from_rows(&[vec![h, h], vec![h, -h]]).unwrap()
}

/// Deutsch's algorithm on a 2-bit phase oracle: accepts iff the bits differ.
fn deutsch() -> QueryCircuit {
    QueryCircuit::new(1, 2, vec![Gate::unitary(hadamard()), Gate::PhaseOracle, Gate::unitary(hadamard())], [1]).unwrap()
}

fn split_equivalence() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst = 0.0f64;
    let mut inputs = 0;
    for _ in 0..200 {
        let p = random_program(&mut rng);
        let split = split_layers(&p).map_err(|e| e.to_string())?;
        for x in InputString::all(p.n()) {
            let a = final_state(&p, &x).unwrap();
            let b = final_state(&split, &x).unwrap();
            worst = worst.max(linalg::distance(&a, &b));
            inputs += 1;
        }
    }
    ensure(worst <= 1e-9, || format!("max distance {worst:e}"))?;
    Ok(format!("200 programs, {inputs} inputs, max distance {worst:.1e}"))
}

fn circuit_to_program() -> Verdict {
    let mut worst = 0.0f64;
    let mut report = Vec::new();
    // Deutsch: the decision is x0 XOR x1 with certainty.
    let d = deutsch();
    let p = circuit_to_rgqbp(&d).map_err(|e| e.to_string())?;
    for x in InputString::all(2) {
        let want = if x.parity() { 1.0 } else { 0.0 };
        let c = circuit_acceptance(&d, &x).unwrap();
        let b = acceptance_probability(&p, &x).unwrap();
        ensure((c - want).abs() < 1e-12, || format!("Deutsch circuit on {x}: {c}"))?;
        worst = worst.max((c - b).abs());
    }
    report.push("deutsch".to_string());
    for n in [4, 16, 64] {
        let c = grover_promise_or(n).unwrap();
        ensure(c.qubits() <= 7, || format!("Grover n={n} uses {} qubits", c.qubits()))?;
        let p = circuit_to_rgqbp(&c).map_err(|e| e.to_string())?;
        let (mut inputs, exhaustive) = check_inputs(n, 7);
        inputs.extend(promise_or_inputs(n).into_iter().map(|(x, _)| x));
        for x in &inputs {
            let a = circuit_acceptance(&c, x).unwrap();
            let b = acceptance_probability(&p, x).unwrap();
            worst = worst.max((a - b).abs());
        }
        // Closed form on the promise inputs.
        let hit = acceptance_probability(&p, &InputString::unit(n, n / 3)).unwrap();
        ensure((hit - grover_success(n)).abs() < 1e-9, || format!("Grover n={n}: {hit} vs {}", grover_success(n)))?;
        report.push(format!("grover n={n} ({} inputs{})", inputs.len(), if exhaustive { ", exhaustive" } else { "" }));
    }
    ensure(worst <= 1e-9, || format!("max deviation {worst:e}"))?;
    Ok(format!("{}; max deviation {worst:.1e}", report.join(", ")))
}

fn program_to_circuit() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut programs: Vec<Program> = [2, 4, 8].iter().map(|&n| parity_program(n).unwrap()).collect();
    programs.extend((0..100).map(|_| random_program(&mut rng)));
    let mut worst = 0.0f64;
    for p in &programs {
        let c = rgqbp_to_circuit(p).map_err(|e| e.to_string())?;
        let wires = ceil_log2(p.width()) + ceil_log2(p.n()) + 1;
        ensure(count_queries(&c) == 2 * p.len(), || format!("{} oracles for L = {}", count_queries(&c), p.len()))?;
        ensure(c.qubits() == wires, || format!("{} wires, expected {wires}", c.qubits()))?;
        for x in InputString::all(p.n()) {
            let a = acceptance_probability(p, &x).unwrap();
            let b = circuit_acceptance(&c, &x).unwrap();
            worst = worst.max((a - b).abs());
        }
    }
    ensure(worst <= 1e-9, || format!("max deviation {worst:e}"))?;
    Ok(format!("{} programs, max deviation {worst:.1e}", programs.len()))
}

fn parity_correctness() -> Verdict {
    let start = Instant::now();
    let mut worst = 0.0f64;
    for n in (2..=12).step_by(2) {
        let p = parity_program(n).unwrap();
        for x in InputString::all(n) {
            let want = if x.parity() { 1.0 } else { 0.0 };
            worst = worst.max((acceptance_probability(&p, &x).unwrap() - want).abs());
        }
    }
    let elapsed = start.elapsed().as_secs_f64();
    ensure(worst <= 1e-9, || format!("max deviation {worst:e}"))?;
    ensure(elapsed < 10.0, || format!("took {elapsed:.1}s"))?;
    Ok(format!("n = 2..12 even, max deviation {worst:.1e}, {elapsed:.2}s"))
}

fn promise_or_bound() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut min_slack = f64::INFINITY;
    for i in 0..200 {
        let p = random_program(&mut rng);
        let r = promise_or_expectation(&p).map_err(|e| e.to_string())?;
        ensure(r.metadata["cs_cap"] == "ok", || format!("program {i}: Cauchy-Schwarz cap violated"))?;
        ensure(r.passed, || format!("program {i}: slack {}", r.slack))?;
        min_slack = min_slack.min(r.slack);
    }
    Ok(format!("200 programs, min slack {min_slack:.4}"))
}

fn weighted_string(n: usize, weight: usize, rng: &mut ChaCha8Rng) -> InputString {
    let mut positions: Vec<usize> = (0..n).collect();
    for i in 0..weight {
        let j = rng.random_range(i..n);
        positions.swap(i, j);
    }
    let mut bits = vec![false; n];
    positions[..weight].iter().for_each(|&p| bits[p] = true);
    InputString::new(bits)
}

fn hamming_bounds() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut min_slack = f64::INFINITY;
    let mut runs = 0;
    for (n, k, delta) in [(8, 2, 1), (8, 3, 2), (8, 6, 1)] {
        for (weight, side, size) in [
            (k, HammingSide::FixYes, binomial(n - k, delta)),
            (k + delta, HammingSide::FixNo, binomial(k + delta, k)),
        ] {
            for _ in 0..50 {
                let s = rng.random_range(1..=8);
                let len = rng.random_range(1..=8);
                let p = random_rgqbp(s, len, n, rng.random()).unwrap();
                let fixed = weighted_string(n, weight, &mut rng);
                let family = hamming_family(n, k, delta, &fixed).map_err(|e| e.to_string())?;
                ensure(family.side == side, || format!("{fixed}: wrong side"))?;
                ensure(family.len() == size, || format!("{fixed}: |R| = {} expected {size}", family.len()))?;
                ensure(family.iter().count() as u128 == size, || format!("{fixed}: enumeration size mismatch"))?;
                let r = hamming_expectation(&p, k, delta, &fixed, 0).map_err(|e| e.to_string())?;
                ensure(r.passed, || format!("(n,k,delta)=({n},{k},{delta}) {fixed}: slack {}", r.slack))?;
                min_slack = min_slack.min(r.slack);
                runs += 1;
            }
        }
    }
    Ok(format!("{runs} runs over both cases, min slack {min_slack:.4}"))
}

fn tradeoff() -> Verdict {
    let start = Instant::now();
    let grover = tradeoff_scan(|n| Family::GroverOr.instance(n), &[4, 16, 64]).map_err(|e| e.to_string())?;
    for row in &grover {
        ensure(row.min_success >= 2.0 / 3.0, || format!("Grover n={}: success {}", row.n, row.min_success))?;
        ensure(row.ratio <= 2.0, || format!("Grover n={}: L·√s/n = {}", row.n, row.ratio))?;
    }
    let sizes: Vec<usize> = (2..=12).step_by(2).collect();
    let parity = tradeoff_scan(|n| Family::Parity.instance(n), &sizes).map_err(|e| e.to_string())?;
    for row in &parity {
        ensure((row.ratio - FRAC_1_SQRT_2).abs() < 1e-12, || format!("parity n={}: ratio {}", row.n, row.ratio))?;
        ensure((row.min_success - 1.0).abs() < 1e-9, || format!("parity n={}: success {}", row.n, row.min_success))?;
    }
    let elapsed = start.elapsed().as_secs_f64();
    ensure(elapsed < 60.0, || format!("took {elapsed:.1}s"))?;
    let ratios: Vec<String> = grover.iter().map(|r| format!("{:.3}", r.ratio)).collect();
    Ok(format!("Grover L·√s/n = [{}], parity 1/√2 for n = 2..12 even, {elapsed:.2}s", ratios.join(", ")))
}

fn distinguishability() -> Verdict {
    let mut checked = Vec::new();
    let mut min_distance = f64::INFINITY;
    for n in (2..=10).step_by(2) {
        let p = parity_program(n).unwrap();
        let (yes, no): (Vec<_>, Vec<_>) = InputString::all(n).partition(|x| x.parity());
        let r = distinguishability_check(&p, &yes, &no).map_err(|e| e.to_string())?;
        ensure(r.passed, || format!("parity n={n}: {r:?}"))?;
        min_distance = min_distance.min(r.min_gapped_distance.unwrap_or(f64::INFINITY));
        checked.push(format!("parity {n}"));
    }
    for n in [4, 16, 64] {
        let p = circuit_to_rgqbp(&grover_promise_or(n).unwrap()).unwrap();
        let (yes, no): (Vec<_>, Vec<_>) = promise_or_inputs(n).into_iter().partition(|(_, a)| *a);
        let yes: Vec<_> = yes.into_iter().map(|(x, _)| x).collect();
        let no: Vec<_> = no.into_iter().map(|(x, _)| x).collect();
        let r = distinguishability_check(&p, &yes, &no).map_err(|e| e.to_string())?;
        ensure(r.passed, || format!("Grover n={n}: {} decision failures, {} violations", r.decision_failures.len(), r.distance_violations.len()))?;
        ensure(r.gapped_pairs == r.pairs_checked, || format!("Grover n={n}: ungapped pairs"))?;
        min_distance = min_distance.min(r.min_gapped_distance.unwrap_or(f64::INFINITY));
        checked.push(format!("grover {n}"));
    }
    Ok(format!("{}; min distance {min_distance:.4} ({FLOOR_NOTE})", checked.join(", ")))
}

fn serialization() -> Verdict {
    let mut programs: Vec<Program> = (2..=12).step_by(2).map(|n| parity_program(n).unwrap()).collect();
    let mut circuits: Vec<QueryCircuit> = vec![deutsch()];
    for n in [4, 16, 64] {
        let c = grover_promise_or(n).unwrap();
        programs.push(circuit_to_rgqbp(&c).unwrap());
        circuits.push(c);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..20 {
        programs.push(random_program(&mut rng));
    }
    for p in programs.clone().iter().take(3) {
        circuits.push(rgqbp_to_circuit(p).unwrap());
        programs.push(split_layers(p).unwrap());
    }
    for p in &programs {
        let text = serialize_program(p);
        let q = parse_program(&text).map_err(|e| e.to_string())?;
        ensure(serialize_program(&q) == text, || "program text changed on re-serialization".into())?;
        ensure(validate_program(&q, DEFAULT_TOL, DEFAULT_MAX_DISTINCT).unwrap().passed, || "reparsed program invalid".into())?;
        let inputs: Vec<InputString> = if p.n() <= 10 { InputString::all(p.n()).collect() } else { check_inputs(p.n(), 0).0 };
        for x in inputs {
            let a = final_state(p, &x).unwrap();
            let b = final_state(&q, &x).unwrap();
            ensure(linalg::max_abs_diff(&a, &b) == 0.0, || format!("program states differ on {x}"))?;
        }
    }
    for c in &circuits {
        let text = serialize_circuit(c);
        let d = parse_circuit(&text).map_err(|e| e.to_string())?;
        ensure(serialize_circuit(&d) == text, || "circuit text changed on re-serialization".into())?;
        let (inputs, _) = check_inputs(c.n(), 0);
        for x in inputs.iter().take(64) {
            ensure(circuit_acceptance(c, x).unwrap() == circuit_acceptance(&d, x).unwrap(), || format!("circuit differs on {x}"))?;
        }
    }
    Ok(format!("{} programs, {} circuits byte-stable", programs.len(), circuits.len()))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 9] = [
        ("split equivalence", split_equivalence),
        ("circuit to r-GQBP exactness", circuit_to_program),
        ("r-GQBP to circuit exactness", program_to_circuit),
        ("parity correctness", parity_correctness),
        ("promise-OR hybrid bound", promise_or_bound),
        ("Hamming decision bounds", hamming_bounds),
        ("tradeoff at desk scale", tradeoff),
        ("distinguishability floor", distinguishability),
        ("serialization roundtrip", serialization),
    ];
    let mut failures = 0;
    for (name, check) in criteria {
        let start = Instant::now();
        let outcome = std::panic::catch_unwind(check).unwrap_or_else(|_| Err("panicked".into()));
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS  {name:<30} {detail} [{secs:.2}s]"),
            Err(detail) => {
                failures += 1;
                println!("FAIL  {name:<30} {detail} [{secs:.2}s]");
            }
        }
    }
    println!("{} of 9 criteria passed", 9 - failures);
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
