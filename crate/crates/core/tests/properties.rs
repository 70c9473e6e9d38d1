use num_complex::Complex64;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use gqbp::circuit::{
    circuit_acceptance, complete_unitary, count_queries, run_circuit, validate_circuit, Gate, QueryCircuit,
};
use gqbp::convert::{circuit_to_rgqbp, rgqbp_to_circuit};
use gqbp::experiments::{hybrid_deviation, hybrid_run, promise_or_expectation};
use gqbp::linalg::{self, ceil_log2, CMatrix};
use gqbp::model::{
    generalize, restrict, validate_general, validate_program, validate_restricted, InputString, Level,
    DEFAULT_MAX_DISTINCT, DEFAULT_TOL,
};
use gqbp::programs::{haar_unitary, haar_vector, random_rgqbp};
use gqbp::simulate::{acceptance_probability, final_state, run, transition_matrix};
use gqbp::transform::{pad_width, split_layers};

fn input(n: usize) -> impl Strategy<Value = InputString> {
    proptest::collection::vec(any::<bool>(), n).prop_map(InputString::new)
}

fn shape() -> impl Strategy<Value = (usize, usize, usize, u64)> {
    (1usize..=8, 1usize..=8, 1usize..=8, any::<u64>())
}

fn random_circuit(qubits: usize, n: usize, gates: usize, seed: u64) -> QueryCircuit {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dim = 1 << qubits;
    let mut list = vec![Gate::unitary(haar_unitary(dim, &mut rng))];
    for _ in 0..gates {
        list.push(Gate::PhaseOracle);
        list.push(Gate::unitary(haar_unitary(dim, &mut rng)));
    }
    QueryCircuit::new(qubits, n, list, 0..dim / 2).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn restricted_levels_are_unitary_on_every_input((s, len, n, seed) in shape(), bits in input(8)) {
        let p = random_rgqbp(s, len, n, seed).unwrap();
        let x = InputString::new(bits.bits()[..n].to_vec());
        for level in p.restricted_levels().unwrap() {
            prop_assert!(validate_restricted(level, DEFAULT_TOL).unwrap().passed);
            let m = transition_matrix(&Level::Restricted(level.clone()), &x);
            prop_assert!(m.unitarity_deviation() <= 10.0 * DEFAULT_TOL);
        }
    }

    #[test]
    fn restrict_inverts_generalize((s, len, n, seed) in shape()) {
        let p = random_rgqbp(s, len, n, seed).unwrap();
        let g = generalize(&p).unwrap();
        for level in g.levels() {
            if let Level::General(gl) = level {
                prop_assert!(validate_general(gl, DEFAULT_TOL, DEFAULT_MAX_DISTINCT).unwrap().passed);
            }
        }
        let back = restrict(&g, DEFAULT_TOL).unwrap();
        for x in InputString::all(n) {
            for ((a, b), c) in p.levels().iter().zip(g.levels()).zip(back.levels()) {
                let ma = transition_matrix(a, &x);
                prop_assert!(ma.max_abs_diff(&transition_matrix(b, &x)) <= 1e-15);
                prop_assert!(ma.max_abs_diff(&transition_matrix(c, &x)) <= 1e-12);
            }
            let ra = run(&p, &x).unwrap();
            let rb = run(&g, &x).unwrap();
            for (u, v) in ra.states.iter().zip(&rb.states) {
                prop_assert!(linalg::max_abs_diff(u, v) <= 1e-12);
            }
        }
    }

    #[test]
    fn runs_preserve_norm((s, len, n, seed) in shape(), bits in input(8)) {
        let p = random_rgqbp(s, len, n, seed).unwrap();
        let x = InputString::new(bits.bits()[..n].to_vec());
        for state in run(&p, &x).unwrap().states {
            prop_assert!((linalg::norm(&state) - 1.0).abs() <= 1e-6);
        }
    }

    #[test]
    fn global_phase_is_invisible((s, len, n, seed) in shape(), phi in 0.0f64..6.3, bits in input(8)) {
        let p = random_rgqbp(s, len, n, seed).unwrap();
        let x = InputString::new(bits.bits()[..n].to_vec());
        let rot = Complex64::from_polar(1.0, phi);
        let q = p.clone().with_initial(p.initial().iter().map(|z| z * rot).collect()).unwrap();
        let a = acceptance_probability(&p, &x).unwrap();
        let b = acceptance_probability(&q, &x).unwrap();
        prop_assert!((a - b).abs() <= 1e-12);
    }

    #[test]
    fn split_preserves_final_state((s, len, n, seed) in shape()) {
        let p = random_rgqbp(s, len, n, seed).unwrap();
        let split = split_layers(&p).unwrap();
        prop_assert_eq!(split.len(), 2 * len);
        for (t, level) in split.restricted_levels().unwrap().iter().enumerate() {
            if t % 2 == 0 {
                prop_assert_eq!(level.base(), &CMatrix::identity(s));
            } else {
                prop_assert!(level.thetas().iter().all(|&th| th == 0.0));
            }
        }
        for x in InputString::all(n) {
            let a = final_state(&p, &x).unwrap();
            let b = final_state(&split, &x).unwrap();
            prop_assert!(linalg::distance(&a, &b) <= 1e-9);
        }
    }

    #[test]
    fn padding_preserves_acceptance((s, len, n, seed) in shape(), extra in 0usize..5) {
        let p = random_rgqbp(s, len, n, seed).unwrap();
        let q = pad_width(&p, s + extra).unwrap();
        prop_assert!(validate_program(&q, DEFAULT_TOL, DEFAULT_MAX_DISTINCT).unwrap().passed);
        for x in InputString::all(n) {
            let a = acceptance_probability(&p, &x).unwrap();
            let b = acceptance_probability(&q, &x).unwrap();
            prop_assert!((a - b).abs() <= 1e-12);
        }
    }

    #[test]
    fn completed_unitary_keeps_first_column(dim in 1usize..=16, seed in any::<u64>()) {
        let v = haar_vector(dim, &mut ChaCha8Rng::seed_from_u64(seed));
        let u = complete_unitary(&v, DEFAULT_TOL).unwrap();
        prop_assert!(linalg::max_abs_diff(&u.column(0), &v) <= 1e-12);
        prop_assert!(u.is_unitary(DEFAULT_TOL));
    }

    #[test]
    fn oracles_are_involutions(
        (qubits, n) in (1usize..=4).prop_flat_map(|q| (Just(q), 1usize..=1 << (q - 1))),
        seed in any::<u64>(),
        bits in input(16),
    ) {
        let x = InputString::new(bits.bits()[..n].to_vec());
        let prep = haar_unitary(1 << qubits, &mut ChaCha8Rng::seed_from_u64(seed));
        let m = ceil_log2(n);
        let bit = Gate::BitOracle { index_wires: (0..m).collect(), target_wire: m };
        let reference = run_circuit(&QueryCircuit::new(qubits, n, vec![Gate::unitary(prep.clone())], []).unwrap(), &x).unwrap();
        for oracle in [Gate::PhaseOracle, bit] {
            let c = QueryCircuit::new(qubits, n, vec![Gate::unitary(prep.clone()), oracle.clone(), oracle], []).unwrap();
            let out = run_circuit(&c, &x).unwrap();
            prop_assert!(linalg::max_abs_diff(&out, &reference) <= 1e-12);
            prop_assert!((linalg::norm(&out) - 1.0).abs() <= 1e-9);
        }
    }

    #[test]
    fn circuit_conversion_is_exact(
        (qubits, n) in (1usize..=4).prop_flat_map(|q| (Just(q), 1usize..=1 << q)),
        gates in 0usize..4,
        seed in any::<u64>(),
    ) {
        let c = random_circuit(qubits, n, gates, seed);
        prop_assert!(validate_circuit(&c, DEFAULT_TOL).passed);
        let p = circuit_to_rgqbp(&c).unwrap();
        for level in p.restricted_levels().unwrap() {
            prop_assert!(validate_restricted(level, DEFAULT_TOL).unwrap().passed);
        }
        let inputs: Vec<InputString> = if n <= 10 {
            InputString::all(n).collect()
        } else {
            (0..64u64).map(|i| InputString::from_index(i.wrapping_mul(0x9e37_79b9) % (1 << n), n)).collect()
        };
        for x in inputs {
            let a = circuit_acceptance(&c, &x).unwrap();
            let b = acceptance_probability(&p, &x).unwrap();
            prop_assert!((a - b).abs() <= 1e-9);
        }
    }

    #[test]
    fn program_conversion_is_exact((s, len, n, seed) in shape()) {
        let p = random_rgqbp(s, len, n, seed).unwrap();
        let c = rgqbp_to_circuit(&p).unwrap();
        prop_assert_eq!(count_queries(&c), 2 * len);
        prop_assert_eq!(c.qubits(), ceil_log2(s) + ceil_log2(n) + 1);
        for x in InputString::all(n) {
            let a = acceptance_probability(&p, &x).unwrap();
            let b = circuit_acceptance(&c, &x).unwrap();
            prop_assert!((a - b).abs() <= 1e-9);
        }
    }

    #[test]
    fn hybrid_telescoping_holds((s, len, n, seed) in shape(), a in input(8), b in input(8)) {
        let p = random_rgqbp(s, len, n, seed).unwrap();
        let x = InputString::new(a.bits()[..n].to_vec());
        let y = InputString::new(b.bits()[..n].to_vec());
        let trace = hybrid_deviation(&p, &x, &y).unwrap();
        prop_assert!(trace.holds);
        prop_assert!(trace.cauchy_schwarz_holds(s));
        let start = hybrid_run(&p, &x, &y, 0).unwrap();
        let end = hybrid_run(&p, &x, &y, len).unwrap();
        prop_assert!(linalg::max_abs_diff(&start, &final_state(&p, &x).unwrap()) <= 1e-12);
        prop_assert!(linalg::max_abs_diff(&end, &final_state(&p, &y).unwrap()) <= 1e-12);
    }

    #[test]
    fn promise_or_bound_holds((s, len, n, seed) in shape()) {
        let p = random_rgqbp(s, len, n, seed).unwrap();
        prop_assert!(promise_or_expectation(&p).unwrap().passed);
    }
}
