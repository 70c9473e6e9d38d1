#![no_main]

use gqbp::circuit::run_circuit;
use gqbp::convert::circuit_to_rgqbp;
use gqbp::format::{parse_circuit, serialize_circuit};
use gqbp::model::InputString;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let Ok(circuit) = parse_circuit(text) else { return };
    let first = serialize_circuit(&circuit);
    let again = parse_circuit(&first).expect("serialized circuits parse");
    assert_eq!(serialize_circuit(&again), first);
    if circuit.qubits() <= 8 && circuit.gates().len() <= 32 {
        let _ = run_circuit(&circuit, &InputString::zeros(circuit.n()));
        let _ = circuit_to_rgqbp(&circuit);
    }
});
