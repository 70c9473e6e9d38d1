#![no_main]

use gqbp::format::{parse_program, serialize_program};
use gqbp::model::{validate_program, InputString};
use gqbp::simulate::final_state;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let Ok(program) = parse_program(text) else { return };
    let first = serialize_program(&program);
    let again = parse_program(&first).expect("serialized programs parse");
    assert_eq!(serialize_program(&again), first);
    if program.width() <= 64 && program.len() <= 64 {
        let _ = validate_program(&program, 1e-9, 8);
        let _ = final_state(&program, &InputString::zeros(program.n()));
    }
});
