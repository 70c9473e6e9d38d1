#![no_main]

use gqbp::model::InputString;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(x) = text.parse::<InputString>() {
        assert_eq!(x.to_string(), text);
        assert_eq!(x.len(), text.len());
    }
});
