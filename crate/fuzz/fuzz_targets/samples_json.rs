#![no_main]

use libfuzzer_sys::fuzz_target;
use liouville_core::conjugate::{read_samples_json, write_samples_json};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let Ok(samples) = read_samples_json(text) else { return };
    let mut out = Vec::new();
    write_samples_json(&samples, &mut out).unwrap();
    let again = read_samples_json(std::str::from_utf8(&out).unwrap()).unwrap();
    assert_eq!(samples, again);
});
