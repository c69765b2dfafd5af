#![no_main]

use libfuzzer_sys::fuzz_target;
use weyl_core::certify::{parse_pairs, parse_shifts, MAX_SHIFTS};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(v) = parse_shifts(text) {
        assert!(v.len() <= MAX_SHIFTS);
    }
    let _ = parse_pairs(text);
});
