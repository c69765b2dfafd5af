#![no_main]

use libfuzzer_sys::fuzz_target;
use weyl_core::bicyclic::{rewrite_word, BicyclicElement};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(x) = text.parse::<BicyclicElement>() {
        assert_eq!(x.to_string().parse::<BicyclicElement>().unwrap(), x);
        if text.chars().all(|c| c == 'p' || c == 'q') {
            assert_eq!(rewrite_word(text), x);
        }
    }
});
