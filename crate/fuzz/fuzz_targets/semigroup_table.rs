#![no_main]

use libfuzzer_sys::fuzz_target;
use weyl_core::semigroup::FiniteSemigroup;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(s) = FiniteSemigroup::parse(text) {
        assert_eq!(FiniteSemigroup::parse(&s.to_text()).unwrap(), s);
    }
});
