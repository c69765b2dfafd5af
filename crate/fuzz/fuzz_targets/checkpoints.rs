#![no_main]

use libfuzzer_sys::fuzz_target;
use weyl_core::ergodic::parse_checkpoints;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(v) = parse_checkpoints(text) {
        let printed: Vec<String> = v.iter().map(u64::to_string).collect();
        assert_eq!(parse_checkpoints(&printed.join(",")).unwrap(), v);
    }
});
