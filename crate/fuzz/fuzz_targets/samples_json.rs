#![no_main]

use libfuzzer_sys::fuzz_target;
use weyl_core::certify::{recover_f1, SampledFunction};

fuzz_target!(|data: &[u8]| {
    if let Ok(f) = serde_json::from_slice::<SampledFunction>(data) {
        assert_eq!(f.values().len() as i64, 2 * f.half_width() + 1);
        let _ = recover_f1(&f, 1e-9);
    }
});
