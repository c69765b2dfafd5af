#![no_main]

use libfuzzer_sys::fuzz_target;
use weyl_core::PhasePolynomial;

fuzz_target!(|data: &[u8]| {
    if let Ok(p) = serde_json::from_slice::<PhasePolynomial>(data) {
        let again: PhasePolynomial = serde_json::from_str(&serde_json::to_string(&p).unwrap()).unwrap();
        assert_eq!(again, p);
        if p.degree() <= 8 {
            let _ = p.cocycle_quotient(1);
        }
    }
});
