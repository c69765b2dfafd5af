#![no_main]

use libfuzzer_sys::fuzz_target;
use weyl_core::torus::parse_phase_list;
use weyl_core::PhasePolynomial;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(points) = parse_phase_list(text) {
        let mode = points[0].mode();
        assert!(points.iter().all(|p| p.mode() == mode));
    }
    if let Ok(p) = PhasePolynomial::parse(text) {
        // printed coefficients parse back to the same polynomial
        let printed: Vec<String> = p.coeffs().iter().map(ToString::to_string).collect();
        assert_eq!(PhasePolynomial::parse(&printed.join(",")).unwrap(), p);
    }
});
