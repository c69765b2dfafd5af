#![no_main]

use libfuzzer_sys::fuzz_target;
use weyl_core::ring::{Character, RingPolynomial, RingSpec};

// line 1: moduli, line 2: element, line 3: character, line 4: polynomial
fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let mut lines = text.lines();
    let Some(Ok(ring)) = lines.next().map(RingSpec::parse) else { return };
    if let Some(Ok(x)) = lines.next().map(|l| ring.parse_element(l)) {
        assert_eq!(ring.parse_element(&x.to_string()).unwrap(), x);
    }
    if let Some(Ok(chi)) = lines.next().map(|l| Character::parse(&ring, l)) {
        let _ = chi.eval(&ring, &ring.one());
    }
    if let Some(Ok(q)) = lines.next().map(|l| RingPolynomial::parse(&ring, l)) {
        let _ = q.eval(&ring, &ring.one());
    }
});
