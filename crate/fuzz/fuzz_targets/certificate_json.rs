#![no_main]

use libfuzzer_sys::fuzz_target;
use weyl_core::certify::DistalityCertificate;

fuzz_target!(|data: &[u8]| {
    if let Ok(cert) = serde_json::from_slice::<DistalityCertificate>(data) {
        let _ = cert.validate();
        let again: DistalityCertificate = serde_json::from_str(&serde_json::to_string(&cert).unwrap()).unwrap();
        assert_eq!(again, cert);
    }
});
