#![no_main]

use libfuzzer_sys::fuzz_target;
use rtf_local::lfunc::{hecke_verify, parse_newforms};

fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else { return };
    if let Ok(forms) = parse_newforms(s) {
        for f in &forms {
            // accepted records are Hecke-consistent
            assert!(hecke_verify(f).is_empty());
        }
    }
});
