#![no_main]

use libfuzzer_sys::fuzz_target;
use rtf_local::charspec::parse_character_spec;

fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else { return };
    if s.len() > 256 {
        return;
    }
    if let Ok(spec) = parse_character_spec(s) {
        if let Ok(chi) = spec.dirichlet() {
            let q = chi.modulus();
            for a in 1..q.min(64) {
                let _ = chi.value(a as i64);
            }
        }
        for p in [2u64, 3, 5, 7] {
            let _ = spec.local(p);
        }
    }
});
