#![no_main]

use libfuzzer_sys::fuzz_target;
use rtf_local::padic::parse_rational;

fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else { return };
    if let Ok(r) = parse_rational(s) {
        // canonical form re-parses to the same value
        let back = parse_rational(&r.to_string()).expect("canonical form parses");
        assert_eq!(back, r);
        if !r.is_zero() {
            for p in [2u64, 3, 5] {
                let _ = r.valuation(p);
            }
        }
    }
});
