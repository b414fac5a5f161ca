#![no_main]

use libfuzzer_sys::fuzz_target;
use rtf_local::report::{parse_report_csv, parse_stability_csv};

fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else { return };
    let _ = parse_report_csv(s);
    let _ = parse_stability_csv(s);
});
