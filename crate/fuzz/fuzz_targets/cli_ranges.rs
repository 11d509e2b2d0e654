#![no_main]
use libfuzzer_sys::fuzz_target;
use qzeno_cli::commands::{parse_grid, parse_range};

fuzz_target!(|data: &[u8]| {
    if let Ok(s) = std::str::from_utf8(data) {
        if let Ok((lo, hi, _)) = parse_range(s, true) {
            assert!(lo <= hi);
        }
        if let Ok((lo, hi, _)) = parse_range(s, false) {
            assert!(lo < hi);
        }
        let _ = parse_grid(s);
    }
});
