#![no_main]
use libfuzzer_sys::fuzz_target;
use qzeno::model::{parse_tabulated_csv, TabulatedDensity};

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(samples) = parse_tabulated_csv(text) {
            let _ = TabulatedDensity::new(&samples, 6.0);
        }
    }
});
