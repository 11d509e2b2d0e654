#![no_main]
use libfuzzer_sys::fuzz_target;
use qzeno::model::parse_config_with;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        // Any referenced file resolves to a tiny table.
        let _ = parse_config_with(text, &|_| Ok("omega,J\n5,0\n6,0.1\n7,0\n".to_string()));
    }
});
