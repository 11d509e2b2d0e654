#![no_main]
use libfuzzer_sys::fuzz_target;
use qzeno::model::parse_config;

// Whatever parses must echo to text that parses back to the same run.
fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let Ok(cfg) = parse_config(text) else { return };
    let echo = cfg.to_toml();
    let again = parse_config(&echo).expect("echo parses");
    assert_eq!(again, cfg, "{echo}");
});
