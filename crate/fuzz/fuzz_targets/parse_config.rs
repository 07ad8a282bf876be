#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(cfg) = qca_cli::parse_config(text) {
            // an accepted config names its command and resolves every key it used
            assert!(cfg.resolved.contains_key("command"));
        }
    }
});
