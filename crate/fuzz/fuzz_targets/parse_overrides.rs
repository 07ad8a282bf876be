#![no_main]

use libfuzzer_sys::fuzz_target;
use qca_cli::Command;

// First line is the config file, each later line one `--set key=value`.
// The first byte picks the subcommand.
fuzz_target!(|data: &[u8]| {
    let Some((&pick, rest)) = data.split_first() else {
        return;
    };
    let Ok(text) = std::str::from_utf8(rest) else {
        return;
    };
    let command = Command::ALL[pick as usize % Command::ALL.len()];
    let mut lines = text.split('\n');
    let file = lines.next().unwrap_or("").replace(';', "\n");
    let overrides: Vec<String> = lines.map(str::to_string).collect();
    if let Ok(cfg) = qca_cli::parse_config_with(&file, Some(command), &overrides) {
        assert_eq!(cfg.command, command);
    }
});
