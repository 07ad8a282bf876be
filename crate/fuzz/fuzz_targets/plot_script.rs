#![no_main]

use std::path::Path;

use libfuzzer_sys::fuzz_target;
use qca_cli::PlotKind;

fuzz_target!(|data: &[u8]| {
    let Ok(csv) = std::str::from_utf8(data) else {
        return;
    };
    let _ = csv.parse::<PlotKind>();
    if let Ok((kind, script)) = qca_cli::plot::plot_script(csv, Path::new("fuzz.csv"), None) {
        assert_eq!(PlotKind::detect(qca_cli::plot::column_line(csv).unwrap()), Some(kind));
        assert!(script.contains("plot DATA"));
    }
});
