#![no_main]

use std::path::Path;

use libfuzzer_sys::fuzz_target;
use tilefetch::config::{ProbSpec, SolveConfig};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let Ok(cfg) = SolveConfig::from_toml(text) else {
        return;
    };
    // file-backed families would touch the filesystem
    if matches!(cfg.probs, ProbSpec::Csv { .. } | ProbSpec::Empirical { .. }) {
        return;
    }
    let _ = cfg.instance(Path::new("."), None);
});
