#![no_main]

use std::path::Path;

use libfuzzer_sys::fuzz_target;
use tilefetch::config::{PlanConfig, ProbSpec};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let Ok(cfg) = PlanConfig::from_toml(text) else {
        return;
    };
    if cfg
        .passes
        .iter()
        .any(|p| matches!(p.probs, ProbSpec::Csv { .. } | ProbSpec::Empirical { .. }))
    {
        return;
    }
    let _ = cfg.build(Path::new("."), None);
});
