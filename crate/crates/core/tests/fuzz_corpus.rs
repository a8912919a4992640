//! Replays the checked-in fuzz seeds through the same entry points as the
//! fuzz targets, so the corpus stays meaningful as formats evolve.

use std::fs;
use std::path::{Path, PathBuf};

use tilefetch::config::{PlanConfig, SolveConfig, SweepConfig};
use tilefetch::trace::{parse_trace, Category, TraceMeta};
use tilefetch::ProbVector;

fn seeds(target: &str) -> Vec<(String, Vec<u8>)> {
    let dir: PathBuf = [
        env!("CARGO_MANIFEST_DIR"),
        "..",
        "..",
        "fuzz",
        "corpus",
        target,
    ]
    .iter()
    .collect();
    let mut out: Vec<(String, Vec<u8>)> = fs::read_dir(&dir)
        .unwrap_or_else(|e| panic!("{}: {e}", dir.display()))
        .map(|e| {
            let path = e.unwrap().path();
            let name = path.file_name().unwrap().to_string_lossy().into_owned();
            (name, fs::read(&path).unwrap())
        })
        .collect();
    out.sort();
    assert!(!out.is_empty(), "no seeds for {target}");
    out
}

fn check(target: &str, valid: &[&str], parse: impl Fn(&[u8]) -> bool) {
    for (name, bytes) in seeds(target) {
        let ok = parse(&bytes);
        assert_eq!(ok, valid.contains(&name.as_str()), "{target}/{name}");
    }
}

fn text(bytes: &[u8]) -> &str {
    std::str::from_utf8(bytes).unwrap()
}

#[test]
fn trace_csv_seeds() {
    check(
        "trace_csv",
        &["full_columns.csv", "angles_only_seam.csv"],
        |b| parse_trace(b, TraceMeta::new("v", "u", Category::Misc)).is_ok(),
    );
}

#[test]
fn trace_meta_seeds() {
    check("trace_meta_json", &["valid.json"], |b| {
        TraceMeta::from_json(b).is_ok()
    });
}

#[test]
fn prob_csv_seeds() {
    check("prob_csv", &["six_tiles.csv"], |b| {
        ProbVector::from_csv_reader(b).is_ok()
    });
}

#[test]
fn solve_config_seeds() {
    let all = [
        "defaults.toml",
        "gaussian_log.toml",
        "large_screen.toml",
        "toy.toml",
    ];
    check("solve_config", &all, |b| {
        SolveConfig::from_toml(text(b))
            .and_then(|c| c.instance(Path::new("."), None))
            .is_ok()
    });
}

#[test]
fn plan_config_seeds() {
    check(
        "plan_config",
        &["redownload.toml", "three_pass.toml"],
        |b| {
            PlanConfig::from_toml(text(b))
                .and_then(|c| c.build(Path::new("."), None))
                .is_ok()
        },
    );
}

#[test]
fn sweep_config_seeds() {
    let all = ["capacity_grid.toml", "convolution.toml", "empirical.toml"];
    check("sweep_config", &all, |b| {
        SweepConfig::from_toml(text(b)).is_ok()
    });
}
