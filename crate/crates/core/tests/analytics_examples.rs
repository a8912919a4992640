use tilefetch::analytics;
use tilefetch::trace::synth::{self, Motion};
use tilefetch::trace::{Axis, Category, HeadTrace};

fn set(motion: Motion, count: usize, duration: f64, rate: f64, seed: u64) -> Vec<HeadTrace> {
    synth::generate_set(motion, count, duration, rate, "v", Category::Misc, seed).unwrap()
}

#[test]
fn uniform_yaw_cdf_is_close_to_uniform() {
    let traces = set(Motion::Uniform, 10, 100.0, 100.0, 3);
    let cdf = analytics::angle_utilization_cdf(&traces, Axis::Yaw).unwrap();
    assert!(cdf.len() >= 100_000);
    let n = cdf.len() as f64;
    let ks = cdf
        .values()
        .iter()
        .enumerate()
        .map(|(i, &v)| {
            let f = (v + 180.0) / 360.0;
            (f - i as f64 / n).abs().max((f - (i + 1) as f64 / n).abs())
        })
        .fold(0.0, f64::max);
    assert!(ks < 0.02, "KS distance {ks}");
}

#[test]
fn constant_trace_gives_degenerate_results() {
    let traces = set(Motion::Constant { yaw_deg: 0.0 }, 2, 10.0, 10.0, 0);
    let cdf = analytics::angle_utilization_cdf(&traces, Axis::Yaw).unwrap();
    assert_eq!((cdf.min(), cdf.max()), (0.0, 0.0));
    let h = analytics::heatmap(&traces, 10.0, 10.0).unwrap();
    assert_eq!(h.max_cell(), 1.0);
    let change = analytics::yaw_change_cdf(&traces, 1.0, 0.1).unwrap();
    assert_eq!(change.mass_at(0.0), 1.0);
    assert!(analytics::pairwise_angular_difference(&traces, 1.0)
        .unwrap()
        .iter()
        .all(|&(_, d)| d == 0.0));
    let sectors = analytics::origin_conditioned_change(&traces, 1.0, 0.1, 60.0).unwrap();
    assert_eq!(sectors.iter().filter(|s| s.cdf.is_some()).count(), 1);
}

#[test]
fn uniform_heatmap_is_even() {
    let traces = set(Motion::Uniform, 10, 1000.0, 100.0, 4);
    let h = analytics::heatmap(&traces, 30.0, 30.0).unwrap();
    let ratio = h.max_cell() / h.min_cell();
    assert!(ratio < 1.5, "max/min {ratio}");
}

#[test]
fn rotation_yaw_change_is_point_mass() {
    let traces = set(Motion::Rotation { rate_dps: 10.0 }, 1, 20.0, 50.0, 0);
    let cdf = analytics::yaw_change_cdf(&traces, 0.5, 0.1).unwrap();
    assert!(cdf.values().iter().all(|v| (v - 5.0).abs() < 1e-9));
    let vel = analytics::velocity_prediction_error(&traces, 0.5, 1.0, 0.0).unwrap();
    assert_eq!(vel.error_rate, 0.0);
}

#[test]
fn sinusoid_at_half_period_mispredicts_half_the_time() {
    let lag = 2.0;
    let traces = set(
        Motion::Sinusoid {
            amplitude_deg: 60.0,
            period_s: 2.0 * lag,
        },
        1,
        200.0,
        100.0,
        0,
    );
    let vel = analytics::velocity_prediction_error(&traces, lag, 1e-6, 0.0).unwrap();
    assert!(
        (vel.error_rate - 0.5).abs() < 0.02,
        "error rate {}",
        vel.error_rate
    );
}

#[test]
fn mirrored_walk_mirrors_sector_cdfs() {
    let walk = set(
        Motion::RandomWalk {
            noise_dps: 60.0,
            reversion: 0.0,
        },
        6,
        60.0,
        20.0,
        11,
    );
    let mut both = walk.clone();
    both.extend(walk.iter().map(synth::mirror));
    let sectors = analytics::origin_conditioned_change(&both, 0.5, 0.1, 60.0).unwrap();
    // sector [60i, 60i + 60) reflects onto sector 5 - i
    for (i, s) in sectors.iter().enumerate() {
        let j = 5 - i;
        let (Some(a), Some(b)) = (&s.cdf, &sectors[j].cdf) else {
            continue;
        };
        if a.len() < 200 || b.len() < 200 {
            continue;
        }
        assert!(
            (a.mean() + b.mean()).abs() < 1.0,
            "sector {i}: {} vs {}",
            a.mean(),
            b.mean()
        );
    }
}

#[test]
fn drift_to_zero_shows_in_sector_cdfs() {
    let traces = set(
        Motion::RandomWalk {
            noise_dps: 40.0,
            reversion: 2.0,
        },
        20,
        120.0,
        20.0,
        5,
    );
    let sectors = analytics::origin_conditioned_change(&traces, 1.0, 0.1, 60.0).unwrap();
    // sector 0 starts at 0° and covers the right side; sector 5 ends at 0°
    let right = sectors[0].cdf.as_ref().unwrap();
    let left = sectors[5].cdf.as_ref().unwrap();
    assert!(right.mean() < 0.0, "right mean {}", right.mean());
    assert!(left.mean() > 0.0, "left mean {}", left.mean());
}

#[test]
fn explore_then_fixate_splits_cleanly() {
    let traces = set(
        Motion::ExploreThenFixate {
            explore_s: 20.0,
            noise_dps: 80.0,
        },
        5,
        60.0,
        20.0,
        2,
    );
    let (early, late) = analytics::phase_split_cdf(&traces, 0.2, 0.1, 20.0).unwrap();
    assert_eq!(late.mass_at(0.0), 1.0);
    assert!(early.max() - early.min() > 1.0);
    let constant = set(Motion::Constant { yaw_deg: 30.0 }, 2, 60.0, 20.0, 0);
    let (a, b) = analytics::phase_split_cdf(&constant, 0.2, 0.1, 20.0).unwrap();
    assert_eq!((a.min(), a.max()), (b.min(), b.max()));
}
