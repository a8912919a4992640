use proptest::prelude::*;
use tilefetch::analytics::{self, Cdf};
use tilefetch::trace::synth::{self, Motion};
use tilefetch::trace::{Category, HeadTrace, Sample, TraceMeta};

fn walk_set(count: usize, seed: u64) -> Vec<HeadTrace> {
    synth::generate_set(
        Motion::RandomWalk {
            noise_dps: 80.0,
            reversion: 0.0,
        },
        count,
        8.0,
        20.0,
        "v",
        Category::Misc,
        seed,
    )
    .unwrap()
}

fn shifted(t: &HeadTrace, offset: f64) -> HeadTrace {
    let samples: Vec<Sample> = t
        .samples()
        .iter()
        .map(|s| Sample {
            yaw: s.yaw + offset,
            ..*s
        })
        .collect();
    HeadTrace::new(t.meta().clone(), samples).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn yaw_changes_are_circular(seed in any::<u64>(), lag in 0.05f64..5.0) {
        let cdf = analytics::yaw_change_cdf(&walk_set(3, seed), lag, 0.1).unwrap();
        prop_assert!(cdf.min() >= -180.0 && cdf.max() < 180.0);
    }

    #[test]
    fn pairwise_symmetric_and_rotation_invariant(seed in any::<u64>(), offset in -720.0f64..720.0) {
        let set = walk_set(4, seed);
        let base = analytics::pairwise_angular_difference(&set, 0.5).unwrap();
        let mut reversed = set.clone();
        reversed.reverse();
        let rev = analytics::pairwise_angular_difference(&reversed, 0.5).unwrap();
        let turned: Vec<HeadTrace> = set.iter().map(|t| shifted(t, offset)).collect();
        let rot = analytics::pairwise_angular_difference(&turned, 0.5).unwrap();
        for ((a, b), c) in base.iter().zip(&rev).zip(&rot) {
            prop_assert!((a.1 - b.1).abs() < 1e-9);
            prop_assert!((a.1 - c.1).abs() < 1e-6);
            prop_assert!((0.0..=180.0).contains(&a.1));
        }
    }

    #[test]
    fn cdf_partitions_mass(values in prop::collection::vec(-180.0f64..180.0, 1..200), x in -200.0f64..200.0, pick in any::<prop::sample::Index>()) {
        let cdf = Cdf::new(values.clone()).unwrap();
        for q in [x, values[pick.index(values.len())]] {
            let total = cdf.fraction_below(q) + cdf.fraction_above(q) + cdf.mass_at(q);
            prop_assert!((total - 1.0).abs() < 1e-12);
            prop_assert!(cdf.quantile(cdf.fraction_below(q)) <= q);
        }
    }

    #[test]
    fn resample_at_native_rate_is_identity(seed in any::<u64>()) {
        let t = &walk_set(1, seed)[0];
        let r = t.resample(20.0).unwrap();
        prop_assert_eq!(r.samples().len(), t.samples().len());
        for (a, b) in r.samples().iter().zip(t.samples()) {
            prop_assert!((a.t - b.t).abs() < 1e-9);
            prop_assert!(tilefetch::angle::circ_dist(a.yaw, b.yaw) < 1e-9);
            prop_assert!((a.pitch - b.pitch).abs() < 1e-9);
        }
    }

    #[test]
    fn rebase_is_idempotent(seed in any::<u64>(), offset in -180.0f64..180.0) {
        let t = shifted(&walk_set(1, seed)[0], offset);
        let once = t.rebase_yaw();
        prop_assert_eq!(once.samples()[0].yaw, 0.0);
        prop_assert_eq!(once.rebase_yaw(), once);
    }
}

#[test]
fn meta_is_kept_by_rebase() {
    let t = HeadTrace::new(
        TraceMeta::new("v", "u", Category::Rides),
        vec![
            Sample {
                t: 0.0,
                yaw: 45.0,
                ..Default::default()
            },
            Sample {
                t: 1.0,
                yaw: -170.0,
                ..Default::default()
            },
        ],
    )
    .unwrap();
    let r = t.rebase_yaw();
    assert_eq!(r.meta(), t.meta());
    assert_eq!(r.samples()[1].yaw, 145.0);
}
