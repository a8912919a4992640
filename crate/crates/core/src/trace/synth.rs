//! Synthetic head-movement traces for tests and demos.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::{HeadTrace, Sample, TraceMeta};
use crate::angle::wrap_deg;
use crate::error::{Error, Result};

/// Motion pattern of a generated trace. Yaw always starts on the 0° line
/// except for `Uniform`, whose samples are independent.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Motion {
    /// Independent uniform yaw in `[-180, 180)` and pitch in `[-90, 90]`.
    Uniform,
    /// Fixed yaw.
    Constant { yaw_deg: f64 },
    /// Constant angular velocity.
    Rotation { rate_dps: f64 },
    /// `yaw = A sin(2πt / period)`.
    Sinusoid { amplitude_deg: f64, period_s: f64 },
    /// Damped random velocity with optional pull towards the 0° line.
    /// `noise_dps` scales the velocity noise (°/s per √s); `reversion`
    /// (1/s²) adds `-reversion · yaw` to the acceleration.
    RandomWalk { noise_dps: f64, reversion: f64 },
    /// A random walk for `explore_s` seconds, then the head stays put.
    ExploreThenFixate { explore_s: f64, noise_dps: f64 },
}

/// Velocity damping of the random-walk family (1/s).
const WALK_DAMPING: f64 = 1.0;

/// Generates one trace of `duration_s` seconds at `rate_hz`.
pub fn generate(
    motion: Motion,
    duration_s: f64,
    rate_hz: f64,
    meta: TraceMeta,
    rng: &mut impl Rng,
) -> Result<HeadTrace> {
    if !(duration_s.is_finite() && duration_s > 0.0) {
        return Err(Error::invalid("duration must be > 0"));
    }
    if !(rate_hz.is_finite() && rate_hz > 0.0) {
        return Err(Error::invalid("sample rate must be > 0"));
    }
    let steps = (duration_s * rate_hz).round() as usize;
    let dt = 1.0 / rate_hz;
    let times = (0..=steps).map(|k| k as f64 * dt);
    let samples: Vec<Sample> = match motion {
        Motion::Uniform => times
            .map(|t| Sample {
                t,
                yaw: rng.random_range(-180.0..180.0),
                pitch: rng.random_range(-90.0..=90.0),
                ..Default::default()
            })
            .collect(),
        Motion::Constant { yaw_deg } => times
            .map(|t| Sample {
                t,
                yaw: yaw_deg,
                ..Default::default()
            })
            .collect(),
        Motion::Rotation { rate_dps } => times
            .map(|t| Sample {
                t,
                yaw: wrap_deg(rate_dps * t),
                yaw_vel: rate_dps,
                ..Default::default()
            })
            .collect(),
        Motion::Sinusoid {
            amplitude_deg,
            period_s,
        } => {
            if !(period_s.is_finite() && period_s > 0.0) {
                return Err(Error::invalid("sinusoid period must be > 0"));
            }
            let omega = std::f64::consts::TAU / period_s;
            times
                .map(|t| Sample {
                    t,
                    yaw: wrap_deg(amplitude_deg * (omega * t).sin()),
                    yaw_vel: amplitude_deg * omega * (omega * t).cos(),
                    ..Default::default()
                })
                .collect()
        }
        Motion::RandomWalk {
            noise_dps,
            reversion,
        } => walk(times, dt, noise_dps, reversion, f64::INFINITY, rng),
        Motion::ExploreThenFixate {
            explore_s,
            noise_dps,
        } => walk(times, dt, noise_dps, 0.0, explore_s, rng),
    };
    HeadTrace::new(meta, samples)
}

fn walk(
    times: impl Iterator<Item = f64>,
    dt: f64,
    noise_dps: f64,
    reversion: f64,
    stop_at: f64,
    rng: &mut impl Rng,
) -> Vec<Sample> {
    // unwrapped yaw so the pull towards 0° acts on the true offset
    let mut yaw = 0.0_f64;
    let mut vel = 0.0_f64;
    let mut out = Vec::new();
    for t in times {
        if t >= stop_at {
            vel = 0.0;
        }
        out.push(Sample {
            t,
            yaw: wrap_deg(yaw),
            yaw_vel: vel,
            ..Default::default()
        });
        if t >= stop_at {
            continue;
        }
        let z: f64 = StandardNormal.sample(rng);
        let pull = -reversion * wrap_deg(yaw);
        vel += (-WALK_DAMPING * vel + pull) * dt + noise_dps * dt.sqrt() * z;
        yaw += vel * dt;
    }
    out
}

/// Generates `count` traces of one video with user ids `u000, u001, ...`,
/// deterministic in `seed`.
pub fn generate_set(
    motion: Motion,
    count: usize,
    duration_s: f64,
    rate_hz: f64,
    video_id: &str,
    category: super::Category,
    seed: u64,
) -> Result<Vec<HeadTrace>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|i| {
            let meta = TraceMeta::new(video_id, format!("u{i:03}"), category);
            generate(motion, duration_s, rate_hz, meta, &mut rng)
        })
        .collect()
}

/// Mirror image of a trace (yaw and yaw velocity negated).
pub fn mirror(trace: &HeadTrace) -> HeadTrace {
    let samples = trace
        .samples()
        .iter()
        .map(|s| Sample {
            yaw: -s.yaw,
            yaw_vel: -s.yaw_vel,
            ..*s
        })
        .collect();
    HeadTrace::new(trace.meta().clone(), samples).expect("mirroring keeps a valid trace")
}
