//! Head-movement traces: one CSV file per (user, video) viewing with a JSON
//! sidecar carrying the metadata.
//!
//! CSV header: `t_s,yaw_deg,pitch_deg,roll_deg[,yaw_dps,pitch_dps,roll_dps]`.
//! When the velocity columns are absent they are filled in with central
//! finite differences (circular for yaw and roll).

use std::collections::BTreeMap;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::angle::{lerp_deg, signed_diff, wrap_deg};
use crate::error::{Error, Result};

pub mod synth;

/// Slack used when deciding whether a lagged time still lies inside a trace.
const TIME_EPS: f64 = 1e-9;

pub const CSV_HEADER: [&str; 7] = [
    "t_s",
    "yaw_deg",
    "pitch_deg",
    "roll_deg",
    "yaw_dps",
    "pitch_dps",
    "roll_dps",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Category {
    Rides,
    Exploration,
    MovingFocus,
    StaticFocus,
    Misc,
}

impl Category {
    pub const ALL: [Category; 5] = [
        Category::Rides,
        Category::Exploration,
        Category::MovingFocus,
        Category::StaticFocus,
        Category::Misc,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Category::Rides => "rides",
            Category::Exploration => "exploration",
            Category::MovingFocus => "moving_focus",
            Category::StaticFocus => "static_focus",
            Category::Misc => "misc",
        }
    }
}

impl std::str::FromStr for Category {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Category::ALL
            .into_iter()
            .find(|c| c.as_str() == s)
            .ok_or_else(|| Error::invalid(format!("unknown category {s:?}")))
    }
}

/// Sidecar metadata of a trace file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TraceMeta {
    pub video_id: String,
    pub user_id: String,
    pub category: Category,
}

impl TraceMeta {
    pub fn new(
        video_id: impl Into<String>,
        user_id: impl Into<String>,
        category: Category,
    ) -> Self {
        TraceMeta {
            video_id: video_id.into(),
            user_id: user_id.into(),
            category,
        }
    }

    pub fn from_json(bytes: &[u8]) -> Result<Self> {
        Ok(serde_json::from_slice(bytes)?)
    }
}

/// One orientation reading: time in seconds, angles in degrees, angular
/// velocities in degrees per second.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Sample {
    pub t: f64,
    pub yaw: f64,
    pub pitch: f64,
    pub roll: f64,
    pub yaw_vel: f64,
    pub pitch_vel: f64,
    pub roll_vel: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    Yaw,
    Pitch,
    Roll,
}

impl std::str::FromStr for Axis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "yaw" => Ok(Axis::Yaw),
            "pitch" => Ok(Axis::Pitch),
            "roll" => Ok(Axis::Roll),
            _ => Err(Error::invalid(format!("unknown axis {s:?}"))),
        }
    }
}

/// A validated viewing trace.
///
/// Timestamps are strictly increasing, yaw and roll are wrapped into
/// `[-180, 180)` and pitch lies in `[-90, 90]`.
#[derive(Debug, Clone, PartialEq)]
pub struct HeadTrace {
    meta: TraceMeta,
    samples: Vec<Sample>,
}

impl HeadTrace {
    pub fn new(meta: TraceMeta, mut samples: Vec<Sample>) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::invalid("trace has no samples"));
        }
        for (i, s) in samples.iter_mut().enumerate() {
            let fields = [
                s.t,
                s.yaw,
                s.pitch,
                s.roll,
                s.yaw_vel,
                s.pitch_vel,
                s.roll_vel,
            ];
            if fields.iter().any(|v| !v.is_finite()) {
                return Err(Error::invalid(format!("sample {i}: non-finite value")));
            }
            if !(-90.0..=90.0).contains(&s.pitch) {
                return Err(Error::invalid(format!(
                    "sample {i}: pitch {} outside [-90, 90]",
                    s.pitch
                )));
            }
            s.yaw = wrap_deg(s.yaw);
            s.roll = wrap_deg(s.roll);
        }
        if let Some(i) = samples.windows(2).position(|w| w[1].t <= w[0].t) {
            return Err(Error::invalid(format!(
                "timestamps not strictly increasing at sample {}",
                i + 1
            )));
        }
        Ok(HeadTrace { meta, samples })
    }

    pub fn meta(&self) -> &TraceMeta {
        &self.meta
    }

    pub fn samples(&self) -> &[Sample] {
        &self.samples
    }

    pub fn start(&self) -> f64 {
        self.samples[0].t
    }

    pub fn end(&self) -> f64 {
        self.samples[self.samples.len() - 1].t
    }

    pub fn duration(&self) -> f64 {
        self.end() - self.start()
    }

    /// Interpolated sample at absolute time `t` (clamped to the trace).
    /// Circular fields follow the shorter arc.
    pub fn sample_at(&self, t: f64) -> Sample {
        let s = &self.samples;
        let i = s.partition_point(|x| x.t <= t);
        if i == 0 {
            return s[0];
        }
        if i == s.len() {
            return s[s.len() - 1];
        }
        let (a, b) = (&s[i - 1], &s[i]);
        let frac = (t - a.t) / (b.t - a.t);
        if frac == 0.0 {
            return *a;
        }
        let lin = |x: f64, y: f64| x + frac * (y - x);
        Sample {
            t,
            yaw: lerp_deg(a.yaw, b.yaw, frac),
            pitch: lin(a.pitch, b.pitch),
            roll: lerp_deg(a.roll, b.roll, frac),
            yaw_vel: lin(a.yaw_vel, b.yaw_vel),
            pitch_vel: lin(a.pitch_vel, b.pitch_vel),
            roll_vel: lin(a.roll_vel, b.roll_vel),
        }
    }

    pub fn yaw_at(&self, t: f64) -> f64 {
        self.sample_at(t).yaw
    }

    /// Shifts yaw so the first sample sits on the 0° line.
    pub fn rebase_yaw(&self) -> HeadTrace {
        let origin = self.samples[0].yaw;
        let samples = self
            .samples
            .iter()
            .map(|s| Sample {
                yaw: wrap_deg(s.yaw - origin),
                ..*s
            })
            .collect();
        HeadTrace {
            meta: self.meta.clone(),
            samples,
        }
    }

    /// Resamples at `rate_hz` starting from the first timestamp.
    pub fn resample(&self, rate_hz: f64) -> Result<HeadTrace> {
        if !(rate_hz.is_finite() && rate_hz > 0.0) {
            return Err(Error::invalid("resample rate must be > 0"));
        }
        let t0 = self.start();
        let steps = (self.duration() * rate_hz + TIME_EPS).floor() as usize;
        let samples = (0..=steps)
            .map(|k| self.sample_at(t0 + k as f64 / rate_hz))
            .collect();
        HeadTrace::new(self.meta.clone(), samples)
    }

    pub fn angles(&self, axis: Axis) -> impl Iterator<Item = f64> + '_ {
        self.samples.iter().map(move |s| match axis {
            Axis::Yaw => s.yaw,
            Axis::Pitch => s.pitch,
            Axis::Roll => s.roll,
        })
    }

    /// Writes the trace CSV (always with velocity columns).
    pub fn write_csv<W: io::Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(CSV_HEADER)?;
        for s in &self.samples {
            w.write_record(
                [
                    s.t,
                    s.yaw,
                    s.pitch,
                    s.roll,
                    s.yaw_vel,
                    s.pitch_vel,
                    s.roll_vel,
                ]
                .iter()
                .map(|v| v.to_string()),
            )?;
        }
        w.flush().map_err(|e| Error::io("<csv output>", e))?;
        Ok(())
    }

    /// Writes `<dir>/<stem>.csv` and the `<dir>/<stem>.json` sidecar.
    pub fn save(&self, dir: &Path, stem: &str) -> Result<PathBuf> {
        let csv_path = dir.join(format!("{stem}.csv"));
        let file = fs::File::create(&csv_path).map_err(|e| Error::io(&csv_path, e))?;
        self.write_csv(io::BufWriter::new(file))?;
        let json_path = dir.join(format!("{stem}.json"));
        let json = serde_json::to_vec_pretty(&self.meta)?;
        fs::write(&json_path, json).map_err(|e| Error::io(&json_path, e))?;
        Ok(csv_path)
    }
}

/// Parses trace CSV text into raw samples. Velocities are derived when the
/// velocity columns are missing.
pub fn parse_trace_csv(bytes: &[u8]) -> Result<Vec<Sample>> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(bytes);
    let header: Vec<String> = rdr
        .headers()
        .map_err(|e| Error::Trace {
            line: 1,
            msg: e.to_string(),
        })?
        .iter()
        .map(str::to_owned)
        .collect();
    let with_vel = if header == CSV_HEADER {
        true
    } else if header == CSV_HEADER[..4] {
        false
    } else {
        return Err(Error::Trace {
            line: 1,
            msg: format!("unexpected header {header:?}"),
        });
    };

    let mut samples = Vec::new();
    for record in rdr.records() {
        let record = record.map_err(|e| Error::Trace {
            line: e.position().map_or(0, |p| p.line()),
            msg: e.to_string(),
        })?;
        let line = record.position().map_or(0, |p| p.line());
        let mut vals = [0.0_f64; 7];
        for (slot, field) in vals.iter_mut().zip(record.iter()) {
            *slot = field.parse().map_err(|_| Error::Trace {
                line,
                msg: format!("not a number: {field:?}"),
            })?;
            if !slot.is_finite() {
                return Err(Error::Trace {
                    line,
                    msg: format!("non-finite value {field:?}"),
                });
            }
        }
        let sample = Sample {
            t: vals[0],
            yaw: vals[1],
            pitch: vals[2],
            roll: vals[3],
            yaw_vel: vals[4],
            pitch_vel: vals[5],
            roll_vel: vals[6],
        };
        if let Some(prev) = samples.last() {
            let prev: &Sample = prev;
            if sample.t <= prev.t {
                return Err(Error::Trace {
                    line,
                    msg: format!("time {} does not increase", sample.t),
                });
            }
        }
        samples.push(sample);
    }
    if samples.is_empty() {
        return Err(Error::Trace {
            line: 1,
            msg: "no samples".into(),
        });
    }
    if !with_vel {
        fill_velocities(&mut samples);
    }
    Ok(samples)
}

/// Central differences (one-sided at the ends) of the unwrapped angles.
fn fill_velocities(samples: &mut [Sample]) {
    let n = samples.len();
    if n < 2 {
        return;
    }
    let rates: Vec<(f64, f64, f64)> = (0..n)
        .map(|i| {
            let (a, b) = (&samples[i.saturating_sub(1)], &samples[(i + 1).min(n - 1)]);
            let dt = b.t - a.t;
            (
                signed_diff(a.yaw, b.yaw) / dt,
                (b.pitch - a.pitch) / dt,
                signed_diff(a.roll, b.roll) / dt,
            )
        })
        .collect();
    for (s, (y, p, r)) in samples.iter_mut().zip(rates) {
        s.yaw_vel = y;
        s.pitch_vel = p;
        s.roll_vel = r;
    }
}

/// Parses trace CSV text and attaches `meta`.
pub fn parse_trace(bytes: &[u8], meta: TraceMeta) -> Result<HeadTrace> {
    HeadTrace::new(meta, parse_trace_csv(bytes)?)
}

/// Loads `<stem>.csv` plus its `<stem>.json` sidecar. Without a sidecar the
/// stem doubles as video and user id and the category is `misc`.
pub fn load_trace(csv_path: &Path) -> Result<HeadTrace> {
    let bytes = fs::read(csv_path).map_err(|e| Error::io(csv_path, e))?;
    let sidecar = csv_path.with_extension("json");
    let meta = if sidecar.exists() {
        let json = fs::read(&sidecar).map_err(|e| Error::io(&sidecar, e))?;
        TraceMeta::from_json(&json)?
    } else {
        let stem = csv_path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default();
        TraceMeta::new(stem.clone(), stem, Category::Misc)
    };
    parse_trace(&bytes, meta).map_err(|e| match e {
        Error::Trace { line, msg } => Error::Trace {
            line,
            msg: format!("{}: {msg}", csv_path.display()),
        },
        other => other,
    })
}

/// Loads every `*.csv` trace in `dir`, in file-name order.
pub fn load_trace_dir(dir: &Path) -> Result<Vec<HeadTrace>> {
    let mut paths: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(|e| Error::io(dir, e))?
        .filter_map(|entry| entry.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|ext| ext == "csv"))
        .collect();
    paths.sort();
    if paths.is_empty() {
        return Err(Error::invalid(format!(
            "no trace CSV files in {}",
            dir.display()
        )));
    }
    paths.iter().map(|p| load_trace(p)).collect()
}

/// Traces grouped by video id (ordered by id).
pub fn group_by_video(traces: &[HeadTrace]) -> BTreeMap<&str, Vec<&HeadTrace>> {
    let mut groups: BTreeMap<&str, Vec<&HeadTrace>> = BTreeMap::new();
    for t in traces {
        groups.entry(t.meta.video_id.as_str()).or_default().push(t);
    }
    groups
}

/// One lagged observation: time since trace start, yaw at that time, and the
/// signed yaw change over the lag.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LagPair {
    pub t_rel: f64,
    pub yaw: f64,
    pub yaw_vel: f64,
    pub change: f64,
}

pub(crate) fn check_lag_inputs(traces: &[HeadTrace], lag_s: f64, stride_s: f64) -> Result<()> {
    if traces.is_empty() {
        return Err(Error::invalid("empty trace set"));
    }
    if !(stride_s.is_finite() && stride_s > 0.0) {
        return Err(Error::invalid("stride must be > 0"));
    }
    if !(lag_s.is_finite() && lag_s >= 0.0) {
        return Err(Error::invalid("lag must be finite and >= 0"));
    }
    let shortest = traces
        .iter()
        .map(HeadTrace::duration)
        .fold(f64::INFINITY, f64::min);
    if lag_s >= shortest {
        return Err(Error::invalid(format!(
            "lag {lag_s} s is not shorter than the shortest trace ({shortest} s)"
        )));
    }
    Ok(())
}

/// Lag pairs of one trace at `t = start + k·stride` for every `t` with
/// `t + lag` inside the trace.
pub fn lag_pairs(trace: &HeadTrace, lag_s: f64, stride_s: f64) -> Vec<LagPair> {
    let t0 = trace.start();
    let last = trace.end() - lag_s + TIME_EPS;
    (0..)
        .map(|k| t0 + k as f64 * stride_s)
        .take_while(|&t| t <= last)
        .map(|t| {
            let here = trace.sample_at(t);
            let later = trace.yaw_at((t + lag_s).min(trace.end()));
            LagPair {
                t_rel: t - t0,
                yaw: here.yaw,
                yaw_vel: here.yaw_vel,
                change: signed_diff(here.yaw, later),
            }
        })
        .collect()
}

/// Lag pairs at the recorded sample instants instead of a fixed stride.
pub fn lag_pairs_at_samples(trace: &HeadTrace, lag_s: f64) -> Vec<LagPair> {
    let t0 = trace.start();
    let last = trace.end() - lag_s + TIME_EPS;
    trace
        .samples
        .iter()
        .take_while(|s| s.t <= last)
        .map(|s| LagPair {
            t_rel: s.t - t0,
            yaw: s.yaw,
            yaw_vel: s.yaw_vel,
            change: signed_diff(s.yaw, trace.yaw_at((s.t + lag_s).min(trace.end()))),
        })
        .collect()
}

/// Pooled signed yaw changes over `lag_s` for pairs accepted by `keep`.
pub fn yaw_changes(
    traces: &[HeadTrace],
    lag_s: f64,
    stride_s: f64,
    keep: impl Fn(&LagPair) -> bool,
) -> Result<Vec<f64>> {
    check_lag_inputs(traces, lag_s, stride_s)?;
    Ok(traces
        .iter()
        .flat_map(|t| lag_pairs(t, lag_s, stride_s))
        .filter(|p| keep(p))
        .map(|p| p.change)
        .collect())
}

/// Pooled yaw positions sampled every `stride_s` seconds.
pub fn sampled_yaw(traces: &[HeadTrace], stride_s: f64) -> Result<Vec<f64>> {
    if traces.is_empty() {
        return Err(Error::invalid("empty trace set"));
    }
    if !(stride_s.is_finite() && stride_s > 0.0) {
        return Err(Error::invalid("stride must be > 0"));
    }
    Ok(traces
        .iter()
        .flat_map(|t| lag_pairs(t, 0.0, stride_s))
        .map(|p| p.yaw)
        .collect())
}
