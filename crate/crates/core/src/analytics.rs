//! Characterization metrics over head-movement traces.
//!
//! All angular arithmetic is circular: yaw changes are reported in
//! `[-180, 180)` and distances in `[0, 180]`.

use std::io;

use crate::angle::{circ_dist, sector_of};
use crate::error::{Error, Result};
use crate::trace::{self, group_by_video, Axis, HeadTrace, LagPair};

/// Empirical distribution of a sample.
#[derive(Debug, Clone, PartialEq)]
pub struct Cdf {
    sorted: Vec<f64>,
}

impl Cdf {
    pub fn new(mut values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::invalid("no samples for a CDF"));
        }
        if values.iter().any(|v| v.is_nan()) {
            return Err(Error::invalid("NaN sample"));
        }
        values.sort_by(f64::total_cmp);
        Ok(Cdf { sorted: values })
    }

    pub fn len(&self) -> usize {
        self.sorted.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sorted.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.sorted
    }

    pub fn min(&self) -> f64 {
        self.sorted[0]
    }

    pub fn max(&self) -> f64 {
        self.sorted[self.sorted.len() - 1]
    }

    fn frac(&self, count: usize) -> f64 {
        count as f64 / self.sorted.len() as f64
    }

    /// `P(X < x)`.
    pub fn fraction_below(&self, x: f64) -> f64 {
        self.frac(self.sorted.partition_point(|&v| v < x))
    }

    /// `P(X <= x)`.
    pub fn cumulative(&self, x: f64) -> f64 {
        self.frac(self.sorted.partition_point(|&v| v <= x))
    }

    /// `P(X > x)`.
    pub fn fraction_above(&self, x: f64) -> f64 {
        self.frac(self.sorted.len() - self.sorted.partition_point(|&v| v <= x))
    }

    /// `P(X = x)`.
    pub fn mass_at(&self, x: f64) -> f64 {
        let lo = self.sorted.partition_point(|&v| v < x);
        let hi = self.sorted.partition_point(|&v| v <= x);
        self.frac(hi - lo)
    }

    /// `P(|X| <= r)`.
    pub fn fraction_within(&self, r: f64) -> f64 {
        self.cumulative(r) - self.fraction_below(-r)
    }

    /// Generalized inverse `inf { x : P(X <= x) >= p }`; `-∞` for `p <= 0`.
    pub fn quantile(&self, p: f64) -> f64 {
        if p <= 0.0 {
            return f64::NEG_INFINITY;
        }
        let n = self.sorted.len();
        let mut k = ((p * n as f64).ceil() as usize).clamp(1, n);
        // p * n can round above an exact count k / n
        while k > 1 && self.frac(k - 1) >= p {
            k -= 1;
        }
        self.sorted[k - 1]
    }

    pub fn mean(&self) -> f64 {
        self.sorted.iter().sum::<f64>() / self.sorted.len() as f64
    }

    /// Writes `value,cumulative_fraction` for every distinct value.
    pub fn write_csv<W: io::Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["value", "cumulative_fraction"])?;
        let n = self.sorted.len();
        for (i, &v) in self.sorted.iter().enumerate() {
            if i + 1 < n && self.sorted[i + 1] == v {
                continue;
            }
            w.write_record([
                format!("{v:.6}"),
                format!("{:.6}", (i + 1) as f64 / n as f64),
            ])?;
        }
        w.flush().map_err(|e| Error::io("<csv output>", e))?;
        Ok(())
    }
}

/// Pooled distribution of one orientation angle over every sample.
pub fn angle_utilization_cdf(traces: &[HeadTrace], axis: Axis) -> Result<Cdf> {
    if traces.is_empty() {
        return Err(Error::invalid("empty trace set"));
    }
    Cdf::new(traces.iter().flat_map(|t| t.angles(axis)).collect())
}

/// Joint yaw × pitch frequency; `cells[row][col]` with rows indexed by
/// pitch bin from -90 and columns by yaw bin from -180.
#[derive(Debug, Clone, PartialEq)]
pub struct Heatmap {
    pub yaw_bin_deg: f64,
    pub pitch_bin_deg: f64,
    pub cells: Vec<Vec<f64>>,
}

impl Heatmap {
    pub fn max_cell(&self) -> f64 {
        self.cells.iter().flatten().copied().fold(0.0, f64::max)
    }

    pub fn min_cell(&self) -> f64 {
        self.cells
            .iter()
            .flatten()
            .copied()
            .fold(f64::INFINITY, f64::min)
    }

    /// Grid CSV: header `pitch_start_deg` plus one column per yaw bin start.
    pub fn write_csv<W: io::Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let cols = self.cells.first().map_or(0, Vec::len);
        let mut header = vec!["pitch_start_deg".to_string()];
        header.extend((0..cols).map(|c| format!("{}", -180.0 + c as f64 * self.yaw_bin_deg)));
        w.write_record(&header)?;
        for (r, row) in self.cells.iter().enumerate() {
            let mut rec = vec![format!("{}", -90.0 + r as f64 * self.pitch_bin_deg)];
            rec.extend(row.iter().map(|v| format!("{v:.6}")));
            w.write_record(&rec)?;
        }
        w.flush().map_err(|e| Error::io("<csv output>", e))?;
        Ok(())
    }
}

fn divides(total: f64, bin: f64) -> Option<usize> {
    if !(bin.is_finite() && bin > 0.0) {
        return None;
    }
    let k = total / bin;
    ((k - k.round()).abs() < 1e-9).then_some(k.round() as usize)
}

pub fn heatmap(traces: &[HeadTrace], yaw_bin_deg: f64, pitch_bin_deg: f64) -> Result<Heatmap> {
    if traces.is_empty() {
        return Err(Error::invalid("empty trace set"));
    }
    let cols =
        divides(360.0, yaw_bin_deg).ok_or_else(|| Error::invalid("yaw bin must divide 360"))?;
    let rows =
        divides(180.0, pitch_bin_deg).ok_or_else(|| Error::invalid("pitch bin must divide 180"))?;
    let mut counts = vec![vec![0u64; cols]; rows];
    let mut total = 0u64;
    for s in traces.iter().flat_map(|t| t.samples()) {
        let c = (((s.yaw + 180.0) / yaw_bin_deg).floor() as usize).min(cols - 1);
        let r = (((s.pitch + 90.0) / pitch_bin_deg).floor() as usize).min(rows - 1);
        counts[r][c] += 1;
        total += 1;
    }
    let cells = counts
        .into_iter()
        .map(|row| row.into_iter().map(|c| c as f64 / total as f64).collect())
        .collect();
    Ok(Heatmap {
        yaw_bin_deg,
        pitch_bin_deg,
        cells,
    })
}

/// Mean circular distance between every unordered pair of viewers of the
/// same video, at `t = 0, step, 2·step, ...` (relative to each trace start),
/// averaged across videos. The series stops at the shortest trace.
pub fn pairwise_angular_difference(
    traces: &[HeadTrace],
    time_step_s: f64,
) -> Result<Vec<(f64, f64)>> {
    if !(time_step_s.is_finite() && time_step_s > 0.0) {
        return Err(Error::invalid("time step must be > 0"));
    }
    let groups = group_by_video(traces);
    if groups.is_empty() {
        return Err(Error::invalid("empty trace set"));
    }
    if let Some((video, g)) = groups.iter().find(|(_, g)| g.len() < 2) {
        return Err(Error::invalid(format!(
            "video {video:?} has {} trace(s); pairwise differences need at least 2",
            g.len()
        )));
    }
    let horizon = traces
        .iter()
        .map(HeadTrace::duration)
        .fold(f64::INFINITY, f64::min);
    let steps = (horizon / time_step_s + 1e-9).floor() as usize;
    let series = (0..=steps)
        .map(|k| {
            let t = k as f64 * time_step_s;
            let per_video: f64 = groups
                .values()
                .map(|g| {
                    let yaws: Vec<f64> = g.iter().map(|tr| tr.yaw_at(tr.start() + t)).collect();
                    let mut sum = 0.0;
                    let mut pairs = 0usize;
                    for i in 0..yaws.len() {
                        for j in i + 1..yaws.len() {
                            sum += circ_dist(yaws[i], yaws[j]);
                            pairs += 1;
                        }
                    }
                    sum / pairs as f64
                })
                .sum();
            (t, per_video / groups.len() as f64)
        })
        .collect();
    Ok(series)
}

/// Signed yaw change over `lag_s`, pooled across traces.
pub fn yaw_change_cdf(traces: &[HeadTrace], lag_s: f64, stride_s: f64) -> Result<Cdf> {
    Cdf::new(trace::yaw_changes(traces, lag_s, stride_s, |_| true)?)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VelocityPrediction {
    /// Fraction of qualifying samples whose yaw ended up on the opposite
    /// side of the velocity direction by more than the safety angle.
    pub error_rate: f64,
    pub qualifying: usize,
    pub total: usize,
}

/// How often the current yaw velocity mispredicts the direction of the yaw
/// change over the next `lag_s` seconds. Only samples with
/// `|yaw_vel| > threshold` count.
pub fn velocity_prediction_error(
    traces: &[HeadTrace],
    lag_s: f64,
    threshold_dps: f64,
    safety_deg: f64,
) -> Result<VelocityPrediction> {
    if traces.is_empty() {
        return Err(Error::invalid("empty trace set"));
    }
    if !(lag_s.is_finite() && lag_s > 0.0) {
        return Err(Error::invalid("lag must be > 0"));
    }
    if !(threshold_dps.is_finite() && threshold_dps > 0.0) {
        return Err(Error::invalid("velocity threshold must be > 0"));
    }
    if !(safety_deg.is_finite() && safety_deg >= 0.0) {
        return Err(Error::invalid("safety angle must be >= 0"));
    }
    let mut total = 0usize;
    let mut qualifying = 0usize;
    let mut errors = 0usize;
    for t in traces {
        if lag_s >= t.duration() {
            return Err(Error::invalid(format!(
                "lag {lag_s} s is not shorter than a trace of {} s",
                t.duration()
            )));
        }
        for pair in trace::lag_pairs_at_samples(t, lag_s) {
            total += 1;
            if pair.yaw_vel.abs() <= threshold_dps {
                continue;
            }
            qualifying += 1;
            if pair.change * pair.yaw_vel.signum() < -safety_deg {
                errors += 1;
            }
        }
    }
    if qualifying == 0 {
        return Err(Error::invalid("no samples exceed the velocity threshold"));
    }
    Ok(VelocityPrediction {
        error_rate: errors as f64 / qualifying as f64,
        qualifying,
        total,
    })
}

/// Yaw-change distribution for one origin sector.
#[derive(Debug, Clone, PartialEq)]
pub struct SectorCdf {
    pub start_deg: f64,
    /// `None` when no sample started in this sector.
    pub cdf: Option<Cdf>,
}

/// Yaw change over `lag_s` conditioned on the sector holding the starting
/// yaw. Sectors are `sector_deg` wide, starting at the 0° line.
pub fn origin_conditioned_change(
    traces: &[HeadTrace],
    lag_s: f64,
    stride_s: f64,
    sector_deg: f64,
) -> Result<Vec<SectorCdf>> {
    let sectors =
        divides(360.0, sector_deg).ok_or_else(|| Error::invalid("sector width must divide 360"))?;
    let mut buckets = vec![Vec::new(); sectors];
    let all = collect_pairs(traces, lag_s, stride_s)?;
    for p in all {
        buckets[sector_of(p.yaw, sector_deg)].push(p.change);
    }
    buckets
        .into_iter()
        .enumerate()
        .map(|(i, b)| {
            Ok(SectorCdf {
                start_deg: i as f64 * sector_deg,
                cdf: if b.is_empty() {
                    None
                } else {
                    Some(Cdf::new(b)?)
                },
            })
        })
        .collect()
}

fn collect_pairs(traces: &[HeadTrace], lag_s: f64, stride_s: f64) -> Result<Vec<LagPair>> {
    trace::check_lag_inputs(traces, lag_s, stride_s)?;
    Ok(traces
        .iter()
        .flat_map(|t| trace::lag_pairs(t, lag_s, stride_s))
        .collect())
}

/// Yaw-change distributions for pairs starting before `split_s` (the
/// exploration phase) and at or after it.
pub fn phase_split_cdf(
    traces: &[HeadTrace],
    lag_s: f64,
    stride_s: f64,
    split_s: f64,
) -> Result<(Cdf, Cdf)> {
    if !(split_s.is_finite() && split_s > 0.0) {
        return Err(Error::invalid("split time must be > 0"));
    }
    if let Some(t) = traces.iter().find(|t| t.duration() <= split_s) {
        return Err(Error::invalid(format!(
            "trace {}/{} lasts {} s, not longer than the {split_s} s split",
            t.meta().video_id,
            t.meta().user_id,
            t.duration()
        )));
    }
    let (early, late): (Vec<LagPair>, Vec<LagPair>) = collect_pairs(traces, lag_s, stride_s)?
        .into_iter()
        .partition(|p| p.t_rel < split_s);
    let to_cdf = |v: Vec<LagPair>, which: &str| {
        Cdf::new(v.into_iter().map(|p| p.change).collect())
            .map_err(|_| Error::invalid(format!("no lag pairs in the {which} phase")))
    };
    Ok((to_cdf(early, "exploration")?, to_cdf(late, "steady")?))
}

/// Reference behaviour measured on real viewing sessions, reported next to
/// results from user-supplied traces. These are never asserted.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReferenceBand {
    pub metric: &'static str,
    pub description: &'static str,
    pub lag_s: f64,
    pub within_deg: f64,
    pub fraction: f64,
}

pub const REFERENCE_BANDS: [ReferenceBand; 4] = [
    ReferenceBand {
        metric: "angle-cdf",
        description: "roll within ±10°",
        lag_s: 0.0,
        within_deg: 10.0,
        fraction: 0.98,
    },
    ReferenceBand {
        metric: "yaw-change",
        description: "yaw change over 200 ms within ±28°",
        lag_s: 0.2,
        within_deg: 28.0,
        fraction: 0.99,
    },
    ReferenceBand {
        metric: "velocity",
        description: "motion continues in the velocity direction (>5°/s, 200 ms)",
        lag_s: 0.2,
        within_deg: 0.0,
        fraction: 0.97,
    },
    ReferenceBand {
        metric: "phase-split",
        description: "post-exploration yaw change over 200 ms within ±15°",
        lag_s: 0.2,
        within_deg: 15.0,
        fraction: 0.99,
    },
];
