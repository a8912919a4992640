//! Discretized viewing-direction distributions `p_n(T)`.
//!
//! Distributions are expressed relative to the zero line: for a lag `T` the
//! angle is the yaw change over `T`, and for the lifetime sentinel
//! (`T = ∞`) it is the rebased yaw itself.

use std::io;

use serde::{Deserialize, Serialize};

use crate::angle::wrap_deg;
use crate::error::{Error, Result};
use crate::model::{check_probs, DirectionGrid};
use crate::trace::{self, HeadTrace};

/// Default spacing of lag-pair sampling along a trace.
pub const DEFAULT_STRIDE_S: f64 = 0.1;

/// Default histogram bin width for [`AngularDensity`].
pub const DEFAULT_BIN_DEG: f64 = 1.0;

/// Lag value meaning "distribution of the rebased yaw over the whole session".
pub const LIFETIME: f64 = f64::INFINITY;

/// Tolerance on the total mass of an [`AngularDensity`].
pub const DENSITY_SUM_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    Empirical,
    Uniform,
    WrappedGaussian,
    PointMass,
    Convolved,
    Explicit,
}

/// Probability of looking at each of the `N` tiles, `lag_s` seconds ahead.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbVector {
    probs: Vec<f64>,
    lag_s: f64,
    provenance: Provenance,
}

impl ProbVector {
    pub fn new(probs: Vec<f64>, lag_s: f64, provenance: Provenance) -> Result<Self> {
        if probs.len() < 2 {
            return Err(Error::invalid("probability vector needs at least 2 tiles"));
        }
        if lag_s.is_nan() || lag_s < 0.0 {
            return Err(Error::invalid("lag must be >= 0"));
        }
        check_probs(&probs)?;
        Ok(ProbVector {
            probs,
            lag_s,
            provenance,
        })
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn lag_s(&self) -> f64 {
        self.lag_s
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    pub fn with_lag(mut self, lag_s: f64) -> Self {
        self.lag_s = lag_s;
        self
    }

    /// `out[n] = p[n - k]`: mass moves `k` tiles towards higher yaw.
    pub fn rotate(&self, k: isize) -> Self {
        let n = self.len() as isize;
        let probs = (0..n)
            .map(|i| self.probs[(i - k).rem_euclid(n) as usize])
            .collect();
        ProbVector {
            probs,
            ..self.clone()
        }
    }

    /// Writes `tile_index,probability` rows with a header.
    pub fn write_csv<W: io::Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["tile_index", "probability"])?;
        for (n, p) in self.probs.iter().enumerate() {
            w.write_record([n.to_string(), format!("{p:.12}")])?;
        }
        w.flush().map_err(|e| Error::io("<csv output>", e))?;
        Ok(())
    }

    /// Reads `tile_index,probability` rows. Indices must run `0..N` in order.
    pub fn from_csv_reader<R: io::Read>(reader: R) -> Result<Self> {
        #[derive(Deserialize)]
        struct Row {
            tile_index: usize,
            probability: f64,
        }
        let mut rdr = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_reader(reader);
        let mut probs = Vec::new();
        for (i, row) in rdr.deserialize::<Row>().enumerate() {
            let row = row?;
            if row.tile_index != i {
                return Err(Error::invalid(format!(
                    "tile_index {} out of order (expected {i})",
                    row.tile_index
                )));
            }
            probs.push(row.probability);
        }
        Self::new(probs, 0.0, Provenance::Explicit)
    }
}

/// Histogram of an angular density over `[-180, 180)` with equal bins.
#[derive(Debug, Clone, PartialEq)]
pub struct AngularDensity {
    bin_width_deg: f64,
    masses: Vec<f64>,
}

impl AngularDensity {
    /// `masses[i]` is the mass of `[-180 + i·w, -180 + (i+1)·w)`.
    pub fn from_masses(bin_width_deg: f64, masses: Vec<f64>) -> Result<Self> {
        let bins = bin_count(bin_width_deg)?;
        if masses.len() != bins {
            return Err(Error::LengthMismatch {
                what: "density bins",
                got: masses.len(),
                expected: bins,
            });
        }
        if masses.iter().any(|m| !m.is_finite() || *m < 0.0) {
            return Err(Error::invalid("density masses must be finite and >= 0"));
        }
        Ok(AngularDensity {
            bin_width_deg,
            masses,
        })
    }

    /// Bins the mass of a distribution given by its CDF on `[-180, 180]`.
    pub fn from_cdf(bin_width_deg: f64, cdf: impl Fn(f64) -> f64) -> Result<Self> {
        let bins = bin_count(bin_width_deg)?;
        let masses = (0..bins)
            .map(|i| {
                let lo = -180.0 + i as f64 * bin_width_deg;
                (cdf(lo + bin_width_deg) - cdf(lo)).max(0.0)
            })
            .collect();
        Self::from_masses(bin_width_deg, masses)
    }

    /// Normalized histogram of angle samples (wrapped into `[-180, 180)`).
    pub fn from_samples(bin_width_deg: f64, samples: &[f64]) -> Result<Self> {
        let bins = bin_count(bin_width_deg)?;
        if samples.is_empty() {
            return Err(Error::invalid("no samples to build a density from"));
        }
        let mut masses = vec![0.0; bins];
        let unit = 1.0 / samples.len() as f64;
        for &s in samples {
            // snap away interpolation noise so exact angles land in their own bin
            let pos = (wrap_deg(s) + 180.0) / bin_width_deg;
            let idx = ((pos * 1e9).round() / 1e9).floor() as usize;
            masses[idx.min(bins - 1)] += unit;
        }
        Self::from_masses(bin_width_deg, masses)
    }

    pub fn bin_width_deg(&self) -> f64 {
        self.bin_width_deg
    }

    pub fn masses(&self) -> &[f64] {
        &self.masses
    }

    pub fn bin_start(&self, i: usize) -> f64 {
        -180.0 + i as f64 * self.bin_width_deg
    }

    pub fn total_mass(&self) -> f64 {
        self.masses.iter().sum()
    }

    /// Mass over `[lo, hi)` assuming the density is flat inside each bin.
    pub fn mass_between(&self, lo: f64, hi: f64) -> f64 {
        self.masses
            .iter()
            .enumerate()
            .map(|(i, m)| {
                let a = self.bin_start(i);
                let b = a + self.bin_width_deg;
                let overlap = (hi.min(b) - lo.max(a)).max(0.0);
                m * overlap / self.bin_width_deg
            })
            .sum()
    }

    /// Writes `bin_start_deg,mass` rows with a header.
    pub fn write_csv<W: io::Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["bin_start_deg", "mass"])?;
        for (i, m) in self.masses.iter().enumerate() {
            w.write_record([format!("{}", self.bin_start(i)), format!("{m:.12}")])?;
        }
        w.flush().map_err(|e| Error::io("<csv output>", e))?;
        Ok(())
    }
}

fn bin_count(bin_width_deg: f64) -> Result<usize> {
    if !(bin_width_deg.is_finite() && bin_width_deg > 0.0) {
        return Err(Error::invalid("bin width must be > 0"));
    }
    let bins = 360.0 / bin_width_deg;
    if (bins - bins.round()).abs() > 1e-9 {
        return Err(Error::invalid("bin width must divide 360"));
    }
    Ok(bins.round() as usize)
}

/// Integrates `density` over each tile of `grid`.
pub fn discretize(
    density: &AngularDensity,
    grid: &DirectionGrid,
    lag_s: f64,
) -> Result<ProbVector> {
    let total = density.total_mass();
    if (total - 1.0).abs() > DENSITY_SUM_TOL {
        return Err(Error::invalid(format!(
            "density is not normalized (total mass {total})"
        )));
    }
    let width = grid.width_deg();
    let mut probs = vec![0.0; grid.tiles()];
    for (i, &m) in density.masses().iter().enumerate() {
        if m == 0.0 {
            continue;
        }
        let lo = density.bin_start(i);
        let hi = lo + density.bin_width_deg();
        let mut tile = (((lo + 180.0) / width).floor() as usize).saturating_sub(1);
        while tile < grid.tiles() {
            let t_lo = grid.edge(tile);
            let t_hi = grid.edge(tile + 1);
            if t_lo >= hi {
                break;
            }
            let overlap = (hi.min(t_hi) - lo.max(t_lo)).max(0.0);
            probs[tile] += m * overlap / density.bin_width_deg();
            tile += 1;
        }
    }
    let sum: f64 = probs.iter().sum();
    probs.iter_mut().for_each(|p| *p /= sum);
    ProbVector::new(probs, lag_s, Provenance::Empirical)
}

/// Pooled histogram of yaw changes over `lag_s` across `traces`, with pairs
/// sampled every `stride_s` seconds. `lag_s = LIFETIME` returns the
/// distribution of rebased yaw itself.
pub fn empirical_yaw_change(
    traces: &[HeadTrace],
    lag_s: f64,
    stride_s: f64,
) -> Result<AngularDensity> {
    empirical_yaw_change_binned(traces, lag_s, stride_s, DEFAULT_BIN_DEG)
}

pub fn empirical_yaw_change_binned(
    traces: &[HeadTrace],
    lag_s: f64,
    stride_s: f64,
    bin_width_deg: f64,
) -> Result<AngularDensity> {
    let samples = if lag_s == LIFETIME {
        trace::sampled_yaw(traces, stride_s)?
    } else {
        trace::yaw_changes(traces, lag_s, stride_s, |_| true)?
    };
    AngularDensity::from_samples(bin_width_deg, &samples)
}

/// Empirical `p_n(T)`: discretized pooled yaw change.
pub fn empirical_probs(
    traces: &[HeadTrace],
    lag_s: f64,
    stride_s: f64,
    grid: &DirectionGrid,
) -> Result<ProbVector> {
    let density = empirical_yaw_change(traces, lag_s, stride_s)?;
    discretize(&density, grid, lag_s)
}

pub fn uniform(grid: &DirectionGrid) -> ProbVector {
    let n = grid.tiles();
    ProbVector {
        probs: vec![1.0 / n as f64; n],
        lag_s: 0.0,
        provenance: Provenance::Uniform,
    }
}

pub fn point_mass(angle_deg: f64, grid: &DirectionGrid) -> Result<ProbVector> {
    if !angle_deg.is_finite() {
        return Err(Error::invalid("point-mass angle must be finite"));
    }
    let mut probs = vec![0.0; grid.tiles()];
    probs[grid.tile_of(angle_deg)] = 1.0;
    ProbVector::new(probs, 0.0, Provenance::PointMass)
}

fn std_normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / std::f64::consts::SQRT_2)
}

/// Wrapped normal centred on 0° with standard deviation `sigma_deg`,
/// integrated exactly over each tile.
pub fn wrapped_gaussian(sigma_deg: f64, grid: &DirectionGrid) -> Result<ProbVector> {
    if !(sigma_deg.is_finite() && sigma_deg > 0.0) {
        return Err(Error::invalid("sigma must be > 0"));
    }
    let wraps = (8.0 * sigma_deg / 360.0).ceil() as i64 + 2;
    let mass = |lo: f64, hi: f64| -> f64 {
        (-wraps..=wraps)
            .map(|k| {
                let shift = 360.0 * k as f64;
                std_normal_cdf((hi + shift) / sigma_deg) - std_normal_cdf((lo + shift) / sigma_deg)
            })
            .sum()
    };
    let mut probs: Vec<f64> = (0..grid.tiles())
        .map(|n| mass(grid.edge(n), grid.edge(n + 1)).max(0.0))
        .collect();
    let sum: f64 = probs.iter().sum();
    probs.iter_mut().for_each(|p| *p /= sum);
    ProbVector::new(probs, 0.0, Provenance::WrappedGaussian)
}

/// Circular convolution `out[n] = Σ_k kernel[k] · p[n - k]`.
pub fn circular_smooth(p: &ProbVector, kernel: &ProbVector) -> Result<ProbVector> {
    let n = p.len();
    if kernel.len() != n {
        return Err(Error::LengthMismatch {
            what: "smoothing kernel",
            got: kernel.len(),
            expected: n,
        });
    }
    let probs = (0..n)
        .map(|i| {
            (0..n)
                .map(|k| kernel.probs[k] * p.probs[(i + n - k) % n])
                .sum()
        })
        .collect();
    ProbVector::new(probs, p.lag_s, Provenance::Convolved)
}
