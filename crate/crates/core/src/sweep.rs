//! Prefetch-aggressiveness sweeps: one optimal solve per grid cell.

use std::io;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{DirectionGrid, Instance, QualityLadder, UtilityModel};
use crate::optimizer::solve_dp;
use crate::trace::{Category, HeadTrace};
use crate::viewprob::{self, ProbVector};

/// How `p_n(T)` is obtained for each lag of the grid.
#[derive(Debug, Clone, PartialEq)]
pub enum Family {
    /// Synthetic stand-in for measured spreading: `σ(T) = sigma0_deg · √T`.
    WrappedGaussian {
        sigma0_deg: f64,
    },
    Uniform,
    /// `p(T_0) = initial`, then one smoothing step per later grid point.
    Convolution {
        kernel: ProbVector,
        initial: ProbVector,
    },
    /// Measured yaw change, one curve per category.
    Empirical {
        stride_s: f64,
        categories: Option<Vec<Category>>,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub rates_kbps: Vec<f64>,
    pub chunk_s: f64,
    pub tiles: usize,
    pub lags_s: Vec<f64>,
    pub capacities: Vec<u64>,
    pub betas: Vec<f64>,
    pub penalties: Vec<f64>,
    pub utilities: Vec<UtilityModel>,
    pub family: Family,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        let grids = [
            ("lags_s", self.lags_s.len()),
            ("capacities", self.capacities.len()),
            ("betas", self.betas.len()),
            ("penalties", self.penalties.len()),
            ("utilities", self.utilities.len()),
        ];
        if let Some((name, _)) = grids.iter().find(|(_, len)| *len == 0) {
            return Err(Error::Config(format!("sweep grid {name} is empty")));
        }
        if self.lags_s.iter().any(|t| !(t.is_finite() && *t >= 0.0)) {
            return Err(Error::Config("lags must be finite and >= 0".into()));
        }
        if self.lags_s.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Config("lags must be strictly increasing".into()));
        }
        for &f in &self.penalties {
            QualityLadder::new(self.rates_kbps.clone(), self.chunk_s, f)?;
        }
        for u in &self.utilities {
            u.validate()?;
        }
        if self
            .betas
            .iter()
            .any(|b| !(b.is_finite() && (0.0..=1.0).contains(b)))
        {
            return Err(Error::Config("betas must lie in [0, 1]".into()));
        }
        let grid = DirectionGrid::new(self.tiles)?;
        match &self.family {
            Family::WrappedGaussian { sigma0_deg }
                if !(sigma0_deg.is_finite() && *sigma0_deg > 0.0) =>
            {
                return Err(Error::Config("sigma0_deg must be > 0".into()));
            }
            Family::Convolution { kernel, initial } => {
                for (what, v) in [("kernel", kernel), ("initial vector", initial)] {
                    if v.len() != grid.tiles() {
                        return Err(Error::LengthMismatch {
                            what,
                            got: v.len(),
                            expected: grid.tiles(),
                        });
                    }
                }
            }
            Family::Empirical { stride_s, .. } if !(stride_s.is_finite() && *stride_s > 0.0) => {
                return Err(Error::Config("stride_s must be > 0".into()));
            }
            _ => {}
        }
        Ok(())
    }

    /// One probability vector per lag for every curve label.
    fn curves(&self, traces: Option<&[HeadTrace]>) -> Result<Vec<(String, Vec<ProbVector>)>> {
        let grid = DirectionGrid::new(self.tiles)?;
        match &self.family {
            Family::WrappedGaussian { sigma0_deg } => {
                let probs = self
                    .lags_s
                    .iter()
                    .map(|&t| {
                        let p = if t == 0.0 {
                            viewprob::point_mass(0.0, &grid)?
                        } else {
                            viewprob::wrapped_gaussian(sigma0_deg * t.sqrt(), &grid)?
                        };
                        Ok(p.with_lag(t))
                    })
                    .collect::<Result<_>>()?;
                Ok(vec![("synthetic_wrapped_gaussian".into(), probs)])
            }
            Family::Uniform => {
                let probs = self
                    .lags_s
                    .iter()
                    .map(|&t| viewprob::uniform(&grid).with_lag(t))
                    .collect();
                Ok(vec![("uniform".into(), probs)])
            }
            Family::Convolution { kernel, initial } => {
                let mut probs = Vec::with_capacity(self.lags_s.len());
                let mut p = initial.clone();
                for (i, &t) in self.lags_s.iter().enumerate() {
                    if i > 0 {
                        p = viewprob::circular_smooth(&p, kernel)?;
                    }
                    probs.push(p.clone().with_lag(t));
                }
                Ok(vec![("convolution".into(), probs)])
            }
            Family::Empirical {
                stride_s,
                categories,
            } => {
                let traces = traces
                    .filter(|t| !t.is_empty())
                    .ok_or_else(|| Error::invalid("the empirical family needs traces"))?;
                let cats: Vec<Category> = match categories {
                    Some(c) => c.clone(),
                    None => Category::ALL
                        .into_iter()
                        .filter(|c| traces.iter().any(|t| t.meta().category == *c))
                        .collect(),
                };
                cats.into_iter()
                    .map(|cat| {
                        let subset: Vec<HeadTrace> = traces
                            .iter()
                            .filter(|t| t.meta().category == cat)
                            .map(|t| t.rebase_yaw())
                            .collect();
                        if subset.is_empty() {
                            return Err(Error::invalid(format!(
                                "no traces in category {}",
                                cat.as_str()
                            )));
                        }
                        let probs = self
                            .lags_s
                            .iter()
                            .map(|&t| {
                                if t == 0.0 {
                                    viewprob::point_mass(0.0, &grid)
                                } else {
                                    viewprob::empirical_probs(&subset, t, *stride_s, &grid)
                                }
                            })
                            .collect::<Result<_>>()?;
                        Ok((format!("empirical:{}", cat.as_str()), probs))
                    })
                    .collect()
            }
        }
    }
}

/// One point of a tradeoff curve.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CurveRow {
    pub family: String,
    pub utility: String,
    pub capacity: u64,
    pub f: f64,
    pub beta: f64,
    pub tiles: usize,
    pub lag_s: f64,
    pub value: f64,
    pub levels: Vec<usize>,
}

/// Solves every cell of the grid. Rows come out ordered by family, utility,
/// penalty, capacity, β and lag, regardless of `workers`.
pub fn run_sweep(
    spec: &SweepSpec,
    traces: Option<&[HeadTrace]>,
    workers: usize,
) -> Result<Vec<CurveRow>> {
    spec.validate()?;
    let curves = spec.curves(traces)?;
    let grid = DirectionGrid::new(spec.tiles)?;

    struct Cell<'a> {
        family: &'a str,
        probs: &'a ProbVector,
        utility: &'a UtilityModel,
        f: f64,
        capacity: u64,
        beta: f64,
    }
    let mut cells = Vec::new();
    for (family, probs) in &curves {
        for utility in &spec.utilities {
            for &f in &spec.penalties {
                for &capacity in &spec.capacities {
                    for &beta in &spec.betas {
                        for p in probs {
                            cells.push(Cell {
                                family,
                                probs: p,
                                utility,
                                f,
                                capacity,
                                beta,
                            });
                        }
                    }
                }
            }
        }
    }

    let solve = |c: &Cell| -> Result<CurveRow> {
        let ladder = QualityLadder::new(spec.rates_kbps.clone(), spec.chunk_s, c.f)?;
        let inst = Instance::new(
            grid,
            &ladder,
            c.utility,
            c.probs.as_slice(),
            c.capacity,
            c.beta,
        )?;
        let report = solve_dp(&inst);
        Ok(CurveRow {
            family: c.family.to_string(),
            utility: c.utility.name().to_string(),
            capacity: c.capacity,
            f: c.f,
            beta: c.beta,
            tiles: spec.tiles,
            lag_s: c.probs.lag_s(),
            value: report.value(),
            levels: report.levels().to_vec(),
        })
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::invalid(format!("cannot start worker pool: {e}")))?;
    // indexed parallel collect keeps cell order
    pool.install(|| cells.par_iter().map(solve).collect())
}

/// Writes rows as CSV with 6-decimal values.
pub fn write_rows<W: io::Write>(rows: &[CurveRow], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record([
        "family", "utility", "capacity", "f", "beta", "tiles", "lag_s", "value", "levels",
    ])?;
    for r in rows {
        let levels: Vec<String> = r.levels.iter().map(usize::to_string).collect();
        w.write_record([
            r.family.clone(),
            r.utility.clone(),
            r.capacity.to_string(),
            format!("{:.6}", r.f),
            format!("{:.6}", r.beta),
            r.tiles.to_string(),
            format!("{:.6}", r.lag_s),
            format!("{:.6}", r.value),
            levels.join(";"),
        ])?;
    }
    w.flush().map_err(|e| Error::io("<csv output>", e))?;
    Ok(())
}
