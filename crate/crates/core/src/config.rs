//! TOML configuration for solves, scheduler plans and sweeps.
//!
//! Every table rejects unknown keys. Omitted keys take the experiment
//! defaults: the six-rung ladder, 6 tiles, `β = 0.001`, stall penalty 1,
//! capacity 2500 and the large-screen utility.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::model::{DirectionGrid, Instance, QualityLadder, UtilityModel, DEFAULT_LADDER_KBPS};
use crate::scheduler::{ModulePlan, Pass, SizeModel};
use crate::sweep::{Family, SweepSpec};
use crate::trace::{Category, HeadTrace};
use crate::viewprob::{self, ProbVector, Provenance};

pub const DEFAULT_TILES: usize = 6;
pub const DEFAULT_BETA: f64 = 0.001;
pub const DEFAULT_STALL_PENALTY: f64 = 1.0;
pub const DEFAULT_CAPACITY: u64 = 2500;
pub const DEFAULT_SIGMA0_DEG: f64 = 25.0;

fn default_rates() -> Vec<f64> {
    DEFAULT_LADDER_KBPS.to_vec()
}
fn default_chunk_s() -> f64 {
    1.0
}
fn default_penalty() -> f64 {
    DEFAULT_STALL_PENALTY
}
fn default_beta() -> f64 {
    DEFAULT_BETA
}
fn default_tiles() -> usize {
    DEFAULT_TILES
}
fn default_capacity() -> u64 {
    DEFAULT_CAPACITY
}
fn default_sigma0() -> f64 {
    DEFAULT_SIGMA0_DEG
}
fn default_stride() -> f64 {
    viewprob::DEFAULT_STRIDE_S
}

/// Per-chunk parameters shared by every config kind.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChunkConfig {
    #[serde(default = "default_rates")]
    pub rates_kbps: Vec<f64>,
    #[serde(default = "default_chunk_s")]
    pub chunk_s: f64,
    #[serde(default = "default_penalty")]
    pub stall_penalty: f64,
    #[serde(default = "default_beta")]
    pub beta: f64,
    #[serde(default = "default_tiles", alias = "n")]
    pub tiles: usize,
    #[serde(default)]
    pub utility: UtilityModel,
}

impl Default for ChunkConfig {
    fn default() -> Self {
        ChunkConfig {
            rates_kbps: default_rates(),
            chunk_s: default_chunk_s(),
            stall_penalty: default_penalty(),
            beta: default_beta(),
            tiles: default_tiles(),
            utility: UtilityModel::default(),
        }
    }
}

impl ChunkConfig {
    pub fn ladder(&self) -> Result<QualityLadder> {
        QualityLadder::new(self.rates_kbps.clone(), self.chunk_s, self.stall_penalty)
    }

    pub fn grid(&self) -> Result<DirectionGrid> {
        DirectionGrid::new(self.tiles)
    }

    pub fn validate(&self) -> Result<()> {
        self.ladder()?;
        self.grid()?;
        self.utility.validate()?;
        if !(self.beta.is_finite() && (0.0..=1.0).contains(&self.beta)) {
            return Err(Error::Config(format!(
                "beta must lie in [0, 1], got {}",
                self.beta
            )));
        }
        Ok(())
    }

    /// Instance for `probs` and `capacity`, using `tables` instead of the
    /// ladder when given.
    pub fn instance(
        &self,
        probs: &ProbVector,
        capacity: u64,
        tables: Option<&TablesConfig>,
    ) -> Result<Instance> {
        match tables {
            Some(t) => Instance::from_tables(
                probs.as_slice().to_vec(),
                t.sizes.clone(),
                t.utilities.clone(),
                capacity,
                self.beta,
            ),
            None => Instance::new(
                self.grid()?,
                &self.ladder()?,
                &self.utility,
                probs.as_slice(),
                capacity,
                self.beta,
            ),
        }
    }
}

/// Explicit per-level tables (level 0 first) replacing the ladder.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TablesConfig {
    pub sizes: Vec<u64>,
    pub utilities: Vec<f64>,
}

/// Where a probability vector comes from.
#[derive(Debug, Clone, PartialEq, Default, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum ProbSpec {
    Explicit {
        values: Vec<f64>,
    },
    #[default]
    Uniform,
    WrappedGaussian {
        sigma_deg: f64,
    },
    PointMass {
        angle_deg: f64,
    },
    /// `tile_index,probability` CSV, relative to the config file.
    Csv {
        path: PathBuf,
    },
    /// Pooled yaw change of the supplied traces over `lag_s`.
    Empirical {
        lag_s: f64,
        #[serde(default = "default_stride")]
        stride_s: f64,
    },
}

impl ProbSpec {
    pub fn resolve(
        &self,
        grid: &DirectionGrid,
        base_dir: &Path,
        traces: Option<&[HeadTrace]>,
    ) -> Result<ProbVector> {
        let p = match self {
            ProbSpec::Explicit { values } => {
                ProbVector::new(values.clone(), 0.0, Provenance::Explicit)?
            }
            ProbSpec::Uniform => viewprob::uniform(grid),
            ProbSpec::WrappedGaussian { sigma_deg } => {
                viewprob::wrapped_gaussian(*sigma_deg, grid)?
            }
            ProbSpec::PointMass { angle_deg } => viewprob::point_mass(*angle_deg, grid)?,
            ProbSpec::Csv { path } => {
                let full = base_dir.join(path);
                let file = std::fs::File::open(&full).map_err(|e| Error::io(&full, e))?;
                ProbVector::from_csv_reader(file)?
            }
            ProbSpec::Empirical { lag_s, stride_s } => {
                let traces = traces
                    .filter(|t| !t.is_empty())
                    .ok_or_else(|| Error::invalid("empirical probabilities need traces"))?;
                let rebased: Vec<HeadTrace> = traces.iter().map(HeadTrace::rebase_yaw).collect();
                viewprob::empirical_probs(&rebased, *lag_s, *stride_s, grid)?
            }
        };
        if p.len() != grid.tiles() {
            return Err(Error::LengthMismatch {
                what: "probability vector",
                got: p.len(),
                expected: grid.tiles(),
            });
        }
        Ok(p)
    }
}

fn parse<T: for<'de> Deserialize<'de>>(text: &str) -> Result<T> {
    toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

fn base_dir(path: &Path) -> PathBuf {
    path.parent().map(Path::to_path_buf).unwrap_or_default()
}

/// A single solve.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolveConfig {
    #[serde(default = "default_capacity")]
    pub capacity: u64,
    #[serde(default)]
    pub chunk: ChunkConfig,
    #[serde(default)]
    pub probs: ProbSpec,
    pub tables: Option<TablesConfig>,
}

impl SolveConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: SolveConfig = parse(text)?;
        cfg.chunk.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<(Self, PathBuf)> {
        Ok((Self::from_toml(&read(path)?)?, base_dir(path)))
    }

    pub fn instance(&self, base_dir: &Path, traces: Option<&[HeadTrace]>) -> Result<Instance> {
        let probs = self.probs.resolve(&self.chunk.grid()?, base_dir, traces)?;
        self.chunk
            .instance(&probs, self.capacity, self.tables.as_ref())
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PassConfig {
    pub lead_s: f64,
    pub budget: u64,
    #[serde(default)]
    pub probs: ProbSpec,
}

/// A scheduler plan.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlanConfig {
    #[serde(default)]
    pub chunk: ChunkConfig,
    #[serde(default = "default_size_model")]
    pub size_model: SizeModel,
    pub tables: Option<TablesConfig>,
    pub passes: Vec<PassConfig>,
}

fn default_size_model() -> SizeModel {
    SizeModel::SVC_IDEAL
}

impl PlanConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: PlanConfig = parse(text)?;
        cfg.chunk.validate()?;
        cfg.size_model.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<(Self, PathBuf)> {
        Ok((Self::from_toml(&read(path)?)?, base_dir(path)))
    }

    /// The plan plus the chunk instance (its own capacity and
    /// probabilities are placeholders replaced by every pass).
    pub fn build(
        &self,
        base_dir: &Path,
        traces: Option<&[HeadTrace]>,
    ) -> Result<(ModulePlan, Instance)> {
        let grid = self.chunk.grid()?;
        let passes = self
            .passes
            .iter()
            .map(|p| {
                Ok(Pass {
                    lead_s: p.lead_s,
                    budget: p.budget,
                    probs: p.probs.resolve(&grid, base_dir, traces)?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let plan = ModulePlan::new(passes)?;
        let first = &plan.passes()[0];
        let chunk = self
            .chunk
            .instance(&first.probs, first.budget, self.tables.as_ref())?;
        Ok((plan, chunk))
    }
}

/// Probability family of a sweep, as written in TOML.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum FamilyConfig {
    /// Synthetic: wrapped normal with `σ(T) = sigma0_deg · √T`.
    WrappedGaussian {
        #[serde(default = "default_sigma0")]
        sigma0_deg: f64,
    },
    Uniform,
    /// `p(T_0) = initial`, `p(T_{i+1}) = smooth(p(T_i), kernel)`.
    Convolution {
        kernel: Vec<f64>,
        initial: Vec<f64>,
    },
    /// Measured from traces, one curve per category.
    Empirical {
        #[serde(default = "default_stride")]
        stride_s: f64,
        categories: Option<Vec<Category>>,
    },
}

impl Default for FamilyConfig {
    fn default() -> Self {
        FamilyConfig::WrappedGaussian {
            sigma0_deg: DEFAULT_SIGMA0_DEG,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepTable {
    pub lags_s: Vec<f64>,
    pub capacities: Option<Vec<u64>>,
    pub betas: Option<Vec<f64>>,
    pub penalties: Option<Vec<f64>>,
    pub utilities: Option<Vec<UtilityModel>>,
    #[serde(default)]
    pub family: FamilyConfig,
    pub workers: Option<usize>,
}

/// A tradeoff sweep.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    #[serde(default)]
    pub chunk: ChunkConfig,
    pub sweep: SweepTable,
}

impl SweepConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: SweepConfig = parse(text)?;
        cfg.chunk.validate()?;
        cfg.spec()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml(&read(path)?)
    }

    /// Resolves omitted grids to the single chunk value.
    pub fn spec(&self) -> Result<SweepSpec> {
        let s = &self.sweep;
        let family = match &s.family {
            FamilyConfig::WrappedGaussian { sigma0_deg } => Family::WrappedGaussian {
                sigma0_deg: *sigma0_deg,
            },
            FamilyConfig::Uniform => Family::Uniform,
            FamilyConfig::Convolution { kernel, initial } => Family::Convolution {
                kernel: ProbVector::new(kernel.clone(), 0.0, Provenance::Explicit)?,
                initial: ProbVector::new(initial.clone(), 0.0, Provenance::Explicit)?,
            },
            FamilyConfig::Empirical {
                stride_s,
                categories,
            } => Family::Empirical {
                stride_s: *stride_s,
                categories: categories.clone(),
            },
        };
        let spec = SweepSpec {
            rates_kbps: self.chunk.rates_kbps.clone(),
            chunk_s: self.chunk.chunk_s,
            tiles: self.chunk.tiles,
            lags_s: s.lags_s.clone(),
            capacities: s
                .capacities
                .clone()
                .unwrap_or_else(|| vec![DEFAULT_CAPACITY]),
            betas: s.betas.clone().unwrap_or_else(|| vec![self.chunk.beta]),
            penalties: s
                .penalties
                .clone()
                .unwrap_or_else(|| vec![self.chunk.stall_penalty]),
            utilities: s
                .utilities
                .clone()
                .unwrap_or_else(|| vec![self.chunk.utility]),
            family,
        };
        spec.validate()?;
        Ok(spec)
    }
}
