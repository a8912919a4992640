//! Shared domain types: the quality ladder, utility models, the yaw tile grid,
//! a single chunk-scheduling [`Instance`] and the objective evaluator.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Encoding rates (kbps) of the example ladder used throughout the
/// experiment defaults.
pub const DEFAULT_LADDER_KBPS: [f64; 6] = [144.0, 268.0, 625.0, 1124.0, 2217.0, 4198.0];

/// Tolerance on `Σ p = 1` accepted by [`Instance`] validation.
pub const PROB_SUM_TOL: f64 = 1e-9;

/// Per-level encoding rates with the chunk duration and the stall penalty.
///
/// Level 0 is "nothing downloaded"; levels `1..=L` index `rates`.
#[derive(Debug, Clone, PartialEq)]
pub struct QualityLadder {
    rates: Vec<f64>,
    chunk_duration: f64,
    stall_penalty: f64,
}

impl QualityLadder {
    pub fn new(rates: Vec<f64>, chunk_duration: f64, stall_penalty: f64) -> Result<Self> {
        if rates.is_empty() {
            return Err(Error::invalid("quality ladder needs at least one rate"));
        }
        if rates.len() > 255 {
            return Err(Error::invalid("quality ladder supports at most 255 levels"));
        }
        if rates.iter().any(|q| !q.is_finite() || *q <= 0.0) {
            return Err(Error::invalid("ladder rates must be finite and > 0"));
        }
        if rates.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::invalid("ladder rates must be strictly increasing"));
        }
        if !chunk_duration.is_finite() || chunk_duration <= 0.0 {
            return Err(Error::invalid("chunk duration must be > 0"));
        }
        if !stall_penalty.is_finite() || stall_penalty < 0.0 {
            return Err(Error::invalid("stall penalty factor must be >= 0"));
        }
        Ok(QualityLadder {
            rates,
            chunk_duration,
            stall_penalty,
        })
    }

    /// The default ladder with `Δ = 1` (sizes equal the kbps values) and
    /// stall penalty `f`.
    pub fn default_with_penalty(stall_penalty: f64) -> Result<Self> {
        Self::new(DEFAULT_LADDER_KBPS.to_vec(), 1.0, stall_penalty)
    }

    /// Number of non-zero quality levels `L`.
    pub fn levels(&self) -> usize {
        self.rates.len()
    }

    pub fn rates(&self) -> &[f64] {
        &self.rates
    }

    pub fn chunk_duration(&self) -> f64 {
        self.chunk_duration
    }

    pub fn stall_penalty(&self) -> f64 {
        self.stall_penalty
    }

    /// Integer tile sizes `[0, round(q_1 Δ), ..., round(q_L Δ)]`.
    pub fn sizes(&self) -> Vec<u64> {
        std::iter::once(0)
            .chain(
                self.rates
                    .iter()
                    .map(|q| (q * self.chunk_duration).round() as u64),
            )
            .collect()
    }

    pub fn with_stall_penalty(&self, stall_penalty: f64) -> Result<Self> {
        Self::new(self.rates.clone(), self.chunk_duration, stall_penalty)
    }
}

/// Raw (unnormalized) playback utility as a function of encoding rate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum UtilityModel {
    /// `u(q) = q`
    Linear,
    /// `u(q) = √q`
    Sqrt,
    /// `u(q) = ln(1 + q / q_1)`, `q_1` the lowest ladder rate
    Log,
    /// `u(q) = b ((q/θ)^(1-a) - 1) / (1 - a)` with `a > 1`, `b > 0`, `θ > 0` (kbps).
    LargeScreen { a: f64, b: f64, theta: f64 },
}

impl Default for UtilityModel {
    fn default() -> Self {
        UtilityModel::LargeScreen {
            a: 2.0,
            b: 10.0,
            theta: 200.0,
        }
    }
}

impl UtilityModel {
    pub fn validate(&self) -> Result<()> {
        if let UtilityModel::LargeScreen { a, b, theta } = *self {
            if !(a.is_finite() && a > 1.0) {
                return Err(Error::invalid("large-screen utility needs a > 1"));
            }
            if !(b.is_finite() && b > 0.0) {
                return Err(Error::invalid("large-screen utility needs b > 0"));
            }
            if !(theta.is_finite() && theta > 0.0) {
                return Err(Error::invalid("large-screen utility needs theta > 0"));
            }
        }
        Ok(())
    }

    /// Short label used in CSV output.
    pub fn name(&self) -> &'static str {
        match self {
            UtilityModel::Linear => "linear",
            UtilityModel::Sqrt => "sqrt",
            UtilityModel::Log => "log",
            UtilityModel::LargeScreen { .. } => "large_screen",
        }
    }

    /// Raw utility of rate `q`; `lowest_rate` is `q_1` (only the log model uses it).
    pub fn raw(&self, q: f64, lowest_rate: f64) -> f64 {
        match *self {
            UtilityModel::Linear => q,
            UtilityModel::Sqrt => q.sqrt(),
            UtilityModel::Log => (q / lowest_rate).ln_1p(),
            UtilityModel::LargeScreen { a, b, theta } => {
                b * ((q / theta).powf(1.0 - a) - 1.0) / (1.0 - a)
            }
        }
    }
}

/// Normalized utility table `[u_0, u_1, ..., u_L]` with `u_L = 1` and
/// `u_0 = -f`.
pub fn build_utility_table(ladder: &QualityLadder, model: &UtilityModel) -> Result<Vec<f64>> {
    model.validate()?;
    let rates = ladder.rates();
    let q1 = rates[0];
    let raw: Vec<f64> = rates.iter().map(|&q| model.raw(q, q1)).collect();
    let top = *raw.last().expect("ladder is non-empty");
    if !(top.is_finite() && top > 0.0) {
        return Err(Error::invalid(format!(
            "{} utility of the top rate is {top}; cannot normalize",
            model.name()
        )));
    }
    let mut table = Vec::with_capacity(raw.len() + 1);
    table.push(-ladder.stall_penalty());
    table.extend(raw[..raw.len() - 1].iter().map(|r| r / top));
    table.push(1.0);
    Ok(table)
}

/// Discrete yaw directions: tile `n` covers `[θ_n, θ_{n+1})` with
/// `θ_n = -180 + n·360/N`; tile indices wrap modulo `N`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DirectionGrid {
    tiles: usize,
}

impl DirectionGrid {
    pub fn new(tiles: usize) -> Result<Self> {
        if tiles < 2 {
            return Err(Error::invalid("direction grid needs at least 2 tiles"));
        }
        Ok(DirectionGrid { tiles })
    }

    pub fn tiles(&self) -> usize {
        self.tiles
    }

    pub fn width_deg(&self) -> f64 {
        360.0 / self.tiles as f64
    }

    /// Lower edge `θ_n`; `edge(N)` is 180.
    pub fn edge(&self, n: usize) -> f64 {
        -180.0 + n as f64 * self.width_deg()
    }

    /// Tile containing `angle` (any real angle, wrapped first).
    pub fn tile_of(&self, angle: f64) -> usize {
        let a = crate::angle::wrap_deg(angle);
        let idx = ((a + 180.0) / self.width_deg()).floor() as usize;
        idx.min(self.tiles - 1)
    }
}

/// One chunk-scheduling problem.
///
/// Tables are stored per tile so that callers (the layered scheduler in
/// particular) can override sizes for individual tiles; instances built from
/// a ladder share one table across all tiles.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    probs: Vec<f64>,
    sizes: Vec<Vec<u64>>,
    utilities: Vec<Vec<f64>>,
    floors: Vec<usize>,
    capacity: u64,
    beta: f64,
}

impl Instance {
    /// Builds an instance from a ladder and utility model; all tiles share
    /// the ladder's sizes and normalized utilities.
    pub fn new(
        grid: DirectionGrid,
        ladder: &QualityLadder,
        model: &UtilityModel,
        probs: &[f64],
        capacity: u64,
        beta: f64,
    ) -> Result<Self> {
        if probs.len() != grid.tiles() {
            return Err(Error::LengthMismatch {
                what: "probability vector",
                got: probs.len(),
                expected: grid.tiles(),
            });
        }
        let utilities = build_utility_table(ladder, model)?;
        Self::from_tables(probs.to_vec(), ladder.sizes(), utilities, capacity, beta)
    }

    /// Builds an instance from explicit shared tables (`L + 1` entries each,
    /// level 0 first).
    pub fn from_tables(
        probs: Vec<f64>,
        sizes: Vec<u64>,
        utilities: Vec<f64>,
        capacity: u64,
        beta: f64,
    ) -> Result<Self> {
        let n = probs.len();
        Self::from_tile_tables(probs, vec![sizes; n], vec![utilities; n], capacity, beta)
    }

    /// Builds an instance with independent tables for each tile.
    pub fn from_tile_tables(
        probs: Vec<f64>,
        sizes: Vec<Vec<u64>>,
        utilities: Vec<Vec<f64>>,
        capacity: u64,
        beta: f64,
    ) -> Result<Self> {
        let n = probs.len();
        let inst = Instance {
            floors: vec![0; n],
            probs,
            sizes,
            utilities,
            capacity,
            beta,
        };
        inst.validate()?;
        Ok(inst)
    }

    fn validate(&self) -> Result<()> {
        let n = self.probs.len();
        if n < 2 {
            return Err(Error::invalid("instance needs at least 2 tiles"));
        }
        check_probs(&self.probs)?;
        if !(self.beta.is_finite() && (0.0..=1.0).contains(&self.beta)) {
            return Err(Error::invalid(format!(
                "beta must lie in [0, 1], got {}",
                self.beta
            )));
        }
        for (what, got) in [
            ("size tables", self.sizes.len()),
            ("utility tables", self.utilities.len()),
        ] {
            if got != n {
                return Err(Error::LengthMismatch {
                    what,
                    got,
                    expected: n,
                });
            }
        }
        let width = self.sizes[0].len();
        if width < 2 {
            return Err(Error::invalid(
                "tables need level 0 plus at least one quality level",
            ));
        }
        if width > 256 {
            return Err(Error::invalid("at most 255 quality levels are supported"));
        }
        for tile in 0..n {
            if self.sizes[tile].len() != width || self.utilities[tile].len() != width {
                return Err(Error::invalid(format!(
                    "tile {tile}: every size and utility table needs {width} entries"
                )));
            }
            if self.sizes[tile][0] != 0 {
                return Err(Error::invalid(format!(
                    "tile {tile}: level 0 must have size 0"
                )));
            }
            if self.utilities[tile].iter().any(|u| !u.is_finite()) {
                return Err(Error::invalid(format!(
                    "tile {tile}: utilities must be finite"
                )));
            }
            if self.floors[tile] >= width {
                return Err(Error::invalid(format!(
                    "tile {tile}: level floor out of range"
                )));
            }
            if self.sizes[tile][self.floors[tile]] != 0 {
                return Err(Error::invalid(format!(
                    "tile {tile}: the already-held level must cost nothing"
                )));
            }
        }
        Ok(())
    }

    pub fn tiles(&self) -> usize {
        self.probs.len()
    }

    /// Number of non-zero quality levels `L`.
    pub fn levels(&self) -> usize {
        self.sizes[0].len() - 1
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn capacity(&self) -> u64 {
        self.capacity
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn size(&self, tile: usize, level: usize) -> u64 {
        self.sizes[tile][level]
    }

    pub fn utility(&self, tile: usize, level: usize) -> f64 {
        self.utilities[tile][level]
    }

    pub fn sizes(&self, tile: usize) -> &[u64] {
        &self.sizes[tile]
    }

    pub fn utilities(&self, tile: usize) -> &[f64] {
        &self.utilities[tile]
    }

    /// Lowest level a solver may assign to `tile` (0 unless set through
    /// [`Instance::with_floors`]).
    pub fn floor(&self, tile: usize) -> usize {
        self.floors[tile]
    }

    pub fn with_capacity(&self, capacity: u64) -> Self {
        Instance {
            capacity,
            ..self.clone()
        }
    }

    pub fn with_beta(&self, beta: f64) -> Result<Self> {
        let inst = Instance {
            beta,
            ..self.clone()
        };
        inst.validate()?;
        Ok(inst)
    }

    pub fn with_probs(&self, probs: &[f64]) -> Result<Self> {
        if probs.len() != self.tiles() {
            return Err(Error::LengthMismatch {
                what: "probability vector",
                got: probs.len(),
                expected: self.tiles(),
            });
        }
        let inst = Instance {
            probs: probs.to_vec(),
            ..self.clone()
        };
        inst.validate()?;
        Ok(inst)
    }

    /// Replaces the per-tile size tables (same shape required).
    pub fn with_tile_sizes(&self, sizes: Vec<Vec<u64>>) -> Result<Self> {
        let inst = Instance {
            sizes,
            ..self.clone()
        };
        inst.validate()?;
        Ok(inst)
    }

    /// Restricts each tile to levels `>= floors[tile]`.
    pub fn with_floors(&self, floors: Vec<usize>) -> Result<Self> {
        if floors.len() != self.tiles() {
            return Err(Error::LengthMismatch {
                what: "level floors",
                got: floors.len(),
                expected: self.tiles(),
            });
        }
        let inst = Instance {
            floors,
            ..self.clone()
        };
        inst.validate()?;
        Ok(inst)
    }

    /// `Σ b_{n, levels[n]}`.
    pub fn total_size(&self, levels: &[usize]) -> u64 {
        levels
            .iter()
            .enumerate()
            .map(|(n, &l)| self.sizes[n][l])
            .sum()
    }

    /// True when `levels` respects the floors and the capacity.
    pub fn is_feasible(&self, levels: &[usize]) -> bool {
        levels.len() == self.tiles()
            && levels
                .iter()
                .zip(&self.floors)
                .all(|(&l, &fl)| l >= fl && l <= self.levels())
            && self.total_size(levels) <= self.capacity
    }
}

pub(crate) fn check_probs(probs: &[f64]) -> Result<()> {
    if probs.iter().any(|p| !p.is_finite() || *p < 0.0) {
        return Err(Error::invalid("probabilities must be finite and >= 0"));
    }
    let sum: f64 = probs.iter().sum();
    if (sum - 1.0).abs() > PROB_SUM_TOL {
        return Err(Error::invalid(format!(
            "probabilities must sum to 1 (got {sum:.12})"
        )));
    }
    Ok(())
}

/// Per-tile quality assignment plus its objective value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Selection {
    pub levels: Vec<usize>,
    pub value: f64,
}

impl Selection {
    /// Number of tiles at each level, `counts[l]`.
    pub fn level_counts(&self, levels: usize) -> Vec<usize> {
        let mut counts = vec![0; levels + 1];
        for &l in &self.levels {
            counts[l] += 1;
        }
        counts
    }
}

/// Expected utility of `levels`:
/// `(1-β) Σ p_n u_n - β Σ (p_n + p_{n+1})/2 |u_n - u_{n+1}|`, indices mod `N`.
pub fn eval_objective(levels: &[usize], inst: &Instance) -> Result<f64> {
    let n = inst.tiles();
    if levels.len() != n {
        return Err(Error::LengthMismatch {
            what: "selection",
            got: levels.len(),
            expected: n,
        });
    }
    if let Some(&bad) = levels.iter().find(|&&l| l > inst.levels()) {
        return Err(Error::invalid(format!(
            "level {bad} exceeds the ladder's {} levels",
            inst.levels()
        )));
    }
    let p = inst.probs();
    let mut expected = 0.0;
    let mut roughness = 0.0;
    for tile in 0..n {
        let next = (tile + 1) % n;
        let u = inst.utility(tile, levels[tile]);
        let u_next = inst.utility(next, levels[next]);
        expected += p[tile] * u;
        roughness += 0.5 * (p[tile] + p[next]) * (u - u_next).abs();
    }
    let beta = inst.beta();
    Ok((1.0 - beta) * expected - beta * roughness)
}
