//! Multi-timescale layered prefetching.
//!
//! A [`ModulePlan`] is an ordered list of passes. Each pass sees the tile
//! levels already held for the chunk, prices the remaining upgrades with a
//! [`SizeModel`], and solves the packing problem for its own budget and
//! probability vector. Passes are myopic: no pass looks ahead to later ones.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{eval_objective, Instance};
use crate::optimizer::{solve_dp, SolveReport};
use crate::viewprob::ProbVector;

/// Per-tile levels currently held for one chunk.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TileState(pub Vec<usize>);

impl TileState {
    pub fn empty(tiles: usize) -> Self {
        TileState(vec![0; tiles])
    }

    pub fn levels(&self) -> &[usize] {
        &self.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SizeMode {
    /// Layered coding: an upgrade costs the rate difference.
    SvcIdeal,
    /// No layering: an upgrade re-downloads the whole tile.
    Redownload,
}

/// Price of upgrading a tile from the held level `l'` to `l > l'`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SizeModel {
    pub mode: SizeMode,
    /// Layering overhead `ω ∈ [0, 1]`; ignored for re-download.
    #[serde(default)]
    pub overhead: f64,
}

impl SizeModel {
    pub const SVC_IDEAL: SizeModel = SizeModel {
        mode: SizeMode::SvcIdeal,
        overhead: 0.0,
    };

    pub const REDOWNLOAD: SizeModel = SizeModel {
        mode: SizeMode::Redownload,
        overhead: 0.0,
    };

    pub fn validate(&self) -> Result<()> {
        if !(self.overhead.is_finite() && (0.0..=1.0).contains(&self.overhead)) {
            return Err(Error::invalid(format!(
                "size-model overhead must lie in [0, 1], got {}",
                self.overhead
            )));
        }
        Ok(())
    }

    /// Effective size table for one tile holding `held`: zero up to `held`,
    /// then the upgrade price.
    pub fn upgrade_sizes(&self, base: &[u64], held: usize) -> Vec<u64> {
        base.iter()
            .enumerate()
            .map(|(l, &b)| {
                if l <= held {
                    0
                } else {
                    match self.mode {
                        SizeMode::SvcIdeal => {
                            ((1.0 + self.overhead) * (b - base[held]) as f64).round() as u64
                        }
                        SizeMode::Redownload => b,
                    }
                }
            })
            .collect()
    }
}

/// One prefetching module.
#[derive(Debug, Clone, PartialEq)]
pub struct Pass {
    /// Seconds before the playback deadline at which the pass decides.
    pub lead_s: f64,
    pub budget: u64,
    pub probs: ProbVector,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModulePlan {
    passes: Vec<Pass>,
}

impl ModulePlan {
    pub fn new(passes: Vec<Pass>) -> Result<Self> {
        if passes.is_empty() {
            return Err(Error::invalid("a plan needs at least one pass"));
        }
        if passes
            .iter()
            .any(|p| !(p.lead_s.is_finite() && p.lead_s >= 0.0))
        {
            return Err(Error::invalid("pass lead times must be finite and >= 0"));
        }
        if passes.windows(2).any(|w| w[1].lead_s >= w[0].lead_s) {
            return Err(Error::invalid(
                "pass lead times must be strictly decreasing",
            ));
        }
        let n = passes[0].probs.len();
        if passes.iter().any(|p| p.probs.len() != n) {
            return Err(Error::invalid(
                "all passes need probability vectors of equal length",
            ));
        }
        Ok(ModulePlan { passes })
    }

    pub fn passes(&self) -> &[Pass] {
        &self.passes
    }
}

/// Runs one refinement pass.
///
/// `chunk` supplies the base size and utility tables and `β`; its own
/// probabilities and capacity are replaced by `probs` and `budget`. Levels
/// below the held level are not offered: a held quality is never given up.
pub fn refine(
    state: &TileState,
    probs: &ProbVector,
    budget: u64,
    size_model: &SizeModel,
    chunk: &Instance,
) -> Result<(TileState, SolveReport)> {
    size_model.validate()?;
    if state.0.len() != chunk.tiles() {
        return Err(Error::LengthMismatch {
            what: "tile state",
            got: state.0.len(),
            expected: chunk.tiles(),
        });
    }
    if let Some(&bad) = state.0.iter().find(|&&l| l > chunk.levels()) {
        return Err(Error::invalid(format!(
            "held level {bad} exceeds the ladder"
        )));
    }
    let sizes = (0..chunk.tiles())
        .map(|n| size_model.upgrade_sizes(chunk.sizes(n), state.0[n]))
        .collect();
    let inst = chunk
        .with_probs(probs.as_slice())?
        .with_capacity(budget)
        .with_tile_sizes(sizes)?
        .with_floors(state.0.clone())?;
    let report = solve_dp(&inst);
    let next = state
        .0
        .iter()
        .zip(report.levels())
        .map(|(&held, &chosen)| held.max(chosen))
        .collect();
    Ok((TileState(next), report))
}

/// State after one pass of [`run_plan`].
#[derive(Debug, Clone, PartialEq)]
pub struct PassOutcome {
    pub pass: usize,
    pub state: TileState,
    /// Value of `state` under the final pass's probability vector.
    pub value: f64,
    /// Size actually spent on upgrades in this pass.
    pub spent: u64,
    pub report: SolveReport,
}

/// Applies every pass in order, starting from nothing downloaded.
pub fn run_plan(
    plan: &ModulePlan,
    chunk: &Instance,
    size_model: &SizeModel,
) -> Result<Vec<PassOutcome>> {
    let last_probs = &plan.passes.last().expect("plan is non-empty").probs;
    let scoring = chunk.with_probs(last_probs.as_slice())?;
    let mut state = TileState::empty(chunk.tiles());
    let mut outcomes = Vec::with_capacity(plan.passes.len());
    for (i, pass) in plan.passes.iter().enumerate() {
        let (next, report) = refine(&state, &pass.probs, pass.budget, size_model, chunk)?;
        let spent = (0..chunk.tiles())
            .filter(|&n| next.0[n] > state.0[n])
            .map(|n| size_model.upgrade_sizes(chunk.sizes(n), state.0[n])[next.0[n]])
            .sum();
        let value = eval_objective(next.levels(), &scoring)?;
        outcomes.push(PassOutcome {
            pass: i,
            state: next.clone(),
            value,
            spent,
            report,
        });
        state = next;
    }
    Ok(outcomes)
}
