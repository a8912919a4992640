//! Viewing-direction-aware tile prefetching for 360° video.
//!
//! The crate picks one quality level per yaw tile of a video chunk so that
//! expected playback utility is maximal under a download budget, given the
//! probability that the viewer looks at each tile when the chunk plays.
//!
//! - [`model`]: ladders, utilities, tiles and the objective.
//! - [`viewprob`]: turning yaw-change distributions into tile probabilities.
//! - [`optimizer`]: exact circular DP, MCKP and brute-force solvers.
//! - [`scheduler`]: multi-pass layered refinement of a chunk.
//! - [`trace`] and [`analytics`]: head-movement traces and their statistics.
//! - [`config`] and [`sweep`]: TOML experiment descriptions and sweeps.

pub mod analytics;
pub mod angle;
pub mod config;
pub mod error;
pub mod model;
pub mod optimizer;
pub mod scheduler;
pub mod sweep;
pub mod trace;
pub mod viewprob;

pub use error::{Error, Result};
pub use model::{eval_objective, DirectionGrid, Instance, QualityLadder, Selection, UtilityModel};
pub use optimizer::{brute_force, solve_dp, solve_mckp, SolveReport};
pub use scheduler::{run_plan, ModulePlan, Pass, SizeModel, TileState};
pub use trace::HeadTrace;
pub use viewprob::ProbVector;
