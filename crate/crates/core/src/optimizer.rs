//! Exact solvers for the single-chunk tile-quality packing problem.
//!
//! [`solve_dp`] is the circular dynamic program: tile 0's level `l0` is
//! fixed, tiles `1..N` are decided one at a time while conditioning on the
//! level of the following tile, and the wrap-around pair `(N-1, 0)` closes
//! the circle. [`brute_force`] enumerates every assignment and serves as the
//! oracle; [`solve_mckp`] is the plain multiple-choice knapsack used when
//! `β = 0`.
//!
//! Tie-breaking is deterministic in all three: the smallest `l0` wins, then
//! the smallest level at tile `N-1`, then `N-2`, and so on down to tile 1.

use std::time::{Duration, Instant};

use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::model::{eval_objective, Instance, Selection};

/// Enumeration guard for [`brute_force`].
pub const BRUTE_FORCE_LIMIT: u128 = 10_000_000;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolveStats {
    /// Number of table entries the solver defines.
    pub subproblems: u64,
    #[serde(rename = "wall_time_s", serialize_with = "as_secs")]
    pub elapsed: Duration,
}

fn as_secs<S: Serializer>(d: &Duration, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_f64(d.as_secs_f64())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolveReport {
    #[serde(flatten)]
    pub selection: Selection,
    pub stats: SolveStats,
}

impl SolveReport {
    pub fn value(&self) -> f64 {
        self.selection.value
    }

    pub fn levels(&self) -> &[usize] {
        &self.selection.levels
    }
}

/// Circular DP over `(l0, l, n, c)`: the best value of tiles `0..=n` with
/// tile 0 at `l0`, tile `n+1` at `l`, and budget `c` for tiles `0..=n`.
///
/// Values for one `l0` are computed layer by layer in `n`; only the parent
/// pointers of the best `l0` so far are retained.
pub fn solve_dp(inst: &Instance) -> SolveReport {
    let started = Instant::now();
    let tiles = inst.tiles();
    let width = inst.levels() + 1;
    let cap = inst.capacity() as usize;
    let cols = cap + 1;
    let beta = inst.beta();
    let p = inst.probs();

    // index helpers: value layer [l][c], parents [n-1][l][c]
    let layer = width * cols;
    let mut prev = vec![f64::NEG_INFINITY; layer];
    let mut cur = vec![f64::NEG_INFINITY; layer];
    let mut parents = vec![0u8; (tiles - 1) * layer];
    let mut best: Option<(f64, usize, Vec<u8>)> = None;

    for l0 in inst.floor(0)..width {
        let b0 = inst.size(0, l0) as usize;
        if b0 > cap {
            continue;
        }
        let u0 = inst.utility(0, l0);

        // n = 0: only tile 0 itself, penalized against tile 1 at level l
        for l in 0..width {
            let w = (1.0 - beta) * p[0] * u0
                - beta * 0.5 * (p[0] + p[1]) * (u0 - inst.utility(1, l)).abs();
            let row = &mut prev[l * cols..(l + 1) * cols];
            row[..b0].fill(f64::NEG_INFINITY);
            row[b0..].fill(w);
        }

        for n in 1..tiles {
            let next = (n + 1) % tiles;
            let pair_w = 0.5 * (p[n] + p[next]);
            let par_layer = &mut parents[(n - 1) * layer..n * layer];
            for l in 0..width {
                let u_next = inst.utility(next, l);
                let row = &mut cur[l * cols..(l + 1) * cols];
                let par = &mut par_layer[l * cols..(l + 1) * cols];
                row.fill(f64::NEG_INFINITY);
                for lp in inst.floor(n)..width {
                    let bn = inst.size(n, lp) as usize;
                    if bn + b0 > cap {
                        continue;
                    }
                    let u = inst.utility(n, lp);
                    let w = (1.0 - beta) * p[n] * u - beta * pair_w * (u - u_next).abs();
                    let src = &prev[lp * cols..(lp + 1) * cols];
                    for c in (bn + b0)..cols {
                        let v = w + src[c - bn];
                        if v > row[c] {
                            row[c] = v;
                            par[c] = lp as u8;
                        }
                    }
                }
            }
            std::mem::swap(&mut prev, &mut cur);
        }

        // after the last layer `prev` holds n = N-1; close the circle at l = l0
        let v = prev[l0 * cols + cap];
        if v.is_finite() && best.as_ref().is_none_or(|(bv, _, _)| v > *bv) {
            match &mut best {
                Some((bv, bl, bp)) => {
                    *bv = v;
                    *bl = l0;
                    bp.copy_from_slice(&parents);
                }
                None => best = Some((v, l0, parents.clone())),
            }
        }
    }

    let (_, l0, parents) = best.expect("all-floor assignment is always feasible");
    let mut levels = vec![0; tiles];
    levels[0] = l0;
    let mut c = cap;
    let mut l = l0;
    for n in (1..tiles).rev() {
        let lp = parents[(n - 1) * layer + l * cols + c] as usize;
        levels[n] = lp;
        c -= inst.size(n, lp) as usize;
        l = lp;
    }
    // report the re-evaluated objective so callers can reproduce it bit for bit
    let value = eval_objective(&levels, inst).expect("reconstructed levels are in range");

    SolveReport {
        selection: Selection { levels, value },
        stats: SolveStats {
            subproblems: (width * width * tiles * cols) as u64,
            elapsed: started.elapsed(),
        },
    }
}

/// Number of assignments [`brute_force`] would enumerate.
pub fn assignment_count(inst: &Instance) -> u128 {
    let base = (inst.levels() + 1) as u128;
    (0..inst.tiles())
        .try_fold(1u128, |acc, _| acc.checked_mul(base))
        .unwrap_or(u128::MAX)
}

/// Exhaustive search, evaluating every feasible assignment with
/// [`eval_objective`].
pub fn brute_force(inst: &Instance) -> Result<SolveReport> {
    let total = assignment_count(inst);
    if total > BRUTE_FORCE_LIMIT {
        return Err(Error::TooLarge(total));
    }
    let started = Instant::now();
    let tiles = inst.tiles();
    let base = inst.levels() + 1;

    // odometer digits in tie-break priority: tile 0, then N-1 down to 1
    let order: Vec<usize> = std::iter::once(0).chain((1..tiles).rev()).collect();
    let mut digits = vec![0usize; tiles];
    let mut levels = vec![0usize; tiles];
    let mut best: Option<Selection> = None;
    loop {
        for (d, &tile) in digits.iter().zip(&order) {
            levels[tile] = *d;
        }
        if inst.is_feasible(&levels) {
            let v = eval_objective(&levels, inst)?;
            if best.as_ref().is_none_or(|b| v > b.value) {
                best = Some(Selection {
                    levels: levels.clone(),
                    value: v,
                });
            }
        }
        // increment least-significant digit first
        let mut pos = tiles;
        loop {
            if pos == 0 {
                let selection = best.expect("all-floor assignment is always feasible");
                return Ok(SolveReport {
                    selection,
                    stats: SolveStats {
                        subproblems: total as u64,
                        elapsed: started.elapsed(),
                    },
                });
            }
            pos -= 1;
            digits[pos] += 1;
            if digits[pos] < base {
                break;
            }
            digits[pos] = 0;
        }
    }
}

/// Multiple-choice knapsack DP over tiles and capacity; requires `β = 0`.
pub fn solve_mckp(inst: &Instance) -> Result<SolveReport> {
    if inst.beta() != 0.0 {
        return Err(Error::invalid(format!(
            "multiple-choice knapsack needs beta = 0 (got {})",
            inst.beta()
        )));
    }
    let started = Instant::now();
    let tiles = inst.tiles();
    let width = inst.levels() + 1;
    let cols = inst.capacity() as usize + 1;
    let p = inst.probs();

    // best[c] over tiles 0..n with total size <= c; tile 0 first
    let mut prev = vec![f64::NEG_INFINITY; cols];
    let mut parents = vec![0u8; tiles * cols];
    for l in inst.floor(0)..width {
        let b = inst.size(0, l) as usize;
        let v = p[0] * inst.utility(0, l);
        for c in b.min(cols)..cols {
            if v > prev[c] {
                prev[c] = v;
                parents[c] = l as u8;
            }
        }
    }
    let mut cur = vec![f64::NEG_INFINITY; cols];
    for n in 1..tiles {
        cur.fill(f64::NEG_INFINITY);
        let par = &mut parents[n * cols..(n + 1) * cols];
        for l in inst.floor(n)..width {
            let b = inst.size(n, l) as usize;
            let w = p[n] * inst.utility(n, l);
            for c in b.min(cols)..cols {
                let v = w + prev[c - b];
                if v > cur[c] {
                    cur[c] = v;
                    par[c] = l as u8;
                }
            }
        }
        std::mem::swap(&mut prev, &mut cur);
    }

    let mut levels = vec![0; tiles];
    let mut c = cols - 1;
    for n in (0..tiles).rev() {
        let l = parents[n * cols + c] as usize;
        levels[n] = l;
        c -= inst.size(n, l) as usize;
    }
    let value = eval_objective(&levels, inst)?;
    Ok(SolveReport {
        selection: Selection { levels, value },
        stats: SolveStats {
            subproblems: (tiles * cols) as u64,
            elapsed: started.elapsed(),
        },
    })
}

/// Ranges for [`random_instance`].
#[derive(Debug, Clone, PartialEq)]
pub struct RandomInstanceSpec {
    pub tiles: std::ops::RangeInclusive<usize>,
    pub levels: std::ops::RangeInclusive<usize>,
    pub max_size: u64,
    pub max_capacity: u64,
    pub betas: Vec<f64>,
    pub penalties: Vec<f64>,
}

impl Default for RandomInstanceSpec {
    fn default() -> Self {
        RandomInstanceSpec {
            tiles: 2..=6,
            levels: 1..=3,
            max_size: 500,
            max_capacity: 1500,
            betas: vec![0.0, 0.25, 0.5],
            penalties: vec![0.1, 1.0, 100.0],
        }
    }
}

/// Random instance with independent per-tile tables: sizes nondecreasing in
/// `1..=max_size`, utilities increasing up to 1 with `u_0 = -f`.
pub fn random_instance(spec: &RandomInstanceSpec, rng: &mut impl rand::Rng) -> Instance {
    let n = rng.random_range(spec.tiles.clone());
    let levels = rng.random_range(spec.levels.clone());
    let beta = spec.betas[rng.random_range(0..spec.betas.len())];
    let f = spec.penalties[rng.random_range(0..spec.penalties.len())];
    let weights: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..1.0) + 1e-3).collect();
    let total: f64 = weights.iter().sum();
    let probs = weights.iter().map(|w| w / total).collect();
    let mut sizes = Vec::with_capacity(n);
    let mut utilities = Vec::with_capacity(n);
    for _ in 0..n {
        let mut b: Vec<u64> = (0..levels)
            .map(|_| rng.random_range(1..=spec.max_size))
            .collect();
        b.sort_unstable();
        b.insert(0, 0);
        let mut u: Vec<f64> = (1..levels).map(|_| rng.random_range(-0.5..1.0)).collect();
        u.sort_by(f64::total_cmp);
        u.insert(0, -f);
        u.push(1.0);
        sizes.push(b);
        utilities.push(u);
    }
    let capacity = rng.random_range(0..=spec.max_capacity);
    Instance::from_tile_tables(probs, sizes, utilities, capacity, beta)
        .expect("generated instance is valid")
}

/// `count` instances from a ChaCha8 stream seeded with `seed`.
pub fn random_instances(spec: &RandomInstanceSpec, count: usize, seed: u64) -> Vec<Instance> {
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| random_instance(spec, &mut rng))
        .collect()
}
