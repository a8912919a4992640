#![allow(dead_code)]

use proptest::prelude::*;
use tilefetch::Instance;

/// Small instances with independent per-tile tables.
pub fn instance(
    max_tiles: usize,
    max_levels: usize,
    max_size: u64,
    max_capacity: u64,
) -> impl Strategy<Value = Instance> {
    (2..=max_tiles, 1..=max_levels)
        .prop_flat_map(move |(n, l)| {
            let tile = (
                prop::collection::vec(1..=max_size, l),
                prop::collection::vec(-0.5f64..1.0, l - 1),
            );
            (
                prop::collection::vec(0.001f64..1.0, n),
                prop::collection::vec(tile, n),
                prop::sample::select(vec![0.1, 1.0, 100.0]),
                0..=max_capacity,
                prop::sample::select(vec![0.0, 0.25, 0.5, 1.0]),
            )
        })
        .prop_map(|(w, tiles, f, capacity, beta)| build(w, tiles, f, capacity, beta))
}

pub fn build(
    weights: Vec<f64>,
    tiles: Vec<(Vec<u64>, Vec<f64>)>,
    f: f64,
    capacity: u64,
    beta: f64,
) -> Instance {
    let total: f64 = weights.iter().sum();
    let probs = weights.iter().map(|w| w / total).collect();
    let (sizes, utilities) = tiles
        .into_iter()
        .map(|(mut b, mut u)| {
            b.sort_unstable();
            b.insert(0, 0);
            u.sort_by(f64::total_cmp);
            u.insert(0, -f);
            u.push(1.0);
            (b, u)
        })
        .unzip();
    Instance::from_tile_tables(probs, sizes, utilities, capacity, beta).unwrap()
}

/// Instance rotated by `k` tiles: tile `n` of the result is tile `n - k`.
pub fn rotate(inst: &Instance, k: usize) -> Instance {
    let n = inst.tiles();
    let src = |i: usize| (i + n - k % n) % n;
    Instance::from_tile_tables(
        (0..n).map(|i| inst.probs()[src(i)]).collect(),
        (0..n).map(|i| inst.sizes(src(i)).to_vec()).collect(),
        (0..n).map(|i| inst.utilities(src(i)).to_vec()).collect(),
        inst.capacity(),
        inst.beta(),
    )
    .unwrap()
}
