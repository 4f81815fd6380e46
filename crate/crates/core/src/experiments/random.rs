use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::measures::DiscreteMeasure;

/// How far each μ-atom is spread onto the ν-grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairShape {
    /// 0 snaps every μ-atom onto the grid and keeps it there, so `ν = μ`.
    /// Otherwise each kernel uses grid points up to `spread` steps beyond the
    /// two neighbours bracketing the atom.
    pub spread: usize,
    /// Mix two independent two-point kernels per atom.
    pub multi_point: bool,
}

impl Default for PairShape {
    fn default() -> Self {
        Self {
            spread: 2,
            multi_point: true,
        }
    }
}

/// Draws `(μ, ν)` with `μ ⪯_c ν` by pushing a random μ through random
/// mean-preserving kernels onto a shared ν-grid of `n` points. `μ` has at most
/// `m` atoms and `ν` at most `n` (grid points receiving no mass are dropped).
/// The stream is ChaCha8 seeded with `seed`, so pairs are reproducible.
pub fn random_convex_pair(seed: u64, m: usize, n: usize, shape: PairShape) -> (DiscreteMeasure, DiscreteMeasure) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (m, n) = (m.max(1), n.max(1));

    let mut grid = Vec::with_capacity(n);
    let mut y = rng.random_range(-1.0..1.0);
    for _ in 0..n {
        grid.push(y);
        y += rng.random_range(0.25..1.0);
    }

    let mut mu_pairs = Vec::with_capacity(m);
    let mut nu_pairs = Vec::new();
    for _ in 0..m {
        let w = rng.random_range(0.1..1.0);
        if shape.spread == 0 || n == 1 {
            let x = grid[rng.random_range(0..n)];
            mu_pairs.push((x, w));
            nu_pairs.push((x, w));
            continue;
        }
        let x = rng.random_range(grid[0]..grid[n - 1]);
        // grid[left] ≤ x < grid[left + 1]
        let left = grid.partition_point(|&g| g <= x) - 1;
        let kernels = if shape.multi_point { 2 } else { 1 };
        let mut share = 1.0;
        for k in 0..kernels {
            let part = if k + 1 == kernels {
                share
            } else {
                rng.random_range(0.2..0.8)
            };
            share -= part;
            let a = left.saturating_sub(rng.random_range(0..shape.spread));
            let b = (left + 1 + rng.random_range(0..shape.spread)).min(n - 1);
            let (ya, yb) = (grid[a], grid[b]);
            let pa = (yb - x) / (yb - ya);
            nu_pairs.push((ya, w * part * pa));
            nu_pairs.push((yb, w * part * (1.0 - pa)));
        }
        mu_pairs.push((x, w));
    }

    let total: f64 = mu_pairs.iter().map(|p| p.1).sum();
    let scale = |pairs: Vec<(f64, f64)>| pairs.into_iter().map(move |(x, w)| (x, w / total));
    let mu = DiscreteMeasure::from_pairs(scale(mu_pairs)).expect("finite positive weights");
    let nu = DiscreteMeasure::from_pairs(scale(nu_pairs)).expect("finite positive weights");
    (mu, nu)
}
