//! Brute-force reference solutions for small equality-form LPs.
//!
//! Every basic feasible solution of `A z = b, z ≥ 0` is found by trying all
//! column subsets of size `rank(A)`. The optimum of a bounded LP is attained
//! at one of them, so the best vertex value is the LP value. Nothing here
//! shares code with the simplex solver under test.

#![allow(dead_code, clippy::needless_range_loop)]

use motex_core::{CostSpec, DiscreteMeasure};

const PIVOT_TOL: f64 = 1e-10;
const FEAS_TOL: f64 = 1e-9;

/// Row-reduces `a | b` and returns the independent rows (an equivalent
/// system of full row rank), or `None` if the system is inconsistent.
fn independent_rows(a: &[Vec<f64>], b: &[f64]) -> Option<(Vec<Vec<f64>>, Vec<f64>)> {
    let cols = a.first().map_or(0, Vec::len);
    let mut rows: Vec<Vec<f64>> = a
        .iter()
        .zip(b)
        .map(|(r, &bi)| {
            let mut r = r.clone();
            r.push(bi);
            r
        })
        .collect();
    let mut rank = 0;
    for col in 0..cols {
        let Some(p) = (rank..rows.len()).max_by(|&x, &y| rows[x][col].abs().total_cmp(&rows[y][col].abs())) else {
            break;
        };
        if rows[p][col].abs() < PIVOT_TOL {
            continue;
        }
        rows.swap(rank, p);
        let pivot = rows[rank].clone();
        for (k, r) in rows.iter_mut().enumerate() {
            if k != rank {
                let f = r[col] / pivot[col];
                if f != 0.0 {
                    for (x, y) in r.iter_mut().zip(&pivot) {
                        *x -= f * y;
                    }
                }
            }
        }
        rank += 1;
    }
    if rows[rank..].iter().any(|r| r[cols].abs() > 1e-9) {
        return None;
    }
    rows.truncate(rank);
    let rhs = rows.iter_mut().map(|r| r.pop().unwrap()).collect();
    Some((rows, rhs))
}

/// Solves the square system `m x = r` by Gaussian elimination with partial
/// pivoting; `None` if singular.
fn solve_square(mut m: Vec<Vec<f64>>, mut r: Vec<f64>) -> Option<Vec<f64>> {
    let k = r.len();
    for c in 0..k {
        let p = (c..k).max_by(|&x, &y| m[x][c].abs().total_cmp(&m[y][c].abs()))?;
        if m[p][c].abs() < PIVOT_TOL {
            return None;
        }
        m.swap(c, p);
        r.swap(c, p);
        for row in c + 1..k {
            let f = m[row][c] / m[c][c];
            for col in c..k {
                m[row][col] -= f * m[c][col];
            }
            r[row] -= f * r[c];
        }
    }
    let mut x = vec![0.0; k];
    for c in (0..k).rev() {
        let s: f64 = (c + 1..k).map(|j| m[c][j] * x[j]).sum();
        x[c] = (r[c] - s) / m[c][c];
    }
    Some(x)
}

fn next_combination(idx: &mut [usize], n: usize) -> bool {
    let k = idx.len();
    for i in (0..k).rev() {
        if idx[i] < n - k + i {
            idx[i] += 1;
            for j in i + 1..k {
                idx[j] = idx[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

/// Best objective over all basic feasible solutions of
/// `max c·z, A z = b, z ≥ 0`, with the maximizing vertex. `None` when there
/// is no feasible vertex.
pub fn vertex_max(a: &[Vec<f64>], b: &[f64], c: &[f64]) -> Option<(f64, Vec<f64>)> {
    let (rows, rhs) = independent_rows(a, b)?;
    let k = rows.len();
    let n = c.len();
    if k == 0 {
        // Every z ≥ 0 is feasible; the zero vertex is the only one.
        return Some((0.0, vec![0.0; n]));
    }
    let mut idx: Vec<usize> = (0..k).collect();
    let mut best: Option<(f64, Vec<f64>)> = None;
    loop {
        let basis = rows.iter().map(|r| idx.iter().map(|&j| r[j]).collect()).collect();
        if let Some(zb) = solve_square(basis, rhs.clone()) {
            if zb.iter().all(|&v| v >= -FEAS_TOL) {
                let mut z = vec![0.0; n];
                for (&j, &v) in idx.iter().zip(&zb) {
                    z[j] = v;
                }
                let value: f64 = z.iter().zip(c).map(|(a, b)| a * b).sum();
                if best.as_ref().is_none_or(|b| value > b.0) {
                    best = Some((value, z));
                }
            }
        }
        if !next_combination(&mut idx, n) {
            break;
        }
    }
    best
}

/// Value of the single-plan martingale transport LP with exercise fractions
/// `s`, built directly from the marginals.
pub fn fixed_exercise_value(mu: &DiscreteMeasure, nu: &DiscreteMeasure, cost: &CostSpec, s: &[f64]) -> f64 {
    let (m, n) = (mu.len(), nu.len());
    let (xs, ys) = (mu.atoms(), nu.atoms());
    let mut a = vec![vec![0.0; m * n]; 2 * m + n];
    let mut c = vec![0.0; m * n];
    for i in 0..m {
        let stop = cost.evaluate(1, xs[i], xs[i]).unwrap();
        for j in 0..n {
            let col = i * n + j;
            a[i][col] = 1.0;
            a[m + j][col] = 1.0;
            a[m + n + i][col] = ys[j] - xs[i];
            c[col] = s[i] * stop + (1.0 - s[i]) * cost.evaluate(2, xs[i], ys[j]).unwrap();
        }
    }
    let mut b = mu.weights().to_vec();
    b.extend_from_slice(nu.weights());
    b.extend(std::iter::repeat_n(0.0, m));
    vertex_max(&a, &b, &c)
        .expect("marginals in convex order are feasible")
        .0
}

/// Exact `P_c` as the best pure strategy, each scored by [`vertex_max`].
pub fn pure_strategy_value(mu: &DiscreteMeasure, nu: &DiscreteMeasure, cost: &CostSpec) -> f64 {
    let m = mu.len();
    (0..1u32 << m)
        .map(|code| {
            let s: Vec<f64> = (0..m).map(|i| ((code >> i) & 1) as f64).collect();
            fixed_exercise_value(mu, nu, cost, &s)
        })
        .fold(f64::NEG_INFINITY, f64::max)
}
