//! The unrelaxed problem: one martingale plan `π` shared by both exercise
//! components.
//!
//! With `γ_1 = s·π` and `γ_2 = (1 - s)·π` row-wise, the value for a fixed
//! split is a single transport LP against `s_i c_1(x_i) + (1 - s_i) c_2(x_i, y_j)`.
//! For fixed `π` the objective is affine in each `s_i`, so the supremum over
//! splits is reached at a pure strategy and enumerating `{0, 1}^m` is exact.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{require_order, ExerciseStrategy, TransportPlan};
use crate::costs::CostSpec;
use crate::error::{Error, Result};
use crate::lp::{LinearProgram, LpStatus, Simplex, Tolerances};
use crate::measures::DiscreteMeasure;

pub const DEFAULT_MAX_ATOMS: usize = 16;

#[derive(Debug, Clone, PartialEq)]
pub struct FixedExerciseResult {
    pub value: f64,
    /// `(γ_1, γ_2) = (s·π, (1 - s)·π)`.
    pub plan: TransportPlan,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnumerationResult {
    pub value: f64,
    pub strategy: ExerciseStrategy,
    pub plan: TransportPlan,
    /// Pure strategies whose value is within the gap tolerance of the best.
    pub ties: usize,
    pub lp_solves: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AlternatingOptions {
    pub restarts: usize,
    pub max_iters: usize,
    pub seed: u64,
}

impl Default for AlternatingOptions {
    fn default() -> Self {
        Self {
            restarts: 8,
            max_iters: 50,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AlternatingResult {
    pub value: f64,
    pub strategy: ExerciseStrategy,
    pub plan: TransportPlan,
    pub iterations: usize,
    pub lp_solves: usize,
}

/// Single-plan martingale transport LP with the blended payoff of `strategy`.
/// Column `i·n + j` is `π(x_i, y_j)`; rows are the two marginals and one
/// barycenter row per μ-atom.
pub fn fixed_exercise_program(
    mu: &DiscreteMeasure,
    nu: &DiscreteMeasure,
    cost: &CostSpec,
    strategy: &ExerciseStrategy,
) -> Result<LinearProgram> {
    let grid = ExerciseGrid::new(mu, nu, cost)?;
    grid.check_strategy(strategy)?;
    Ok(grid.program(&strategy.s))
}

/// `c_1` on μ-atoms and `c_2` on the grid, evaluated once.
struct ExerciseGrid<'a> {
    mu: &'a DiscreteMeasure,
    nu: &'a DiscreteMeasure,
    c1: Vec<f64>,
    c2: Vec<f64>,
}

impl<'a> ExerciseGrid<'a> {
    fn new(mu: &'a DiscreteMeasure, nu: &'a DiscreteMeasure, cost: &CostSpec) -> Result<Self> {
        cost.require_american()?;
        let c1 = mu
            .atoms()
            .iter()
            .map(|&x| cost.evaluate(1, x, x))
            .collect::<Result<Vec<_>>>()?;
        let c2 = cost.grid(2, mu, nu)?;
        Ok(Self { mu, nu, c1, c2 })
    }

    fn m(&self) -> usize {
        self.mu.len()
    }

    fn n(&self) -> usize {
        self.nu.len()
    }

    fn check_strategy(&self, strategy: &ExerciseStrategy) -> Result<()> {
        if strategy.len() != self.m() {
            return Err(Error::GridMismatch(format!(
                "strategy has {} entries for {} atoms",
                strategy.len(),
                self.m()
            )));
        }
        Ok(())
    }

    fn blended(&self, i: usize, j: usize, s: f64) -> f64 {
        s * self.c1[i] + (1.0 - s) * self.c2[i * self.n() + j]
    }

    fn program(&self, s: &[f64]) -> LinearProgram {
        let (m, n) = (self.m(), self.n());
        let objective = (0..m * n).map(|k| self.blended(k / n, k % n, s[k / n])).collect();
        let mut rhs = Vec::with_capacity(2 * m + n);
        rhs.extend_from_slice(self.mu.weights());
        rhs.extend_from_slice(self.nu.weights());
        rhs.extend(core::iter::repeat_n(0.0, m));
        let mut lp = LinearProgram::new(objective, rhs);
        for (i, &x) in self.mu.atoms().iter().enumerate() {
            for (j, &y) in self.nu.atoms().iter().enumerate() {
                let col = i * n + j;
                lp.push(i, col, 1.0);
                lp.push(m + j, col, 1.0);
                lp.push(m + n + i, col, y - x);
            }
        }
        lp
    }

    fn session(&self, s: &[f64], tol: Tolerances) -> Result<Session<'_, 'a>> {
        let simplex = Simplex::new(&self.program(s), tol)?;
        Ok(Session {
            grid: self,
            simplex,
            solves: 0,
        })
    }

    fn plan(&self, pi: &[f64], s: &[f64]) -> Result<TransportPlan> {
        let n = self.n();
        let mut g1 = vec![0.0; pi.len()];
        let mut g2 = vec![0.0; pi.len()];
        for (k, &p) in pi.iter().enumerate() {
            let si = s[k / n];
            g1[k] = si * p;
            g2[k] = (1.0 - si) * p;
        }
        TransportPlan::new(self.mu.atoms().to_vec(), self.nu.atoms().to_vec(), vec![g1, g2])
    }

    /// Pure best response to a plan: exercise where `c_1(x_i)` beats the
    /// kernel average of `c_2`; ties exercise.
    fn best_response(&self, pi: &[f64], tie_tol: f64) -> Vec<f64> {
        let n = self.n();
        (0..self.m())
            .map(|i| {
                let row = &pi[i * n..(i + 1) * n];
                let mass: f64 = row.iter().sum();
                let cont: f64 = row
                    .iter()
                    .zip(&self.c2[i * n..(i + 1) * n])
                    .map(|(p, c)| p * c)
                    .sum::<f64>()
                    / mass;
                if self.c1[i] >= cont - tie_tol {
                    1.0
                } else {
                    0.0
                }
            })
            .collect()
    }
}

/// A simplex session kept warm across strategy changes; only the objective
/// moves, so every re-solve starts from the previous optimal basis.
struct Session<'g, 'a> {
    grid: &'g ExerciseGrid<'a>,
    simplex: Simplex,
    solves: usize,
}

impl Session<'_, '_> {
    fn set_row(&mut self, i: usize, s: f64) {
        let n = self.grid.n();
        for j in 0..n {
            self.simplex.set_cost(i * n + j, self.grid.blended(i, j, s));
        }
    }

    fn set_strategy(&mut self, s: &[f64]) {
        for (i, &si) in s.iter().enumerate() {
            self.set_row(i, si);
        }
    }

    fn solve(&mut self) -> Result<(f64, Vec<f64>)> {
        self.solves += 1;
        let sol = self.simplex.solve()?;
        if sol.status != LpStatus::Optimal {
            return Err(Error::Internal(format!(
                "fixed-exercise program reported {:?} for marginals in convex order",
                sol.status
            )));
        }
        Ok((sol.objective, sol.primal))
    }
}

/// `P_c(μ1)` for the split given by `strategy`.
pub fn solve_fixed_exercise(
    mu: &DiscreteMeasure,
    nu: &DiscreteMeasure,
    cost: &CostSpec,
    strategy: &ExerciseStrategy,
    tol: Tolerances,
) -> Result<FixedExerciseResult> {
    let grid = ExerciseGrid::new(mu, nu, cost)?;
    require_order(mu, nu)?;
    grid.check_strategy(strategy)?;
    let (value, pi) = grid.session(&strategy.s, tol)?.solve()?;
    Ok(FixedExerciseResult {
        value,
        plan: grid.plan(&pi, &strategy.s)?,
    })
}

/// Exact `P_c` as the best of all `2^m` pure strategies.
///
/// Strategies are visited in Gray-code order so consecutive LPs differ in one
/// row of the objective. Among strategies within the gap tolerance of the
/// best value the one with the lowest bit code wins (bit `i` = exercise at
/// μ-atom `i`).
pub fn solve_pure_enumeration(
    mu: &DiscreteMeasure,
    nu: &DiscreteMeasure,
    cost: &CostSpec,
    max_atoms: usize,
    tol: Tolerances,
) -> Result<EnumerationResult> {
    let grid = ExerciseGrid::new(mu, nu, cost)?;
    require_order(mu, nu)?;
    let m = grid.m();
    if m > max_atoms || m >= 63 {
        return Err(Error::TooManyAtoms {
            atoms: m,
            limit: max_atoms.min(62),
        });
    }

    let total = 1u64 << m;
    let mut values = vec![f64::NEG_INFINITY; total as usize];
    let mut s = vec![0.0; m];
    let mut session = grid.session(&s, tol)?;
    for k in 0..total {
        if k > 0 {
            let flip = k.trailing_zeros() as usize;
            s[flip] = 1.0 - s[flip];
            session.set_row(flip, s[flip]);
        }
        let code = k ^ (k >> 1);
        values[code as usize] = session.solve()?.0;
    }

    let best = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let cutoff = best - tol.gap_for(best);
    let ties = values.iter().filter(|&&v| v >= cutoff).count();
    let code = values
        .iter()
        .position(|&v| v >= cutoff)
        .expect("the maximum is always within the cutoff") as u64;

    let strategy = ExerciseStrategy::from_bits(code, m);
    session.set_strategy(&strategy.s);
    let (value, pi) = session.solve()?;
    Ok(EnumerationResult {
        value,
        plan: grid.plan(&pi, &strategy.s)?,
        strategy,
        ties,
        lp_solves: session.solves,
    })
}

/// Lower bound on `P_c` by alternating between the best plan for a fixed
/// strategy and the best pure strategy for a fixed plan.
///
/// Restart 0 starts from "always exercise", restart 1 from "never exercise",
/// later restarts from pure strategies drawn from a ChaCha8 stream seeded
/// with `options.seed`. Each run stops once the value no longer improves by
/// more than the gap tolerance, the strategy is a fixed point, or
/// `max_iters` plans have been solved.
pub fn solve_alternating(
    mu: &DiscreteMeasure,
    nu: &DiscreteMeasure,
    cost: &CostSpec,
    options: AlternatingOptions,
    tol: Tolerances,
) -> Result<AlternatingResult> {
    let grid = ExerciseGrid::new(mu, nu, cost)?;
    require_order(mu, nu)?;
    let m = grid.m();
    let mut rng = ChaCha8Rng::seed_from_u64(options.seed);
    let mut session = grid.session(&vec![1.0; m], tol)?;

    let mut best: Option<(f64, Vec<f64>, Vec<f64>)> = None;
    let mut iterations = 0;
    for restart in 0..options.restarts.max(1) {
        let mut s: Vec<f64> = match restart {
            0 => vec![1.0; m],
            1 => vec![0.0; m],
            _ => (0..m).map(|_| if rng.random_bool(0.5) { 1.0 } else { 0.0 }).collect(),
        };
        let mut previous = f64::NEG_INFINITY;
        for _ in 0..options.max_iters.max(1) {
            iterations += 1;
            session.set_strategy(&s);
            let (value, pi) = session.solve()?;
            if best.as_ref().is_none_or(|b| value > b.0 + tol.gap_for(b.0)) {
                best = Some((value, s.clone(), pi.clone()));
            }
            if value <= previous + tol.gap_for(previous) {
                break;
            }
            previous = value;
            let next = grid.best_response(&pi, tol.gap_for(value));
            if next == s {
                break;
            }
            s = next;
        }
    }

    let (value, s, pi) = best.expect("at least one restart runs");
    Ok(AlternatingResult {
        value,
        plan: grid.plan(&pi, &s)?,
        strategy: ExerciseStrategy::new(s)?,
        iterations,
        lp_solves: session.solves,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::costs::Payoff;

    fn split_pair() -> (DiscreteMeasure, DiscreteMeasure) {
        (
            DiscreteMeasure::dirac(0.0),
            DiscreteMeasure::from_pairs([(-1.0, 0.5), (1.0, 0.5)]).unwrap(),
        )
    }

    fn const_vs_square(c1: f64) -> CostSpec {
        CostSpec::american(Payoff::Constant { value: c1 }, Payoff::SquareY { scale: 1.0 }).unwrap()
    }

    #[test]
    fn half_exercise_on_unique_coupling() {
        let (mu, nu) = split_pair();
        let s = ExerciseStrategy::constant(0.5, 1).unwrap();
        let r = solve_fixed_exercise(&mu, &nu, &const_vs_square(2.0), &s, Tolerances::default()).unwrap();
        assert!((r.value - 1.5).abs() < 1e-12);
        assert!((r.plan.get(0, 0, 0) - 0.25).abs() < 1e-12);
        assert!((r.plan.get(1, 0, 1) - 0.25).abs() < 1e-12);
    }

    #[test]
    fn always_exercise_pays_c1() {
        let (mu, nu) = split_pair();
        let s = ExerciseStrategy::constant(1.0, 1).unwrap();
        let r = solve_fixed_exercise(&mu, &nu, &const_vs_square(2.0), &s, Tolerances::default()).unwrap();
        assert!((r.value - 2.0).abs() < 1e-12);
    }

    #[test]
    fn enumeration_examples() {
        let (mu, nu) = split_pair();
        let r = solve_pure_enumeration(&mu, &nu, &const_vs_square(2.0), 16, Tolerances::default()).unwrap();
        assert!((r.value - 2.0).abs() < 1e-12);
        assert_eq!(r.strategy.s, vec![1.0]);
        assert_eq!(r.ties, 1);
        assert_eq!(r.lp_solves, 3);

        let d = DiscreteMeasure::dirac(0.0);
        let cost = CostSpec::american(Payoff::Constant { value: 3.0 }, Payoff::Constant { value: 1.0 }).unwrap();
        let r = solve_pure_enumeration(&d, &d, &cost, 16, Tolerances::default()).unwrap();
        assert!((r.value - 3.0).abs() < 1e-12);
        assert_eq!(r.strategy.s, vec![1.0]);
    }

    #[test]
    fn enumeration_limit() {
        let (mu, nu) = split_pair();
        let err = solve_pure_enumeration(&mu, &nu, &const_vs_square(2.0), 0, Tolerances::default()).unwrap_err();
        assert_eq!(err, Error::TooManyAtoms { atoms: 1, limit: 0 });
    }

    #[test]
    fn non_american_cost_rejected() {
        let (mu, nu) = split_pair();
        let cost = CostSpec::constant(1.0, 3).unwrap();
        let s = ExerciseStrategy::constant(1.0, 1).unwrap();
        assert_eq!(
            solve_fixed_exercise(&mu, &nu, &cost, &s, Tolerances::default()).unwrap_err(),
            Error::NotAmerican
        );
    }

    #[test]
    fn best_response_on_identity() {
        let mu = DiscreteMeasure::from_pairs([(0.0, 0.5), (1.0, 0.5)]).unwrap();
        // c1 = 1 everywhere, c2(x, x) = x²: exercise at 0 (1 > 0), not at 1 (tie exercises)
        let cost = CostSpec::american(Payoff::Constant { value: 1.0 }, Payoff::SquareY { scale: 2.0 }).unwrap();
        let grid = ExerciseGrid::new(&mu, &mu, &cost).unwrap();
        let identity = [0.5, 0.0, 0.0, 0.5];
        assert_eq!(grid.best_response(&identity, 1e-12), vec![1.0, 0.0]);
    }

    #[test]
    fn alternating_single_atom_reaches_optimum() {
        let (mu, nu) = split_pair();
        for c1 in [0.5, 2.0] {
            let cost = const_vs_square(c1);
            let alt = solve_alternating(&mu, &nu, &cost, AlternatingOptions::default(), Tolerances::default()).unwrap();
            let exact = solve_pure_enumeration(&mu, &nu, &cost, 16, Tolerances::default()).unwrap();
            assert!((alt.value - exact.value).abs() < 1e-12);
        }
    }
}
