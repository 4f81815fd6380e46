//! Martingale transport solvers for the two-date American problem.
//!
//! * [`solve_relaxed`]: the relaxed bound `P̄_c`, where each payoff component
//!   gets its own martingale sub-plan `γ_l`, with the LP duals read back as a
//!   superhedging certificate `(φ, ψ, θ_l)`.
//! * [`solve_fixed_exercise`]: `P_c(μ1)` for a fixed exercise split, a single
//!   martingale plan against the blended payoff.
//! * [`solve_pure_enumeration`] / [`solve_alternating`]: exact `P_c` over pure
//!   strategies, or a lower bound for larger grids.
//! * [`verify_certificate`], [`purity_report`], [`left_curtain`] and the
//!   orchestrating [`price_american`].

mod certificate;
mod curtain;
mod exercise;
mod price;
mod relaxed;

use alloc::format;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measures::{DiscreteMeasure, MeasureMeta};

pub use certificate::{purity_report, verify_certificate, PurityReport, SlackReport};
pub use curtain::{check_left_monotone, left_curtain, CurtainResult, MonotonicityReport, MonotonicityViolation};
pub use exercise::{
    fixed_exercise_program, solve_alternating, solve_fixed_exercise, solve_pure_enumeration, AlternatingOptions,
    AlternatingResult, EnumerationResult, FixedExerciseResult, DEFAULT_MAX_ATOMS,
};
pub use price::{price_american, Clock, ComponentReport, NoClock, PriceOptions, SolveReport, Timings};
pub use relaxed::{relaxed_program, solve_relaxed, RelaxedSolution};

/// Tolerance for the convex-order precondition checked by every solver.
pub const ORDER_TOL: f64 = 1e-9;
/// Plan entries above this count as support.
pub const MASS_TOL: f64 = 1e-9;

/// A component-indexed family of nonnegative `m × n` matrices over
/// `supp μ × supp ν`, stored row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransportPlan {
    mu_atoms: Vec<f64>,
    nu_atoms: Vec<f64>,
    components: Vec<Vec<f64>>,
}

impl TransportPlan {
    pub fn new(mu_atoms: Vec<f64>, nu_atoms: Vec<f64>, components: Vec<Vec<f64>>) -> Result<Self> {
        let size = mu_atoms.len() * nu_atoms.len();
        if components.iter().any(|c| c.len() != size) {
            return Err(Error::GridMismatch(format!(
                "plan components must have {} entries",
                size
            )));
        }
        Ok(Self {
            mu_atoms,
            nu_atoms,
            components,
        })
    }

    pub fn zeros(mu_atoms: &[f64], nu_atoms: &[f64], count: usize) -> Self {
        let size = mu_atoms.len() * nu_atoms.len();
        Self {
            mu_atoms: mu_atoms.to_vec(),
            nu_atoms: nu_atoms.to_vec(),
            components: alloc::vec![alloc::vec![0.0; size]; count],
        }
    }

    pub fn mu_atoms(&self) -> &[f64] {
        &self.mu_atoms
    }

    pub fn nu_atoms(&self) -> &[f64] {
        &self.nu_atoms
    }

    pub fn rows(&self) -> usize {
        self.mu_atoms.len()
    }

    pub fn cols(&self) -> usize {
        self.nu_atoms.len()
    }

    pub fn count(&self) -> usize {
        self.components.len()
    }

    /// Matrix of component `l` (counted from 0).
    pub fn component(&self, l: usize) -> &[f64] {
        &self.components[l]
    }

    pub fn component_mut(&mut self, l: usize) -> &mut [f64] {
        &mut self.components[l]
    }

    pub fn get(&self, l: usize, i: usize, j: usize) -> f64 {
        self.components[l][i * self.cols() + j]
    }

    pub fn row_mass(&self, l: usize, i: usize) -> f64 {
        let n = self.cols();
        self.components[l][i * n..(i + 1) * n].iter().sum()
    }

    /// Sum of all components.
    pub fn total(&self) -> Vec<f64> {
        let mut out = alloc::vec![0.0; self.rows() * self.cols()];
        for c in &self.components {
            for (o, v) in out.iter_mut().zip(c) {
                *o += v;
            }
        }
        out
    }

    /// x-marginal of component `l` as a measure on the μ-grid. Negative
    /// round-off is clamped to zero.
    pub fn x_marginal(&self, l: usize) -> DiscreteMeasure {
        let pairs = (0..self.rows()).map(|i| (self.mu_atoms[i], self.row_mass(l, i).max(0.0)));
        DiscreteMeasure::from_pairs(pairs)
            .expect("plan rows are finite")
            .with_meta(MeasureMeta::default())
    }

    /// Largest deviation of `Σ_l` row and column sums from the marginal weights.
    pub fn marginal_residual(&self, mu: &DiscreteMeasure, nu: &DiscreteMeasure) -> f64 {
        let (m, n) = (self.rows(), self.cols());
        let total = self.total();
        let mut worst = 0.0f64;
        for i in 0..m {
            let row: f64 = total[i * n..(i + 1) * n].iter().sum();
            worst = worst.max((row - mu.weight_at(self.mu_atoms[i])).abs());
        }
        for j in 0..n {
            let col: f64 = (0..m).map(|i| total[i * n + j]).sum();
            worst = worst.max((col - nu.weight_at(self.nu_atoms[j])).abs());
        }
        worst
    }

    /// Largest `|Σ_j γ_l(i, j)(y_j - x_i)|` over all components and rows.
    pub fn martingale_residual(&self) -> f64 {
        let n = self.cols();
        let mut worst = 0.0f64;
        for c in &self.components {
            for (i, &x) in self.mu_atoms.iter().enumerate() {
                let drift: f64 = c[i * n..(i + 1) * n]
                    .iter()
                    .zip(&self.nu_atoms)
                    .map(|(g, y)| g * (y - x))
                    .sum();
                worst = worst.max(drift.abs());
            }
        }
        worst
    }

    /// Smallest entry over all components.
    pub fn min_entry(&self) -> f64 {
        self.components.iter().flatten().fold(f64::INFINITY, |a, &b| a.min(b))
    }

    /// `(i, j, mass)` for the entries of component `l` above `mass_tol`.
    pub fn support(&self, l: usize, mass_tol: f64) -> Vec<(usize, usize, f64)> {
        let n = self.cols();
        self.components[l]
            .iter()
            .enumerate()
            .filter(|(_, &v)| v > mass_tol)
            .map(|(k, &v)| (k / n, k % n, v))
            .collect()
    }
}

/// Fraction `s_i ∈ [0, 1]` of the mass at μ-atom `i` exercised at the first
/// date.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExerciseStrategy {
    pub s: Vec<f64>,
}

impl ExerciseStrategy {
    pub fn new(s: Vec<f64>) -> Result<Self> {
        if let Some(v) = s.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(Error::InvalidParameter(format!("exercise fraction {v} outside [0, 1]")));
        }
        Ok(Self { s })
    }

    pub fn constant(value: f64, len: usize) -> Result<Self> {
        Self::new(alloc::vec![value; len])
    }

    /// Pure strategy from the low `len` bits of `code`: bit `i` set means
    /// exercise at μ-atom `i`.
    pub fn from_bits(code: u64, len: usize) -> Self {
        Self {
            s: (0..len).map(|i| ((code >> i) & 1) as f64).collect(),
        }
    }

    pub fn is_pure(&self) -> bool {
        self.s.iter().all(|&v| v == 0.0 || v == 1.0)
    }

    pub fn len(&self) -> usize {
        self.s.len()
    }

    pub fn is_empty(&self) -> bool {
        self.s.is_empty()
    }

    /// `(μ1, μ2) = (s μ, (1 - s) μ)`.
    pub fn split(&self, mu: &DiscreteMeasure) -> Result<(DiscreteMeasure, DiscreteMeasure)> {
        if self.len() != mu.len() {
            return Err(Error::GridMismatch(format!(
                "strategy has {} entries for {} atoms",
                self.len(),
                mu.len()
            )));
        }
        let first = mu.iter().zip(&self.s).map(|((x, w), s)| (x, s * w));
        let second = mu.iter().zip(&self.s).map(|((x, w), s)| (x, (1.0 - s) * w));
        Ok((
            DiscreteMeasure::from_pairs(first)?,
            DiscreteMeasure::from_pairs(second)?,
        ))
    }
}

/// Static positions `φ` (first date) and `ψ` (second date) plus one forward
/// position `θ_l` per payoff component, satisfying
/// `φ_i + ψ_j + θ_{l,i}(y_j - x_i) ≥ c_l(x_i, y_j)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DualCertificate {
    pub phi: Vec<f64>,
    pub psi: Vec<f64>,
    pub theta: Vec<Vec<f64>>,
}

impl DualCertificate {
    /// `μ(φ) + ν(ψ)`, the cost of the superhedge.
    pub fn value(&self, mu: &DiscreteMeasure, nu: &DiscreteMeasure) -> f64 {
        let a: f64 = mu.weights().iter().zip(&self.phi).map(|(w, p)| w * p).sum();
        let b: f64 = nu.weights().iter().zip(&self.psi).map(|(w, p)| w * p).sum();
        a + b
    }
}

pub(crate) fn require_order(mu: &DiscreteMeasure, nu: &DiscreteMeasure) -> Result<()> {
    if mu.is_empty() {
        return Err(Error::InvalidMeasure("first-date marginal has no atoms".into()));
    }
    let verdict = crate::measures::check_convex_order(mu, nu, ORDER_TOL);
    match verdict.failure {
        Some(f) => Err(Error::NotInConvexOrder(format!("{f}"))),
        None => Ok(()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn strategy_validation_and_split() {
        assert!(ExerciseStrategy::new(alloc::vec![0.0, 1.5]).is_err());
        let s = ExerciseStrategy::from_bits(0b10, 3);
        assert_eq!(s.s, alloc::vec![0.0, 1.0, 0.0]);
        assert!(s.is_pure());
        assert!(!ExerciseStrategy::constant(0.5, 2).unwrap().is_pure());

        let mu = DiscreteMeasure::from_pairs([(0.0, 0.5), (1.0, 0.25), (2.0, 0.25)]).unwrap();
        let (mu1, mu2) = s.split(&mu).unwrap();
        assert_eq!(mu1.atoms(), &[1.0]);
        assert_eq!(mu2.atoms(), &[0.0, 2.0]);
        assert!(s.split(&DiscreteMeasure::dirac(0.0)).is_err());
    }

    #[test]
    fn plan_marginals() {
        let plan = TransportPlan::new(
            alloc::vec![0.0],
            alloc::vec![-1.0, 1.0],
            alloc::vec![alloc::vec![0.25, 0.25], alloc::vec![0.25, 0.25]],
        )
        .unwrap();
        assert_eq!(plan.row_mass(1, 0), 0.5);
        assert_eq!(plan.martingale_residual(), 0.0);
        let mu = DiscreteMeasure::dirac(0.0);
        let nu = DiscreteMeasure::from_pairs([(-1.0, 0.5), (1.0, 0.5)]).unwrap();
        assert_eq!(plan.marginal_residual(&mu, &nu), 0.0);
        assert_eq!(plan.support(0, MASS_TOL), alloc::vec![(0, 0, 0.25), (0, 1, 0.25)]);
        assert!(TransportPlan::new(alloc::vec![0.0], alloc::vec![1.0], alloc::vec![alloc::vec![]]).is_err());
    }
}
