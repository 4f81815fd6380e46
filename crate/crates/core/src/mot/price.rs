use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::{
    purity_report, require_order, solve_alternating, solve_pure_enumeration, solve_relaxed, verify_certificate,
    AlternatingOptions, DualCertificate, ExerciseStrategy, SlackReport, TransportPlan, DEFAULT_MAX_ATOMS,
};
use crate::costs::{check_theorem_hypotheses, CostSpec, HypothesisReport};
use crate::error::Result;
use crate::lp::Tolerances;
use crate::measures::{irreducible_decomposition, ComponentInterval, DiscreteMeasure, IrreducibleComponent};

/// Millisecond time source for the report's timings. The core crate has no
/// clock of its own.
pub trait Clock {
    fn now_ms(&self) -> f64;
}

/// Reports every timing as zero.
#[derive(Debug, Clone, Copy, Default)]
pub struct NoClock;

impl Clock for NoClock {
    fn now_ms(&self) -> f64 {
        0.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PriceOptions {
    pub tol: Tolerances,
    /// Enumerate pure strategies when μ has at most this many atoms;
    /// otherwise `p_c` is a heuristic lower bound.
    pub max_enum: usize,
    /// Overlap mass at or below which the relaxed plan counts as pure.
    pub purity_tol: f64,
    /// Strictness tolerance for the irreducible decomposition.
    pub order_tol: f64,
    pub restarts: usize,
    pub max_iters: usize,
    pub seed: u64,
}

impl Default for PriceOptions {
    fn default() -> Self {
        Self {
            tol: Tolerances::default(),
            max_enum: DEFAULT_MAX_ATOMS,
            purity_tol: 1e-6,
            order_tol: super::ORDER_TOL,
            restarts: 8,
            max_iters: 50,
            seed: 0,
        }
    }
}

impl PriceOptions {
    fn alternating(&self) -> AlternatingOptions {
        AlternatingOptions {
            restarts: self.restarts,
            max_iters: self.max_iters,
            seed: self.seed,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Timings {
    pub relaxed: f64,
    pub exercise: f64,
    pub total: f64,
}

/// Prices of one irreducible component.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComponentReport {
    pub index: usize,
    pub interval: ComponentInterval,
    pub mass: f64,
    pub mu_atoms: usize,
    pub nu_atoms: usize,
    pub p_bar: f64,
    pub p_c: f64,
    pub p_c_is_exact: bool,
    pub gap: f64,
    pub overlap_mass: f64,
    pub ties: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub p_bar: f64,
    /// Exact when `p_c_is_exact`, otherwise a lower bound.
    pub p_c: Option<f64>,
    pub p_c_is_exact: bool,
    pub gap: Option<f64>,
    pub strategy: Option<ExerciseStrategy>,
    /// Mass of `μ1 ∧ μ2` in the relaxed optimizer.
    pub overlap_mass: f64,
    pub pure: bool,
    pub dual: DualCertificate,
    pub slack: SlackReport,
    pub components: Vec<ComponentReport>,
    pub hypotheses: HypothesisReport,
    pub timings_ms: Timings,
    pub seed: u64,
    /// Number of optimal pure strategies (product over components) when
    /// enumeration ran.
    pub ties: Option<u64>,
    /// The relaxed optimizer.
    #[serde(skip)]
    pub plan: Option<TransportPlan>,
}

struct ExerciseOutcome {
    value: f64,
    strategy: ExerciseStrategy,
    ties: Option<u64>,
}

/// Full pipeline for an American payoff: the relaxed bound with its
/// certificate, the exercise value `P_c`, purity of the relaxed optimizer and
/// a breakdown over irreducible components.
///
/// `P_c` is assembled from the components: the identity part is priced
/// pointwise (its only martingale transport is the identity, so each atom
/// takes `max(c_1, c_2)` on the diagonal, ties exercising), the others by
/// enumeration or the alternating heuristic. Which one runs is decided by the
/// total number of μ-atoms against `max_enum`.
pub fn price_american(
    mu: &DiscreteMeasure,
    nu: &DiscreteMeasure,
    cost: &CostSpec,
    options: &PriceOptions,
    clock: &dyn Clock,
) -> Result<SolveReport> {
    let start = clock.now_ms();
    cost.require_american()?;
    require_order(mu, nu)?;
    let tol = options.tol;

    let relaxed = solve_relaxed(mu, nu, cost, tol)?;
    let slack = verify_certificate(&relaxed.plan, &relaxed.dual, cost)?;
    let overlap_mass = purity_report(&relaxed.plan)?.overlap_mass;
    let hypotheses = check_theorem_hypotheses(cost, mu, nu)?;
    let after_relaxed = clock.now_ms();

    let exact = mu.len() <= options.max_enum;
    let mut s = vec![1.0; mu.len()];
    let mut p_c = 0.0;
    let mut ties = Some(1u64);
    let mut components = Vec::new();
    for part in irreducible_decomposition(mu, nu, options.order_tol)? {
        let (p_bar_k, overlap_k) = match part.interval {
            ComponentInterval::Complement => (identity_value(&part, cost)?.value, 0.0),
            ComponentInterval::Open { .. } => {
                let r = solve_relaxed(&part.mu_part, &part.nu_part, cost, tol)?;
                (r.value, purity_report(&r.plan)?.overlap_mass)
            }
        };
        let outcome = match part.interval {
            ComponentInterval::Complement => identity_value(&part, cost)?,
            ComponentInterval::Open { .. } if exact => {
                let r = solve_pure_enumeration(&part.mu_part, &part.nu_part, cost, options.max_enum, tol)?;
                ExerciseOutcome {
                    value: r.value,
                    strategy: r.strategy,
                    ties: Some(r.ties as u64),
                }
            }
            ComponentInterval::Open { .. } => {
                let r = solve_alternating(&part.mu_part, &part.nu_part, cost, options.alternating(), tol)?;
                ExerciseOutcome {
                    value: r.value,
                    strategy: r.strategy,
                    ties: None,
                }
            }
        };

        for (k, &x) in part.mu_part.atoms().iter().enumerate() {
            if let Some(i) = mu.index_of(x) {
                s[i] = outcome.strategy.s[k];
            }
        }
        p_c += outcome.value;
        ties = match (ties, outcome.ties) {
            (Some(a), Some(b)) => Some(a.saturating_mul(b)),
            _ => None,
        };
        components.push(ComponentReport {
            index: part.index,
            interval: part.interval,
            mass: part.mu_part.mass(),
            mu_atoms: part.mu_part.len(),
            nu_atoms: part.nu_part.len(),
            p_bar: p_bar_k,
            p_c: outcome.value,
            p_c_is_exact: exact || part.index == 0,
            gap: p_bar_k - outcome.value,
            overlap_mass: overlap_k,
            ties: outcome.ties.unwrap_or(0),
        });
    }
    let end = clock.now_ms();

    Ok(SolveReport {
        p_bar: relaxed.value,
        p_c: Some(p_c),
        p_c_is_exact: exact,
        gap: Some(relaxed.value - p_c),
        strategy: Some(ExerciseStrategy::new(s)?),
        overlap_mass,
        pure: overlap_mass <= options.purity_tol,
        dual: relaxed.dual,
        slack,
        components,
        hypotheses,
        timings_ms: Timings {
            relaxed: after_relaxed - start,
            exercise: end - after_relaxed,
            total: end - start,
        },
        seed: options.seed,
        ties: if exact { ties } else { None },
        plan: Some(relaxed.plan),
    })
}

/// On the identity part each atom stays put, so the best payoff is the
/// pointwise maximum on the diagonal.
fn identity_value(part: &IrreducibleComponent, cost: &CostSpec) -> Result<ExerciseOutcome> {
    let mut value = 0.0;
    let mut s = Vec::with_capacity(part.mu_part.len());
    for (x, w) in part.mu_part.iter() {
        let stop = cost.evaluate(1, x, x)?;
        let go_on = cost.evaluate(2, x, x)?;
        let exercise = stop >= go_on;
        value += w * if exercise { stop } else { go_on };
        s.push(if exercise { 1.0 } else { 0.0 });
    }
    Ok(ExerciseOutcome {
        value,
        strategy: ExerciseStrategy { s },
        ties: Some(1),
    })
}
