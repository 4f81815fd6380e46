use alloc::format;

use serde::{Deserialize, Serialize};

use super::{relaxed_program, require_order, TransportPlan};
use crate::costs::CostSpec;
use crate::error::{Error, Result};
use crate::lp::{LpStatus, Tolerances};
use crate::measures::DiscreteMeasure;

/// Support points `(x, y1)`, `(x, y2)` and `(x', y')` with `x < x'` and
/// `y1 < y' < y2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MonotonicityViolation {
    pub x: f64,
    pub y1: f64,
    pub y2: f64,
    pub x_prime: f64,
    pub y_prime: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MonotonicityReport {
    pub monotone: bool,
    pub violation: Option<MonotonicityViolation>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CurtainResult {
    pub plan: TransportPlan,
    pub report: MonotonicityReport,
}

/// The coupling minimizing the selector cost `-x·y²` is left-monotone on
/// generic grids (its cross derivative in `x, y, y` is negative), so the LP
/// maximizes `x·y²`. The result is audited by [`check_left_monotone`] rather
/// than trusted.
fn selector(x: f64, y: f64) -> f64 {
    x * y * y
}

/// Single-component martingale coupling of `(μ, ν)` that is left-monotone
/// when the selector LP has a unique optimum.
pub fn left_curtain(mu: &DiscreteMeasure, nu: &DiscreteMeasure, tol: Tolerances) -> Result<CurtainResult> {
    require_order(mu, nu)?;
    let n = nu.len();
    let mut lp = relaxed_program(mu, nu, &CostSpec::constant(0.0, 1)?)?;
    for (i, &x) in mu.atoms().iter().enumerate() {
        for (j, &y) in nu.atoms().iter().enumerate() {
            lp.set_objective(i * n + j, selector(x, y));
        }
    }
    let sol = lp.solve(tol)?;
    if sol.status != LpStatus::Optimal {
        return Err(Error::Internal(format!(
            "curtain program reported {:?} for marginals in convex order",
            sol.status
        )));
    }
    let plan = TransportPlan::new(mu.atoms().to_vec(), nu.atoms().to_vec(), alloc::vec![sol.primal])?;
    let report = check_left_monotone(&plan, tol.feas * (1.0 + mu.mass()));
    Ok(CurtainResult { plan, report })
}

/// Looks for a violation of left-monotonicity in component 0 of `plan`,
/// counting entries above `mass_tol` as support. The first violation in row
/// order is reported.
pub fn check_left_monotone(plan: &TransportPlan, mass_tol: f64) -> MonotonicityReport {
    let (m, n) = (plan.rows(), plan.cols());
    let gamma = plan.component(0);
    let support = |i: usize| (0..n).filter(move |&j| gamma[i * n + j] > mass_tol);

    for i in 0..m {
        let (Some(lo), Some(hi)) = (support(i).next(), support(i).next_back()) else {
            continue;
        };
        if hi <= lo + 1 {
            continue;
        }
        for i2 in i + 1..m {
            if let Some(j) = support(i2).find(|&j| lo < j && j < hi) {
                let (xs, ys) = (plan.mu_atoms(), plan.nu_atoms());
                return MonotonicityReport {
                    monotone: false,
                    violation: Some(MonotonicityViolation {
                        x: xs[i],
                        y1: ys[lo],
                        y2: ys[hi],
                        x_prime: xs[i2],
                        y_prime: ys[j],
                    }),
                };
            }
        }
    }
    MonotonicityReport {
        monotone: true,
        violation: None,
    }
}
