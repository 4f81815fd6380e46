use alloc::format;
use alloc::vec::Vec;

use super::{require_order, DualCertificate, TransportPlan};
use crate::costs::CostSpec;
use crate::error::{Error, Result};
use crate::lp::{LinearProgram, LpStatus, Tolerances};
use crate::measures::DiscreteMeasure;

#[derive(Debug, Clone, PartialEq)]
pub struct RelaxedSolution {
    pub value: f64,
    pub plan: TransportPlan,
    pub dual: DualCertificate,
    pub lp_iterations: usize,
}

/// LP for the relaxed bound.
///
/// Variable `(l, i, j)` at column `(l·m + i)·n + j` is `γ_l(x_i, y_j)`. Rows
/// `0..m` fix the x-marginal of `Σ_l γ_l`, rows `m..m+n` the y-marginal, and
/// row `m + n + l·m + i` is the barycenter condition of `γ_l` at `x_i`. The
/// multipliers of the three blocks are `φ`, `ψ` and `θ_l`, with no sign flips.
pub fn relaxed_program(mu: &DiscreteMeasure, nu: &DiscreteMeasure, cost: &CostSpec) -> Result<LinearProgram> {
    let (m, n, count) = (mu.len(), nu.len(), cost.count());
    let mut objective = Vec::with_capacity(count * m * n);
    for l in 1..=count {
        objective.extend(cost.grid(l, mu, nu)?);
    }
    let mut rhs = Vec::with_capacity(m + n + count * m);
    rhs.extend_from_slice(mu.weights());
    rhs.extend_from_slice(nu.weights());
    rhs.extend(core::iter::repeat_n(0.0, count * m));

    let mut lp = LinearProgram::new(objective, rhs);
    for l in 0..count {
        for (i, &x) in mu.atoms().iter().enumerate() {
            for (j, &y) in nu.atoms().iter().enumerate() {
                let col = (l * m + i) * n + j;
                lp.push(i, col, 1.0);
                lp.push(m + j, col, 1.0);
                lp.push(m + n + l * m + i, col, y - x);
            }
        }
    }
    Ok(lp)
}

/// Computes `P̄_c`: the best total payoff over families `(γ_1, …, γ_L)` whose
/// sum is a martingale transport from μ to ν and where each `γ_l` is a
/// martingale transport of its own mass. The returned certificate is the LP
/// dual, so `μ(φ) + ν(ψ) = P̄_c` up to solver tolerance.
pub fn solve_relaxed(
    mu: &DiscreteMeasure,
    nu: &DiscreteMeasure,
    cost: &CostSpec,
    tol: Tolerances,
) -> Result<RelaxedSolution> {
    require_order(mu, nu)?;
    let (m, n, count) = (mu.len(), nu.len(), cost.count());
    let lp = relaxed_program(mu, nu, cost)?;
    let sol = lp.solve(tol)?;
    if sol.status != LpStatus::Optimal {
        return Err(Error::Internal(format!(
            "relaxed program reported {:?} for marginals in convex order",
            sol.status
        )));
    }

    let components = sol.primal.chunks(m * n).map(<[f64]>::to_vec).collect();
    let plan = TransportPlan::new(mu.atoms().to_vec(), nu.atoms().to_vec(), components)?;
    let dual = DualCertificate {
        phi: sol.dual[..m].to_vec(),
        psi: sol.dual[m..m + n].to_vec(),
        theta: sol.dual[m + n..].chunks(m).take(count).map(<[f64]>::to_vec).collect(),
    };
    Ok(RelaxedSolution {
        value: sol.objective,
        plan,
        dual,
        lp_iterations: sol.iterations,
    })
}
