use alloc::format;

use serde::{Deserialize, Serialize};

use super::{DualCertificate, TransportPlan};
use crate::costs::CostSpec;
use crate::error::{Error, Result};
use crate::measures::{common_mass, DiscreteMeasure};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SlackReport {
    /// Largest `c_l(x_i, y_j) - φ_i - ψ_j - θ_{l,i}(y_j - x_i)` over the grid,
    /// floored at zero.
    pub feasibility: f64,
    /// `Σ γ_l(i, j) · |φ_i + ψ_j + θ_{l,i}(y_j - x_i) - c_l(x_i, y_j)|`.
    pub tightness: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PurityReport {
    pub mu1: DiscreteMeasure,
    pub mu2: DiscreteMeasure,
    /// Mass of `μ1 ∧ μ2`; zero for a nonrandomized exercise.
    pub overlap_mass: f64,
}

/// Checks the superhedging inequality on every grid point and how tightly it
/// binds on the plan's support.
///
/// Tightness uses the absolute slack so that an infeasible dual cannot offset
/// a loose one.
pub fn verify_certificate(plan: &TransportPlan, dual: &DualCertificate, cost: &CostSpec) -> Result<SlackReport> {
    let (m, n, count) = (plan.rows(), plan.cols(), plan.count());
    if dual.phi.len() != m
        || dual.psi.len() != n
        || dual.theta.len() != count
        || dual.theta.iter().any(|t| t.len() != m)
        || cost.count() != count
    {
        return Err(Error::GridMismatch(format!(
            "plan is {count} × {m} × {n}; certificate has {} φ, {} ψ and {} θ vectors; cost has {} components",
            dual.phi.len(),
            dual.psi.len(),
            dual.theta.len(),
            cost.count()
        )));
    }

    let mut feasibility = 0.0f64;
    let mut tightness = 0.0;
    for l in 0..count {
        let gamma = plan.component(l);
        for (i, &x) in plan.mu_atoms().iter().enumerate() {
            for (j, &y) in plan.nu_atoms().iter().enumerate() {
                let hedge = dual.phi[i] + dual.psi[j] + dual.theta[l][i] * (y - x);
                let slack = hedge - cost.evaluate(l + 1, x, y)?;
                if -slack > feasibility {
                    feasibility = -slack;
                }
                tightness += gamma[i * n + j].abs() * slack.abs();
            }
        }
    }
    Ok(SlackReport { feasibility, tightness })
}

/// Exercise split implied by a two-component plan and its randomized part.
pub fn purity_report(plan: &TransportPlan) -> Result<PurityReport> {
    if plan.count() != 2 {
        return Err(Error::NotAmerican);
    }
    let mu1 = plan.x_marginal(0);
    let mu2 = plan.x_marginal(1);
    let overlap_mass = common_mass(&mu1, &mu2).mass();
    Ok(PurityReport { mu1, mu2, overlap_mass })
}
