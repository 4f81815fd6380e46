use alloc::format;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::{check_convex_order, potential, union_atoms, DiscreteMeasure, MeasureMeta};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ComponentInterval {
    /// The complement of all open components, where `μ_0 = ν_0`.
    Complement,
    Open {
        left: f64,
        right: f64,
    },
}

impl ComponentInterval {
    pub fn contains(&self, x: f64) -> bool {
        match *self {
            Self::Complement => false,
            Self::Open { left, right } => left < x && x < right,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IrreducibleComponent {
    pub index: usize,
    pub interval: ComponentInterval,
    pub mu_part: DiscreteMeasure,
    pub nu_part: DiscreteMeasure,
}

/// Splits `μ ⪯_c ν` into the identity part `(μ_0, μ_0)` and irreducible pairs
/// `(μ_k, ν_k)` over the open components `I_k` of `{u_μ < u_ν}`.
///
/// `u_ν - u_μ` is linear between consecutive atoms of `μ + ν` and vanishes
/// outside their hull, so a component is a maximal run of atoms where the
/// difference exceeds `tol`, bounded by the neighbouring atoms where it does
/// not. `ν`-atoms inside `I_k` go to `ν_k` whole; mass on the two endpoints is
/// split so that `ν_k` matches the mass and mean of `μ_k`.
///
/// The identity component (index 0) is only returned when `μ_0` is non-zero.
pub fn irreducible_decomposition(
    mu: &DiscreteMeasure,
    nu: &DiscreteMeasure,
    tol: f64,
) -> Result<Vec<IrreducibleComponent>> {
    let verdict = check_convex_order(mu, nu, tol);
    if let Some(failure) = verdict.failure {
        return Err(Error::NotInConvexOrder(format!("{failure}")));
    }

    let points = union_atoms(mu, nu);
    let positive: Vec<bool> = points
        .iter()
        .map(|&x| potential(nu, x) - potential(mu, x) > tol)
        .collect();

    let mut intervals: Vec<(f64, f64)> = Vec::new();
    let mut k = 0;
    while k < points.len() {
        if !positive[k] {
            k += 1;
            continue;
        }
        let start = k;
        while k < points.len() && positive[k] {
            k += 1;
        }
        let left = points[start.saturating_sub(1)];
        let right = points[k.min(points.len() - 1)];
        intervals.push((left, right));
    }

    let mut components = Vec::with_capacity(intervals.len() + 1);

    let outside: Vec<(f64, f64)> = mu
        .iter()
        .filter(|&(x, _)| !intervals.iter().any(|&(a, b)| a < x && x < b))
        .collect();
    if !outside.is_empty() {
        let mu0 = DiscreteMeasure::from_pairs(outside)?.with_meta(mu.meta);
        components.push(IrreducibleComponent {
            index: 0,
            interval: ComponentInterval::Complement,
            nu_part: mu0.clone().with_meta(nu.meta),
            mu_part: mu0,
        });
    }

    for (n, &(left, right)) in intervals.iter().enumerate() {
        let inside =
            |m: &DiscreteMeasure| -> Vec<(f64, f64)> { m.iter().filter(|&(x, _)| left < x && x < right).collect() };
        let mu_k = DiscreteMeasure::from_pairs(inside(mu))?.with_meta(mu.meta);
        let nu_inner = inside(nu);

        let rest_mass = mu_k.mass() - nu_inner.iter().map(|p| p.1).sum::<f64>();
        let rest_moment = mu_k.first_moment() - nu_inner.iter().map(|p| p.0 * p.1).sum::<f64>();
        // α at `left`, β at `right`: α + β = rest_mass, left·α + right·β = rest_moment
        let beta = (rest_moment - left * rest_mass) / (right - left);
        let alpha = rest_mass - beta;
        let clean = |w: f64| -> Result<f64> {
            if w < -tol {
                Err(Error::Internal(format!(
                    "negative endpoint mass {w} on component ({left}, {right})"
                )))
            } else {
                Ok(w.max(0.0))
            }
        };
        let mut pairs = nu_inner;
        pairs.push((left, clean(alpha)?));
        pairs.push((right, clean(beta)?));
        let nu_k = DiscreteMeasure::from_pairs(pairs)?.with_meta(MeasureMeta {
            absolutely_continuous_origin: nu.meta.absolutely_continuous_origin,
        });

        components.push(IrreducibleComponent {
            index: n + 1,
            interval: ComponentInterval::Open { left, right },
            mu_part: mu_k,
            nu_part: nu_k,
        });
    }

    // The pieces of ν must add back up to ν.
    let scale = 1.0 + nu.mass();
    for (y, w) in nu.iter() {
        let assigned: f64 = components.iter().map(|c| c.nu_part.weight_at(y)).sum();
        if (assigned - w).abs() > 1e-9 * scale {
            return Err(Error::Internal(format!(
                "decomposition leaves {} of ν-mass unassigned at {y}",
                w - assigned
            )));
        }
    }
    Ok(components)
}
