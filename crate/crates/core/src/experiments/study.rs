use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::{discretize_density, Density, Method};
use crate::costs::CostSpec;
use crate::error::Result;
use crate::mot::{price_american, Clock, PriceOptions};

#[derive(Debug, Clone, PartialEq)]
pub struct StudyConfig {
    pub mu_density: Density,
    pub nu_density: Density,
    pub cost: CostSpec,
    /// ν sizes; μ uses the same size unless `mu_size` is set.
    pub sizes: Vec<usize>,
    pub mu_size: Option<usize>,
    pub method: Method,
    pub options: PriceOptions,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyRow {
    pub n: usize,
    pub p_bar: f64,
    /// A lower bound when `p_c_is_exact` is false.
    pub p_c: f64,
    pub p_c_is_exact: bool,
    pub gap: f64,
    pub overlap_mass: f64,
    pub strict_convexity: bool,
    pub diagonal_separated: bool,
    pub runtime_ms: f64,
    /// Shift applied to ν to match μ's mean.
    pub nu_shift: f64,
}

/// Prices the discretized pair at every size, in the order given.
///
/// Both densities are discretized independently and ν is then shifted onto
/// μ's mean, since convex order needs equal means.
pub fn refinement_study(config: &StudyConfig, clock: &dyn Clock) -> Result<Vec<StudyRow>> {
    config
        .sizes
        .iter()
        .map(|&n| {
            let start = clock.now_ms();
            let mu = discretize_density(&config.mu_density, config.mu_size.unwrap_or(n), config.method)?.measure;
            let nu = discretize_density(&config.nu_density, n, config.method)?.measure;
            let nu_shift = mu.mean() - nu.mean();
            let nu = nu.shifted(nu_shift);
            let report = price_american(&mu, &nu, &config.cost, &config.options, clock)?;
            let p_c = report.p_c.unwrap_or(f64::NAN);
            Ok(StudyRow {
                n,
                p_bar: report.p_bar,
                p_c,
                p_c_is_exact: report.p_c_is_exact,
                gap: report.p_bar - p_c,
                overlap_mass: report.overlap_mass,
                strict_convexity: report.hypotheses.strict_convexity,
                diagonal_separated: report.hypotheses.diagonal_separated,
                runtime_ms: clock.now_ms() - start,
                nu_shift,
            })
        })
        .collect()
}
