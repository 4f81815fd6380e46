use alloc::format;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measures::{DiscreteMeasure, MeasureMeta};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Density {
    Uniform {
        a: f64,
        b: f64,
    },
    /// Mode `c` with `a ≤ c ≤ b`.
    Triangular {
        a: f64,
        c: f64,
        b: f64,
    },
    /// Normal(`m`, `sigma`²) conditioned on `[a, b]`.
    GaussianTruncated {
        m: f64,
        sigma: f64,
        a: f64,
        b: f64,
    },
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    /// Atoms at the `(k - ½)/n` quantiles, weight `1/n` each.
    #[default]
    Quantile,
    /// Equal-width cells on `[a, b]`, atom at the midpoint, weight equal to the
    /// cell probability.
    Midpoint,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Discretization {
    pub measure: DiscreteMeasure,
    /// Shift applied to every atom so the mean equals the density's mean.
    pub mean_shift: f64,
}

fn std_normal_cdf(z: f64) -> f64 {
    0.5 * (1.0 + libm::erf(z / core::f64::consts::SQRT_2))
}

fn std_normal_pdf(z: f64) -> f64 {
    libm::exp(-0.5 * z * z) / libm::sqrt(2.0 * core::f64::consts::PI)
}

impl Density {
    fn validate(&self) -> Result<()> {
        let ok = match *self {
            Self::Uniform { a, b } => a.is_finite() && b.is_finite() && a < b,
            Self::Triangular { a, c, b } => a.is_finite() && b.is_finite() && a < b && a <= c && c <= b,
            Self::GaussianTruncated { m, sigma, a, b } => {
                m.is_finite() && sigma.is_finite() && sigma > 0.0 && a.is_finite() && b.is_finite() && a < b
            }
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!("invalid density {self:?}")))
        }
    }

    pub fn support(&self) -> (f64, f64) {
        match *self {
            Self::Uniform { a, b } | Self::Triangular { a, b, .. } | Self::GaussianTruncated { a, b, .. } => (a, b),
        }
    }

    pub fn cdf(&self, x: f64) -> f64 {
        let (a, b) = self.support();
        if x <= a {
            return 0.0;
        }
        if x >= b {
            return 1.0;
        }
        match *self {
            Self::Uniform { .. } => (x - a) / (b - a),
            Self::Triangular { c, .. } => {
                if x <= c {
                    (x - a) * (x - a) / ((b - a) * (c - a))
                } else {
                    1.0 - (b - x) * (b - x) / ((b - a) * (b - c))
                }
            }
            Self::GaussianTruncated { m, sigma, .. } => {
                let lo = std_normal_cdf((a - m) / sigma);
                let hi = std_normal_cdf((b - m) / sigma);
                (std_normal_cdf((x - m) / sigma) - lo) / (hi - lo)
            }
        }
    }

    pub fn quantile(&self, p: f64) -> f64 {
        let (a, b) = self.support();
        match *self {
            Self::Uniform { .. } => a + p * (b - a),
            Self::Triangular { c, .. } => {
                if p * (b - a) < c - a {
                    a + libm::sqrt(p * (b - a) * (c - a))
                } else {
                    b - libm::sqrt((1.0 - p) * (b - a) * (b - c))
                }
            }
            Self::GaussianTruncated { .. } => {
                let (mut lo, mut hi) = (a, b);
                for _ in 0..200 {
                    let mid = 0.5 * (lo + hi);
                    if mid <= lo || mid >= hi {
                        break;
                    }
                    if self.cdf(mid) < p {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                0.5 * (lo + hi)
            }
        }
    }

    pub fn mean(&self) -> f64 {
        match *self {
            Self::Uniform { a, b } => 0.5 * (a + b),
            Self::Triangular { a, c, b } => (a + b + c) / 3.0,
            Self::GaussianTruncated { m, sigma, a, b } => {
                let (alpha, beta) = ((a - m) / sigma, (b - m) / sigma);
                let z = std_normal_cdf(beta) - std_normal_cdf(alpha);
                m + sigma * (std_normal_pdf(alpha) - std_normal_pdf(beta)) / z
            }
        }
    }
}

/// `n`-atom discretization of `density`, shifted so its mean is the
/// density's mean. The result is flagged as coming from a density.
pub fn discretize_density(density: &Density, n: usize, method: Method) -> Result<Discretization> {
    density.validate()?;
    if n < 2 {
        return Err(Error::InvalidParameter(format!("need at least 2 atoms, got {n}")));
    }
    let nf = n as f64;
    let pairs: Vec<(f64, f64)> = match method {
        Method::Quantile => (0..n)
            .map(|k| (density.quantile((k as f64 + 0.5) / nf), 1.0 / nf))
            .collect(),
        Method::Midpoint => {
            let (a, b) = density.support();
            let width = (b - a) / nf;
            let mut cells: Vec<(f64, f64)> = (0..n)
                .map(|k| {
                    let left = a + k as f64 * width;
                    let right = if k + 1 == n { b } else { left + width };
                    (0.5 * (left + right), density.cdf(right) - density.cdf(left))
                })
                .collect();
            let total: f64 = cells.iter().map(|c| c.1).sum();
            for c in &mut cells {
                c.1 /= total;
            }
            cells
        }
    };
    let raw = DiscreteMeasure::from_pairs(pairs)?;
    let mean_shift = density.mean() - raw.mean();
    let measure = raw.shifted(mean_shift).with_meta(MeasureMeta {
        absolutely_continuous_origin: true,
    });
    Ok(Discretization { measure, mean_shift })
}
