//! Finite atomic measures on the real line.
//!
//! [`DiscreteMeasure`] stands in for the two marginals, the exercise split
//! `μ1 + μ2 = μ` and every piece of the irreducible decomposition. The
//! potential function `u_ξ(x) = Σ w_i |x - a_i|` is piecewise linear with kinks
//! at the atoms, so every comparison between two potentials only needs the
//! union of the two atom sets.

mod decomposition;

use alloc::format;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use decomposition::{irreducible_decomposition, ComponentInterval, IrreducibleComponent};

/// Atoms closer than this are merged on construction.
pub const ATOM_MERGE_TOL: f64 = 1e-12;
/// `|mass - 1|` allowed for a probability measure.
pub const PROBABILITY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct MeasureMeta {
    /// Set when the measure was produced by discretizing a density. Provenance
    /// only.
    pub absolutely_continuous_origin: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscreteMeasure {
    atoms: Vec<f64>,
    weights: Vec<f64>,
    pub meta: MeasureMeta,
}

impl DiscreteMeasure {
    /// Builds a measure from unsorted `(atom, weight)` pairs: sorts by atom,
    /// merges atoms closer than [`ATOM_MERGE_TOL`] and drops zero weights.
    pub fn from_pairs(pairs: impl IntoIterator<Item = (f64, f64)>) -> Result<Self> {
        let mut pairs: Vec<(f64, f64)> = pairs.into_iter().collect();
        for &(x, w) in &pairs {
            if !x.is_finite() || !w.is_finite() {
                return Err(Error::InvalidMeasure(format!("non-finite atom or weight ({x}, {w})")));
            }
            if w < 0.0 {
                return Err(Error::InvalidMeasure(format!("negative weight {w} at atom {x}")));
            }
        }
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut atoms: Vec<f64> = Vec::with_capacity(pairs.len());
        let mut weights: Vec<f64> = Vec::with_capacity(pairs.len());
        for (x, w) in pairs {
            match atoms.last() {
                Some(&last) if x - last < ATOM_MERGE_TOL => {
                    *weights.last_mut().expect("parallel vectors") += w;
                }
                _ => {
                    atoms.push(x);
                    weights.push(w);
                }
            }
        }
        let (atoms, weights) = atoms.into_iter().zip(weights).filter(|&(_, w)| w > 0.0).unzip();
        Ok(Self {
            atoms,
            weights,
            meta: MeasureMeta::default(),
        })
    }

    pub fn new(atoms: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        if atoms.len() != weights.len() {
            return Err(Error::InvalidMeasure(format!(
                "{} atoms but {} weights",
                atoms.len(),
                weights.len()
            )));
        }
        Self::from_pairs(atoms.into_iter().zip(weights))
    }

    pub fn dirac(x: f64) -> Self {
        Self {
            atoms: alloc::vec![x],
            weights: alloc::vec![1.0],
            meta: MeasureMeta::default(),
        }
    }

    pub fn zero() -> Self {
        Self {
            atoms: Vec::new(),
            weights: Vec::new(),
            meta: MeasureMeta::default(),
        }
    }

    pub fn with_meta(mut self, meta: MeasureMeta) -> Self {
        self.meta = meta;
        self
    }

    pub fn atoms(&self) -> &[f64] {
        &self.atoms
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.atoms.iter().copied().zip(self.weights.iter().copied())
    }

    pub fn mass(&self) -> f64 {
        // `Sum` of an empty float iterator is -0.0
        self.weights.iter().fold(0.0, |a, w| a + w)
    }

    /// `Σ w_i a_i`, the mean times the mass.
    pub fn first_moment(&self) -> f64 {
        self.iter().map(|(x, w)| x * w).sum()
    }

    pub fn mean(&self) -> f64 {
        self.first_moment() / self.mass()
    }

    pub fn is_probability(&self) -> bool {
        (self.mass() - 1.0).abs() <= PROBABILITY_TOL
    }

    /// Weight at an atom equal to `x`, zero if absent.
    pub fn weight_at(&self, x: f64) -> f64 {
        match self.atoms.binary_search_by(|a| a.total_cmp(&x)) {
            Ok(k) => self.weights[k],
            Err(_) => 0.0,
        }
    }

    pub fn index_of(&self, x: f64) -> Option<usize> {
        self.atoms.binary_search_by(|a| a.total_cmp(&x)).ok()
    }

    /// The measure scaled to unit mass. The zero measure stays zero.
    pub fn normalized(&self) -> Self {
        let mass = self.mass();
        if mass <= 0.0 {
            return self.clone();
        }
        Self {
            atoms: self.atoms.clone(),
            weights: self.weights.iter().map(|w| w / mass).collect(),
            meta: self.meta,
        }
    }

    /// Every atom moved by `delta`.
    pub fn shifted(&self, delta: f64) -> Self {
        Self {
            atoms: self.atoms.iter().map(|x| x + delta).collect(),
            weights: self.weights.clone(),
            meta: self.meta,
        }
    }

    /// The potential `u(x) = Σ w_i |x - a_i|`.
    pub fn potential(&self, x: f64) -> f64 {
        potential(self, x)
    }
}

pub fn potential(xi: &DiscreteMeasure, x: f64) -> f64 {
    xi.iter().map(|(a, w)| w * (x - a).abs()).sum()
}

/// Sorted union of the atoms of both measures.
pub fn union_atoms(a: &DiscreteMeasure, b: &DiscreteMeasure) -> Vec<f64> {
    let mut out: Vec<f64> = a.atoms().iter().chain(b.atoms()).copied().collect();
    out.sort_by(f64::total_cmp);
    out.dedup();
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "reason", rename_all = "snake_case")]
pub enum OrderFailure {
    Mass { mu: f64, nu: f64 },
    Mean { mu: f64, nu: f64 },
    Potential { x: f64, u_mu: f64, u_nu: f64 },
}

impl core::fmt::Display for OrderFailure {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            Self::Mass { mu, nu } => write!(f, "mass mismatch ({mu} vs {nu})"),
            Self::Mean { mu, nu } => write!(f, "mean mismatch ({mu} vs {nu})"),
            Self::Potential { x, u_mu, u_nu } => {
                write!(f, "potential inequality fails at x={x} ({u_mu} > {u_nu})")
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConvexOrderVerdict {
    pub ordered: bool,
    pub failure: Option<OrderFailure>,
}

/// Tests `μ ⪯_c ν`: equal mass, equal first moment and `u_μ ≤ u_ν + tol` at
/// every atom of either measure. Between consecutive atoms both potentials are
/// linear, so the atom check covers the whole line. Measures of equal but
/// non-unit mass are accepted, which is how decomposition pieces are checked.
pub fn check_convex_order(mu: &DiscreteMeasure, nu: &DiscreteMeasure, tol: f64) -> ConvexOrderVerdict {
    let fail = |failure| ConvexOrderVerdict {
        ordered: false,
        failure: Some(failure),
    };
    let (m_mu, m_nu) = (mu.mass(), nu.mass());
    if (m_mu - m_nu).abs() > tol {
        return fail(OrderFailure::Mass { mu: m_mu, nu: m_nu });
    }
    let (f_mu, f_nu) = (mu.first_moment(), nu.first_moment());
    if (f_mu - f_nu).abs() > tol {
        let mean = |f: f64, m: f64| if m > 0.0 { f / m } else { 0.0 };
        return fail(OrderFailure::Mean {
            mu: mean(f_mu, m_mu),
            nu: mean(f_nu, m_nu),
        });
    }
    let mut worst: Option<(f64, f64, f64)> = None;
    for x in union_atoms(mu, nu) {
        let (u_mu, u_nu) = (potential(mu, x), potential(nu, x));
        if u_mu > u_nu + tol && worst.is_none_or(|(_, a, b)| u_mu - u_nu > a - b) {
            worst = Some((x, u_mu, u_nu));
        }
    }
    match worst {
        Some((x, u_mu, u_nu)) => fail(OrderFailure::Potential { x, u_mu, u_nu }),
        None => ConvexOrderVerdict {
            ordered: true,
            failure: None,
        },
    }
}

/// `μ1 ∧ μ2`: atom-wise minimum of the weights. Atoms present in only one
/// input drop out.
pub fn common_mass(mu1: &DiscreteMeasure, mu2: &DiscreteMeasure) -> DiscreteMeasure {
    let pairs = mu1.iter().filter_map(|(x, w)| {
        let other = mu2.weight_at(x);
        (other > 0.0).then_some((x, w.min(other)))
    });
    let (atoms, weights) = pairs.unzip();
    DiscreteMeasure {
        atoms,
        weights,
        meta: MeasureMeta::default(),
    }
}
