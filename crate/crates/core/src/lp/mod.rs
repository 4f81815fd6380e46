//! Equality-form linear programs.
//!
//! A [`LinearProgram`] is `maximize c·z  s.t.  A z = b,  z ≥ 0` with `A` given
//! as sparse triplets. [`Simplex`] solves it with a revised primal simplex and
//! returns primal values, one dual multiplier per constraint and the residuals
//! that certify optimality. A session can be re-solved after objective changes
//! starting from the previous basis, which is what the strategy enumeration
//! relies on.

mod simplex;

use alloc::vec::Vec;
use core::fmt;

pub use simplex::Simplex;

/// Solver tolerances. `feas` and `opt` are scaled by `1 + max|b|` and
/// `1 + max|c|` respectively inside the solver; `gap` is the duality-gap
/// tolerance callers apply as `gap * (1 + |v*|)`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Tolerances {
    pub feas: f64,
    pub opt: f64,
    pub gap: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            feas: 1e-9,
            opt: 1e-9,
            gap: 1e-8,
        }
    }
}

impl Tolerances {
    /// All three tolerances multiplied by `factor`.
    pub fn scaled(self, factor: f64) -> Self {
        Self {
            feas: self.feas * factor,
            opt: self.opt * factor,
            gap: self.gap * factor,
        }
    }

    /// Gap tolerance relative to an objective value.
    pub fn gap_for(&self, value: f64) -> f64 {
        self.gap * (1.0 + value.abs())
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum LpError {
    #[error("entry ({row}, {col}) outside a {rows}x{cols} program")]
    IndexOutOfRange {
        row: usize,
        col: usize,
        rows: usize,
        cols: usize,
    },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(&'static str),
    #[error("non-finite coefficient in program data")]
    NonFinite,
    #[error("iteration limit {0} reached")]
    IterationLimit(usize),
    #[error("basis matrix became singular")]
    SingularBasis,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Triplet {
    pub row: usize,
    pub col: usize,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinearProgram {
    objective: Vec<f64>,
    rhs: Vec<f64>,
    entries: Vec<Triplet>,
}

impl LinearProgram {
    /// An empty constraint matrix with the given objective (one entry per
    /// variable) and right-hand side (one entry per constraint).
    pub fn new(objective: Vec<f64>, rhs: Vec<f64>) -> Self {
        Self {
            objective,
            rhs,
            entries: Vec::new(),
        }
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn num_rows(&self) -> usize {
        self.rhs.len()
    }

    pub fn objective(&self) -> &[f64] {
        &self.objective
    }

    pub fn rhs(&self) -> &[f64] {
        &self.rhs
    }

    pub fn entries(&self) -> &[Triplet] {
        &self.entries
    }

    pub fn set_objective(&mut self, col: usize, value: f64) {
        self.objective[col] = value;
    }

    /// Appends `A[row, col] += value`. Bounds are checked when the program is
    /// canonicalized or handed to the solver.
    pub fn push(&mut self, row: usize, col: usize, value: f64) {
        self.entries.push(Triplet { row, col, value });
    }

    /// Checks bounds and finiteness, merges duplicate `(row, col)` entries by
    /// addition and drops exact zeros. Entries end up sorted column-major.
    pub fn canonicalize(&mut self) -> Result<(), LpError> {
        let (rows, cols) = (self.num_rows(), self.num_vars());
        if self.objective.iter().chain(&self.rhs).any(|v| !v.is_finite()) {
            return Err(LpError::NonFinite);
        }
        for t in &self.entries {
            if t.row >= rows || t.col >= cols {
                return Err(LpError::IndexOutOfRange {
                    row: t.row,
                    col: t.col,
                    rows,
                    cols,
                });
            }
            if !t.value.is_finite() {
                return Err(LpError::NonFinite);
            }
        }
        self.entries.sort_by_key(|t| (t.col, t.row));
        let mut merged: Vec<Triplet> = Vec::with_capacity(self.entries.len());
        for t in self.entries.drain(..) {
            match merged.last_mut() {
                Some(last) if last.row == t.row && last.col == t.col => last.value += t.value,
                _ => merged.push(t),
            }
        }
        merged.retain(|t| t.value != 0.0);
        self.entries = merged;
        Ok(())
    }

    /// Solves from scratch with a fresh [`Simplex`] session.
    pub fn solve(&self, tol: Tolerances) -> Result<LpSolution, LpError> {
        Simplex::new(self, tol)?.solve()
    }

    /// Plain-text triplet dump: a header line, then `c j v`, `b i v` and
    /// `a i j v` records.
    pub fn write_triplets<W: fmt::Write>(&self, out: &mut W) -> fmt::Result {
        writeln!(
            out,
            "# maximize c.z s.t. A z = b, z >= 0; rows={} cols={} nnz={}",
            self.num_rows(),
            self.num_vars(),
            self.entries.len()
        )?;
        for (j, c) in self.objective.iter().enumerate() {
            writeln!(out, "c {j} {c:?}")?;
        }
        for (i, b) in self.rhs.iter().enumerate() {
            writeln!(out, "b {i} {b:?}")?;
        }
        for t in &self.entries {
            writeln!(out, "a {} {} {:?}", t.row, t.col, t.value)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub status: LpStatus,
    pub primal: Vec<f64>,
    /// One multiplier per constraint, in the orientation the rows were given.
    pub dual: Vec<f64>,
    pub objective: f64,
    pub dual_objective: f64,
    /// `max_i |(A z - b)_i|`.
    pub primal_residual: f64,
    /// `max_j max(0, c_j - (Aᵀy)_j)`.
    pub dual_violation: f64,
    /// `Σ_j z_j · max(0, (Aᵀy - c)_j)`.
    pub slackness: f64,
    pub iterations: usize,
}

impl LpSolution {
    pub fn is_optimal(&self) -> bool {
        self.status == LpStatus::Optimal
    }

    pub fn duality_gap(&self) -> f64 {
        (self.objective - self.dual_objective).abs()
    }
}
