use alloc::vec;
use alloc::vec::Vec;

use super::{LinearProgram, LpError, LpSolution, LpStatus, Tolerances};

/// Consecutive degenerate pivots tolerated before switching to Bland's rule.
const STALL_THRESHOLD: usize = 50;
/// Pivots between refactorizations of the basis inverse.
const REFACTOR_EVERY: usize = 64;
const PIVOT_TOL: f64 = 1e-9;
const RATIO_TIE: f64 = 1e-12;
const NOT_BASIC: usize = usize::MAX;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Phase {
    One,
    Two,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum State {
    Cold,
    Feasible,
    Infeasible,
}

enum Outcome {
    Optimal,
    Unbounded,
}

/// Revised primal simplex session over one constraint system.
///
/// Rows with negative right-hand side are negated internally so that the
/// artificial basis is feasible; duals are mapped back before they are
/// returned. Variables `0..n` are structural, `n..n+m` are the Phase-1
/// artificials (artificial `n + i` is the unit column of row `i`).
///
/// After a successful solve the basis is kept: changing the objective with
/// [`Simplex::set_cost`] and solving again resumes Phase 2 from the previous
/// optimum.
#[derive(Debug, Clone)]
pub struct Simplex {
    rows: usize,
    cols: usize,
    col_start: Vec<usize>,
    row_idx: Vec<usize>,
    vals: Vec<f64>,
    rhs: Vec<f64>,
    sign: Vec<f64>,
    cost: Vec<f64>,
    tol: Tolerances,
    scale_b: f64,
    basis: Vec<usize>,
    position: Vec<usize>,
    binv: Vec<f64>,
    xb: Vec<f64>,
    state: State,
    since_refactor: usize,
    iterations: usize,
}

impl Simplex {
    pub fn new(lp: &LinearProgram, tol: Tolerances) -> Result<Self, LpError> {
        let mut lp = lp.clone();
        lp.canonicalize()?;
        let rows = lp.num_rows();
        let cols = lp.num_vars();

        let sign: Vec<f64> = lp.rhs().iter().map(|&b| if b < 0.0 { -1.0 } else { 1.0 }).collect();
        let rhs: Vec<f64> = lp.rhs().iter().zip(&sign).map(|(b, s)| b * s).collect();

        let mut col_start = vec![0usize; cols + 1];
        let mut row_idx = Vec::with_capacity(lp.entries().len());
        let mut vals = Vec::with_capacity(lp.entries().len());
        for t in lp.entries() {
            col_start[t.col + 1] += 1;
            row_idx.push(t.row);
            vals.push(t.value * sign[t.row]);
        }
        for j in 0..cols {
            col_start[j + 1] += col_start[j];
        }

        let scale_b = 1.0 + rhs.iter().fold(0.0f64, |a, b| a.max(b.abs()));
        Ok(Self {
            rows,
            cols,
            col_start,
            row_idx,
            vals,
            rhs,
            sign,
            cost: lp.objective().to_vec(),
            tol,
            scale_b,
            basis: Vec::new(),
            position: vec![NOT_BASIC; cols + rows],
            binv: Vec::new(),
            xb: Vec::new(),
            state: State::Cold,
            since_refactor: 0,
            iterations: 0,
        })
    }

    pub fn num_vars(&self) -> usize {
        self.cols
    }

    pub fn num_rows(&self) -> usize {
        self.rows
    }

    /// Changes one objective coefficient; the current basis stays primal
    /// feasible, so the next solve skips Phase 1.
    pub fn set_cost(&mut self, col: usize, value: f64) {
        self.cost[col] = value;
    }

    pub fn set_objective(&mut self, objective: &[f64]) -> Result<(), LpError> {
        if objective.len() != self.cols {
            return Err(LpError::DimensionMismatch("objective length"));
        }
        if objective.iter().any(|v| !v.is_finite()) {
            return Err(LpError::NonFinite);
        }
        self.cost.copy_from_slice(objective);
        Ok(())
    }

    pub fn solve(&mut self) -> Result<LpSolution, LpError> {
        self.iterations = 0;
        if self.state != State::Feasible {
            self.phase_one()?;
        }
        if self.state == State::Infeasible {
            return Ok(self.failed(LpStatus::Infeasible));
        }
        // A refactorization can nudge reduced costs back over the threshold;
        // a couple of extra passes settle it.
        for _ in 0..4 {
            if let Outcome::Unbounded = self.run(Phase::Two)? {
                return Ok(self.failed(LpStatus::Unbounded));
            }
            self.refactor()?;
            if self.max_reduced_cost(Phase::Two).0 <= self.opt_threshold() {
                break;
            }
        }
        Ok(self.assemble())
    }

    fn iteration_limit(&self) -> usize {
        100 * (self.rows + self.cols) + 1000
    }

    fn opt_threshold(&self) -> f64 {
        let scale_c = 1.0 + self.cost.iter().fold(0.0f64, |a, c| a.max(c.abs()));
        self.tol.opt * scale_c
    }

    fn feas_threshold(&self) -> f64 {
        self.tol.feas * self.scale_b
    }

    fn phase_cost(&self, phase: Phase, var: usize) -> f64 {
        match (phase, var >= self.cols) {
            (Phase::One, true) => -1.0,
            (Phase::One, false) => 0.0,
            (Phase::Two, true) => 0.0,
            (Phase::Two, false) => self.cost[var],
        }
    }

    fn for_column(&self, var: usize, mut f: impl FnMut(usize, f64)) {
        if var >= self.cols {
            f(var - self.cols, 1.0);
        } else {
            for k in self.col_start[var]..self.col_start[var + 1] {
                f(self.row_idx[k], self.vals[k]);
            }
        }
    }

    fn phase_one(&mut self) -> Result<(), LpError> {
        let m = self.rows;
        self.position.iter_mut().for_each(|p| *p = NOT_BASIC);
        self.basis = (0..m).map(|i| self.cols + i).collect();
        for (r, &v) in self.basis.iter().enumerate() {
            self.position[v] = r;
        }
        self.binv = vec![0.0; m * m];
        for i in 0..m {
            self.binv[i * m + i] = 1.0;
        }
        self.xb = self.rhs.clone();
        self.since_refactor = 0;

        self.run(Phase::One)?;
        self.refactor()?;
        let infeasibility: f64 = self
            .basis
            .iter()
            .zip(&self.xb)
            .filter(|(&v, _)| v >= self.cols)
            .map(|(_, x)| x.max(0.0))
            .sum();
        if infeasibility > self.feas_threshold() {
            self.state = State::Infeasible;
            return Ok(());
        }
        self.drive_out_artificials()?;
        self.state = State::Feasible;
        Ok(())
    }

    /// Pivots zero-level artificials out of the basis where a structural
    /// column can replace them. Artificials that remain sit on redundant rows.
    fn drive_out_artificials(&mut self) -> Result<(), LpError> {
        let m = self.rows;
        for r in 0..m {
            if self.basis[r] < self.cols {
                continue;
            }
            let mut best: Option<(usize, f64)> = None;
            for j in 0..self.cols {
                if self.position[j] != NOT_BASIC {
                    continue;
                }
                let mut alpha = 0.0;
                self.for_column(j, |i, a| alpha += self.binv[r * m + i] * a);
                if alpha.abs() > 1e-7 && best.is_none_or(|(_, b)| alpha.abs() > b) {
                    best = Some((j, alpha.abs()));
                }
            }
            if let Some((j, _)) = best {
                let w = self.direction(j);
                self.pivot(r, j, &w, 0.0);
                self.xb[r] = 0.0;
            }
        }
        self.refactor()
    }

    fn duals(&self, phase: Phase) -> Vec<f64> {
        let m = self.rows;
        let mut y = vec![0.0; m];
        for (r, &var) in self.basis.iter().enumerate() {
            let c = self.phase_cost(phase, var);
            if c != 0.0 {
                let row = &self.binv[r * m..(r + 1) * m];
                for (yk, b) in y.iter_mut().zip(row) {
                    *yk += c * b;
                }
            }
        }
        y
    }

    fn reduced_cost(&self, phase: Phase, y: &[f64], var: usize) -> f64 {
        let mut d = self.phase_cost(phase, var);
        self.for_column(var, |i, a| d -= y[i] * a);
        d
    }

    fn max_reduced_cost(&self, phase: Phase) -> (f64, Option<usize>) {
        let y = self.duals(phase);
        let mut best = (f64::NEG_INFINITY, None);
        for j in 0..self.cols {
            if self.position[j] != NOT_BASIC {
                continue;
            }
            let d = self.reduced_cost(phase, &y, j);
            if d > best.0 {
                best = (d, Some(j));
            }
        }
        best
    }

    fn direction(&self, var: usize) -> Vec<f64> {
        let m = self.rows;
        let mut w = vec![0.0; m];
        self.for_column(var, |i, a| {
            for (r, wr) in w.iter_mut().enumerate() {
                *wr += self.binv[r * m + i] * a;
            }
        });
        w
    }

    fn run(&mut self, phase: Phase) -> Result<Outcome, LpError> {
        let opt_thr = match phase {
            Phase::One => self.tol.opt,
            Phase::Two => self.opt_threshold(),
        };
        let limit = self.iteration_limit();
        let mut degenerate_run = 0usize;
        let mut bland = false;
        loop {
            // Entering variable: Dantzig's largest reduced cost, or Bland's
            // lowest index once the solver stalls. Ties go to the lowest index.
            let y = self.duals(phase);
            let mut entering: Option<(usize, f64)> = None;
            for j in 0..self.cols {
                if self.position[j] != NOT_BASIC {
                    continue;
                }
                let d = self.reduced_cost(phase, &y, j);
                if d <= opt_thr {
                    continue;
                }
                if bland {
                    entering = Some((j, d));
                    break;
                }
                if entering.is_none_or(|(_, best)| d > best) {
                    entering = Some((j, d));
                }
            }
            let Some((q, _)) = entering else {
                return Ok(Outcome::Optimal);
            };

            self.iterations += 1;
            if self.iterations > limit {
                return Err(LpError::IterationLimit(limit));
            }

            let w = self.direction(q);
            let Some((r, step)) = self.ratio_test(phase, &w, bland) else {
                return Ok(Outcome::Unbounded);
            };
            self.pivot(r, q, &w, step);

            if step <= RATIO_TIE {
                degenerate_run += 1;
                if degenerate_run > STALL_THRESHOLD {
                    bland = true;
                }
            } else {
                degenerate_run = 0;
                bland = false;
            }
            if self.since_refactor >= REFACTOR_EVERY {
                self.refactor()?;
            }
        }
    }

    /// Minimum-ratio test. Returns the leaving basis position and step length.
    fn ratio_test(&self, phase: Phase, w: &[f64], bland: bool) -> Option<(usize, f64)> {
        let ratio = |r: usize| -> Option<f64> {
            let var = self.basis[r];
            if phase == Phase::Two && var >= self.cols {
                // artificials are fixed at zero once Phase 1 is over
                return (w[r].abs() > PIVOT_TOL).then_some(0.0);
            }
            (w[r] > PIVOT_TOL).then(|| self.xb[r].max(0.0) / w[r])
        };
        let min = (0..self.rows).filter_map(ratio).fold(f64::INFINITY, f64::min);
        if !min.is_finite() {
            return None;
        }
        let cutoff = min + RATIO_TIE * (1.0 + min);
        let mut chosen: Option<usize> = None;
        for r in 0..self.rows {
            let Some(t) = ratio(r) else { continue };
            if t > cutoff {
                continue;
            }
            chosen = match chosen {
                None => Some(r),
                Some(c) if bland && self.basis[r] < self.basis[c] => Some(r),
                Some(c) if !bland && w[r].abs() > w[c].abs() => Some(r),
                keep => keep,
            };
        }
        chosen.map(|r| (r, ratio(r).unwrap_or(0.0)))
    }

    fn pivot(&mut self, r: usize, q: usize, w: &[f64], step: f64) {
        let m = self.rows;
        for (i, x) in self.xb.iter_mut().enumerate() {
            if i != r {
                *x -= step * w[i];
            }
        }
        self.xb[r] = step;

        let pr = w[r];
        for k in 0..m {
            self.binv[r * m + k] /= pr;
        }
        for i in 0..m {
            if i == r || w[i] == 0.0 {
                continue;
            }
            let f = w[i];
            for k in 0..m {
                self.binv[i * m + k] -= f * self.binv[r * m + k];
            }
        }

        let leaving = self.basis[r];
        self.position[leaving] = NOT_BASIC;
        self.basis[r] = q;
        self.position[q] = r;
        self.since_refactor += 1;
    }

    /// Recomputes the basis inverse by Gauss-Jordan elimination with partial
    /// pivoting and the basic values from it.
    fn refactor(&mut self) -> Result<(), LpError> {
        let m = self.rows;
        let mut a = vec![0.0; m * m];
        for (r, &var) in self.basis.iter().enumerate() {
            let mut fill = |i: usize, v: f64| a[i * m + r] = v;
            if var >= self.cols {
                fill(var - self.cols, 1.0);
            } else {
                for k in self.col_start[var]..self.col_start[var + 1] {
                    fill(self.row_idx[k], self.vals[k]);
                }
            }
        }
        let mut inv = vec![0.0; m * m];
        for i in 0..m {
            inv[i * m + i] = 1.0;
        }
        for col in 0..m {
            let (p, pv) =
                (col..m)
                    .map(|i| (i, a[i * m + col].abs()))
                    .fold((col, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
            if pv < 1e-12 {
                return Err(LpError::SingularBasis);
            }
            if p != col {
                for k in 0..m {
                    a.swap(p * m + k, col * m + k);
                    inv.swap(p * m + k, col * m + k);
                }
            }
            let d = a[col * m + col];
            for k in 0..m {
                a[col * m + k] /= d;
                inv[col * m + k] /= d;
            }
            for i in 0..m {
                if i == col {
                    continue;
                }
                let f = a[i * m + col];
                if f == 0.0 {
                    continue;
                }
                for k in 0..m {
                    a[i * m + k] -= f * a[col * m + k];
                    inv[i * m + k] -= f * inv[col * m + k];
                }
            }
        }
        // Row r of the inverse belongs to basis position r.
        self.binv = inv;
        self.xb = (0..m)
            .map(|r| (0..m).map(|k| self.binv[r * m + k] * self.rhs[k]).sum::<f64>())
            .collect();
        self.since_refactor = 0;
        Ok(())
    }

    fn failed(&self, status: LpStatus) -> LpSolution {
        LpSolution {
            status,
            primal: vec![0.0; self.cols],
            dual: vec![0.0; self.rows],
            objective: f64::NAN,
            dual_objective: f64::NAN,
            primal_residual: f64::NAN,
            dual_violation: f64::NAN,
            slackness: f64::NAN,
            iterations: self.iterations,
        }
    }

    fn assemble(&self) -> LpSolution {
        let mut primal = vec![0.0; self.cols];
        for (r, &var) in self.basis.iter().enumerate() {
            if var < self.cols {
                primal[var] = self.xb[r];
            }
        }
        let y = self.duals(Phase::Two);

        let mut ax = vec![0.0; self.rows];
        let mut dual_violation = 0.0f64;
        let mut slackness = 0.0;
        for j in 0..self.cols {
            let mut aty = 0.0;
            self.for_column(j, |i, a| {
                ax[i] += a * primal[j];
                aty += a * y[i];
            });
            let slack = aty - self.cost[j];
            dual_violation = dual_violation.max(-slack);
            slackness += primal[j].max(0.0) * slack.max(0.0);
        }
        let primal_residual = ax
            .iter()
            .zip(&self.rhs)
            .fold(0.0f64, |acc, (a, b)| acc.max((a - b).abs()));

        let objective = primal.iter().zip(&self.cost).map(|(z, c)| z * c).sum();
        let dual: Vec<f64> = y.iter().zip(&self.sign).map(|(v, s)| v * s).collect();
        let dual_objective = y.iter().zip(&self.rhs).map(|(v, b)| v * b).sum();

        LpSolution {
            status: LpStatus::Optimal,
            primal,
            dual,
            objective,
            dual_objective,
            primal_residual,
            dual_violation,
            slackness,
            iterations: self.iterations,
        }
    }
}
