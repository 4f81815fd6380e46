//! Payoff vectors `(c_1, …, c_L)`.
//!
//! An American payoff has two components: `c_1(x)` paid when exercising at the
//! first date and `c_2(x, y)` paid at the second. Components are built from a
//! handful of parametric terms or from tables bound to the atom grids.

use alloc::boxed::Box;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measures::DiscreteMeasure;

/// Strict-convexity threshold relative to the scale of `c_2` on the grid.
pub const CONVEXITY_REL_TOL: f64 = 1e-10;
/// Relative threshold under which `c_1(x)` and `c_2(x, x)` count as equal.
pub const DIAGONAL_REL_TOL: f64 = 1e-12;

/// Values of a payoff component on the atom grids. Queries off the grid are
/// errors, never interpolated.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tabulated {
    x_grid: Vec<f64>,
    /// Empty for components that do not depend on `y`.
    y_grid: Vec<f64>,
    /// Row-major `x_grid.len() × max(1, y_grid.len())`.
    values: Vec<f64>,
}

impl Tabulated {
    /// A `y`-independent component, one value per `x`-atom.
    pub fn over_x(x_grid: &[f64], values: Vec<f64>) -> Result<Self> {
        if values.len() != x_grid.len() {
            return Err(Error::GridMismatch(format!(
                "table has {} entries for {} first-date atoms",
                values.len(),
                x_grid.len()
            )));
        }
        Ok(Self {
            x_grid: x_grid.to_vec(),
            y_grid: Vec::new(),
            values,
        })
    }

    /// A full matrix indexed by `(x-atom, y-atom)`.
    pub fn over_xy(x_grid: &[f64], y_grid: &[f64], rows: Vec<Vec<f64>>) -> Result<Self> {
        if rows.len() != x_grid.len() || rows.iter().any(|r| r.len() != y_grid.len()) {
            return Err(Error::GridMismatch(format!(
                "table must be {}x{}",
                x_grid.len(),
                y_grid.len()
            )));
        }
        Ok(Self {
            x_grid: x_grid.to_vec(),
            y_grid: y_grid.to_vec(),
            values: rows.into_iter().flatten().collect(),
        })
    }

    fn lookup(&self, x: f64, y: f64) -> Result<f64> {
        let off = || Error::OffGrid { x, y };
        let i = self.x_grid.binary_search_by(|a| a.total_cmp(&x)).map_err(|_| off())?;
        if self.y_grid.is_empty() {
            return Ok(self.values[i]);
        }
        let j = self.y_grid.binary_search_by(|a| a.total_cmp(&y)).map_err(|_| off())?;
        Ok(self.values[i * self.y_grid.len() + j])
    }
}

/// One payoff component `c_l(x, y)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Payoff {
    Constant {
        value: f64,
    },
    /// `(K - x)^+`
    PutX {
        strike: f64,
    },
    /// `(K - y)^+`
    PutY {
        strike: f64,
    },
    /// `scale · x²`
    SquareX {
        scale: f64,
    },
    /// `scale · y²`
    SquareY {
        scale: f64,
    },
    /// `scale · (y - x)²`
    SpreadSquared {
        scale: f64,
    },
    Sum {
        terms: Vec<Payoff>,
    },
    Table(Box<Tabulated>),
}

impl Payoff {
    pub fn depends_on_y(&self) -> bool {
        match self {
            Self::Constant { .. } | Self::PutX { .. } | Self::SquareX { .. } => false,
            Self::PutY { .. } | Self::SquareY { .. } | Self::SpreadSquared { .. } => true,
            Self::Sum { terms } => terms.iter().any(Payoff::depends_on_y),
            Self::Table(t) => !t.y_grid.is_empty(),
        }
    }

    pub fn eval(&self, x: f64, y: f64) -> Result<f64> {
        let v = match self {
            Self::Constant { value } => *value,
            Self::PutX { strike } => (strike - x).max(0.0),
            Self::PutY { strike } => (strike - y).max(0.0),
            Self::SquareX { scale } => scale * x * x,
            Self::SquareY { scale } => scale * y * y,
            Self::SpreadSquared { scale } => scale * (y - x) * (y - x),
            Self::Sum { terms } => {
                let mut acc = 0.0;
                for t in terms {
                    acc += t.eval(x, y)?;
                }
                acc
            }
            Self::Table(t) => t.lookup(x, y)?,
        };
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::NonFiniteCost { x, y })
        }
    }

    /// Samples this component into a table over the given grids.
    pub fn tabulate(&self, x_grid: &[f64], y_grid: &[f64]) -> Result<Tabulated> {
        if self.depends_on_y() {
            let rows = x_grid
                .iter()
                .map(|&x| y_grid.iter().map(|&y| self.eval(x, y)).collect())
                .collect::<Result<Vec<Vec<f64>>>>()?;
            Tabulated::over_xy(x_grid, y_grid, rows)
        } else {
            let values = x_grid.iter().map(|&x| self.eval(x, x)).collect::<Result<Vec<f64>>>()?;
            Tabulated::over_x(x_grid, values)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CostSpec {
    components: Vec<Payoff>,
    american: bool,
}

impl CostSpec {
    /// Exercise payoff `c_1(x)` at the first date, `c_2(x, y)` at the second.
    pub fn american(c1: Payoff, c2: Payoff) -> Result<Self> {
        if c1.depends_on_y() {
            return Err(Error::InvalidParameter("first-date payoff must not depend on y".into()));
        }
        Ok(Self {
            components: vec![c1, c2],
            american: true,
        })
    }

    pub fn generic(components: Vec<Payoff>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::InvalidParameter("cost needs at least one component".into()));
        }
        Ok(Self {
            components,
            american: false,
        })
    }

    /// `c_1 = (K1 - x)^+`, `c_2 = (K2 - y)^+` with `K1 > K2`.
    pub fn american_put(k1: f64, k2: f64) -> Result<Self> {
        if k1.is_nan() || k2.is_nan() || k1 <= k2 {
            return Err(Error::InvalidParameter(format!(
                "american put needs K1 > K2, got {k1} <= {k2}"
            )));
        }
        Self::american(Payoff::PutX { strike: k1 }, Payoff::PutY { strike: k2 })
    }

    /// `c_1 = (K1 - x)^+`, `c_2 = (K2 - y)^+ + ε y²` with `ε > 0`, strictly
    /// convex in `y`.
    pub fn put_plus_quadratic(k1: f64, k2: f64, epsilon: f64) -> Result<Self> {
        if epsilon.is_nan() || epsilon <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "epsilon must be positive, got {epsilon}"
            )));
        }
        Self::american(
            Payoff::PutX { strike: k1 },
            Payoff::Sum {
                terms: vec![Payoff::PutY { strike: k2 }, Payoff::SquareY { scale: epsilon }],
            },
        )
    }

    /// `c_1 ≡ a`, `c_2 = (y - x)²`.
    pub fn quadratic_spread(c1: f64) -> Result<Self> {
        Self::american(Payoff::Constant { value: c1 }, Payoff::SpreadSquared { scale: 1.0 })
    }

    /// Every one of `count` components equal to `value`. Two components make an
    /// American cost.
    pub fn constant(value: f64, count: usize) -> Result<Self> {
        let c = Payoff::Constant { value };
        if count == 2 {
            Self::american(c.clone(), c)
        } else {
            Self::generic(vec![c; count])
        }
    }

    /// Tabulated American cost: `c1[i]` at μ-atom `i`, `c2[i][j]` at
    /// `(μ-atom i, ν-atom j)`.
    pub fn table(mu: &DiscreteMeasure, nu: &DiscreteMeasure, c1: Vec<f64>, c2: Vec<Vec<f64>>) -> Result<Self> {
        Self::american(
            Payoff::Table(Box::new(Tabulated::over_x(mu.atoms(), c1)?)),
            Payoff::Table(Box::new(Tabulated::over_xy(mu.atoms(), nu.atoms(), c2)?)),
        )
    }

    pub fn count(&self) -> usize {
        self.components.len()
    }

    pub fn is_american(&self) -> bool {
        self.american
    }

    pub fn components(&self) -> &[Payoff] {
        &self.components
    }

    pub fn component(&self, l: usize) -> Result<&Payoff> {
        if l == 0 || l > self.components.len() {
            return Err(Error::CostIndex {
                index: l,
                count: self.components.len(),
            });
        }
        Ok(&self.components[l - 1])
    }

    /// `c_l(x, y)` with `l` counted from 1.
    pub fn evaluate(&self, l: usize, x: f64, y: f64) -> Result<f64> {
        self.component(l)?.eval(x, y)
    }

    /// `c_l` on the grid, row-major `μ-atoms × ν-atoms`.
    pub fn grid(&self, l: usize, mu: &DiscreteMeasure, nu: &DiscreteMeasure) -> Result<Vec<f64>> {
        let c = self.component(l)?;
        let mut out = Vec::with_capacity(mu.len() * nu.len());
        for &x in mu.atoms() {
            for &y in nu.atoms() {
                out.push(c.eval(x, y)?);
            }
        }
        Ok(out)
    }

    /// Every component sampled into tables on the given grids.
    pub fn tabulate(&self, mu: &DiscreteMeasure, nu: &DiscreteMeasure) -> Result<Self> {
        let components = self
            .components
            .iter()
            .map(|c| c.tabulate(mu.atoms(), nu.atoms()).map(|t| Payoff::Table(Box::new(t))))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            components,
            american: self.american,
        })
    }

    pub(crate) fn require_american(&self) -> Result<()> {
        if self.american {
            Ok(())
        } else {
            Err(Error::NotAmerican)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HypothesisReport {
    /// Every `y ↦ c_2(x, y)` has positive second divided difference over every
    /// three consecutive ν-atoms. False when ν has fewer than three atoms.
    pub strict_convexity: bool,
    /// `c_1(x) ≠ c_2(x, x)` at every μ-atom.
    pub diagonal_separated: bool,
    /// Sign of `c_1(x) - c_2(x, x)` per μ-atom; 0 for a tie or when `c_2(x, x)`
    /// cannot be evaluated (a table without `x` on its ν-grid).
    pub diagonal_signs: Vec<i8>,
    pub nu_absolutely_continuous_origin: bool,
}

/// Checks the hypotheses under which optimal exercise is pure: strict
/// convexity of `c_2` in `y`, `c_1(x) ≠ c_2(x, x)`, and whether ν came from a
/// density. Advisory only; nothing here blocks a solve.
pub fn check_theorem_hypotheses(
    cost: &CostSpec,
    mu: &DiscreteMeasure,
    nu: &DiscreteMeasure,
) -> Result<HypothesisReport> {
    cost.require_american()?;
    let c2 = cost.component(2)?;
    let c2_grid = cost.grid(2, mu, nu)?;
    let scale = 1.0 + c2_grid.iter().fold(0.0f64, |a, v| a.max(v.abs()));

    let ys = nu.atoms();
    let n = ys.len();
    let mut strict = n >= 3;
    'rows: for i in 0..mu.len() {
        let row = &c2_grid[i * n..(i + 1) * n];
        for j in 1..n.saturating_sub(1) {
            let left = (row[j] - row[j - 1]) / (ys[j] - ys[j - 1]);
            let right = (row[j + 1] - row[j]) / (ys[j + 1] - ys[j]);
            if right - left <= CONVEXITY_REL_TOL * scale {
                strict = false;
                break 'rows;
            }
        }
    }

    let mut signs = Vec::with_capacity(mu.len());
    for &x in mu.atoms() {
        let sign = match (cost.evaluate(1, x, x), c2.eval(x, x)) {
            (Ok(a), Ok(b)) if (a - b).abs() > DIAGONAL_REL_TOL * scale => {
                if a > b {
                    1
                } else {
                    -1
                }
            }
            _ => 0,
        };
        signs.push(sign);
    }

    Ok(HypothesisReport {
        strict_convexity: strict,
        diagonal_separated: signs.iter().all(|&s| s != 0),
        diagonal_signs: signs,
        nu_absolutely_continuous_origin: nu.meta.absolutely_continuous_origin,
    })
}
