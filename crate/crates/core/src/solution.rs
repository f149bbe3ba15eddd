//! Standardized (unit-rate) equilibrium tables indexed by period and shape.

use serde::{Deserialize, Serialize};

use crate::environment::Environment;
use crate::error::{Error, Result};
use crate::weibull::GridSpec;

/// How a solution was produced.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SolveMethod {
    /// Exact fixed-point recursion for exponential demand.
    Exponential,
    /// Grid search with manufacturer-favorable tie-breaking.
    Weibull { grid: GridSpec },
}

/// One period of the standardized solution.
///
/// Entry `n` refers to the shape `a = a1 + n`. Period `t` carries `T + t`
/// entries, which is exactly what the recursion for period `t - 1` consumes
/// to cover `a1 ..= a1 + T`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeriodRow {
    pub t: usize,
    pub w_star: Vec<f64>,
    pub z_star: Vec<f64>,
    pub f_r: Vec<f64>,
    pub f_m: Vec<f64>,
}

impl PeriodRow {
    pub fn len(&self) -> usize {
        self.w_star.len()
    }

    pub fn is_empty(&self) -> bool {
        self.w_star.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StandardizedSolution {
    pub environment: Environment,
    pub method: SolveMethod,
    /// Periods `1..=T` in order. Values at `T + 1` are identically zero and
    /// not stored.
    pub periods: Vec<PeriodRow>,
}

impl StandardizedSolution {
    /// Number of entries stored for period `t` of a horizon-`horizon` solve.
    pub fn row_width(horizon: usize, t: usize) -> usize {
        horizon + t
    }

    pub fn horizon(&self) -> usize {
        self.periods.len()
    }

    pub fn shape_at(&self, n: usize) -> f64 {
        self.environment.a1 + n as f64
    }

    /// Table offset of a shape value, if it lies on the lattice `a1 + n`.
    pub fn offset_of(&self, a: f64) -> Option<usize> {
        let x = a - self.environment.a1;
        let n = x.round();
        if n >= 0.0 && (x - n).abs() <= 1e-9 * (1.0 + a.abs()) {
            Some(n as usize)
        } else {
            None
        }
    }

    pub fn row(&self, t: usize) -> Option<&PeriodRow> {
        t.checked_sub(1).and_then(|i| self.periods.get(i))
    }

    fn lookup(&self, t: usize, n: usize, pick: impl Fn(&PeriodRow) -> &Vec<f64>) -> Result<f64> {
        self.row(t)
            .and_then(|row| pick(row).get(n).copied())
            .ok_or(Error::Lookup { t, a: self.shape_at(n) })
    }

    pub fn w_star(&self, t: usize, n: usize) -> Result<f64> {
        self.lookup(t, n, |r| &r.w_star)
    }

    pub fn z_star(&self, t: usize, n: usize) -> Result<f64> {
        self.lookup(t, n, |r| &r.z_star)
    }

    /// Retailer value; zero after the horizon.
    pub fn f_r(&self, t: usize, n: usize) -> Result<f64> {
        if t == self.horizon() + 1 {
            return Ok(0.0);
        }
        self.lookup(t, n, |r| &r.f_r)
    }

    /// Manufacturer value; zero after the horizon.
    pub fn f_m(&self, t: usize, n: usize) -> Result<f64> {
        if t == self.horizon() + 1 {
            return Ok(0.0);
        }
        self.lookup(t, n, |r| &r.f_m)
    }

    /// Effective price `p + fR_{t+1}(a+1) - fR_{t+1}(a)` faced in period `t`.
    pub fn effective_price(&self, t: usize, n: usize) -> Result<f64> {
        Ok(self.environment.p + self.f_r(t + 1, n + 1)? - self.f_r(t + 1, n)?)
    }

    /// `(fR, fM)` of period `t + 1` at offsets `n` and `n + 1`.
    pub(crate) fn next_values(&self, t: usize, n: usize) -> Result<NextValues> {
        Ok(NextValues {
            f_r: (self.f_r(t + 1, n)?, self.f_r(t + 1, n + 1)?),
            f_m: (self.f_m(t + 1, n)?, self.f_m(t + 1, n + 1)?),
        })
    }

    /// True when `a1 + n` can occur at the start of period `t`.
    pub fn reachable(t: usize, n: usize) -> bool {
        t >= 1 && n < t
    }
}

/// Continuation values at `a` and `a + 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NextValues {
    pub f_r: (f64, f64),
    pub f_m: (f64, f64),
}

impl NextValues {
    pub const TERMINAL: NextValues = NextValues {
        f_r: (0.0, 0.0),
        f_m: (0.0, 0.0),
    };
}
