//! Physical-scale equilibrium strategies and values recovered from a
//! standardized solution.
//!
//! At state `(t, a, b)` the wholesale price is the standardized one, orders
//! scale by `b^{1/k}`, and values by `b^{1/k} / (a - 1)`.

use crate::belief::Belief;
use crate::error::{domain, Error, Result};
use crate::exponential::retailer_best_response_exp;
use crate::simulate::{ContinuationValues, MarkovPolicy};
use crate::solution::{SolveMethod, StandardizedSolution};
use crate::weibull::{GridSpec, Stage};

#[derive(Debug, Clone, Copy)]
pub struct EquilibriumPolicy<'a> {
    pub solution: &'a StandardizedSolution,
    pub k: f64,
}

impl<'a> EquilibriumPolicy<'a> {
    pub fn new(solution: &'a StandardizedSolution) -> Self {
        Self {
            solution,
            k: solution.environment.k,
        }
    }

    fn offset(&self, t: usize, a: f64) -> Result<usize> {
        self.solution.offset_of(a).ok_or(Error::Lookup { t, a })
    }

    fn scale(&self, b: f64) -> Result<f64> {
        if !(b > 0.0 && b.is_finite()) {
            return Err(domain(format!("rate hyperparameter must be positive, got {b}")));
        }
        Ok(if self.k == 1.0 { b } else { b.powf(1.0 / self.k) })
    }

    /// Equilibrium wholesale price; independent of `b`.
    pub fn mpe_wholesale(&self, t: usize, a: f64, _b: f64) -> Result<f64> {
        let n = self.offset(t, a)?;
        self.solution.w_star(t, n)
    }

    /// Standardized retailer response at an arbitrary price.
    pub fn standardized_order(&self, t: usize, a: f64, w: f64) -> Result<f64> {
        if !(w > 0.0) {
            return Err(domain(format!("wholesale price must be positive, got {w}")));
        }
        let n = self.offset(t, a)?;
        let w_star = self.solution.w_star(t, n)?;
        if w == w_star {
            return self.solution.z_star(t, n);
        }
        if self.k == 1.0 {
            let pbar = self.solution.effective_price(t, n)?;
            return Ok(retailer_best_response_exp(a, pbar, w));
        }
        let grid = match &self.solution.method {
            SolveMethod::Weibull { grid } => *grid,
            SolveMethod::Exponential => GridSpec::default(),
        };
        let next = self.solution.next_values(t, n)?;
        let mut env = self.solution.environment.clone();
        env.w_lo = Some(env.w_lo.map_or(w, |lo| lo.min(w)));
        env.w_hi = Some(env.w_hi.map_or(w, |hi| hi.max(w)));
        let stage = Stage::new(&env, a, next.f_r, next.f_m, grid)?;
        Ok(stage.response(w).1)
    }

    /// Equilibrium order `b^{1/k} z*(t, a, w)`.
    pub fn mpe_order(&self, t: usize, a: f64, b: f64, w: f64) -> Result<f64> {
        let scale = self.scale(b)?;
        Ok(scale * self.standardized_order(t, a, w)?)
    }

    /// `(retailer, manufacturer)` values; zero after the horizon.
    pub fn mpe_values(&self, t: usize, a: f64, b: f64) -> Result<(f64, f64)> {
        if !(a > 1.0) {
            return Err(domain(format!("values are defined for a > 1, got {a}")));
        }
        let scale = self.scale(b)?;
        if t == self.solution.horizon() + 1 {
            return Ok((0.0, 0.0));
        }
        let n = self.offset(t, a)?;
        let factor = scale / (a - 1.0);
        Ok((factor * self.solution.f_r(t, n)?, factor * self.solution.f_m(t, n)?))
    }
}

impl MarkovPolicy for EquilibriumPolicy<'_> {
    fn wholesale(&self, t: usize, belief: &Belief) -> Result<f64> {
        self.mpe_wholesale(t, belief.a, belief.b)
    }

    fn order(&self, t: usize, belief: &Belief, w: f64) -> Result<f64> {
        self.mpe_order(t, belief.a, belief.b, w)
    }
}

impl ContinuationValues for EquilibriumPolicy<'_> {
    fn values(&self, t: usize, belief: &Belief) -> Result<(f64, f64)> {
        self.mpe_values(t, belief.a, belief.b)
    }
}
