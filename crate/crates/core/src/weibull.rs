//! Grid-based backward recursion for general Weibull shape `k`.
//!
//! Each `(t, a)` cell is a Stackelberg stage game on the standardized scale.
//! The retailer's problem is scanned on a fixed order grid over `[0, z̄]` and
//! refined by golden section around the best node; the manufacturer scans a
//! price grid over `[w_lo, w_hi]`, breaking retailer ties in its own favor.
//! The result is an ε-equilibrium with ε set by the grid resolution.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::demand::{predictive_mean, std_survival, DemandModel, Mean};
use crate::environment::Environment;
use crate::error::{domain, Error, Result};
use crate::search::{golden_max, linspace};
use crate::solution::{PeriodRow, SolveMethod, StandardizedSolution};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub n_w: usize,
    pub n_z: usize,
    pub refine_iters: usize,
    /// Relative payoff tolerance; the absolute band is `tie_tol * (1 + |max|)`.
    pub tie_tol: f64,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            n_w: 512,
            n_z: 1024,
            refine_iters: 60,
            tie_tol: 1e-9,
        }
    }
}

impl GridSpec {
    pub fn validate(&self) -> Result<()> {
        if self.n_w == 0 || self.n_z == 0 || self.refine_iters == 0 {
            return Err(Error::Validation("grid sizes and refine_iters must be positive".into()));
        }
        if !(self.tie_tol > 0.0) {
            return Err(Error::Validation(format!("tie_tol must be positive, got {}", self.tie_tol)));
        }
        Ok(())
    }

    pub fn tie_band(&self, max: f64) -> f64 {
        self.tie_tol * (1.0 + max.abs())
    }
}

fn check_shape(a: f64, k: f64) -> Result<()> {
    if !(k > 0.0) {
        return Err(domain(format!("k must be positive, got {k}")));
    }
    if !(a > 1.0 / k) || !(a > 1.0) {
        return Err(domain(format!("need a > max(1, 1/k), got a = {a}, k = {k}")));
    }
    Ok(())
}

#[inline]
fn expect_unchecked(f_at_a: f64, f_at_a1: f64, z: f64, a: f64, k: f64) -> f64 {
    let shifted = a - 1.0 / k;
    let surv = std_survival(z, shifted, k);
    (a - 1.0) / shifted * (1.0 - surv) * f_at_a1 + surv * f_at_a
}

/// Continuation operator `Ê[f, z | a]`: next-period value averaged over the
/// censoring event, in standardized units.
pub fn expect_operator(f_at_a: f64, f_at_a_plus_1: f64, z: f64, a: f64, k: f64) -> Result<f64> {
    check_shape(a, k)?;
    if !(z >= 0.0) {
        return Err(domain(format!("order must be nonnegative, got {z}")));
    }
    Ok(expect_unchecked(f_at_a, f_at_a_plus_1, z, a, k))
}

/// Retailer stage objective `(a-1)(p E[min(D, z)] - w z) + Ê[fR_next, z | a]`.
pub fn retailer_objective(p: f64, w: f64, z: f64, a: f64, k: f64, f_r_next: (f64, f64)) -> Result<f64> {
    check_shape(a, k)?;
    let sales = DemandModel::new(k)?.expected_min_sales(z, a, 1.0)?;
    Ok((a - 1.0) * (p * sales - w * z) + expect_unchecked(f_r_next.0, f_r_next.1, z, a, k))
}

/// Order level beyond which every standardized order is dominated by `z = 0`.
pub fn retailer_upper_bound(a: f64, k: f64, w_lo: f64, f_r_next_a1: f64, p: f64) -> Result<f64> {
    check_shape(a, k)?;
    if !(w_lo > 0.0) {
        return Err(domain(format!("w_lo must be positive, got {w_lo}")));
    }
    let mu = match predictive_mean(a, 1.0, k)? {
        Mean::Finite(m) => m,
        Mean::Infinite => return Err(Error::InfiniteMean { a, k }),
    };
    Ok((p * mu + f_r_next_a1 / (a - 1.0 / k)) / w_lo)
}

/// Near-optimal retailer orders at one wholesale price.
#[derive(Debug, Clone, PartialEq)]
pub struct RetailerArgmax {
    /// `(z, retailer value)` pairs within the tie band, ascending in `z`.
    pub candidates: Vec<(f64, f64)>,
    /// Best value found, i.e. `f̂R(a, w)`.
    pub value: f64,
}

/// Outcome of the manufacturer's choice in one cell.
#[derive(Debug, Clone, PartialEq)]
pub struct Selection {
    pub w_star: f64,
    pub z_star: f64,
    pub f_r: f64,
    pub f_m: f64,
    /// Retailer candidates tied with the maximum at `w_star`.
    pub retailer_ties: usize,
    /// Other grid prices within the manufacturer's tie band.
    pub alternates: Vec<f64>,
    /// Gain of the golden-section refinement over the best grid price.
    pub refine_delta: f64,
}

/// Precomputed stage game for a single `(t, a)` cell.
#[derive(Debug, Clone)]
pub struct Stage {
    pub a: f64,
    pub k: f64,
    pub p: f64,
    pub c: f64,
    pub w_lo: f64,
    pub w_hi: f64,
    f_r_next: (f64, f64),
    f_m_next: (f64, f64),
    grid: GridSpec,
    model: DemandModel,
    z: Vec<f64>,
    sales: Vec<f64>,
    base_r: Vec<f64>,
}

impl Stage {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        env: &Environment,
        a: f64,
        f_r_next: (f64, f64),
        f_m_next: (f64, f64),
        grid: GridSpec,
    ) -> Result<Self> {
        grid.validate()?;
        let (w_lo, w_hi) = match (env.w_lo, env.w_hi) {
            (Some(lo), Some(hi)) if lo > 0.0 && hi >= lo => (lo, hi),
            _ => return Err(Error::Validation("wholesale bounds with 0 < w_lo <= w_hi are required".into())),
        };
        let k = env.k;
        let z_bar = retailer_upper_bound(a, k, w_lo, f_r_next.1, env.p)?;
        let model = DemandModel::new(k)?;
        let z = linspace(0.0, z_bar, grid.n_z);
        let mut sales = Vec::with_capacity(z.len());
        let mut acc = 0.0;
        sales.push(0.0);
        for pair in z.windows(2) {
            acc += model.survival_integral(pair[0], pair[1], a, 1.0);
            sales.push(if k == 1.0 { model.expected_min_sales_unchecked(pair[1], a, 1.0) } else { acc });
        }
        let base_r = z
            .iter()
            .zip(&sales)
            .map(|(&zj, &sj)| (a - 1.0) * env.p * sj + expect_unchecked(f_r_next.0, f_r_next.1, zj, a, k))
            .collect();
        Ok(Self {
            a,
            k,
            p: env.p,
            c: env.c,
            w_lo,
            w_hi,
            f_r_next,
            f_m_next,
            grid,
            model,
            z,
            sales,
            base_r,
        })
    }

    pub fn z_grid(&self) -> &[f64] {
        &self.z
    }

    fn sales_at(&self, z: f64) -> f64 {
        if self.k == 1.0 || self.z.len() < 2 {
            return self.model.expected_min_sales_unchecked(z, self.a, 1.0);
        }
        let h = self.z[1];
        let j = ((z / h).floor() as usize).min(self.z.len() - 1);
        self.sales[j] + self.model.survival_integral(self.z[j], z, self.a, 1.0)
    }

    /// Retailer stage objective at an arbitrary order.
    pub fn retailer_value(&self, w: f64, z: f64) -> f64 {
        let (a, k) = (self.a, self.k);
        (a - 1.0) * (self.p * self.sales_at(z) - w * z) + expect_unchecked(self.f_r_next.0, self.f_r_next.1, z, a, k)
    }

    /// Manufacturer stage objective `(a-1)(w-c) z + Ê[fM_next, z | a]`.
    pub fn manufacturer_value(&self, w: f64, z: f64) -> f64 {
        (self.a - 1.0) * (w - self.c) * z + expect_unchecked(self.f_m_next.0, self.f_m_next.1, z, self.a, self.k)
    }

    /// Retailer candidates within the tie band at price `w`.
    ///
    /// When golden-section refinement improves on the best grid node, the
    /// refined point replaces the nodes of its bracket.
    pub fn retailer_argmax(&self, w: f64) -> RetailerArgmax {
        let slope = (self.a - 1.0) * w;
        let vals: Vec<f64> = self.base_r.iter().zip(&self.z).map(|(b, z)| b - slope * z).collect();
        let (jb, grid_max) = vals
            .iter()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |acc, (j, &v)| if v > acc.1 { (j, v) } else { acc });
        let lo = self.z[jb.saturating_sub(1)];
        let hi = self.z[(jb + 1).min(self.z.len() - 1)];
        let (zr, vr) = golden_max(|z| self.retailer_value(w, z), lo, hi, self.grid.refine_iters);
        let refined = vr >= grid_max && zr != self.z[jb];
        let value = if refined { vr } else { grid_max };
        let band = self.grid.tie_band(value);
        // An accepted refinement is the maximizer over its bracket, so the
        // bracket nodes are coarser copies of it rather than separate ties.
        let subsumed = |j: usize| refined && j + 1 >= jb && j <= jb + 1;
        let mut candidates: Vec<(f64, f64)> = self
            .z
            .iter()
            .zip(&vals)
            .enumerate()
            .filter(|&(j, (_, &v))| v >= value - band && !subsumed(j))
            .map(|(_, (&z, &v))| (z, v))
            .collect();
        if refined {
            let pos = candidates.partition_point(|(z, _)| *z < zr);
            candidates.insert(pos, (zr, vr));
        }
        RetailerArgmax { candidates, value }
    }

    /// The manufacturer-favorable retailer response at `w`:
    /// `(manufacturer value, z, retailer value, tie count)`.
    pub fn response(&self, w: f64) -> (f64, f64, f64, usize) {
        let set = self.retailer_argmax(w);
        let ties = set.candidates.len();
        let mut best = (f64::NEG_INFINITY, 0.0, 0.0);
        for &(z, v) in &set.candidates {
            let m = self.manufacturer_value(w, z);
            if m > best.0 {
                best = (m, z, v);
            }
        }
        (best.0, best.1, best.2, ties)
    }

    /// Manufacturer's price choice with tie-breaking and refinement.
    pub fn select(&self) -> Result<Selection> {
        let ws = linspace(self.w_lo, self.w_hi, self.grid.n_w);
        let values: Vec<(f64, f64, f64, usize)> = ws.par_iter().map(|&w| self.response(w)).collect();
        let vmax = values.iter().map(|v| v.0).fold(f64::NEG_INFINITY, f64::max);
        if !vmax.is_finite() {
            return Err(Error::Internal(format!("empty retailer response at a = {}", self.a)));
        }
        let band = self.grid.tie_band(vmax);
        let i = values.iter().position(|v| v.0 >= vmax - band).expect("maximum is attained");
        let alternates = ws
            .iter()
            .zip(&values)
            .enumerate()
            .filter(|(j, (_, v))| *j != i && v.0 >= vmax - band)
            .map(|(_, (&w, _))| w)
            .collect();
        let mut chosen = (ws[i], values[i]);
        let mut refine_delta = 0.0;
        if ws.len() > 1 {
            let lo = ws[i.saturating_sub(1)];
            let hi = ws[(i + 1).min(ws.len() - 1)];
            let (wr, vr) = golden_max(|w| self.response(w).0, lo, hi, self.grid.refine_iters);
            if vr >= values[i].0 {
                refine_delta = vr - values[i].0;
                chosen = (wr, self.response(wr));
            }
        }
        let (w_star, (f_m, z_star, f_r, retailer_ties)) = chosen;
        Ok(Selection {
            w_star,
            z_star,
            f_r,
            f_m,
            retailer_ties,
            alternates,
            refine_delta,
        })
    }
}

/// Near-optimal retailer orders at price `w` for a cell.
pub fn retailer_argmax_set(
    env: &Environment,
    w: f64,
    a: f64,
    f_r_next: (f64, f64),
    grid: GridSpec,
) -> Result<RetailerArgmax> {
    Ok(Stage::new(env, a, f_r_next, (0.0, 0.0), grid)?.retailer_argmax(w))
}

/// Manufacturer-favorable equilibrium of one stage game.
pub fn manufacturer_select(
    env: &Environment,
    a: f64,
    f_r_next: (f64, f64),
    f_m_next: (f64, f64),
    grid: GridSpec,
) -> Result<Selection> {
    Stage::new(env, a, f_r_next, f_m_next, grid)?.select()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellDiagnostics {
    pub t: usize,
    pub a: f64,
    pub retailer_ties: usize,
    pub manufacturer_alternates: Vec<f64>,
    pub refine_delta: f64,
    /// Spacing of the order grid.
    pub z_step: f64,
    /// Spacing of the price grid.
    pub w_step: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeibullDiagnostics {
    pub grid: GridSpec,
    pub cells: Vec<CellDiagnostics>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WeibullSolve {
    pub solution: StandardizedSolution,
    pub diagnostics: WeibullDiagnostics,
}

/// Backward recursion over `t = T, ..., 1` on the standardized scale.
pub fn backward_solve_weibull(env: &Environment, grid: GridSpec) -> Result<WeibullSolve> {
    grid.validate()?;
    if !(env.a1 > env.a1_floor()) {
        return Err(Error::Validation(format!(
            "grid solver needs a1 > max(1, 1/k), got a1 = {}, k = {}",
            env.a1, env.k
        )));
    }
    let horizon = env.horizon;
    if horizon == 0 {
        return Err(Error::Validation("horizon must be at least 1".into()));
    }
    let w_step = match (env.w_lo, env.w_hi) {
        (Some(lo), Some(hi)) if grid.n_w > 1 => (hi - lo) / (grid.n_w - 1) as f64,
        (Some(_), Some(_)) => 0.0,
        _ => return Err(Error::Validation("wholesale bounds are required by the grid solver".into())),
    };
    let mut rows: Vec<PeriodRow> = Vec::with_capacity(horizon);
    let mut cells_diag = Vec::new();
    for t in (1..=horizon).rev() {
        let width = StandardizedSolution::row_width(horizon, t);
        let next = rows.last();
        let out: Vec<(Selection, f64)> = (0..width)
            .into_par_iter()
            .map(|n| {
                let a = env.a1 + n as f64;
                let (f_r_next, f_m_next) = match next {
                    None => ((0.0, 0.0), (0.0, 0.0)),
                    Some(r) => ((r.f_r[n], r.f_r[n + 1]), (r.f_m[n], r.f_m[n + 1])),
                };
                let locate = |e: Error| Error::Invariant { t, a, detail: e.to_string() };
                let stage = Stage::new(env, a, f_r_next, f_m_next, grid).map_err(locate)?;
                let sel = stage.select().map_err(locate)?;
                let band = grid.tie_band(sel.f_r.max(sel.f_m));
                if !(sel.f_r >= -band && sel.f_m >= -band && sel.f_r.is_finite() && sel.f_m.is_finite()) {
                    return Err(Error::Invariant {
                        t,
                        a,
                        detail: format!("negative or non-finite stage values ({}, {})", sel.f_r, sel.f_m),
                    });
                }
                let z_step = stage.z.get(1).copied().unwrap_or(0.0);
                Ok((sel, z_step))
            })
            .collect::<Result<_>>()?;
        for (n, (sel, z_step)) in out.iter().enumerate() {
            cells_diag.push(CellDiagnostics {
                t,
                a: env.a1 + n as f64,
                retailer_ties: sel.retailer_ties,
                manufacturer_alternates: sel.alternates.clone(),
                refine_delta: sel.refine_delta,
                z_step: *z_step,
                w_step,
            });
        }
        rows.push(PeriodRow {
            t,
            w_star: out.iter().map(|(s, _)| s.w_star).collect(),
            z_star: out.iter().map(|(s, _)| s.z_star).collect(),
            f_r: out.iter().map(|(s, _)| s.f_r).collect(),
            f_m: out.iter().map(|(s, _)| s.f_m).collect(),
        });
    }
    rows.reverse();
    cells_diag.reverse();
    Ok(WeibullSolve {
        solution: StandardizedSolution {
            environment: env.clone(),
            method: SolveMethod::Weibull { grid },
            periods: rows,
        },
        diagnostics: WeibullDiagnostics { grid, cells: cells_diag },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exponential::{backward_solve_exp, retailer_best_response_exp, wholesale_fixed_point};
    use approx::assert_relative_eq;

    fn env(k: f64, p: f64, c: f64, horizon: usize, a1: f64) -> Environment {
        let mut e = Environment::exponential(p, c, horizon, a1, 1.0).with_wholesale_bounds(0.01, p);
        e.k = k;
        e
    }

    #[test]
    fn expect_operator_examples() {
        assert_eq!(expect_operator(0.7, 3.0, 0.0, 2.5, 1.7).unwrap(), 0.7);
        assert_relative_eq!(expect_operator(0.4, 0.4, 2.3, 3.0, 1.0).unwrap(), 0.4, max_relative = 1e-14);
        let direct = (1.0 / 1.5) * (1.0 - 0.5f64.powf(1.5));
        assert_relative_eq!(expect_operator(0.0, 1.0, 1.0, 2.0, 2.0).unwrap(), direct, max_relative = 1e-14);
        assert!((direct - 0.430_964_5).abs() < 1e-7);
        assert!(expect_operator(0.0, 1.0, 1.0, 0.4, 2.0).is_err());
    }

    #[test]
    fn retailer_objective_examples() {
        assert_eq!(retailer_objective(1.0, 0.3, 0.0, 2.0, 1.5, (0.0, 0.0)).unwrap(), 0.0);
        assert_relative_eq!(retailer_objective(1.0, 0.25, 1.0, 2.0, 1.0, (0.0, 0.0)).unwrap(), 0.25, max_relative = 1e-14);
        assert_eq!(retailer_objective(1.0, 0.3, 0.0, 2.0, 1.5, (0.9, 4.0)).unwrap(), 0.9);
    }

    #[test]
    fn upper_bound_examples() {
        assert_relative_eq!(retailer_upper_bound(2.0, 1.0, 0.1, 0.0, 1.0).unwrap(), 10.0, max_relative = 1e-14);
        let b1 = retailer_upper_bound(2.5, 2.0, 0.1, 0.3, 1.0).unwrap();
        let b2 = retailer_upper_bound(2.5, 2.0, 0.2, 0.3, 1.0).unwrap();
        assert_relative_eq!(b1, 2.0 * b2, max_relative = 1e-14);
        assert_relative_eq!(retailer_upper_bound(3.0, 1.0, 0.5, 1.0, 2.0).unwrap(), 3.0, max_relative = 1e-14);
    }

    #[test]
    fn orders_past_the_bound_are_dominated() {
        let e = env(1.6, 1.3, 0.2, 1, 2.0);
        let z_bar = retailer_upper_bound(2.0, 1.6, 0.01, 0.4, 1.3).unwrap();
        for w in [0.01, 0.2, 1.0] {
            let zero = retailer_objective(e.p, w, 0.0, 2.0, 1.6, (0.1, 0.4)).unwrap();
            let far = retailer_objective(e.p, w, 1.01 * z_bar, 2.0, 1.6, (0.1, 0.4)).unwrap();
            assert!(far < zero);
        }
    }

    #[test]
    fn argmax_matches_closed_form() {
        let e = env(1.0, 1.0, 0.01, 1, 2.0);
        let set = retailer_argmax_set(&e, 0.25, 2.0, (0.0, 0.0), GridSpec::default()).unwrap();
        assert!(!set.candidates.is_empty());
        for (z, _) in &set.candidates {
            assert!((z - retailer_best_response_exp(2.0, 1.0, 0.25)).abs() < 1e-4);
        }
        let set = retailer_argmax_set(&e, 1.0, 2.0, (0.0, 0.0), GridSpec::default()).unwrap();
        assert_eq!(set.candidates.iter().map(|c| c.0).collect::<Vec<_>>(), vec![0.0]);
    }

    #[test]
    fn infinite_tolerance_returns_whole_grid() {
        let e = env(1.0, 1.0, 0.01, 1, 2.0);
        let grid = GridSpec { n_z: 33, tie_tol: f64::INFINITY, ..GridSpec::default() };
        let set = retailer_argmax_set(&e, 0.4, 2.0, (0.0, 0.0), grid).unwrap();
        // everything except the refinement bracket, which the refined point replaces
        assert!(set.candidates.len() >= 33 - 3 + 1);
    }

    #[test]
    fn tie_break_favors_manufacturer() {
        let e = env(1.5, 1.0, 0.1, 1, 2.0);
        let grid = GridSpec { n_z: 65, tie_tol: f64::INFINITY, ..GridSpec::default() };
        let stage = Stage::new(&e, 2.0, (0.0, 0.0), (0.2, 0.5), grid).unwrap();
        let (m, z, _, ties) = stage.response(0.3);
        let set = stage.retailer_argmax(0.3);
        assert!(ties >= 63 && ties == set.candidates.len());
        let brute = set
            .candidates
            .iter()
            .map(|&(z, _)| stage.manufacturer_value(0.3, z))
            .fold(f64::NEG_INFINITY, f64::max);
        assert!(m >= brute);
        // with every node tied the manufacturer gets its favorite order
        assert!(z >= stage.z_grid()[60]);
        assert_eq!(m, stage.manufacturer_value(0.3, z));
    }

    #[test]
    fn terminal_stage_matches_fixed_point() {
        let e = env(1.0, 1.0, 0.01, 1, 2.0);
        let grid = GridSpec::default();
        let sel = manufacturer_select(&e, 2.0, (0.0, 0.0), (0.0, 0.0), grid).unwrap();
        let w = wholesale_fixed_point(2.0, 1.0, 0.01, 0.0).unwrap();
        assert!((sel.w_star - w).abs() <= 2.0 * (1.0 - 0.01) / grid.n_w as f64);
    }

    #[test]
    fn single_price_grid() {
        let e = env(2.0, 1.0, 0.1, 1, 2.0);
        let grid = GridSpec { n_w: 1, ..GridSpec::default() };
        let sel = manufacturer_select(&e, 2.0, (0.0, 0.0), (0.0, 0.0), grid).unwrap();
        assert_eq!(sel.w_star, 0.01);
        let set = retailer_argmax_set(&e, 0.01, 2.0, (0.0, 0.0), grid).unwrap();
        assert!(set.candidates.iter().any(|c| c.0 == sel.z_star));
    }

    /// Single-period game at k = 2, a = 2 by a dense 2-D grid using the
    /// antiderivative of `(1 + y^2)^{-2}`.
    #[test]
    fn one_period_matches_two_dimensional_grid() {
        let (p, c) = (1.0, 0.2);
        let sales = |z: f64| 0.5 * (z / (1.0 + z * z) + z.atan());
        let zs: Vec<f64> = (0..=20_000).map(|i| i as f64 * 2.0 / 20_000.0).collect();
        let s: Vec<f64> = zs.iter().map(|&z| sales(z)).collect();
        let mut best = (f64::NEG_INFINITY, 0.0, 0.0, 0.0);
        for i in 0..=2000 {
            let w = 0.01 + (p - 0.01) * i as f64 / 2000.0;
            let (mut zr, mut vr) = (0.0, f64::NEG_INFINITY);
            for (z, sz) in zs.iter().zip(&s) {
                let v = p * sz - w * z;
                if v > vr {
                    (zr, vr) = (*z, v);
                }
            }
            let m = (w - c) * zr;
            if m > best.0 {
                best = (m, w, zr, vr);
            }
        }
        let sol = backward_solve_weibull(&env(2.0, p, c, 1, 2.0), GridSpec::default()).unwrap();
        let s = &sol.solution;
        assert!((s.w_star(1, 0).unwrap() - best.1).abs() < 2e-3);
        assert!((s.z_star(1, 0).unwrap() - best.2).abs() < 1e-3);
        assert!((s.f_m(1, 0).unwrap() - best.0).abs() < 1e-4);
        // the retailer value moves at rate -z in w, so the oracle's price step bounds its error
        assert!((s.f_r(1, 0).unwrap() - best.3).abs() < 0.5 * 5e-4);
    }

    #[test]
    fn agrees_with_exponential_solver() {
        let mut e = env(1.0, 1.0, 0.2, 2, 2.0);
        let grid = GridSpec { n_w: 128, n_z: 512, ..GridSpec::default() };
        let num = backward_solve_weibull(&e, grid).unwrap().solution;
        e.w_lo = None;
        e.w_hi = None;
        let exact = backward_solve_exp(&e).unwrap();
        for (r1, r2) in num.periods.iter().zip(&exact.periods) {
            for n in 0..r1.len() {
                assert!((r1.w_star[n] - r2.w_star[n]).abs() < 1e-4, "w at t={} n={n}", r1.t);
                assert!((r1.f_r[n] - r2.f_r[n]).abs() < 1e-4);
                assert!((r1.f_m[n] - r2.f_m[n]).abs() < 1e-4);
            }
        }
    }

    #[test]
    fn retailer_value_is_nonincreasing_in_price() {
        let e = env(1.7, 1.0, 0.2, 1, 2.2);
        let stage = Stage::new(&e, 2.2, (0.1, 0.3), (0.1, 0.2), GridSpec::default()).unwrap();
        let mut prev = f64::INFINITY;
        for w in linspace(0.01, 1.0, 200) {
            let v = stage.retailer_argmax(w).value;
            assert!(v <= prev + 1e-12);
            prev = v;
        }
    }

    #[test]
    fn diagnostics_cover_every_cell() {
        let grid = GridSpec { n_w: 32, n_z: 64, ..GridSpec::default() };
        let out = backward_solve_weibull(&env(0.8, 1.0, 0.1, 2, 2.0), grid).unwrap();
        assert_eq!(out.diagnostics.cells.len(), 3 + 4);
        assert_eq!(out.solution.f_r(3, 0).unwrap(), 0.0);
        assert!(out.solution.periods.iter().all(|r| r.f_r.iter().all(|v| *v >= 0.0)));
    }
}
