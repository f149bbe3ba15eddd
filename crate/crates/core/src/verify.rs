//! Independent audit of a stored solution.
//!
//! Every check recomputes its quantity from the stored tables and the
//! environment; nothing is taken from the solver's own bookkeeping.

use serde::{Deserialize, Serialize};

use crate::belief::Belief;
use crate::demand::DemandModel;
use crate::descale::EquilibriumPolicy;
use crate::exponential::{eta, telescoped_values};
use crate::simulate::one_shot_deviation_check;
use crate::solution::{SolveMethod, StandardizedSolution};
use crate::weibull::{expect_operator, GridSpec, Stage};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    pub tolerance: f64,
    pub max_error: f64,
    pub passed: bool,
    pub detail: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub passed: bool,
    pub checks: Vec<CheckResult>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VerifyOptions {
    /// Relative tolerance of identities that hold exactly for `k = 1`.
    pub exact_tol: f64,
    /// Relative tolerance of recursion checks involving quadrature.
    pub quadrature_tol: f64,
    /// Deviation-gain tolerance in units of `p` for exact solutions.
    pub deviation_tol: f64,
    /// Deviation-gain tolerance in units of `p` for grid solutions.
    pub grid_deviation_tol: f64,
    pub deviation_grid: GridSpec,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self {
            exact_tol: 1e-9,
            quadrature_tol: 1e-8,
            deviation_tol: 1e-6,
            grid_deviation_tol: 1e-3,
            deviation_grid: GridSpec {
                n_w: 96,
                n_z: 96,
                refine_iters: 40,
                tie_tol: 1e-9,
            },
        }
    }
}

/// Running maximum of an error measure and where it occurred.
struct Tracker {
    name: &'static str,
    tolerance: f64,
    max_error: f64,
    worst: Option<String>,
    failure: Option<String>,
}

impl Tracker {
    fn new(name: &'static str, tolerance: f64) -> Self {
        Self {
            name,
            tolerance,
            max_error: 0.0,
            worst: None,
            failure: None,
        }
    }

    fn record(&mut self, err: f64, at: impl FnOnce() -> String) {
        if err.is_nan() {
            self.failure.get_or_insert_with(|| format!("non-finite value at {}", at()));
            self.max_error = f64::INFINITY;
        } else if err > self.max_error {
            self.max_error = err;
            self.worst = Some(at());
        }
    }

    fn fail(&mut self, msg: String) {
        self.failure.get_or_insert(msg);
    }

    fn finish(self) -> CheckResult {
        let passed = self.failure.is_none() && self.max_error <= self.tolerance;
        let detail = self.failure.or_else(|| self.worst.map(|w| format!("largest error at {w}")));
        CheckResult {
            name: self.name.to_string(),
            tolerance: self.tolerance,
            max_error: self.max_error,
            passed,
            detail,
        }
    }
}

fn rel(x: f64, y: f64) -> f64 {
    (x - y).abs() / (1.0 + y.abs())
}

fn at(t: usize, a: f64) -> String {
    format!("t = {t}, a = {a}")
}

fn check_shape(s: &StandardizedSolution) -> CheckResult {
    let mut c = Tracker::new("table_shape", 0.0);
    let horizon = s.environment.horizon;
    if s.periods.len() != horizon {
        c.fail(format!("{} periods stored for horizon {horizon}", s.periods.len()));
    }
    for (i, row) in s.periods.iter().enumerate() {
        let width = StandardizedSolution::row_width(horizon, i + 1);
        let lens = [row.w_star.len(), row.z_star.len(), row.f_r.len(), row.f_m.len()];
        if row.t != i + 1 || lens.iter().any(|&l| l != width) {
            c.fail(format!("period {} has t = {} and column lengths {lens:?}, expected {width}", i + 1, row.t));
        }
    }
    c.finish()
}

fn check_values(s: &StandardizedSolution, tol: f64) -> Vec<CheckResult> {
    let mut nonneg = Tracker::new("values_nonnegative", tol);
    let mut mono = Tracker::new("values_nonincreasing_in_t", tol);
    for row in &s.periods {
        for n in 0..row.len() {
            let a = s.shape_at(n);
            for v in [row.f_r[n], row.f_m[n], row.w_star[n], row.z_star[n]] {
                nonneg.record((-v).max(0.0), || at(row.t, a));
                if !v.is_finite() {
                    nonneg.fail(format!("non-finite entry at {}", at(row.t, a)));
                }
            }
            if let (Ok(r1), Ok(m1)) = (s.f_r(row.t + 1, n), s.f_m(row.t + 1, n)) {
                mono.record((r1 - row.f_r[n]).max(0.0), || at(row.t, a));
                mono.record((m1 - row.f_m[n]).max(0.0), || at(row.t, a));
            }
        }
    }
    vec![nonneg.finish(), mono.finish()]
}

/// Stage objectives re-evaluated at the stored actions.
fn check_recursion(s: &StandardizedSolution, tol: f64) -> CheckResult {
    let mut c = Tracker::new("stage_recursion", tol);
    let env = &s.environment;
    let model = match DemandModel::with_tolerance(env.k, 1e-12) {
        Ok(m) => m,
        Err(e) => {
            c.fail(e.to_string());
            return c.finish();
        }
    };
    for row in &s.periods {
        for n in 0..row.len() {
            let a = s.shape_at(n);
            let (w, z) = (row.w_star[n], row.z_star[n]);
            let next = match s.next_values(row.t, n) {
                Ok(v) => v,
                Err(e) => {
                    c.fail(e.to_string());
                    continue;
                }
            };
            let terms = model.expected_min_sales(z, a, 1.0).and_then(|sales| {
                Ok((
                    sales,
                    expect_operator(next.f_r.0, next.f_r.1, z, a, env.k)?,
                    expect_operator(next.f_m.0, next.f_m.1, z, a, env.k)?,
                ))
            });
            match terms {
                Ok((sales, cont_r, cont_m)) => {
                    let f_r = (a - 1.0) * (env.p * sales - w * z) + cont_r;
                    let f_m = (a - 1.0) * (w - env.c) * z + cont_m;
                    c.record(rel(row.f_r[n], f_r), || format!("fR, {}", at(row.t, a)));
                    c.record(rel(row.f_m[n], f_m), || format!("fM, {}", at(row.t, a)));
                }
                Err(e) => c.fail(format!("{} at {}", e, at(row.t, a))),
            }
        }
    }
    c.finish()
}

fn check_exponential(s: &StandardizedSolution, tol: f64) -> Vec<CheckResult> {
    let env = &s.environment;
    let mut bounds = Tracker::new("price_below_effective_price", 0.0);
    let mut order = Tracker::new("order_positive", 0.0);
    let mut pbar = Tracker::new("effective_price_positive", 0.0);
    let mut surplus = Tracker::new("joint_surplus_gain", 0.0);
    let mut closed = Tracker::new("closed_form_order", tol);
    let mut fixed = Tracker::new("wholesale_fixed_point", tol);
    let mut tele = Tracker::new("telescoping_values", tol);
    for row in &s.periods {
        for n in 0..row.len() {
            let a = s.shape_at(n);
            let (w, z) = (row.w_star[n], row.z_star[n]);
            let Ok(pb) = s.effective_price(row.t, n) else {
                bounds.fail(format!("missing next-period entry at {}", at(row.t, a)));
                continue;
            };
            if !(w > 0.0 && w < pb) {
                bounds.fail(format!("w* = {w} outside (0, {pb}) at {}", at(row.t, a)));
            }
            if !(z > 0.0) {
                order.fail(format!("z* = {z} at {}", at(row.t, a)));
            }
            if n + 1 < row.len() {
                if !(env.p + row.f_r[n + 1] - row.f_r[n] > 0.0) {
                    pbar.fail(format!("p + fR(a+1) - fR(a) <= 0 at {}", at(row.t, a)));
                }
                if !(env.p - env.c + row.f_r[n + 1] + row.f_m[n + 1] > row.f_r[n] + row.f_m[n]) {
                    surplus.fail(format!("joint surplus does not grow at {}", at(row.t, a)));
                }
            }
            let z_closed = ((pb / w).powf(1.0 / a) - 1.0).max(0.0);
            closed.record(rel(z, z_closed), || at(row.t, a));
            if let (Ok(m0), Ok(m1)) = (s.f_m(row.t + 1, n), s.f_m(row.t + 1, n + 1)) {
                let rhs = pb * eta(a, pb, env.c, m1 - m0, w).powf(a);
                fixed.record(rel(w, rhs), || at(row.t, a));
            }
            match telescoped_values(s, row.t, n) {
                Ok((r, m)) => {
                    tele.record(rel(row.f_r[n], r), || at(row.t, a));
                    tele.record(rel(row.f_m[n], m), || at(row.t, a));
                }
                Err(e) => tele.fail(e.to_string()),
            }
        }
    }
    [bounds, order, pbar, surplus, closed, fixed, tele].into_iter().map(Tracker::finish).collect()
}

/// Retailer and manufacturer optimality of the stored actions on the grid
/// the solution was computed with.
fn check_grid_optimality(s: &StandardizedSolution, grid: GridSpec) -> Vec<CheckResult> {
    let env = &s.environment;
    let mut retailer = Tracker::new("retailer_grid_optimality", 0.0);
    let mut manufacturer = Tracker::new("manufacturer_grid_optimality", 0.0);
    let mut max_band = 0.0f64;
    for row in &s.periods {
        for n in 0..row.len() {
            let a = s.shape_at(n);
            let stage = s
                .next_values(row.t, n)
                .and_then(|next| Stage::new(env, a, next.f_r, next.f_m, grid));
            let stage = match stage {
                Ok(st) => st,
                Err(e) => {
                    retailer.fail(format!("{e} at {}", at(row.t, a)));
                    continue;
                }
            };
            let best_r = stage.retailer_argmax(row.w_star[n]).value;
            let band_r = grid.tie_band(best_r);
            retailer.record((best_r - row.f_r[n]).max(0.0), || at(row.t, a));
            match stage.select() {
                Ok(sel) => {
                    let band_m = grid.tie_band(sel.f_m);
                    manufacturer.record((sel.f_m - row.f_m[n]).max(0.0), || at(row.t, a));
                    max_band = max_band.max(band_r).max(band_m);
                }
                Err(e) => manufacturer.fail(e.to_string()),
            }
        }
    }
    retailer.tolerance = max_band.max(1e-12);
    manufacturer.tolerance = max_band.max(1e-12);
    vec![retailer.finish(), manufacturer.finish()]
}

fn check_scaling(s: &StandardizedSolution, tol: f64) -> Vec<CheckResult> {
    let pol = EquilibriumPolicy::new(s);
    let k = s.environment.k;
    let mut price = Tracker::new("wholesale_rate_invariance", 0.0);
    let mut scale = Tracker::new("order_value_scaling", tol);
    for row in &s.periods {
        for n in 0..row.t.min(row.len()) {
            let a = s.shape_at(n);
            let base = (pol.mpe_wholesale(row.t, a, 1.0), pol.mpe_values(row.t, a, 1.0));
            let (Ok(w1), Ok((r1, m1))) = base else {
                scale.fail(format!("lookup failed at {}", at(row.t, a)));
                continue;
            };
            let q1 = pol.mpe_order(row.t, a, 1.0, w1);
            for b in [0.5, 4.0] {
                let factor = if k == 1.0 { b } else { f64::powf(b, 1.0 / k) };
                match pol.mpe_wholesale(row.t, a, b) {
                    Ok(w) if w == w1 => {}
                    _ => price.fail(format!("price depends on b at {}", at(row.t, a))),
                }
                if let (Ok(q1), Ok(q)) = (&q1, pol.mpe_order(row.t, a, b, w1)) {
                    scale.record((q - factor * q1).abs() / (q.abs() + f64::MIN_POSITIVE), || at(row.t, a));
                }
                if let Ok((r, m)) = pol.mpe_values(row.t, a, b) {
                    scale.record((r - factor * r1).abs() / (r.abs() + f64::MIN_POSITIVE), || at(row.t, a));
                    scale.record((m - factor * m1).abs() / (m.abs() + f64::MIN_POSITIVE), || at(row.t, a));
                }
            }
        }
    }
    vec![price.finish(), scale.finish()]
}

/// One-shot deviations at every reachable `(t, a)` and a few rates.
fn check_deviations(s: &StandardizedSolution, opts: &VerifyOptions) -> CheckResult {
    let env = &s.environment;
    let exact = matches!(s.method, SolveMethod::Exponential);
    let tol = env.p * if exact { opts.deviation_tol } else { opts.grid_deviation_tol };
    let mut c = Tracker::new("one_shot_deviation", tol);
    let pol = EquilibriumPolicy::new(s);
    let rates: &[f64] = if exact { &[1.0, 2.5] } else { &[1.0] };
    for row in &s.periods {
        for n in 0..row.t.min(row.len()) {
            let a = s.shape_at(n);
            for &scale in rates {
                let belief = Belief { a, b: env.b1 * scale * (1.0 + n as f64), n };
                match one_shot_deviation_check(env, &pol, &pol, row.t, belief, None, opts.deviation_grid) {
                    Ok(rep) => {
                        c.record(rep.retailer_gain.max(0.0), || format!("retailer, {}, b = {}", at(row.t, a), belief.b));
                        c.record(rep.manufacturer_gain.max(0.0), || format!("manufacturer, {}, b = {}", at(row.t, a), belief.b));
                    }
                    Err(e) => c.fail(format!("{e} at {}", at(row.t, a))),
                }
            }
        }
    }
    c.finish()
}

/// Runs every applicable check.
pub fn verify_solution(s: &StandardizedSolution, opts: &VerifyOptions) -> VerifyReport {
    let shape = check_shape(s);
    let mut checks = vec![shape.clone()];
    if shape.passed {
        let exact = matches!(s.method, SolveMethod::Exponential);
        let recursion_tol = if s.environment.k == 1.0 { opts.exact_tol } else { opts.quadrature_tol };
        checks.extend(check_values(s, 1e-12));
        checks.push(check_recursion(s, recursion_tol));
        match &s.method {
            SolveMethod::Exponential => checks.extend(check_exponential(s, opts.exact_tol)),
            SolveMethod::Weibull { grid } => checks.extend(check_grid_optimality(s, *grid)),
        }
        checks.extend(check_scaling(s, 1e-12));
        let structural_ok = checks.iter().all(|c| c.passed);
        if structural_ok || exact {
            checks.push(check_deviations(s, opts));
        }
    }
    VerifyReport {
        passed: checks.iter().all(|c| c.passed),
        checks,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::environment::Environment;
    use crate::exponential::backward_solve_exp;
    use crate::weibull::backward_solve_weibull;

    #[test]
    fn exact_solution_passes() {
        let s = backward_solve_exp(&Environment::exponential(1.3, 0.3, 4, 2.2, 0.8)).unwrap();
        let rep = verify_solution(&s, &VerifyOptions::default());
        assert!(rep.passed, "{rep:#?}");
        assert!(rep.checks.iter().any(|c| c.name == "telescoping_values"));
    }

    #[test]
    fn corrupted_value_fails() {
        let mut s = backward_solve_exp(&Environment::exponential(1.0, 0.2, 3, 2.0, 1.0)).unwrap();
        s.periods[1].f_r[1] *= 1.01;
        let rep = verify_solution(&s, &VerifyOptions::default());
        assert!(!rep.passed);
        let failed: Vec<&str> = rep.checks.iter().filter(|c| !c.passed).map(|c| c.name.as_str()).collect();
        assert!(failed.contains(&"stage_recursion"), "{failed:?}");
    }

    #[test]
    fn truncated_row_fails_shape() {
        let mut s = backward_solve_exp(&Environment::exponential(1.0, 0.2, 2, 2.0, 1.0)).unwrap();
        s.periods[0].f_m.pop();
        let rep = verify_solution(&s, &VerifyOptions::default());
        assert!(!rep.passed);
        assert_eq!(rep.checks.len(), 1);
    }

    #[test]
    fn coarse_grid_solution_passes_with_reported_error() {
        let env = Environment { k: 1.5, ..Environment::exponential(1.0, 0.2, 2, 2.0, 1.0) }.with_wholesale_bounds(0.05, 1.0);
        let grid = GridSpec { n_w: 48, n_z: 128, ..GridSpec::default() };
        let s = backward_solve_weibull(&env, grid).unwrap().solution;
        let rep = verify_solution(&s, &VerifyOptions::default());
        assert!(rep.passed, "{rep:#?}");
        let dev = rep.checks.iter().find(|c| c.name == "one_shot_deviation").unwrap();
        assert!(dev.max_error >= 0.0 && dev.max_error <= dev.tolerance);
    }
}
