//! Exact backward recursion for exponential demand (`k = 1`).
//!
//! With `k = 1` the retailer's standardized best response is available in
//! closed form, and the manufacturer's first-order condition
//! `(1 + z(w)) * eta(w) = 1` has exactly one root below the effective price.
//! Each period therefore reduces to one bisection per shape value.

use rayon::prelude::*;

use crate::environment::Environment;
use crate::error::{Error, Result};
use crate::search::bisect_decreasing;
use crate::solution::{NextValues, PeriodRow, SolveMethod, StandardizedSolution};

/// Residual target for the wholesale fixed point.
pub const FIXED_POINT_TOL: f64 = 1e-12;
/// Relative offset of the bisection bracket from `0` and from `p̄`.
const BRACKET_REL: f64 = 1e-12;
/// Tolerance of the telescoping-sum self-check.
const TELESCOPE_TOL: f64 = 1e-9;

/// Effective price `p + fR_next(a+1) - fR_next(a)`.
pub fn pbar(p: f64, f_r_next_a: f64, f_r_next_a1: f64) -> Result<f64> {
    let v = p + f_r_next_a1 - f_r_next_a;
    if v > 0.0 {
        Ok(v)
    } else {
        Err(Error::Internal(format!("effective price is not positive: {v}")))
    }
}

/// Retailer's standardized order `max((p̄/w)^{1/a} - 1, 0)`.
pub fn retailer_best_response_exp(a: f64, pbar: f64, w: f64) -> f64 {
    if w >= pbar {
        return 0.0;
    }
    ((pbar / w).powf(1.0 / a) - 1.0).max(0.0)
}

/// `eta(a, w) = 1 - 1/a + c/(a w) - dfM/(a p̄)`.
pub fn eta(a: f64, pbar: f64, c: f64, d_f_m: f64, w: f64) -> f64 {
    1.0 - 1.0 / a + c / (a * w) - d_f_m / (a * pbar)
}

/// Manufacturer first-order residual `(1 + z(w)) * eta(w) - 1`.
pub fn foc_residual(a: f64, pbar: f64, c: f64, d_f_m: f64, w: f64) -> f64 {
    (pbar / w).powf(1.0 / a) * eta(a, pbar, c, d_f_m, w) - 1.0
}

/// Equilibrium wholesale price: the unique root in `(0, p̄)` of the
/// manufacturer's first-order condition.
pub fn wholesale_fixed_point(a: f64, pbar: f64, c: f64, d_f_m: f64) -> Result<f64> {
    wholesale_fixed_point_with_tol(a, pbar, c, d_f_m, FIXED_POINT_TOL)
}

pub fn wholesale_fixed_point_with_tol(a: f64, pbar: f64, c: f64, d_f_m: f64, tol: f64) -> Result<f64> {
    if !(a > 1.0) {
        return Err(Error::Domain(format!("shape a must exceed 1, got {a}")));
    }
    if !(pbar > 0.0) {
        return Err(Error::Domain(format!("effective price must be positive, got {pbar}")));
    }
    let lo = BRACKET_REL * pbar;
    let hi = pbar * (1.0 - BRACKET_REL);
    bisect_decreasing(|w| foc_residual(a, pbar, c, d_f_m, w), lo, hi, tol)
}

/// Solution of one `(t, a)` cell given next-period values.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpCell {
    pub w_star: f64,
    pub z_star: f64,
    pub f_r: f64,
    pub f_m: f64,
}

pub(crate) fn solve_cell(p: f64, c: f64, a: f64, next: NextValues) -> Result<ExpCell> {
    let pb = pbar(p, next.f_r.0, next.f_r.1)?;
    let d_f_m = next.f_m.1 - next.f_m.0;
    let w = wholesale_fixed_point(a, pb, c, d_f_m)?;
    let z = retailer_best_response_exp(a, pb, w);
    Ok(ExpCell {
        w_star: w,
        z_star: z,
        f_r: p - w * (1.0 + a * z) + next.f_r.1,
        f_m: w - c * (1.0 + a * z) + next.f_m.1,
    })
}

/// Backward recursion over `t = T, ..., 1` for exponential demand.
pub fn backward_solve_exp(env: &Environment) -> Result<StandardizedSolution> {
    if !env.is_exponential() {
        return Err(Error::Validation(format!("exponential solver needs k = 1, got {}", env.k)));
    }
    if !(env.a1 > 1.0) {
        return Err(Error::Validation(format!("exponential solver needs a1 > 1, got {}", env.a1)));
    }
    if !(env.p > env.c && env.c >= 0.0) || env.horizon == 0 {
        return Err(Error::Validation("need p > c >= 0 and T >= 1".into()));
    }
    let horizon = env.horizon;
    let (p, c) = (env.p, env.c);
    let mut rows: Vec<PeriodRow> = Vec::with_capacity(horizon);
    // rows are built from t = T downwards and reversed at the end
    for t in (1..=horizon).rev() {
        let width = StandardizedSolution::row_width(horizon, t);
        let next = rows.last();
        let cells: Vec<ExpCell> = (0..width)
            .into_par_iter()
            .map(|n| {
                let a = env.a1 + n as f64;
                let nv = match next {
                    None => NextValues::TERMINAL,
                    Some(r) => NextValues {
                        f_r: (r.f_r[n], r.f_r[n + 1]),
                        f_m: (r.f_m[n], r.f_m[n + 1]),
                    },
                };
                let cell = solve_cell(p, c, a, nv).map_err(|e| Error::Invariant {
                    t,
                    a,
                    detail: e.to_string(),
                })?;
                check_cell(t, a, p, &nv, &cell)?;
                Ok(cell)
            })
            .collect::<Result<_>>()?;
        let row = PeriodRow {
            t,
            w_star: cells.iter().map(|c| c.w_star).collect(),
            z_star: cells.iter().map(|c| c.z_star).collect(),
            f_r: cells.iter().map(|c| c.f_r).collect(),
            f_m: cells.iter().map(|c| c.f_m).collect(),
        };
        check_row(t, env, &row)?;
        rows.push(row);
    }
    rows.reverse();
    let solution = StandardizedSolution {
        environment: env.clone(),
        method: SolveMethod::Exponential,
        periods: rows,
    };
    check_telescoping(&solution)?;
    Ok(solution)
}

/// Bounds on price and order within a cell.
fn check_cell(t: usize, a: f64, p: f64, next: &NextValues, cell: &ExpCell) -> Result<()> {
    let pb = p + next.f_r.1 - next.f_r.0;
    if !(cell.w_star > 0.0 && cell.w_star < pb) {
        return Err(Error::Invariant {
            t,
            a,
            detail: format!("wholesale price {} outside (0, {pb})", cell.w_star),
        });
    }
    if !(cell.z_star > 0.0 && cell.z_star.is_finite()) {
        return Err(Error::Invariant {
            t,
            a,
            detail: format!("standardized order {} is not positive", cell.z_star),
        });
    }
    Ok(())
}

/// Positive effective price and joint-surplus gain across adjacent shapes.
fn check_row(t: usize, env: &Environment, row: &PeriodRow) -> Result<()> {
    for n in 0..row.len().saturating_sub(1) {
        let a = env.a1 + n as f64;
        if !(env.p + row.f_r[n + 1] - row.f_r[n] > 0.0) {
            return Err(Error::Invariant {
                t,
                a,
                detail: "p + fR(a+1) - fR(a) is not positive".into(),
            });
        }
        let lhs = env.p - env.c + row.f_r[n + 1] + row.f_m[n + 1];
        if !(lhs > row.f_r[n] + row.f_m[n]) {
            return Err(Error::Invariant {
                t,
                a,
                detail: "p - c + fR(a+1) + fM(a+1) does not exceed fR(a) + fM(a)".into(),
            });
        }
    }
    Ok(())
}

/// Sum of per-period standardized profits along the diagonal `(t+i, a+i)`.
pub fn telescoped_values(solution: &StandardizedSolution, t: usize, n: usize) -> Result<(f64, f64)> {
    let env = &solution.environment;
    let mut f_r = 0.0;
    let mut f_m = 0.0;
    for i in 0..=(solution.horizon() - t) {
        let a = env.a1 + (n + i) as f64;
        let w = solution.w_star(t + i, n + i)?;
        let z = solution.z_star(t + i, n + i)?;
        f_r += env.p - w * (1.0 + a * z);
        f_m += w - env.c * (1.0 + a * z);
    }
    Ok((f_r, f_m))
}

fn check_telescoping(solution: &StandardizedSolution) -> Result<()> {
    for row in &solution.periods {
        for n in 0..row.len() {
            let (f_r, f_m) = telescoped_values(solution, row.t, n)?;
            let err_r = (f_r - row.f_r[n]).abs() / (1.0 + row.f_r[n].abs());
            let err_m = (f_m - row.f_m[n]).abs() / (1.0 + row.f_m[n].abs());
            if err_r > TELESCOPE_TOL || err_m > TELESCOPE_TOL {
                return Err(Error::Invariant {
                    t: row.t,
                    a: solution.shape_at(n),
                    detail: format!("telescoped values differ from recursion ({err_r:e}, {err_m:e})"),
                });
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    /// Standardized single-stage manufacturer objective under the closed-form
    /// retailer response, maximized by dense scan plus a local rescan.
    fn grid_wholesale(a: f64, pbar: f64, c: f64, f_m: (f64, f64)) -> f64 {
        let value = |w: f64| {
            let z = ((pbar / w).powf(1.0 / a) - 1.0).max(0.0);
            let g = 1.0 - (1.0 + z).powf(-(a - 1.0));
            (a - 1.0) * (w - c) * z + f_m.1 * g + f_m.0 * (1.0 - g)
        };
        let scan = |lo: f64, hi: f64, n: usize| {
            (0..=n)
                .map(|i| lo + (hi - lo) * i as f64 / n as f64)
                .filter(|w| *w > 0.0)
                .map(|w| (w, value(w)))
                .fold((0.0, f64::NEG_INFINITY), |acc, x| if x.1 > acc.1 { x } else { acc })
        };
        let (w0, _) = scan(0.0, pbar, 200_000);
        let h = pbar / 200_000.0;
        scan(w0 - h, w0 + h, 20_000).0
    }

    /// Single-stage retailer objective for k = 1, maximized on a dense grid.
    fn grid_order(a: f64, pbar: f64, w: f64) -> f64 {
        let value = |z: f64| pbar * (1.0 - (1.0 + z).powf(-(a - 1.0))) - (a - 1.0) * w * z;
        (0..=400_000)
            .map(|i| i as f64 * 1e-5)
            .map(|z| (z, value(z)))
            .fold((0.0, f64::NEG_INFINITY), |acc, x| if x.1 > acc.1 { x } else { acc })
            .0
    }

    #[test]
    fn pbar_examples() {
        assert_eq!(pbar(1.0, 0.0, 0.0).unwrap(), 1.0);
        assert_relative_eq!(pbar(1.0, 0.25, 7.0 / 27.0).unwrap(), 1.009_259_259_259_259_3, max_relative = 1e-15);
        assert_eq!(pbar(2.5, 0.7, 0.7).unwrap(), 2.5);
        assert!(pbar(1.0, 2.0, 0.5).is_err());
    }

    #[test]
    fn fixed_point_with_zero_cost() {
        let w = wholesale_fixed_point(2.0, 1.0, 0.0, 0.0).unwrap();
        assert_relative_eq!(w, 0.25, max_relative = 1e-10);
        assert!((w - grid_wholesale(2.0, 1.0, 0.0, (0.0, 0.0))).abs() < 1e-6);
        let w = wholesale_fixed_point(3.0, 1.0, 0.0, 0.0).unwrap();
        assert_relative_eq!(w, 8.0 / 27.0, max_relative = 1e-10);
        assert!((w - grid_wholesale(3.0, 1.0, 0.0, (0.0, 0.0))).abs() < 1e-6);
    }

    #[test]
    fn fixed_point_with_cost() {
        let w = wholesale_fixed_point(2.0, 1.0, 0.1, 0.0).unwrap();
        assert!((w - 0.39329).abs() < 1e-4);
        assert!((w - grid_wholesale(2.0, 1.0, 0.1, (0.0, 0.0))).abs() < 1e-6);
    }

    #[test]
    fn fixed_point_with_continuation_difference() {
        let (pb, f_m) = (1.0 + 7.0 / 27.0 - 0.25, (0.25, 8.0 / 27.0));
        let w = wholesale_fixed_point(2.0, pb, 0.0, f_m.1 - f_m.0).unwrap();
        assert!((w - grid_wholesale(2.0, pb, 0.0, f_m)).abs() < 1e-6);
    }

    #[test]
    fn fixed_point_is_stable_under_tighter_tolerance() {
        for &(a, pb, c, d) in &[(2.0, 1.0, 0.1, 0.0), (4.5, 2.0, 0.3, 0.2), (1.5, 0.7, 0.5, -0.05)] {
            let w1 = wholesale_fixed_point_with_tol(a, pb, c, d, 1e-12).unwrap();
            let w2 = wholesale_fixed_point_with_tol(a, pb, c, d, 5e-13).unwrap();
            assert!((w1 - w2).abs() <= 1e-10 * w1, "{w1} vs {w2}");
            assert!(foc_residual(a, pb, c, d, BRACKET_REL * pb) > 0.0);
            assert!(foc_residual(a, pb, c, d, pb * (1.0 - BRACKET_REL)) < 0.0);
        }
    }

    #[test]
    fn best_response_examples() {
        assert_eq!(retailer_best_response_exp(2.0, 1.0, 1.0), 0.0);
        assert_eq!(retailer_best_response_exp(2.0, 1.0, 3.0), 0.0);
        assert_relative_eq!(retailer_best_response_exp(2.0, 1.0, 0.25), 1.0, max_relative = 1e-15);
        assert!((grid_order(2.0, 1.0, 0.25) - 1.0).abs() < 1e-4);
        assert_relative_eq!(retailer_best_response_exp(4.0, 16.0, 1.0), 1.0, max_relative = 1e-15);
        assert!((grid_order(4.0, 16.0, 1.0) - 1.0).abs() < 1e-4);
    }

    #[test]
    fn one_period_hand_values() {
        let s = backward_solve_exp(&Environment::exponential(1.0, 0.0, 1, 2.0, 1.0)).unwrap();
        assert_relative_eq!(s.w_star(1, 0).unwrap(), 0.25, max_relative = 1e-10);
        assert_relative_eq!(s.z_star(1, 0).unwrap(), 1.0, max_relative = 1e-10);
        assert_relative_eq!(s.f_r(1, 0).unwrap(), 0.25, max_relative = 1e-10);
        assert_relative_eq!(s.f_m(1, 0).unwrap(), 0.25, max_relative = 1e-10);
    }

    #[test]
    fn two_period_hand_values() {
        let s = backward_solve_exp(&Environment::exponential(1.0, 0.0, 2, 2.0, 1.0)).unwrap();
        // stage t = 2
        assert_relative_eq!(s.w_star(2, 0).unwrap(), 0.25, max_relative = 1e-10);
        assert_relative_eq!(s.f_r(2, 0).unwrap(), 0.25, max_relative = 1e-10);
        assert_relative_eq!(s.w_star(2, 1).unwrap(), 8.0 / 27.0, max_relative = 1e-10);
        assert_relative_eq!(s.z_star(2, 1).unwrap(), 0.5, max_relative = 1e-10);
        assert_relative_eq!(s.f_r(2, 1).unwrap(), 7.0 / 27.0, max_relative = 1e-10);
        assert_relative_eq!(s.f_m(2, 1).unwrap(), 8.0 / 27.0, max_relative = 1e-10);
        // stage t = 1, frozen from an independent dense-grid evaluation
        assert_relative_eq!(s.effective_price(1, 0).unwrap(), 1.009_259_259_259_259_3, max_relative = 1e-12);
        assert!((s.w_star(1, 0).unwrap() - 0.229_697_58).abs() < 1e-7);
        assert!((s.z_star(1, 0).unwrap() - 1.096_153_846).abs() < 1e-7);
        assert!((s.f_r(1, 0).unwrap() - 0.525_993_884).abs() < 1e-7);
        assert!((s.f_m(1, 0).unwrap() - 0.525_993_884).abs() < 1e-7);
    }

    #[test]
    fn equilibrium_identities() {
        let env = Environment::exponential(1.7, 0.4, 5, 2.3, 1.0);
        let s = backward_solve_exp(&env).unwrap();
        for row in &s.periods {
            for n in 0..row.len() {
                let a = s.shape_at(n);
                let pb = s.effective_price(row.t, n).unwrap();
                let d_f_m = s.f_m(row.t + 1, n + 1).unwrap() - s.f_m(row.t + 1, n).unwrap();
                let (w, z) = (row.w_star[n], row.z_star[n]);
                // fixed-point form of the first-order condition
                let rhs = pb * eta(a, pb, env.c, d_f_m, w).powf(a);
                assert_relative_eq!(w, rhs, max_relative = 1e-9);
                // survival at a-1 times p̄ equals w (1 + z)
                let surv = (1.0 + z).powf(-(a - 1.0));
                assert_relative_eq!(surv * pb, w * (1.0 + z), max_relative = 1e-9);
                // more periods never hurt either player
                assert!(row.f_r[n] >= s.f_r(row.t + 1, n).unwrap() - 1e-12);
                assert!(row.f_m[n] >= s.f_m(row.t + 1, n).unwrap() - 1e-12);
                assert!(row.f_r[n] >= 0.0 && row.f_m[n] >= 0.0);
            }
        }
    }

    #[test]
    fn rejects_bad_environments() {
        let mut env = Environment::exponential(1.0, 0.0, 2, 1.0, 1.0);
        assert!(backward_solve_exp(&env).is_err());
        env.a1 = 2.0;
        env.k = 2.0;
        assert!(backward_solve_exp(&env).is_err());
    }
}
