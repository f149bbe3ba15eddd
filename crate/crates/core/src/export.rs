//! CSV renderings of solutions and traces.
//!
//! Floating-point fields are written with 17 significant digits so that
//! parsing a file back yields the same `f64` values.

use std::fmt::Write;

use crate::simulate::SimulationTrace;
use crate::solution::StandardizedSolution;

/// `x` with 17 significant digits.
pub fn fmt_f64(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    format!("{x:.16e}")
}

/// One row per stored `(t, a)` entry: `t,a,w_star,z_star,fR,fM`.
pub fn solution_csv(solution: &StandardizedSolution) -> String {
    let mut out = String::from("t,a,w_star,z_star,fR,fM\n");
    for row in &solution.periods {
        for n in 0..row.len() {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{}",
                row.t,
                fmt_f64(solution.shape_at(n)),
                fmt_f64(row.w_star[n]),
                fmt_f64(row.z_star[n]),
                fmt_f64(row.f_r[n]),
                fmt_f64(row.f_m[n]),
            );
        }
    }
    out
}

pub const PLOTS_HEADER: &str = "\
# t: period (1-based)
# a: shape hyperparameter a1 + n
# n: uncensored observations before period t
# reachable: 1 if a can occur at the start of period t (n < t), else 0
# w_star: equilibrium wholesale price (independent of b)
# z_star: equilibrium order in units of b^(1/k)
# f_r, f_m: standardized values; physical value is b^(1/k) / (a - 1) * f
t,a,n,reachable,w_star,z_star,f_r,f_m
";

/// Tidy table over `t = 1..=T` and `a = a1, ..., a1 + T` for plotting.
pub fn plots_csv(solution: &StandardizedSolution) -> String {
    let mut out = String::from(PLOTS_HEADER);
    let horizon = solution.horizon();
    for row in &solution.periods {
        for n in 0..=horizon.min(row.len().saturating_sub(1)) {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{}",
                row.t,
                fmt_f64(solution.shape_at(n)),
                n,
                u8::from(StandardizedSolution::reachable(row.t, n)),
                fmt_f64(row.w_star[n]),
                fmt_f64(row.z_star[n]),
                fmt_f64(row.f_r[n]),
                fmt_f64(row.f_m[n]),
            );
        }
    }
    out
}

/// One row per period of a simulated path.
pub fn trace_csv(trace: &SimulationTrace) -> String {
    let mut out = String::from("t,a,b,w,q,d,s,censored,retailer_profit,manufacturer_profit\n");
    for r in &trace.periods {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{}",
            r.t,
            fmt_f64(r.a),
            fmt_f64(r.b),
            fmt_f64(r.w),
            fmt_f64(r.q),
            fmt_f64(r.d),
            fmt_f64(r.s),
            u8::from(r.censored),
            fmt_f64(r.retailer_profit),
            fmt_f64(r.manufacturer_profit),
        );
    }
    out
}
