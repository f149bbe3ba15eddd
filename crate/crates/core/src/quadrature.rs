//! Adaptive Simpson quadrature with an absolute error target.

const MAX_DEPTH: u32 = 48;

/// Integrates `f` over `[lo, hi]` to absolute tolerance `tol`.
///
/// Each accepted panel carries the Richardson correction `(S2 - S1) / 15`.
/// Panels that hit the depth limit are accepted as-is.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, tol: f64) -> f64 {
    if hi == lo {
        return 0.0;
    }
    if hi < lo {
        return -adaptive_simpson(f, hi, lo, tol);
    }
    let mid = 0.5 * (lo + hi);
    let (f_lo, f_mid, f_hi) = (f(lo), f(mid), f(hi));
    // Start from four panels so that narrow features near an endpoint are
    // not missed by a lucky first estimate.
    let q1 = 0.5 * (lo + mid);
    let q3 = 0.5 * (mid + hi);
    let (f_q1, f_q3) = (f(q1), f(q3));
    let left = simpson(lo, mid, f_lo, f_q1, f_mid);
    let right = simpson(mid, hi, f_mid, f_q3, f_hi);
    recurse(&f, lo, mid, f_lo, f_q1, f_mid, left, 0.5 * tol, 1)
        + recurse(&f, mid, hi, f_mid, f_q3, f_hi, right, 0.5 * tol, 1)
}

fn simpson(lo: f64, hi: f64, f_lo: f64, f_mid: f64, f_hi: f64) -> f64 {
    (hi - lo) / 6.0 * (f_lo + 4.0 * f_mid + f_hi)
}

#[allow(clippy::too_many_arguments)]
fn recurse<F: Fn(f64) -> f64>(
    f: &F,
    lo: f64,
    hi: f64,
    f_lo: f64,
    f_mid: f64,
    f_hi: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let mid = 0.5 * (lo + hi);
    let lm = 0.5 * (lo + mid);
    let rm = 0.5 * (mid + hi);
    let f_lm = f(lm);
    let f_rm = f(rm);
    let left = simpson(lo, mid, f_lo, f_lm, f_mid);
    let right = simpson(mid, hi, f_mid, f_rm, f_hi);
    let delta = left + right - whole;
    if depth >= MAX_DEPTH || delta.abs() <= 15.0 * tol || mid <= lo || mid >= hi {
        return left + right + delta / 15.0;
    }
    recurse(f, lo, mid, f_lo, f_lm, f_mid, left, 0.5 * tol, depth + 1)
        + recurse(f, mid, hi, f_mid, f_rm, f_hi, right, 0.5 * tol, depth + 1)
}
