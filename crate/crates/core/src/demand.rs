//! Newsvendor demand family with power loss `l(y) = y^k` and its Gamma-mixed
//! predictive law.
//!
//! Conditional on the rate `theta`, demand has CDF `1 - exp(-theta * y^k)`.
//! Integrating `theta` against a Gamma(a, b) prior gives the predictive
//! survival `(b / (b + y^k))^a`.

use rand::Rng;
use rand_distr::{Distribution, Gamma};

use crate::error::{domain, Error, Result};
use crate::quadrature::adaptive_simpson;

/// Default absolute tolerance for survival-function integrals.
pub const DEFAULT_QUAD_TOL: f64 = 1e-10;

fn check_positive(name: &str, x: f64) -> Result<()> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(domain(format!("{name} must be positive and finite, got {x}")))
    }
}

fn check_nonnegative(name: &str, x: f64) -> Result<()> {
    if x >= 0.0 && !x.is_nan() {
        Ok(())
    } else {
        Err(domain(format!("{name} must be nonnegative, got {x}")))
    }
}

fn check_hyper(a: f64, b: f64, k: f64) -> Result<()> {
    check_positive("a", a)?;
    check_positive("b", b)?;
    check_positive("k", k)
}

/// `l(y) = y^k`.
pub fn loss(y: f64, k: f64) -> Result<f64> {
    check_nonnegative("demand", y)?;
    check_positive("k", k)?;
    Ok(y.powf(k))
}

/// `1 - (b / (b + y^k))^a`.
pub fn predictive_cdf(y: f64, a: f64, b: f64, k: f64) -> Result<f64> {
    Ok(1.0 - predictive_survival(y, a, b, k)?)
}

/// `(b / (b + y^k))^a`.
pub fn predictive_survival(y: f64, a: f64, b: f64, k: f64) -> Result<f64> {
    check_nonnegative("y", y)?;
    check_hyper(a, b, k)?;
    Ok(survival_unchecked(y, a, b, k))
}

#[inline]
pub(crate) fn survival_unchecked(y: f64, a: f64, b: f64, k: f64) -> f64 {
    if y == 0.0 {
        return 1.0;
    }
    (-a * (y.powf(k) / b).ln_1p()).exp()
}

/// Standardized (`b = 1`) survival `(1 + z^k)^{-a}`.
#[inline]
pub(crate) fn std_survival(z: f64, a: f64, k: f64) -> f64 {
    survival_unchecked(z, a, 1.0, k)
}

/// Mean of a predictive law; infinite when the tail is too heavy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Mean {
    Finite(f64),
    Infinite,
}

impl Mean {
    pub fn finite(self) -> Option<f64> {
        match self {
            Mean::Finite(m) => Some(m),
            Mean::Infinite => None,
        }
    }
}

/// Predictive mean `b^{1/k} / k * B(1/k, a - 1/k)`, finite iff `a > 1/k`.
pub fn predictive_mean(a: f64, b: f64, k: f64) -> Result<Mean> {
    check_hyper(a, b, k)?;
    let inv_k = 1.0 / k;
    if a <= inv_k {
        return Ok(Mean::Infinite);
    }
    if k == 1.0 {
        return Ok(Mean::Finite(b / (a - 1.0)));
    }
    let ln_beta = libm::lgamma(inv_k) + libm::lgamma(a - inv_k) - libm::lgamma(a);
    Ok(Mean::Finite(b.powf(inv_k) * inv_k * ln_beta.exp()))
}

/// Numerical routines of the demand family at a fixed shape `k`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DemandModel {
    pub k: f64,
    pub tol: f64,
}

impl DemandModel {
    pub fn new(k: f64) -> Result<Self> {
        Self::with_tolerance(k, DEFAULT_QUAD_TOL)
    }

    pub fn with_tolerance(k: f64, tol: f64) -> Result<Self> {
        check_positive("k", k)?;
        check_positive("quadrature tolerance", tol)?;
        Ok(Self { k, tol })
    }

    /// `E[min(D, q) | a, b]`, the integral of the predictive survival over `[0, q]`.
    pub fn expected_min_sales(&self, q: f64, a: f64, b: f64) -> Result<f64> {
        check_nonnegative("q", q)?;
        check_hyper(a, b, self.k)?;
        Ok(self.expected_min_sales_unchecked(q, a, b))
    }

    pub(crate) fn expected_min_sales_unchecked(&self, q: f64, a: f64, b: f64) -> f64 {
        if q == 0.0 {
            return 0.0;
        }
        if self.k == 1.0 {
            let log_ratio = (q / b).ln_1p();
            if a == 1.0 {
                return b * log_ratio;
            }
            // b/(a-1) * (1 - (b/(b+q))^{a-1})
            return -b / (a - 1.0) * (-(a - 1.0) * log_ratio).exp_m1();
        }
        let k = self.k;
        let v = adaptive_simpson(|y| survival_unchecked(y, a, b, k), 0.0, q, self.tol);
        v.clamp(0.0, q)
    }

    /// Integral of the predictive survival over `[lo, hi]`.
    pub(crate) fn survival_integral(&self, lo: f64, hi: f64, a: f64, b: f64) -> f64 {
        if self.k == 1.0 {
            return self.expected_min_sales_unchecked(hi, a, b)
                - self.expected_min_sales_unchecked(lo, a, b);
        }
        let k = self.k;
        adaptive_simpson(|y| survival_unchecked(y, a, b, k), lo, hi, self.tol)
    }
}

/// `E[min(D, q) | a, b]` at the default quadrature tolerance.
pub fn expected_min_sales(q: f64, a: f64, b: f64, k: f64) -> Result<f64> {
    DemandModel::new(k)?.expected_min_sales(q, a, b)
}

/// Inverse-transform draw `(-ln(1 - u) / theta)^{1/k}` from `F(.|theta)`.
pub fn sample_demand(theta: f64, k: f64, u: f64) -> Result<f64> {
    check_positive("theta", theta)?;
    check_positive("k", k)?;
    if !(u > 0.0 && u < 1.0) {
        return Err(domain(format!("uniform variate must lie in (0, 1), got {u}")));
    }
    let e = -(-u).ln_1p() / theta;
    Ok(if k == 1.0 { e } else { e.powf(1.0 / k) })
}

/// Draw from the Gamma prior with shape `a` and rate `b`.
///
/// The draw is a unit-rate Gamma variate divided by `b`, so for a fixed
/// stream the result scales exactly as `1/b`.
pub fn sample_theta<R: Rng + ?Sized>(a: f64, b: f64, rng: &mut R) -> Result<f64> {
    check_positive("a", a)?;
    check_positive("b", b)?;
    let gamma = Gamma::new(a, 1.0).map_err(|e| Error::Domain(e.to_string()))?;
    Ok(gamma.sample(rng) / b)
}
