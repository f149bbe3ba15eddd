//! Market primitives shared by the solvers and the simulator.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

/// Market primitives of the game.
///
/// `w_lo`/`w_hi` bound the manufacturer's wholesale price. They are optional
/// for exponential demand (`k = 1`), where the price set is the open half-line,
/// and mandatory otherwise.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Environment {
    /// Retail price.
    pub p: f64,
    /// Production cost.
    pub c: f64,
    /// Weibull shape of the demand loss `y^k`.
    pub k: f64,
    /// Number of periods.
    pub horizon: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub w_lo: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub w_hi: Option<f64>,
    /// Initial shape hyperparameter.
    pub a1: f64,
    /// Initial rate hyperparameter.
    pub b1: f64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ValidationOptions {
    /// Accept `a1 == max(1, 1/k)`. The descaling divisor `a - 1` vanishes
    /// there for `k >= 1`, so downstream operations may still fail.
    pub allow_boundary_a1: bool,
}

impl Environment {
    /// Exponential-demand environment without wholesale bounds.
    pub fn exponential(p: f64, c: f64, horizon: usize, a1: f64, b1: f64) -> Self {
        Self {
            p,
            c,
            k: 1.0,
            horizon,
            w_lo: None,
            w_hi: None,
            a1,
            b1,
        }
    }

    pub fn with_wholesale_bounds(mut self, w_lo: f64, w_hi: f64) -> Self {
        self.w_lo = Some(w_lo);
        self.w_hi = Some(w_hi);
        self
    }

    pub fn is_exponential(&self) -> bool {
        self.k == 1.0
    }

    /// Lower bound on `a1` required by the standardized recursion.
    pub fn a1_floor(&self) -> f64 {
        1f64.max(1.0 / self.k)
    }

    pub fn validate(&self) -> Result<()> {
        self.validate_with(ValidationOptions::default())
    }

    pub fn validate_with(&self, opts: ValidationOptions) -> Result<()> {
        let fail = |msg: String| Err(Error::Validation(msg));
        let finite = [self.p, self.c, self.k, self.a1, self.b1];
        if finite.iter().any(|x| !x.is_finite()) {
            return fail("all market parameters must be finite".into());
        }
        if !(self.k > 0.0) {
            return fail(format!("shape k must be positive, got {}", self.k));
        }
        if !(self.c >= 0.0) {
            return fail(format!("cost c must be nonnegative, got {}", self.c));
        }
        if !(self.p > self.c) {
            return fail(format!(
                "retail price p = {} must exceed cost c = {}",
                self.p, self.c
            ));
        }
        if self.horizon == 0 {
            return fail("horizon must be at least 1".into());
        }
        if !(self.b1 > 0.0) {
            return fail(format!("b1 must be positive, got {}", self.b1));
        }
        let floor = self.a1_floor();
        if opts.allow_boundary_a1 {
            if self.a1 < floor {
                return fail(format!("a1 = {} is below max(1, 1/k) = {}", self.a1, floor));
            }
        } else if !(self.a1 > floor) {
            return fail(format!(
                "a1 = {} must exceed max(1, 1/k) = {} (pass the boundary override to allow equality)",
                self.a1, floor
            ));
        }
        match (self.w_lo, self.w_hi) {
            (None, None) if self.is_exponential() => Ok(()),
            (None, None) => fail("wholesale bounds w_lo, w_hi are required when k != 1".into()),
            (Some(_), None) | (None, Some(_)) => fail("w_lo and w_hi must be given together".into()),
            (Some(lo), Some(hi)) => {
                if !(lo > 0.0 && lo.is_finite() && hi.is_finite()) {
                    return fail(format!("wholesale bounds must be finite with w_lo > 0, got [{lo}, {hi}]"));
                }
                if !(lo <= self.c && self.p <= hi) {
                    return fail(format!(
                        "wholesale interval [{lo}, {hi}] must contain [c, p] = [{}, {}]",
                        self.c, self.p
                    ));
                }
                Ok(())
            }
        }
    }

    /// Hex SHA-256 of the canonical JSON encoding; used to pair solution
    /// files with configurations.
    pub fn snapshot_hash(&self) -> String {
        let bytes = serde_json::to_vec(self).expect("environment serializes");
        let digest = Sha256::digest(&bytes);
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }

    /// Human-readable list of fields that differ from `other`.
    pub fn diff(&self, other: &Environment) -> Vec<String> {
        let mut out = Vec::new();
        let mut cmp = |name: &str, a: String, b: String| {
            if a != b {
                out.push(format!("{name}: {a} != {b}"));
            }
        };
        cmp("p", self.p.to_string(), other.p.to_string());
        cmp("c", self.c.to_string(), other.c.to_string());
        cmp("k", self.k.to_string(), other.k.to_string());
        cmp("horizon", self.horizon.to_string(), other.horizon.to_string());
        cmp("w_lo", format!("{:?}", self.w_lo), format!("{:?}", other.w_lo));
        cmp("w_hi", format!("{:?}", self.w_hi), format!("{:?}", other.w_hi));
        cmp("a1", self.a1.to_string(), other.a1.to_string());
        cmp("b1", self.b1.to_string(), other.b1.to_string());
        out
    }
}
