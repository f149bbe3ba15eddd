//! Forward simulation of the game, Monte Carlo profit estimates, and
//! one-shot deviation audits.
//!
//! Path `i` of a run with master seed `s` draws from
//! `ChaCha8Rng::seed_from_u64(s)` switched to stream `i`: first the demand
//! rate, then one open-interval uniform per period. Per-path totals are
//! reduced in path order, so results do not depend on the thread count.

use std::cell::RefCell;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Open01;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::belief::Belief;
use crate::demand::{predictive_mean, sample_demand, sample_theta, survival_unchecked, DemandModel};
use crate::environment::Environment;
use crate::error::{domain, Error, Result};
use crate::quadrature::adaptive_simpson;
use crate::search::{golden_max, linspace};
use crate::weibull::GridSpec;

/// Strategy pair measurable in the public belief.
pub trait MarkovPolicy: Sync {
    fn wholesale(&self, t: usize, belief: &Belief) -> Result<f64>;
    fn order(&self, t: usize, belief: &Belief, w: f64) -> Result<f64>;
}

/// `(retailer, manufacturer)` values from period `t` on; zero after the horizon.
pub trait ContinuationValues: Sync {
    fn values(&self, t: usize, belief: &Belief) -> Result<(f64, f64)>;
}

/// Fixed price and order in every state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstantPolicy {
    pub w: f64,
    pub q: f64,
}

impl MarkovPolicy for ConstantPolicy {
    fn wholesale(&self, _t: usize, _belief: &Belief) -> Result<f64> {
        Ok(self.w)
    }

    fn order(&self, _t: usize, _belief: &Belief, _w: f64) -> Result<f64> {
        Ok(self.q)
    }
}

/// Wraps a policy and scales its wholesale price at one `(t, n)` state.
#[derive(Debug, Clone, Copy)]
pub struct PerturbedPolicy<P> {
    pub inner: P,
    pub t: usize,
    pub n: usize,
    pub factor: f64,
}

impl<P: MarkovPolicy> MarkovPolicy for PerturbedPolicy<P> {
    fn wholesale(&self, t: usize, belief: &Belief) -> Result<f64> {
        let w = self.inner.wholesale(t, belief)?;
        Ok(if t == self.t && belief.n == self.n { w * self.factor } else { w })
    }

    fn order(&self, t: usize, belief: &Belief, w: f64) -> Result<f64> {
        self.inner.order(t, belief, w)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PeriodRecord {
    pub t: usize,
    pub a: f64,
    pub b: f64,
    pub w: f64,
    pub q: f64,
    pub d: f64,
    pub s: f64,
    pub censored: bool,
    pub retailer_profit: f64,
    pub manufacturer_profit: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationTrace {
    pub theta: f64,
    pub periods: Vec<PeriodRecord>,
    pub retailer_total: f64,
    pub manufacturer_total: f64,
}

/// Random stream of path `index` under `master_seed`.
pub fn path_rng(master_seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(index);
    rng
}

/// Plays one path with a given rate and per-period uniforms.
pub fn simulate_path_with_draws<P: MarkovPolicy + ?Sized>(
    env: &Environment,
    policy: &P,
    theta: f64,
    uniforms: &[f64],
) -> Result<SimulationTrace> {
    if uniforms.len() < env.horizon {
        return Err(domain(format!("need {} uniforms, got {}", env.horizon, uniforms.len())));
    }
    let mut belief = Belief::initial(env.a1, env.b1);
    let mut periods = Vec::with_capacity(env.horizon);
    for (i, &u) in uniforms.iter().take(env.horizon).enumerate() {
        let t = i + 1;
        let here = belief;
        let wrap = |e: Error| Error::Simulation { t, a: here.a, b: here.b, source: Box::new(e) };
        let w = policy.wholesale(t, &belief).map_err(wrap)?;
        let q = policy.order(t, &belief, w).map_err(wrap)?;
        let d = sample_demand(theta, env.k, u).map_err(wrap)?;
        let (next, outcome) = belief.update(q, d, env.k).map_err(wrap)?;
        periods.push(PeriodRecord {
            t,
            a: belief.a,
            b: belief.b,
            w,
            q,
            d,
            s: outcome.sales,
            censored: outcome.censored,
            retailer_profit: env.p * outcome.sales - w * q,
            manufacturer_profit: (w - env.c) * q,
        });
        belief = next;
    }
    let retailer_total = periods.iter().map(|r| r.retailer_profit).sum();
    let manufacturer_total = periods.iter().map(|r| r.manufacturer_profit).sum();
    Ok(SimulationTrace {
        theta,
        periods,
        retailer_total,
        manufacturer_total,
    })
}

/// Plays one path drawing the rate and demands from `rng`.
pub fn simulate_path_with_rng<P: MarkovPolicy + ?Sized, R: Rng + ?Sized>(
    env: &Environment,
    policy: &P,
    rng: &mut R,
) -> Result<SimulationTrace> {
    let theta = sample_theta(env.a1, env.b1, rng)?;
    let uniforms: Vec<f64> = (0..env.horizon).map(|_| rng.sample(Open01)).collect();
    simulate_path_with_draws(env, policy, theta, &uniforms)
}

/// Plays path 0 of `seed`.
pub fn simulate_path<P: MarkovPolicy + ?Sized>(env: &Environment, policy: &P, seed: u64) -> Result<SimulationTrace> {
    simulate_path_with_rng(env, policy, &mut path_rng(seed, 0))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub mean: f64,
    /// `None` when a single path was run.
    pub se: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonteCarloSummary {
    pub n_paths: usize,
    pub master_seed: u64,
    pub retailer: Estimate,
    pub manufacturer: Estimate,
    /// `(retailer, manufacturer)` values the means are compared against.
    pub reference: Option<(f64, f64)>,
    pub z_scores: Option<(Option<f64>, Option<f64>)>,
}

/// Compensated sum, evaluated in slice order.
fn neumaier_sum(xs: impl IntoIterator<Item = f64>) -> f64 {
    let (mut sum, mut comp) = (0.0f64, 0.0f64);
    for x in xs {
        let t = sum + x;
        if sum.abs() >= x.abs() {
            comp += (sum - t) + x;
        } else {
            comp += (x - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

fn estimate(xs: &[f64]) -> Estimate {
    let n = xs.len() as f64;
    let mean = neumaier_sum(xs.iter().copied()) / n;
    let se = (xs.len() > 1).then(|| {
        let var = neumaier_sum(xs.iter().map(|x| (x - mean) * (x - mean))) / (n - 1.0);
        (var / n).sqrt()
    });
    Estimate { mean, se }
}

fn z_score(est: Estimate, reference: f64) -> Option<f64> {
    est.se.map(|se| if se > 0.0 { (est.mean - reference) / se } else if est.mean == reference { 0.0 } else { f64::INFINITY })
}

/// Runs `n_paths` independent paths and summarizes total profits.
pub fn monte_carlo<P: MarkovPolicy + ?Sized>(
    env: &Environment,
    policy: &P,
    n_paths: usize,
    master_seed: u64,
    reference: Option<(f64, f64)>,
) -> Result<MonteCarloSummary> {
    if n_paths == 0 {
        return Err(domain("n_paths must be at least 1"));
    }
    let totals: Vec<(f64, f64)> = (0..n_paths as u64)
        .into_par_iter()
        .map(|i| {
            let trace = simulate_path_with_rng(env, policy, &mut path_rng(master_seed, i))?;
            Ok((trace.retailer_total, trace.manufacturer_total))
        })
        .collect::<Result<_>>()?;
    let r: Vec<f64> = totals.iter().map(|x| x.0).collect();
    let m: Vec<f64> = totals.iter().map(|x| x.1).collect();
    let (retailer, manufacturer) = (estimate(&r), estimate(&m));
    Ok(MonteCarloSummary {
        n_paths,
        master_seed,
        retailer,
        manufacturer,
        reference,
        z_scores: reference.map(|(vr, vm)| (z_score(retailer, vr), z_score(manufacturer, vm))),
    })
}

/// Best one-shot improvements available to each player at a state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeviationReport {
    pub t: usize,
    pub a: f64,
    pub b: f64,
    pub w: f64,
    pub q: f64,
    pub retailer_value: f64,
    pub retailer_gain: f64,
    pub best_order: f64,
    pub manufacturer_value: f64,
    pub manufacturer_gain: f64,
    pub best_wholesale: f64,
}

const DEVIATION_QUAD_TOL: f64 = 1e-12;

/// Stage objectives in original coordinates with continuation values from
/// period `t + 1`.
struct StageProblem<'a, V: ?Sized> {
    env: &'a Environment,
    values: &'a V,
    model: DemandModel,
    t: usize,
    belief: Belief,
}

impl<V: ContinuationValues + ?Sized> StageProblem<'_, V> {
    /// `∫_0^q V(a+1, b+y^k) dG(y|a,b) + V(a, b+q^k) Ḡ(q|a,b)` for both players.
    fn continuation(&self, q: f64) -> Result<(f64, f64)> {
        let (a, b, k) = (self.belief.a, self.belief.b, self.env.k);
        let t = self.t + 1;
        let up = |u: f64| Belief { a: a + 1.0, b: b + u, n: self.belief.n + 1 };
        let qk = q.powf(k);
        let density = |u: f64| a * (-(a + 1.0) * (u / b).ln_1p()).exp() / b;
        let failure = RefCell::new(None);
        let integrate = |pick: fn((f64, f64)) -> f64| {
            adaptive_simpson(
                |u| match self.values.values(t, &up(u)) {
                    Ok(v) => pick(v) * density(u),
                    Err(e) => {
                        failure.borrow_mut().get_or_insert(e);
                        0.0
                    }
                },
                0.0,
                qk,
                DEVIATION_QUAD_TOL,
            )
        };
        let int_r = integrate(|v| v.0);
        let int_m = integrate(|v| v.1);
        if let Some(e) = failure.into_inner() {
            return Err(e);
        }
        let surv = survival_unchecked(q, a, b, k);
        let stay = self.values.values(t, &Belief { a, b: b + qk, n: self.belief.n })?;
        Ok((int_r + stay.0 * surv, int_m + stay.1 * surv))
    }

    fn retailer(&self, w: f64, q: f64) -> Result<f64> {
        let sales = self.model.expected_min_sales_unchecked(q, self.belief.a, self.belief.b);
        Ok(self.env.p * sales - w * q + self.continuation(q)?.0)
    }

    fn manufacturer(&self, w: f64, q: f64) -> Result<f64> {
        Ok((w - self.env.c) * q + self.continuation(q)?.1)
    }
}

/// Grid-and-refine maximum of a fallible objective.
fn scan_max(f: impl Fn(f64) -> Result<f64>, lo: f64, hi: f64, grid: &[f64], iters: usize) -> Result<(f64, f64)> {
    let vals = grid.iter().map(|&x| f(x)).collect::<Result<Vec<f64>>>()?;
    let (j, _) = vals
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |acc, (j, &v)| if v > acc.1 { (j, v) } else { acc });
    let left = if j == 0 { lo } else { grid[j - 1] };
    let right = if j + 1 == grid.len() { hi } else { grid[j + 1] };
    let mut failure = None;
    let (x, v) = golden_max(
        |x| {
            f(x).unwrap_or_else(|e| {
                failure.get_or_insert(e);
                f64::NEG_INFINITY
            })
        },
        left,
        right,
        iters,
    );
    if let Some(e) = failure {
        return Err(e);
    }
    Ok(if v > vals[j] { (x, v) } else { (grid[j], vals[j]) })
}

/// Largest one-shot deviation gains at `(t, belief)`.
///
/// The retailer deviates over orders at the price `w` (the policy's price if
/// `None`); the manufacturer deviates over prices with the retailer
/// responding per the policy. Continuation values come from `values`.
pub fn one_shot_deviation_check<P, V>(
    env: &Environment,
    policy: &P,
    values: &V,
    t: usize,
    belief: Belief,
    w: Option<f64>,
    grid: GridSpec,
) -> Result<DeviationReport>
where
    P: MarkovPolicy + ?Sized,
    V: ContinuationValues + ?Sized,
{
    let stage = StageProblem {
        env,
        values,
        model: DemandModel::new(env.k)?,
        t,
        belief,
    };
    let policy_w = policy.wholesale(t, &belief)?;
    let w = w.unwrap_or(policy_w);
    let q = policy.order(t, &belief, w)?;
    let (a, b, k) = (belief.a, belief.b, env.k);

    let mean = predictive_mean(a, b, k)?
        .finite()
        .ok_or(Error::InfiniteMean { a, k })?;
    let next_r = values.values(t + 1, &Belief { a: a + 1.0, b, n: belief.n + 1 })?.0;
    // orders above this level are dominated by ordering nothing
    let q_bar = ((env.p * mean + next_r * a / (a - 1.0 / k)) / w).max(2.0 * q);
    let retailer_value = stage.retailer(w, q)?;
    let q_grid = linspace(0.0, q_bar, grid.n_z);
    let (best_order, best_r) = scan_max(|x| stage.retailer(w, x), 0.0, q_bar, &q_grid, grid.refine_iters)?;

    let w_lo = env.w_lo.unwrap_or(1e-3 * env.p);
    let w_hi = env.w_hi.unwrap_or(2.0 * env.p).max(policy_w);
    let manufacturer_at = |x: f64| stage.manufacturer(x, policy.order(t, &belief, x)?);
    let manufacturer_value = manufacturer_at(policy_w)?;
    let w_grid = linspace(w_lo, w_hi, grid.n_w);
    let (best_wholesale, best_m) = scan_max(manufacturer_at, w_lo, w_hi, &w_grid, grid.refine_iters)?;

    Ok(DeviationReport {
        t,
        a,
        b,
        w,
        q,
        retailer_value,
        retailer_gain: best_r - retailer_value,
        best_order,
        manufacturer_value,
        manufacturer_gain: best_m - manufacturer_value,
        best_wholesale,
    })
}
