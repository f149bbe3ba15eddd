//! Public posterior state and its censored Bayesian transition.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};

/// Gamma posterior over the demand rate, shared by both players.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Belief {
    pub a: f64,
    pub b: f64,
    /// Number of uncensored observations so far; `a = a1 + n`.
    pub n: usize,
}

/// What the players observe after a period.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SaleOutcome {
    pub sales: f64,
    /// True iff demand reached the order, so only `sales = q` is observed.
    pub censored: bool,
}

impl Belief {
    pub fn initial(a1: f64, b1: f64) -> Self {
        Self { a: a1, b: b1, n: 0 }
    }

    /// Bayesian update after ordering `q` and facing demand `d`.
    ///
    /// Sales are `min(d, q)`; the observation is exact only when `d < q`
    /// (a tie `d == q` counts as censored).
    pub fn update(&self, q: f64, d: f64, k: f64) -> Result<(Belief, SaleOutcome)> {
        if !(q >= 0.0) || !(d >= 0.0) {
            return Err(domain(format!("order and demand must be nonnegative, got q = {q}, d = {d}")));
        }
        if !(k > 0.0) {
            return Err(domain(format!("k must be positive, got {k}")));
        }
        let sales = d.min(q);
        let censored = !(sales < q);
        let mut next = *self;
        if !censored {
            next.a += 1.0;
            next.n += 1;
        }
        next.b += sales.powf(k);
        Ok((next, SaleOutcome { sales, censored }))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn uncensored_observation() {
        let (next, out) = Belief::initial(1.0, 1.0).update(2.0, 1.0, 1.0).unwrap();
        assert_eq!((next.a, next.b, next.n), (2.0, 2.0, 1));
        assert_eq!(out, SaleOutcome { sales: 1.0, censored: false });
    }

    #[test]
    fn censored_observation() {
        let (next, out) = Belief::initial(1.0, 1.0).update(2.0, 3.0, 1.0).unwrap();
        assert_eq!((next.a, next.b, next.n), (1.0, 3.0, 0));
        assert_eq!(out, SaleOutcome { sales: 2.0, censored: true });
    }

    #[test]
    fn tie_is_censored() {
        let (next, out) = Belief::initial(1.0, 1.0).update(2.0, 2.0, 2.0).unwrap();
        assert_eq!((next.a, next.b, next.n), (1.0, 5.0, 0));
        assert!(out.censored);
        assert_eq!(out.sales, 2.0);
    }

    #[test]
    fn zero_order_leaves_belief_unchanged() {
        let b = Belief { a: 3.0, b: 2.5, n: 1 };
        let (next, out) = b.update(0.0, 4.2, 1.3).unwrap();
        assert_eq!(next, b);
        assert!(out.censored);
    }

    #[test]
    fn rejects_negative_inputs() {
        let b = Belief::initial(2.0, 1.0);
        assert!(b.update(-1.0, 1.0, 1.0).is_err());
        assert!(b.update(1.0, -1.0, 1.0).is_err());
    }

    proptest! {
        #[test]
        fn counts_and_increments(
            steps in prop::collection::vec((0.0..5.0f64, 0.0..5.0f64), 0..20),
            k in 0.3..3.0f64,
        ) {
            let a1 = 1.7;
            let mut belief = Belief::initial(a1, 0.9);
            let mut exact = 0usize;
            for (q, d) in steps {
                let (next, out) = belief.update(q, d, k).unwrap();
                prop_assert!((next.b - belief.b - out.sales.powf(k)).abs() <= 1e-12 * next.b);
                prop_assert!(next.a >= belief.a && next.b >= belief.b);
                prop_assert!(out.sales <= q);
                prop_assert_eq!(out.censored, out.sales == q);
                if d < q {
                    exact += 1;
                }
                belief = next;
            }
            prop_assert_eq!(belief.n, exact);
            prop_assert!((belief.a - (a1 + exact as f64)).abs() <= 1e-12);
        }
    }
}
