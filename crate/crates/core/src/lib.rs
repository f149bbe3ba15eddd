//! Markov perfect equilibria of a finite-horizon wholesale-price game in
//! which a manufacturer and a retailer learn about Weibull demand from
//! censored sales.
//!
//! The equilibrium is computed on a standardized scale (`b = 1`) by
//! [`backward_solve_exp`] for exponential demand or [`backward_solve_weibull`]
//! for general shape, and mapped back to physical states by
//! [`EquilibriumPolicy`].

pub mod belief;
pub mod demand;
pub mod descale;
pub mod environment;
pub mod error;
pub mod exponential;
pub mod export;
pub mod quadrature;
pub mod search;
pub mod simulate;
pub mod solution;
pub mod verify;
pub mod weibull;

pub use belief::{Belief, SaleOutcome};
pub use descale::EquilibriumPolicy;
pub use environment::{Environment, ValidationOptions};
pub use error::{Error, Result};
pub use exponential::backward_solve_exp;
pub use simulate::{monte_carlo, simulate_path, ContinuationValues, MarkovPolicy, MonteCarloSummary, SimulationTrace};
pub use solution::{PeriodRow, SolveMethod, StandardizedSolution};
pub use verify::{verify_solution, CheckResult, VerifyOptions, VerifyReport};
pub use weibull::{backward_solve_weibull, GridSpec, WeibullDiagnostics, WeibullSolve};
