use std::path::{Path, PathBuf};

use serde::Serialize;

use wholesale_mpe::export::{plots_csv, solution_csv, trace_csv};
use wholesale_mpe::simulate::path_rng;
use wholesale_mpe::simulate::simulate_path_with_rng;
use wholesale_mpe::{
    backward_solve_exp, backward_solve_weibull, monte_carlo, verify_solution, EquilibriumPolicy, VerifyOptions,
    VerifyReport,
};

use crate::config::{Format, RunConfig};
use crate::document::{write_json, write_text, SolutionDocument};
use crate::error::{CliError, CliResult, Kind};

/// Solves the configured game and writes the solution files. Returns the
/// paths written.
pub fn solve(config: &RunConfig) -> CliResult<Vec<PathBuf>> {
    let env = &config.environment;
    let (solution, diagnostics) = if env.is_exponential() {
        (backward_solve_exp(env)?, None)
    } else {
        let solved = backward_solve_weibull(env, config.solver.grid)?;
        (solved.solution, Some(solved.diagnostics))
    };
    let dir = &config.output.directory;
    let mut written = Vec::new();
    if config.wants(Format::Csv) {
        let path = dir.join("solution.csv");
        write_text(&path, &solution_csv(&solution))?;
        written.push(path);
    }
    if let Some(diag) = &diagnostics {
        let path = dir.join("diagnostics.json");
        write_json(&path, diag)?;
        written.push(path);
    }
    // The JSON document is always written; later commands read it.
    let path = dir.join("solution.json");
    write_json(&path, &SolutionDocument::new(solution, config.simulate.master_seed, diagnostics))?;
    written.push(path);
    Ok(written)
}

/// Refuses to pair a solution with a configuration for a different market.
pub fn check_environment(config: &RunConfig, doc: &SolutionDocument) -> CliResult<()> {
    let diff = config.environment.diff(&doc.solution.environment);
    if diff.is_empty() {
        return Ok(());
    }
    Err(CliError::new(Kind::EnvironmentMismatch, "solution was computed for a different environment").with_details(diff))
}

pub fn simulate(config: &RunConfig, solution_path: &Path) -> CliResult<Vec<PathBuf>> {
    let doc = SolutionDocument::load(solution_path)?;
    check_environment(config, &doc)?;
    let env = &config.environment;
    let policy = EquilibriumPolicy::new(&doc.solution);
    let reference = policy.mpe_values(1, env.a1, env.b1)?;
    let sim = &config.simulate;
    let summary = monte_carlo(env, &policy, sim.n_paths, sim.master_seed, Some(reference))?;

    let dir = &config.output.directory;
    let mut written = Vec::new();
    let path = dir.join("summary.json");
    write_json(&path, &summary)?;
    written.push(path);
    for i in 0..sim.traces.min(sim.n_paths) {
        let trace = simulate_path_with_rng(env, &policy, &mut path_rng(sim.master_seed, i as u64))?;
        if config.wants(Format::Csv) {
            let path = dir.join(format!("trace_{i}.csv"));
            write_text(&path, &trace_csv(&trace))?;
            written.push(path);
        }
        if config.wants(Format::Json) {
            let path = dir.join(format!("trace_{i}.json"));
            write_json(&path, &trace)?;
            written.push(path);
        }
    }
    Ok(written)
}

/// Runs the checks and writes `verify.json` next to `out`. Any failed check
/// is reported as an invariant violation after the report is written.
pub fn verify(solution_path: &Path, out: &Path) -> CliResult<VerifyReport> {
    let doc = SolutionDocument::load(solution_path)?;
    let report = verify_solution(&doc.solution, &VerifyOptions::default());
    write_json(&out.join("verify.json"), &report)?;
    if !report.passed {
        let failed = report
            .checks
            .iter()
            .filter(|c| !c.passed)
            .map(|c| format!("{}: max error {:e} > {:e}", c.name, c.max_error, c.tolerance))
            .collect();
        return Err(CliError::new(Kind::Invariant, "solution failed verification").with_details(failed));
    }
    Ok(report)
}

pub fn export_plots(solution_path: &Path, out: &Path) -> CliResult<PathBuf> {
    let doc = SolutionDocument::load(solution_path)?;
    let path = out.join("plots.csv");
    write_text(&path, &plots_csv(&doc.solution))?;
    Ok(path)
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct QueryAnswer {
    pub t: usize,
    pub a: f64,
    pub b: f64,
    pub w: f64,
    pub mpe_wholesale: f64,
    pub q: f64,
    pub retailer_value: f64,
    pub manufacturer_value: f64,
}

/// Equilibrium play at a belief state. `w` overrides the manufacturer's
/// price; the order is then the retailer's response to it.
pub fn query(solution_path: &Path, t: usize, a: f64, b: f64, w: Option<f64>) -> CliResult<QueryAnswer> {
    let doc = SolutionDocument::load(solution_path)?;
    let policy = EquilibriumPolicy::new(&doc.solution);
    let mpe_wholesale = policy.mpe_wholesale(t, a, b)?;
    let w = w.unwrap_or(mpe_wholesale);
    let q = policy.mpe_order(t, a, b, w)?;
    let (retailer_value, manufacturer_value) = policy.mpe_values(t, a, b)?;
    Ok(QueryAnswer {
        t,
        a,
        b,
        w,
        mpe_wholesale,
        q,
        retailer_value,
        manufacturer_value,
    })
}
