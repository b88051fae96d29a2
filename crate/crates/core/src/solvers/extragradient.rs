//! Deterministic projected extragradient, `2n` SFO calls per iteration.

use super::{fmt_param, Budget, Monitor, RunOptions, SolverTrace};
use crate::error::{Error, Result};
use crate::oracle::{check_dims, gradient_operator_into, project_point, FiniteSumProblem};
use crate::point::GradientPair;
use crate::point::PrimalDualPoint;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EgParams {
    pub tau: f64,
    pub budget: Budget,
}

/// `τ = 1/(2L)`; the mean operator is at most `L`-Lipschitz.
pub fn extragradient_default_params<P: FiniteSumProblem + ?Sized>(
    problem: &P,
    budget: Budget,
) -> EgParams {
    EgParams {
        tau: 0.5 / problem.constants().l,
        budget,
    }
}

/// `z½ = P(z − τg(z))`, `z⁺ = P(z − τg(z½))`.
pub fn extragradient_run<P: FiniteSumProblem>(
    problem: &P,
    z0: &PrimalDualPoint,
    params: &EgParams,
    opts: &RunOptions,
) -> Result<SolverTrace> {
    if !(params.tau > 0.0 && params.tau.is_finite()) {
        return Err(Error::invalid(format!(
            "step size tau must be positive, got {}",
            params.tau
        )));
    }
    check_dims(problem, z0)?;
    let mut z = z0.clone();
    project_point(problem, &mut z);

    let mut monitor = Monitor::new(problem, opts, false);
    let mut counter = monitor.algorithm_counter();
    monitor.chain_point(&mut counter, &z);
    let mut g = GradientPair::zeros(problem.dim_x(), problem.dim_y());
    let mut half = z.clone();

    let mut t = 0;
    monitor.maybe_record(0, &counter, &z)?;
    while !params.budget.exhausted(t, counter.calls()) {
        gradient_operator_into(problem, &z, &mut counter, &mut g)?;
        half.clone_from(&z);
        half.step_against(params.tau, &g);
        project_point(problem, &mut half);
        monitor.chain_point(&mut counter, &half);

        gradient_operator_into(problem, &half, &mut counter, &mut g)?;
        z.step_against(params.tau, &g);
        project_point(problem, &mut z);
        if !z.is_finite() {
            return Err(Error::NonFinite {
                context: "extragradient iterate".into(),
            });
        }
        monitor.chain_point(&mut counter, &z);
        t += 1;
        monitor.maybe_record(t, &counter, &z)?;
    }
    monitor.record(t, &counter, &z)?;
    let snapshot = vec![("tau".to_string(), fmt_param(params.tau))];
    Ok(monitor.finish("eg", 0, snapshot, &z, t, &counter, 0))
}
