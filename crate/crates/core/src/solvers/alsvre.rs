//! Accelerated loopless SVRE: L-SVRE on proximal sub-problems with momentum
//! on the proximal center.
//!
//! Round `k` solves `F_k = f + (β/2)‖x − u_{k−1}‖²` approximately with
//! `T_k` inner L-SVRE steps warm-started at `(x_{k−1}, y_{k−1})`, then takes
//! one projected full-gradient step on `F_k` and sets
//! `u_k = x_k + γ(x_k − x_{k−1})`.

use super::lsvre::LsvreCore;
use super::{Budget, Monitor, RunOptions, ScheduleParams, SolverTrace};
use crate::error::{Error, Result};
use crate::oracle::{
    check_dims, gradient_operator_into, project_point, seeded_rng, FiniteSumProblem,
    ProblemConstants, Transposed,
};
use crate::point::{GradientPair, PrimalDualPoint};
use crate::projections::FeasibleSet;

/// `f + (β/2)‖x − u‖²`, applied to every component.
pub struct ProxShifted<'a, P: ?Sized> {
    inner: &'a P,
    beta: f64,
    center: Vec<f64>,
}

impl<'a, P: FiniteSumProblem + ?Sized> ProxShifted<'a, P> {
    pub fn new(inner: &'a P, beta: f64, center: Vec<f64>) -> Self {
        Self {
            inner,
            beta,
            center,
        }
    }

    fn add_shift(&self, z: &PrimalDualPoint, scale: f64, out: &mut GradientPair) {
        if self.beta == 0.0 {
            return;
        }
        let s = scale * self.beta;
        for ((g, x), u) in out.gx.iter_mut().zip(&z.x).zip(&self.center) {
            *g += s * (x - u);
        }
    }
}

impl<P: FiniteSumProblem + ?Sized> FiniteSumProblem for ProxShifted<'_, P> {
    fn constants(&self) -> ProblemConstants {
        let c = self.inner.constants();
        ProblemConstants {
            l: c.l + self.beta,
            mu_x: c.mu_x + self.beta,
            ..c
        }
    }
    fn dim_x(&self) -> usize {
        self.inner.dim_x()
    }
    fn dim_y(&self) -> usize {
        self.inner.dim_y()
    }
    fn x_set(&self) -> &FeasibleSet {
        self.inner.x_set()
    }
    fn y_set(&self) -> &FeasibleSet {
        self.inner.y_set()
    }
    fn num_components(&self) -> usize {
        self.inner.num_components()
    }
    fn component_value(&self, i: usize, z: &PrimalDualPoint) -> f64 {
        self.inner.component_value(i, z) + 0.5 * self.beta * crate::point::dist2(&z.x, &self.center)
    }
    fn add_component_operator(
        &self,
        i: usize,
        z: &PrimalDualPoint,
        scale: f64,
        out: &mut GradientPair,
    ) {
        self.inner.add_component_operator(i, z, scale, out);
        self.add_shift(z, scale, out);
    }
    fn add_full_operator(&self, z: &PrimalDualPoint, scale: f64, out: &mut GradientPair) {
        self.inner.add_full_operator(z, scale, out);
        self.add_shift(z, scale, out);
    }
}

/// Run AL-SVRE. Stops after `params.rounds` rounds or when `budget` is
/// exhausted, whichever comes first; at least one of the two must be set.
/// An SFO budget is checked between inner steps, and the round in progress
/// still finishes its correction step.
pub fn alsvre_run<P: FiniteSumProblem>(
    problem: &P,
    z0: &PrimalDualPoint,
    params: &ScheduleParams,
    budget: Option<Budget>,
    opts: &RunOptions,
) -> Result<SolverTrace> {
    params.validate()?;
    if params.rounds.is_none() && budget.is_none() {
        return Err(Error::invalid("AL-SVRE needs a round count K or a budget"));
    }
    if budget == Some(Budget::Iterations(0)) {
        return Err(Error::invalid("outer round count K must be at least 1"));
    }
    check_dims(problem, z0)?;
    let monitor = Monitor::new(problem, opts, params.transpose);
    if params.transpose {
        let t = Transposed::new(problem);
        run_oriented(&t, &z0.transposed(), params, budget, monitor)
    } else {
        run_oriented(problem, z0, params, budget, monitor)
    }
}

fn run_oriented<Q: FiniteSumProblem + ?Sized>(
    problem: &Q,
    z0: &PrimalDualPoint,
    params: &ScheduleParams,
    budget: Option<Budget>,
    mut monitor: Monitor<'_>,
) -> Result<SolverTrace> {
    let mut z = z0.clone();
    project_point(problem, &mut z);
    let mut counter = monitor.algorithm_counter();
    let mut rng = seeded_rng(params.seed, 0);
    let mut u = z.x.clone();
    let mut g = GradientPair::zeros(problem.dim_x(), problem.dim_y());
    let mut refreshes = 0;
    let sfo_cap = match budget {
        Some(Budget::Sfo(s)) => Some(s),
        _ => None,
    };
    let round_cap = match (params.rounds, budget) {
        (Some(k), Some(Budget::Iterations(b))) => Some(k.min(b)),
        (Some(k), _) => Some(k),
        (None, Some(Budget::Iterations(b))) => Some(b),
        (None, _) => None,
    };

    monitor.maybe_record(0, &counter, &z)?;
    let mut k = 0;
    loop {
        if round_cap.is_some_and(|cap| k >= cap)
            || sfo_cap.is_some_and(|cap| counter.calls() >= cap)
        {
            break;
        }
        let sub = ProxShifted::new(problem, params.beta, u.clone());
        let x_prev = z.x.clone();

        let mut core = LsvreCore::new(&sub, &z, params.tau, params.p, &mut counter, &mut monitor)?;
        for _ in 0..params.inner_iterations {
            if sfo_cap.is_some_and(|cap| counter.calls() >= cap) {
                break;
            }
            core.step(&sub, &mut rng, &mut counter, &mut monitor)?;
        }
        refreshes += core.refreshes;

        // correction: one projected full-gradient step on F_k
        let tilde = core.z;
        gradient_operator_into(&sub, &tilde, &mut counter, &mut g)?;
        z.clone_from(&tilde);
        z.step_against(params.tau, &g);
        project_point(problem, &mut z);
        if !z.is_finite() {
            return Err(Error::NonFinite {
                context: format!("AL-SVRE iterate in round {}", k + 1),
            });
        }
        monitor.chain_point(&mut counter, &z);

        for ((uj, xj), xp) in u.iter_mut().zip(&z.x).zip(&x_prev) {
            *uj = xj + params.gamma * (xj - xp);
        }
        k += 1;
        monitor.maybe_record(k, &counter, &z)?;
    }
    monitor.record(k, &counter, &z)?;
    Ok(monitor.finish(
        "alsvre",
        params.seed,
        params.snapshot(),
        &z,
        k,
        &counter,
        refreshes,
    ))
}
