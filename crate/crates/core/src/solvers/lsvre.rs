//! Loopless stochastic variance-reduced extragradient.
//!
//! With `α = 1 − p`, each iteration does
//!
//! ```text
//! z̄   = α z + (1 − α) w
//! z½  = P(z̄ − τ g(w))
//! z⁺  = P(z̄ − τ [g(w) + g_i(z½) − g_i(w)])     i uniform
//! w⁺  = z⁺ with probability p, else w
//! ```
//!
//! The index is drawn before the snapshot coin, from one ChaCha stream per run.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::{fmt_param, Budget, Monitor, RunOptions, SolverTrace};
use crate::error::{Error, Result};
use crate::oracle::{
    add_stochastic_operator, check_dims, gradient_operator_into, project_point, seeded_rng,
    FiniteSumProblem, SfoCounter,
};
use crate::point::{GradientPair, PrimalDualPoint};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LsvreParams {
    pub tau: f64,
    /// Snapshot refresh probability in `(0, 1]`.
    pub p: f64,
    pub budget: Budget,
    pub seed: u64,
}

impl LsvreParams {
    pub fn alpha(&self) -> f64 {
        1.0 - self.p
    }

    pub(crate) fn validate(&self) -> Result<()> {
        validate_step(self.tau, self.p)
    }
}

pub(crate) fn validate_step(tau: f64, p: f64) -> Result<()> {
    if !(tau > 0.0 && tau.is_finite()) {
        return Err(Error::invalid(format!(
            "step size tau must be positive, got {tau}"
        )));
    }
    if !(p > 0.0 && p <= 1.0) {
        return Err(Error::invalid(format!(
            "snapshot probability p must be in (0, 1], got {p}"
        )));
    }
    Ok(())
}

/// `p = 1/(2n)`, `τ = 1/(4√n L)`, with the given budget and seed.
pub fn lsvre_default_params<P: FiniteSumProblem + ?Sized>(
    problem: &P,
    budget: Budget,
    seed: u64,
) -> LsvreParams {
    let c = problem.constants();
    let n = c.n as f64;
    LsvreParams {
        tau: 1.0 / (4.0 * n.sqrt() * c.l),
        p: 1.0 / (2.0 * n),
        budget,
        seed,
    }
}

/// State of one L-SVRE run, reusable as the inner solver of AL-SVRE.
pub(crate) struct LsvreCore {
    pub(crate) z: PrimalDualPoint,
    w: PrimalDualPoint,
    gw: GradientPair,
    zbar: PrimalDualPoint,
    zhalf: PrimalDualPoint,
    corr: GradientPair,
    tau: f64,
    p: f64,
    n: usize,
    pub(crate) refreshes: u64,
}

impl LsvreCore {
    /// Start at `z0 = w0`, paying `n` calls for `g(w0)`.
    pub(crate) fn new<P: FiniteSumProblem + ?Sized>(
        problem: &P,
        z0: &PrimalDualPoint,
        tau: f64,
        p: f64,
        counter: &mut SfoCounter,
        monitor: &mut Monitor<'_>,
    ) -> Result<Self> {
        let (dx, dy) = (problem.dim_x(), problem.dim_y());
        let mut gw = GradientPair::zeros(dx, dy);
        gradient_operator_into(problem, z0, counter, &mut gw)?;
        monitor.chain_point(counter, z0);
        Ok(Self {
            z: z0.clone(),
            w: z0.clone(),
            gw,
            zbar: z0.clone(),
            zhalf: z0.clone(),
            corr: GradientPair::zeros(dx, dy),
            tau,
            p,
            n: problem.num_components(),
            refreshes: 0,
        })
    }

    pub(crate) fn step<P: FiniteSumProblem + ?Sized>(
        &mut self,
        problem: &P,
        rng: &mut ChaCha8Rng,
        counter: &mut SfoCounter,
        monitor: &mut Monitor<'_>,
    ) -> Result<()> {
        let alpha = 1.0 - self.p;
        self.zbar
            .assign_combination(alpha, &self.z, 1.0 - alpha, &self.w);

        self.zhalf.clone_from(&self.zbar);
        self.zhalf.step_against(self.tau, &self.gw);
        project_point(problem, &mut self.zhalf);
        monitor.chain_point(counter, &self.zhalf);

        let i = rng.gen_range(0..self.n);
        let u: f64 = rng.gen();

        self.corr.copy_from(&self.gw);
        add_stochastic_operator(problem, i, &self.zhalf, 1.0, counter, &mut self.corr)?;
        add_stochastic_operator(problem, i, &self.w, -1.0, counter, &mut self.corr)?;
        self.z.clone_from(&self.zbar);
        self.z.step_against(self.tau, &self.corr);
        project_point(problem, &mut self.z);
        if !self.z.is_finite() {
            return Err(Error::NonFinite {
                context: "L-SVRE iterate".into(),
            });
        }
        monitor.chain_point(counter, &self.z);

        if u < self.p {
            self.w.clone_from(&self.z);
            gradient_operator_into(problem, &self.w, counter, &mut self.gw)?;
            self.refreshes += 1;
            monitor.chain_point(counter, &self.w);
        }
        Ok(())
    }
}

/// Run L-SVRE from `z0` (projected onto the feasible sets first).
pub fn lsvre_run<P: FiniteSumProblem>(
    problem: &P,
    z0: &PrimalDualPoint,
    params: &LsvreParams,
    opts: &RunOptions,
) -> Result<SolverTrace> {
    params.validate()?;
    check_dims(problem, z0)?;
    let mut start = z0.clone();
    project_point(problem, &mut start);

    let mut monitor = Monitor::new(problem, opts, false);
    let mut counter = monitor.algorithm_counter();
    let mut rng = seeded_rng(params.seed, 0);
    let mut core = LsvreCore::new(
        problem,
        &start,
        params.tau,
        params.p,
        &mut counter,
        &mut monitor,
    )?;

    let mut t = 0;
    monitor.maybe_record(0, &counter, &core.z)?;
    while !params.budget.exhausted(t, counter.calls()) {
        core.step(problem, &mut rng, &mut counter, &mut monitor)?;
        t += 1;
        monitor.maybe_record(t, &counter, &core.z)?;
    }
    monitor.record(t, &counter, &core.z)?;

    let snapshot = vec![
        ("tau".to_string(), fmt_param(params.tau)),
        ("p".to_string(), fmt_param(params.p)),
    ];
    Ok(monitor.finish(
        "lsvre",
        params.seed,
        snapshot,
        &core.z,
        t,
        &counter,
        core.refreshes,
    ))
}
