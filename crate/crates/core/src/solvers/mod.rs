//! ExtraGradient, L-SVRE and AL-SVRE, plus the shared trace machinery.

mod alsvre;
mod extragradient;
mod lsvre;
mod schedule;

pub use alsvre::{alsvre_run, ProxShifted};
pub use extragradient::{extragradient_default_params, extragradient_run, EgParams};
pub use lsvre::{lsvre_default_params, lsvre_run, LsvreParams};
pub use schedule::{
    alsvre_default_params, alsvre_params_with, beta_rule, estimate_delta_f, ScheduleMode,
    ScheduleOptions, ScheduleParams, TheorySchedule,
};

use crate::error::{Error, Result};
use crate::metrics::Metric;
use crate::oracle::{FiniteSumProblem, SfoCounter};
use crate::point::PrimalDualPoint;

/// When a run stops. Budgets are checked at iteration boundaries, so a run
/// may overshoot an SFO budget by at most one iteration's cost.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Budget {
    Iterations(u64),
    Sfo(u64),
}

impl Budget {
    fn exhausted(&self, iterations: u64, sfo: u64) -> bool {
        match *self {
            Budget::Iterations(t) => iterations >= t,
            Budget::Sfo(s) => sfo >= s,
        }
    }
}

/// What to record during a run.
#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub metrics: Vec<Metric>,
    /// Checkpoint every this many iterations (0 records only the endpoints).
    pub trace_every: u64,
    /// Log every produced point with the component queries that preceded it.
    pub record_chain: bool,
}

impl RunOptions {
    pub fn with_metrics(metrics: Vec<Metric>, trace_every: u64) -> Self {
        Self {
            metrics,
            trace_every,
            record_chain: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub iteration: u64,
    /// Cumulative algorithm SFO calls; measurement cost excluded.
    pub sfo_calls: u64,
    pub metrics: Vec<f64>,
}

/// A point produced by a solver together with the component indices queried
/// since the previous logged point.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainStep {
    pub queries: Vec<usize>,
    pub point: PrimalDualPoint,
}

#[derive(Debug, Clone)]
pub struct SolverTrace {
    pub solver: String,
    pub checkpoints: Vec<Checkpoint>,
    pub metric_names: Vec<String>,
    pub seed: u64,
    /// Resolved parameters as `(name, value)` pairs.
    pub params: Vec<(String, String)>,
    pub final_point: PrimalDualPoint,
    /// Iterations run (outer rounds for AL-SVRE).
    pub iterations: u64,
    pub sfo_calls: u64,
    /// SFO calls spent on metrics, kept apart from `sfo_calls`.
    pub measurement_sfo: u64,
    pub snapshot_refreshes: u64,
    pub n: usize,
    pub chain: Option<Vec<ChainStep>>,
}

impl SolverTrace {
    /// Index of a metric column by name.
    pub fn metric_index(&self, name: &str) -> Option<usize> {
        self.metric_names.iter().position(|m| m == name)
    }

    /// Value of `name` at the last checkpoint.
    pub fn final_metric(&self, name: &str) -> Option<f64> {
        let j = self.metric_index(name)?;
        self.checkpoints.last().map(|c| c.metrics[j])
    }
}

/// Records checkpoints and the optional chain log for one run.
///
/// Metrics are always evaluated on `problem` in its original orientation;
/// when the solver works on the transposed problem, points are swapped back
/// before measurement.
pub(crate) struct Monitor<'a> {
    problem: &'a dyn FiniteSumProblem,
    metrics: &'a [Metric],
    trace_every: u64,
    transposed: bool,
    measurement: SfoCounter,
    checkpoints: Vec<Checkpoint>,
    chain: Option<Vec<ChainStep>>,
    last_iteration: Option<u64>,
}

impl<'a> Monitor<'a> {
    pub(crate) fn new(
        problem: &'a dyn FiniteSumProblem,
        opts: &'a RunOptions,
        transposed: bool,
    ) -> Self {
        Self {
            problem,
            metrics: &opts.metrics,
            trace_every: opts.trace_every,
            transposed,
            measurement: SfoCounter::new(),
            checkpoints: Vec::new(),
            chain: opts.record_chain.then(Vec::new),
            last_iteration: None,
        }
    }

    /// A counter for the algorithm itself, logging queries when the chain is recorded.
    pub(crate) fn algorithm_counter(&self) -> SfoCounter {
        if self.chain.is_some() {
            SfoCounter::with_query_log()
        } else {
            SfoCounter::new()
        }
    }

    fn orient(&self, z: &PrimalDualPoint) -> PrimalDualPoint {
        if self.transposed {
            z.transposed()
        } else {
            z.clone()
        }
    }

    /// Checkpoint if `iteration` is on the trace grid.
    pub(crate) fn maybe_record(
        &mut self,
        iteration: u64,
        counter: &SfoCounter,
        z: &PrimalDualPoint,
    ) -> Result<()> {
        let due =
            iteration == 0 || (self.trace_every > 0 && iteration.is_multiple_of(self.trace_every));
        if due {
            self.record(iteration, counter, z)?;
        }
        Ok(())
    }

    /// Checkpoint unconditionally (skipped if this iteration is already recorded).
    pub(crate) fn record(
        &mut self,
        iteration: u64,
        counter: &SfoCounter,
        z: &PrimalDualPoint,
    ) -> Result<()> {
        if self.last_iteration == Some(iteration) {
            return Ok(());
        }
        if !z.is_finite() {
            return Err(Error::NonFinite {
                context: format!("iterate at iteration {iteration}"),
            });
        }
        let oriented = self.orient(z);
        let mut values = Vec::with_capacity(self.metrics.len());
        for m in self.metrics {
            values.push(m.evaluate(self.problem, &oriented, &mut self.measurement)?);
        }
        self.checkpoints.push(Checkpoint {
            iteration,
            sfo_calls: counter.calls(),
            metrics: values,
        });
        self.last_iteration = Some(iteration);
        Ok(())
    }

    /// Log a produced point with the queries made since the last one.
    pub(crate) fn chain_point(&mut self, counter: &mut SfoCounter, z: &PrimalDualPoint) {
        if self.chain.is_some() {
            let queries = counter.drain_queries();
            let point = self.orient(z);
            if let Some(chain) = self.chain.as_mut() {
                chain.push(ChainStep { queries, point });
            }
        }
    }

    #[allow(clippy::too_many_arguments)]
    pub(crate) fn finish(
        self,
        solver: &str,
        seed: u64,
        params: Vec<(String, String)>,
        final_point: &PrimalDualPoint,
        iterations: u64,
        counter: &SfoCounter,
        snapshot_refreshes: u64,
    ) -> SolverTrace {
        let final_point = self.orient(final_point);
        SolverTrace {
            solver: solver.to_string(),
            checkpoints: self.checkpoints,
            metric_names: self.metrics.iter().map(|m| m.name().to_string()).collect(),
            seed,
            params,
            final_point,
            iterations,
            sfo_calls: counter.calls(),
            measurement_sfo: self.measurement.calls(),
            snapshot_refreshes,
            n: self.problem.num_components(),
            chain: self.chain,
        }
    }
}

fn fmt_param(v: f64) -> String {
    crate::data_io::format_real(v)
}
