//! WebAssembly bindings for the browser demo in `www/`.
//!
//! Every exported function returns JSON; the page does the drawing.

use alsvre::lowerbound::{build_hard_chain, hard_chain_saddle, support_len};
use alsvre::metrics::Metric;
use alsvre::problems::{make_quadratic_scsc, quadratic_saddle_oracle};
use alsvre::solvers::{
    alsvre_default_params, alsvre_run, extragradient_default_params, extragradient_run,
    lsvre_default_params, lsvre_run, Budget, RunOptions, ScheduleMode, SolverTrace,
};
use alsvre::{FeasibleSet, FiniteSumProblem, PrimalDualPoint};
use serde::Serialize;
use wasm_bindgen::prelude::*;

/// Rough number of points per curve sent to the page.
const CURVE_POINTS: u64 = 200;

#[derive(Serialize)]
struct Series {
    solver: String,
    /// `(epochs, ‖z − z*‖)` pairs.
    points: Vec<(f64, f64)>,
}

#[derive(Serialize)]
struct Comparison {
    n: usize,
    l: f64,
    mu_x: f64,
    mu_y: f64,
    series: Vec<Series>,
}

fn series(trace: &SolverTrace) -> Series {
    let n = trace.n as f64;
    Series {
        solver: trace.solver.clone(),
        points: trace
            .checkpoints
            .iter()
            .map(|c| (c.sfo_calls as f64 / n, c.metrics[0].sqrt()))
            .collect(),
    }
}

/// EG, L-SVRE and AL-SVRE with default parameters on one random quadratic
/// with `L = 1`, `μx = 1/κx`, `μy = 1/κy`, each given `epochs · n` calls.
pub fn compare_json(
    n: usize,
    kappa_x: f64,
    kappa_y: f64,
    epochs: f64,
    seed: u64,
) -> alsvre::Result<String> {
    if !(epochs > 0.0 && epochs <= 1e4) {
        return Err(alsvre::Error::InvalidParameter(
            "epochs must be in (0, 10000]".into(),
        ));
    }
    let problem = make_quadratic_scsc((4, 4), n, 1.0 / kappa_x, 1.0 / kappa_y, 1.0, seed)?;
    let star = quadratic_saddle_oracle(&problem)?;
    let budget = (epochs * n as f64).ceil() as u64;
    let z0 = PrimalDualPoint::zeros(4, 4);
    let opts = |every: u64| {
        RunOptions::with_metrics(vec![Metric::DistToSaddle(star.clone())], every.max(1))
    };

    let eg_params = extragradient_default_params(&problem, Budget::Sfo(budget));
    let eg = extragradient_run(
        &problem,
        &z0,
        &eg_params,
        &opts(budget / (2 * n as u64 * CURVE_POINTS)),
    )?;
    let ls_params = lsvre_default_params(&problem, Budget::Sfo(budget), seed);
    let ls = lsvre_run(
        &problem,
        &z0,
        &ls_params,
        &opts(budget / (3 * CURVE_POINTS)),
    )?;
    let mut al_params = alsvre_default_params(&problem, 1e-6, ScheduleMode::Practical)?;
    al_params.seed = seed;
    let rounds_guess = budget / (2 * al_params.inner_iterations + 2 * n as u64).max(1);
    let al = alsvre_run(
        &problem,
        &z0,
        &al_params,
        Some(Budget::Sfo(budget)),
        &opts(rounds_guess / CURVE_POINTS),
    )?;

    let c = problem.constants();
    let out = Comparison {
        n,
        l: c.l,
        mu_x: c.mu_x,
        mu_y: c.mu_y,
        series: vec![series(&eg), series(&ls), series(&al)],
    };
    Ok(serde_json::to_string(&out).expect("plain data serializes"))
}

fn set_2d(kind: &str, size: f64) -> alsvre::Result<FeasibleSet> {
    match kind {
        "ball" => FeasibleSet::ball(size),
        "nonneg_ball" => FeasibleSet::nonneg_ball(size),
        "simplex" => FeasibleSet::simplex_sum(size),
        "box" => FeasibleSet::uniform_box(2, -size, size),
        other => Err(alsvre::Error::InvalidParameter(format!(
            "unknown set {other:?}"
        ))),
    }
}

/// Euclidean projection of `(x, y)` onto a planar set, as `[px, py]`.
pub fn project_json(kind: &str, size: f64, x: f64, y: f64) -> alsvre::Result<String> {
    let p = set_2d(kind, size)?.project(&[x, y]);
    Ok(serde_json::to_string(&p).expect("plain data serializes"))
}

#[derive(Serialize)]
struct ChainProfile {
    d: usize,
    n: usize,
    /// `(cumulative component queries, largest support over all blocks)`.
    support: Vec<(usize, usize)>,
    /// `(SFO calls, ‖z − z*‖²)`.
    distance: Vec<(u64, f64)>,
    /// Largest support of the saddle, i.e. the full chain length.
    saddle_support: usize,
}

/// L-SVRE on the zero-chain instance with condition number `kappa`: how far
/// the iterates' supports have advanced along the chain against the number
/// of queries spent.
pub fn chain_json(
    kappa: f64,
    n: usize,
    epsilon: f64,
    iterations: u64,
    seed: u64,
) -> alsvre::Result<String> {
    if iterations > 20_000 {
        return Err(alsvre::Error::InvalidParameter(
            "at most 20000 iterations".into(),
        ));
    }
    let inst = build_hard_chain(kappa, 1.0, n, epsilon)?;
    let star = hard_chain_saddle(&inst);
    let params = lsvre_default_params(&inst, Budget::Iterations(iterations), seed);
    let opts = RunOptions {
        metrics: vec![Metric::DistToSaddle(star.clone())],
        trace_every: (iterations / CURVE_POINTS).max(1),
        record_chain: true,
    };
    let trace = lsvre_run(
        &inst,
        &PrimalDualPoint::zeros(inst.dim_x(), inst.dim_y()),
        &params,
        &opts,
    )?;

    let d = inst.d;
    let max_support = |z: &PrimalDualPoint| {
        z.x.chunks(d)
            .chain(z.y.chunks(d))
            .map(support_len)
            .max()
            .unwrap_or(0)
    };
    let mut queries = 0;
    let mut support = Vec::new();
    let mut last = usize::MAX;
    for step in trace.chain.as_deref().unwrap_or_default() {
        queries += step.queries.len();
        let s = max_support(&step.point);
        if s != last {
            support.push((queries, s));
            last = s;
        }
    }
    support.push((queries, last.min(d)));
    let out = ChainProfile {
        d,
        n,
        support,
        distance: trace
            .checkpoints
            .iter()
            .map(|c| (c.sfo_calls, c.metrics[0]))
            .collect(),
        saddle_support: max_support(&star),
    };
    Ok(serde_json::to_string(&out).expect("plain data serializes"))
}

fn js<T>(r: alsvre::Result<T>) -> Result<T, JsError> {
    r.map_err(|e| JsError::new(&e.to_string()))
}

#[wasm_bindgen]
pub fn compare(
    n: u32,
    kappa_x: f64,
    kappa_y: f64,
    epochs: f64,
    seed: u32,
) -> Result<String, JsError> {
    js(compare_json(
        n as usize,
        kappa_x,
        kappa_y,
        epochs,
        seed as u64,
    ))
}

#[wasm_bindgen]
pub fn project(kind: &str, size: f64, x: f64, y: f64) -> Result<String, JsError> {
    js(project_json(kind, size, x, y))
}

#[wasm_bindgen]
pub fn chain(
    kappa: f64,
    n: u32,
    epsilon: f64,
    iterations: u32,
    seed: u32,
) -> Result<String, JsError> {
    js(chain_json(
        kappa,
        n as usize,
        epsilon,
        iterations as u64,
        seed as u64,
    ))
}
