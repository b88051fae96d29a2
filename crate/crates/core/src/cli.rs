//! Batch experiment driver behind the `alsvre` binary.
//!
//! Problems are named by spec strings of the form `family:key=value,...`:
//!
//! - `quadratic:n=16,dx=4,dy=4,l=4,mu=0.5,seed=0` (also `mu_x`, `mu_y`, `box`)
//! - `wireless:n=50,r=1,lo=0,hi=10,seed=7` or `wireless:file=gains.txt,r=1`
//! - `auc:file=data.libsvm,lambda=1e-10`
//! - `coord:n=16,l=1`, `chain:l=40,mu=1,n=4,eps=1e-3`, `separable:l=2,mu=0.5,n=4`

use std::collections::BTreeMap;
use std::fmt;
use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::Arc;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;

use crate::data_io::{
    format_real, parse_libsvm, read_vector_file, write_trace_csv_with_meta, write_vector_file,
};
use crate::lowerbound::{build_hard_chain, build_separable, hard_chain_saddle, separable_saddle};
use crate::metrics::{Metric, QuadraticGap, DEFAULT_TAU_HAT};
use crate::oracle::{project_point, FiniteSumProblem};
use crate::point::PrimalDualPoint;
use crate::problems::{
    gen_wireless_gains, make_auc, make_quadratic_scsc, make_wireless, quadratic_saddle_oracle,
    wrap_both, wrap_strongly_concave, CoordinateSquares,
};
use crate::projections::FeasibleSet;
use crate::solvers::{
    alsvre_params_with, alsvre_run, extragradient_default_params, extragradient_run,
    lsvre_default_params, lsvre_run, Budget, RunOptions, ScheduleMode, ScheduleOptions,
    ScheduleParams, SolverTrace,
};
use crate::verify;

/// Step-size grid used in the AUC experiments.
pub const AUC_TAU_GRID: [f64; 5] = [0.02, 0.05, 0.1, 0.2, 0.5];
/// Step-size grid used in the wireless experiments.
pub const WIRELESS_TAU_GRID: [f64; 3] = [0.01, 0.1, 1.0];

#[derive(Parser, Debug)]
#[command(
    name = "alsvre",
    version,
    about = "Variance-reduced extragradient solvers for finite-sum minimax problems"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run one solver on one problem and write its CSV trace.
    Run(RunArgs),
    /// Compare solvers at an equal SFO budget over several seeds.
    Bench(BenchArgs),
    /// Run an invariant suite and report each check.
    Verify(VerifyArgs),
    /// Write a synthetic data file.
    GenData(GenDataArgs),
}

#[derive(Args, Debug, Clone)]
#[group(required = true, multiple = false)]
struct BudgetArgs {
    /// Stop after this many stochastic gradient calls.
    #[arg(long)]
    budget_sfo: Option<u64>,
    /// Stop after this many iterations (outer rounds for alsvre).
    #[arg(long)]
    budget_iters: Option<u64>,
    /// Stop after this many epochs of n SFO calls.
    #[arg(long)]
    budget_epochs: Option<f64>,
}

#[derive(Args, Debug, Clone)]
struct CommonArgs {
    /// Problem spec, e.g. `quadratic:n=16,l=4,mu=0.5`.
    #[arg(long)]
    problem: String,
    #[command(flatten)]
    budget: BudgetArgs,
    /// Checkpoint every this many iterations; 0 keeps only the endpoints.
    #[arg(long, default_value_t = 1)]
    trace_every: u64,
    /// Solver parameters as `key=value` pairs; `solver.key=value` targets one solver.
    #[arg(long, value_delimiter = ',')]
    params: Vec<String>,
    /// Schedule mode for alsvre.
    #[arg(long, default_value = "practical")]
    mode: String,
    /// Metrics to record: dist2, gap, grad_norm, grad_mapping[:tau].
    #[arg(long, value_delimiter = ',')]
    metrics: Vec<String>,
    /// Try every step size of a grid: `auc`, `wireless` or a comma list.
    #[arg(long)]
    sweep_tau: Option<String>,
}

#[derive(Args, Debug)]
struct RunArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// eg, lsvre or alsvre.
    #[arg(long)]
    solver: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// CSV destination; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct BenchArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// At least two of eg, lsvre, alsvre.
    #[arg(long, value_delimiter = ',', required = true)]
    solvers: Vec<String>,
    /// Explicit seed list.
    #[arg(long, value_delimiter = ',', conflicts_with = "num_seeds")]
    seeds: Vec<u64>,
    /// Use seeds 0..N.
    #[arg(long)]
    num_seeds: Option<u64>,
    /// Directory for per-run CSVs and `summary.csv`.
    #[arg(long)]
    out_dir: PathBuf,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    /// projections, smoothness, saddles, zero_chain, lemmas or all.
    #[arg(long, default_value = "all")]
    suite: String,
}

#[derive(Args, Debug)]
struct GenDataArgs {
    #[arg(long, default_value = "wireless")]
    kind: String,
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 0.0)]
    lo: f64,
    #[arg(long, default_value_t = 10.0)]
    hi: f64,
    #[arg(long, default_value_t = 1.0)]
    radius: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

/// Invalid flags or configuration; maps to exit status 2.
#[derive(Debug)]
struct Usage(String);

impl fmt::Display for Usage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Usage {}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    anyhow::Error::new(Usage(msg.into()))
}

trait UsageContext<T> {
    fn usage(self) -> anyhow::Result<T>;
}

impl<T, E: fmt::Display> UsageContext<T> for std::result::Result<T, E> {
    fn usage(self) -> anyhow::Result<T> {
        self.map_err(|e| usage(e.to_string()))
    }
}

/// Parse `args` (program name first), run, and return the exit status.
pub fn run_cli<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let result = match cli.command {
        Command::Run(a) => cmd_run(&a),
        Command::Bench(a) => cmd_bench(&a),
        Command::Verify(a) => cmd_verify(&a),
        Command::GenData(a) => cmd_gen_data(&a),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.downcast_ref::<Usage>().is_some() {
                2
            } else {
                1
            }
        }
    }
}

// ---------------------------------------------------------------------------
// problem specs

/// `family:key=value,...` with keys checked against the family.
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemSpec {
    pub family: String,
    pub options: BTreeMap<String, String>,
}

impl FromStr for ProblemSpec {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        let (family, rest) = s.split_once(':').unwrap_or((s, ""));
        let family = family.trim().to_string();
        if family.is_empty() {
            return Err("empty problem family".into());
        }
        let mut options = BTreeMap::new();
        for kv in rest.split(',').filter(|t| !t.trim().is_empty()) {
            let (k, v) = kv
                .split_once('=')
                .ok_or_else(|| format!("problem option {kv:?} is not key=value"))?;
            if options
                .insert(k.trim().to_string(), v.trim().to_string())
                .is_some()
            {
                return Err(format!("problem option {k:?} given twice"));
            }
        }
        Ok(Self { family, options })
    }
}

impl ProblemSpec {
    fn check_keys(&self, allowed: &[&str]) -> anyhow::Result<()> {
        for k in self.options.keys() {
            if !allowed.contains(&k.as_str()) {
                return Err(usage(format!(
                    "unknown option {k:?} for problem {}, expected one of {}",
                    self.family,
                    allowed.join(", ")
                )));
            }
        }
        Ok(())
    }

    fn get<T: FromStr>(&self, key: &str, default: T) -> anyhow::Result<T> {
        match self.options.get(key) {
            None => Ok(default),
            Some(v) => v
                .parse()
                .map_err(|_| usage(format!("problem option {key}={v:?} does not parse"))),
        }
    }

    fn get_opt<T: FromStr>(&self, key: &str) -> anyhow::Result<Option<T>> {
        self.options
            .get(key)
            .map(|v| {
                v.parse()
                    .map_err(|_| usage(format!("problem option {key}={v:?} does not parse")))
            })
            .transpose()
    }
}

type SharedProblem = Arc<dyn FiniteSumProblem + Send + Sync>;

/// How AL-SVRE regularizes a problem that is not strongly convex-concave.
#[derive(Debug, Clone, Copy)]
enum WrapPlan {
    /// Anchors `x₀ = 0`, `y₀ = 1` and scales `R` and `n`, as in the
    /// wireless experiments.
    Wireless { radius: f64, n: usize },
    /// Anchors at the origin, scales from the set diameters.
    Diameters,
}

/// A problem resolved from its spec together with whatever exact references
/// it admits.
pub struct BuiltProblem {
    pub spec: String,
    pub problem: SharedProblem,
    pub saddle: Option<PrimalDualPoint>,
    pub gap: Option<Arc<QuadraticGap>>,
    wrap: WrapPlan,
}

impl BuiltProblem {
    fn constrained(&self) -> bool {
        !(self.problem.x_set().is_whole_space() && self.problem.y_set().is_whole_space())
    }
}

fn open(path: &str) -> anyhow::Result<BufReader<File>> {
    let f = File::open(path).map_err(|e| usage(format!("cannot open {path}: {e}")))?;
    Ok(BufReader::new(f))
}

/// Resolve a problem spec string.
pub fn build_problem(spec_text: &str) -> anyhow::Result<BuiltProblem> {
    let spec: ProblemSpec = spec_text.parse().map_err(usage)?;
    let mut saddle = None;
    let mut gap = None;
    let mut wrap = WrapPlan::Diameters;
    let problem: SharedProblem = match spec.family.as_str() {
        "quadratic" => {
            spec.check_keys(&["n", "dx", "dy", "l", "mu", "mu_x", "mu_y", "seed", "box"])?;
            let mu: f64 = spec.get("mu", 0.5)?;
            let p = make_quadratic_scsc(
                (spec.get("dx", 4)?, spec.get("dy", 4)?),
                spec.get("n", 16)?,
                spec.get("mu_x", mu)?,
                spec.get("mu_y", mu)?,
                spec.get("l", 4.0)?,
                spec.get("seed", 0)?,
            )
            .usage()?;
            match spec.get_opt::<f64>("box")? {
                Some(b) => {
                    let (dx, dy) = (p.dim_x(), p.dim_y());
                    let xs = FeasibleSet::uniform_box(dx, -b, b).usage()?;
                    let ys = FeasibleSet::uniform_box(dy, -b, b).usage()?;
                    Arc::new(p.with_sets(xs, ys).usage()?)
                }
                None => {
                    saddle = Some(quadratic_saddle_oracle(&p).usage()?);
                    gap = Some(Arc::new(QuadraticGap::new(&p).usage()?));
                    Arc::new(p)
                }
            }
        }
        "wireless" => {
            spec.check_keys(&["n", "r", "lo", "hi", "seed", "file", "noise"])?;
            let radius: f64 = spec.get("r", 1.0)?;
            let gains = match spec.options.get("file") {
                Some(path) => {
                    if spec.options.contains_key("n") || spec.options.contains_key("seed") {
                        return Err(usage("wireless: file= excludes n= and seed="));
                    }
                    read_vector_file(open(path)?).usage()?
                }
                None => gen_wireless_gains(spec.get("n", 50)?, spec.get("lo", 0.0)?, spec.get("hi", 10.0)?, spec.get("seed", 0)?)
                    .usage()?,
            };
            let n = gains.len();
            let noise = vec![spec.get("noise", 1.0)?; n];
            wrap = WrapPlan::Wireless { radius, n };
            Arc::new(make_wireless(gains, noise, radius).usage()?)
        }
        "auc" => {
            spec.check_keys(&["file", "lambda"])?;
            let path = spec
                .options
                .get("file")
                .ok_or_else(|| usage("auc needs file=<libsvm path>"))?;
            let rows = parse_libsvm(open(path)?).usage()?;
            Arc::new(make_auc(&rows, spec.get("lambda", 1e-10)?).usage()?)
        }
        "coord" => {
            spec.check_keys(&["n", "l"])?;
            Arc::new(CoordinateSquares::new(spec.get("n", 16)?, spec.get("l", 1.0)?).usage()?)
        }
        "chain" => {
            spec.check_keys(&["l", "mu", "n", "eps"])?;
            let inst = build_hard_chain(spec.get("l", 40.0)?, spec.get("mu", 1.0)?, spec.get("n", 4)?, spec.get("eps", 1e-3)?)
                .usage()?;
            saddle = Some(hard_chain_saddle(&inst));
            Arc::new(inst)
        }
        "separable" => {
            spec.check_keys(&["l", "mu", "n"])?;
            let inst = build_separable(spec.get("l", 2.0)?, spec.get("mu", 0.5)?, spec.get("n", 4)?).usage()?;
            saddle = Some(separable_saddle(&inst));
            Arc::new(inst)
        }
        other => {
            return Err(usage(format!(
                "unknown problem family {other:?}, expected quadratic, wireless, auc, coord, chain or separable"
            )))
        }
    };
    Ok(BuiltProblem {
        spec: spec_text.to_string(),
        problem,
        saddle,
        gap,
        wrap,
    })
}

// ---------------------------------------------------------------------------
// run configuration

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolverKind {
    Eg,
    Lsvre,
    Alsvre,
}

impl SolverKind {
    pub fn name(self) -> &'static str {
        match self {
            SolverKind::Eg => "eg",
            SolverKind::Lsvre => "lsvre",
            SolverKind::Alsvre => "alsvre",
        }
    }

    fn keys(self) -> &'static [&'static str] {
        match self {
            SolverKind::Eg => &["tau"],
            SolverKind::Lsvre => &["tau", "p"],
            SolverKind::Alsvre => &[
                "tau", "p", "beta", "q", "rho", "inner", "rounds", "c", "eps", "delta_f",
            ],
        }
    }
}

impl FromStr for SolverKind {
    type Err = anyhow::Error;
    fn from_str(s: &str) -> anyhow::Result<Self> {
        match s {
            "eg" => Ok(Self::Eg),
            "lsvre" => Ok(Self::Lsvre),
            "alsvre" => Ok(Self::Alsvre),
            other => Err(usage(format!(
                "unknown solver {other:?}, expected eg, lsvre or alsvre"
            ))),
        }
    }
}

/// `key=value` overrides, optionally prefixed by a solver name.
#[derive(Debug, Clone, Default)]
struct ParamList(Vec<(Option<SolverKind>, String, f64)>);

impl ParamList {
    fn parse(items: &[String], solvers: &[SolverKind]) -> anyhow::Result<Self> {
        let mut out = Vec::new();
        for item in items.iter().filter(|t| !t.trim().is_empty()) {
            let (k, v) = item
                .split_once('=')
                .ok_or_else(|| usage(format!("parameter {item:?} is not key=value")))?;
            let value: f64 = v
                .trim()
                .parse()
                .map_err(|_| usage(format!("parameter {k}={v:?} is not a number")))?;
            let (target, key) = match k.trim().split_once('.') {
                Some((s, key)) => (Some(s.parse::<SolverKind>()?), key.to_string()),
                None => (None, k.trim().to_string()),
            };
            let applies: Vec<_> = solvers
                .iter()
                .filter(|s| target.is_none_or(|t| t == **s) && s.keys().contains(&key.as_str()))
                .collect();
            if applies.is_empty() {
                return Err(usage(format!(
                    "parameter {k:?} is not accepted by any selected solver"
                )));
            }
            out.push((target, key, value));
        }
        Ok(Self(out))
    }

    fn for_solver(&self, solver: SolverKind) -> BTreeMap<String, f64> {
        let mut m = BTreeMap::new();
        // unprefixed first so that prefixed values win
        for pass in [false, true] {
            for (t, k, v) in &self.0 {
                if t.is_some() == pass
                    && t.is_none_or(|t| t == solver)
                    && solver.keys().contains(&k.as_str())
                {
                    m.insert(k.clone(), *v);
                }
            }
        }
        m
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum MetricChoice {
    Dist2,
    Gap,
    GradNorm,
    GradMapping(f64),
}

fn parse_metrics(names: &[String], built: &BuiltProblem) -> anyhow::Result<Vec<MetricChoice>> {
    let names: Vec<&str> = names
        .iter()
        .map(|s| s.trim())
        .filter(|s| !s.is_empty())
        .collect();
    if names.is_empty() {
        return Ok(vec![if built.saddle.is_some() {
            MetricChoice::Dist2
        } else if built.constrained() {
            MetricChoice::GradMapping(DEFAULT_TAU_HAT)
        } else {
            MetricChoice::GradNorm
        }]);
    }
    names
        .into_iter()
        .map(|name| {
            let (base, arg) = name.split_once(':').unwrap_or((name, ""));
            match base {
                "dist2" if built.saddle.is_some() => Ok(MetricChoice::Dist2),
                "dist2" => Err(usage("dist2 needs a problem with a known saddle point")),
                "gap" if built.gap.is_some() => Ok(MetricChoice::Gap),
                "gap" => Err(usage("gap is available for unconstrained quadratics only")),
                "grad_norm" => Ok(MetricChoice::GradNorm),
                "grad_mapping" => {
                    let t = if arg.is_empty() {
                        DEFAULT_TAU_HAT
                    } else {
                        arg.parse()
                            .map_err(|_| usage(format!("bad gradient-mapping step {arg:?}")))?
                    };
                    if !(t > 0.0 && f64::is_finite(t)) {
                        return Err(usage("gradient-mapping step must be positive"));
                    }
                    Ok(MetricChoice::GradMapping(t))
                }
                other => Err(usage(format!(
                    "unknown metric {other:?}, expected dist2, gap, grad_norm or grad_mapping"
                ))),
            }
        })
        .collect()
}

fn budget_of(args: &BudgetArgs, n: usize) -> anyhow::Result<Budget> {
    match (args.budget_sfo, args.budget_iters, args.budget_epochs) {
        (Some(s), None, None) => Ok(Budget::Sfo(s)),
        (None, Some(t), None) => Ok(Budget::Iterations(t)),
        (None, None, Some(e)) if e > 0.0 && e.is_finite() => {
            Ok(Budget::Sfo((e * n as f64).round() as u64))
        }
        (None, None, Some(e)) => Err(usage(format!("epoch budget must be positive, got {e}"))),
        _ => Err(usage(
            "give exactly one of --budget-sfo, --budget-iters, --budget-epochs",
        )),
    }
}

fn budget_text(b: Budget) -> String {
    match b {
        Budget::Sfo(s) => format!("sfo:{s}"),
        Budget::Iterations(t) => format!("iters:{t}"),
    }
}

fn parse_tau_grid(text: &str) -> anyhow::Result<Vec<f64>> {
    let grid: Vec<f64> = match text {
        "auc" => AUC_TAU_GRID.to_vec(),
        "wireless" => WIRELESS_TAU_GRID.to_vec(),
        list => list
            .split(',')
            .map(|t| {
                t.trim()
                    .parse::<f64>()
                    .map_err(|_| usage(format!("bad step size {t:?}")))
            })
            .collect::<anyhow::Result<_>>()?,
    };
    if grid.is_empty() || grid.iter().any(|t| !(*t > 0.0 && t.is_finite())) {
        return Err(usage("step-size grid needs positive values"));
    }
    Ok(grid)
}

/// Everything needed to execute one run; resolution errors are usage errors.
pub struct PreparedRun {
    pub solver: SolverKind,
    pub seed: u64,
    pub budget: Budget,
    problem: SharedProblem,
    opts: RunOptions,
    plan: SolverPlan,
    meta: Vec<(String, String)>,
}

enum SolverPlan {
    Eg(crate::solvers::EgParams),
    Lsvre(crate::solvers::LsvreParams),
    Alsvre(ScheduleParams),
}

struct RunSettings<'a> {
    budget: Budget,
    mode: ScheduleMode,
    params: &'a BTreeMap<String, f64>,
    metrics: &'a [MetricChoice],
    trace_every: u64,
    tau: Option<f64>,
}

fn make_metrics(
    built: &BuiltProblem,
    choices: &[MetricChoice],
    reference: Option<&SharedProblem>,
) -> Vec<Metric> {
    choices
        .iter()
        .map(|c| {
            let m = match c {
                MetricChoice::Dist2 => {
                    Metric::DistToSaddle(built.saddle.clone().expect("checked when parsed"))
                }
                MetricChoice::Gap => {
                    Metric::DualityGap(built.gap.clone().expect("checked when parsed"))
                }
                MetricChoice::GradNorm => Metric::GradNorm,
                MetricChoice::GradMapping(t) => Metric::GradMapping(*t),
            };
            match (reference, &m) {
                (Some(r), Metric::GradNorm | Metric::GradMapping(_)) => {
                    Metric::Against(r.clone(), Box::new(m))
                }
                _ => m,
            }
        })
        .collect()
}

/// Regularize a non-SCSC problem for AL-SVRE.
fn wrap_for_alsvre(built: &BuiltProblem, eps: f64) -> anyhow::Result<SharedProblem> {
    let p = built.problem.clone();
    let c = p.constants();
    let (dx, dy) = (p.dim_x(), p.dim_y());
    Ok(match built.wrap {
        WrapPlan::Wireless { radius, n } => {
            Arc::new(wrap_both(p, eps, radius, n as f64, vec![0.0; dx], vec![1.0; dy]).usage()?)
        }
        WrapPlan::Diameters => {
            let diam = |set: &FeasibleSet, d: usize, side: &str| {
                set.diameter(d).filter(|v| *v > 0.0).ok_or_else(|| {
                    usage(format!(
                        "alsvre needs a bounded {side} set to regularize this problem"
                    ))
                })
            };
            if c.mu_x == 0.0 && c.mu_y > 0.0 {
                let d = diam(p.x_set(), dx, "x")?;
                let mut x0 = PrimalDualPoint::zeros(dx, dy);
                project_point(&p, &mut x0);
                Arc::new(wrap_strongly_concave(p, eps, d, x0.x).usage()?)
            } else {
                let ddx = diam(p.x_set(), dx, "x")?;
                let ddy = diam(p.y_set(), dy, "y")?;
                let mut z0 = PrimalDualPoint::zeros(dx, dy);
                project_point(&p, &mut z0);
                Arc::new(wrap_both(p, eps, ddx, ddy, z0.x, z0.y).usage()?)
            }
        }
    })
}

fn prepare(
    built: &BuiltProblem,
    solver: SolverKind,
    seed: u64,
    s: &RunSettings<'_>,
) -> anyhow::Result<PreparedRun> {
    let c = built.problem.constants();
    let mut meta = vec![
        ("problem".to_string(), built.spec.clone()),
        ("solver".to_string(), solver.name().to_string()),
        ("seed".to_string(), seed.to_string()),
        ("budget".to_string(), budget_text(s.budget)),
        ("n".to_string(), c.n.to_string()),
        ("L".to_string(), format_real(c.l)),
        ("mu_x".to_string(), format_real(c.mu_x)),
        ("mu_y".to_string(), format_real(c.mu_y)),
    ];
    let tau = s.tau.or(s.params.get("tau").copied());
    let (problem, plan, reference) = match solver {
        SolverKind::Eg => {
            let mut p = extragradient_default_params(&built.problem, s.budget);
            if let Some(t) = tau {
                p.tau = t;
            }
            if !(p.tau > 0.0 && p.tau.is_finite()) {
                return Err(usage(format!("step size must be positive, got {}", p.tau)));
            }
            (built.problem.clone(), SolverPlan::Eg(p), None)
        }
        SolverKind::Lsvre => {
            let mut p = lsvre_default_params(&built.problem, s.budget, seed);
            if let Some(t) = tau {
                p.tau = t;
            }
            if let Some(v) = s.params.get("p") {
                p.p = *v;
            }
            p.validate().usage()?;
            (built.problem.clone(), SolverPlan::Lsvre(p), None)
        }
        SolverKind::Alsvre => {
            let n = c.n as f64;
            let default_eps = match built.wrap {
                WrapPlan::Wireless { .. } => 1e-6 / n,
                WrapPlan::Diameters => 1e-6,
            };
            let eps = s.params.get("eps").copied().unwrap_or(default_eps);
            let (problem, reference) = if c.is_scsc() {
                (built.problem.clone(), None)
            } else {
                meta.push(("wrap_eps".to_string(), format_real(eps)));
                (wrap_for_alsvre(built, eps)?, Some(built.problem.clone()))
            };
            let sched_opts = ScheduleOptions {
                delta_f: s.params.get("delta_f").copied(),
                inner_factor: s.params.get("c").copied().unwrap_or(0.5),
                z0: None,
                seed,
            };
            let mut p = alsvre_params_with(&problem, eps, s.mode, &sched_opts).usage()?;
            let wc = if p.transpose {
                problem.constants().transposed()
            } else {
                problem.constants()
            };
            if let Some(b) = s.params.get("beta") {
                p.set_beta(*b, wc.mu_x);
                p.tau = 1.0 / (4.0 * n.sqrt() * (wc.l + b));
            }
            if let Some(q) = s.params.get("q") {
                p.q = *q;
                p.gamma = ScheduleParams::gamma_for(*q);
                p.rho = 0.5 * q.sqrt();
            }
            if let Some(r) = s.params.get("rho") {
                p.rho = *r;
            }
            if let Some(v) = s.params.get("p") {
                p.p = *v;
            }
            if let Some(t) = tau {
                p.tau = t;
            }
            if let Some(t) = s.params.get("inner") {
                p.inner_iterations = whole(*t, "inner")?;
            }
            if let Some(k) = s.params.get("rounds") {
                p.rounds = Some(whole(*k, "rounds")?);
            }
            p.validate().usage()?;
            (problem, SolverPlan::Alsvre(p), reference)
        }
    };
    let opts = RunOptions::with_metrics(
        make_metrics(built, s.metrics, reference.as_ref()),
        s.trace_every,
    );
    Ok(PreparedRun {
        solver,
        seed,
        budget: s.budget,
        problem,
        opts,
        plan,
        meta,
    })
}

fn whole(v: f64, key: &str) -> anyhow::Result<u64> {
    if v >= 1.0 && v.fract() == 0.0 && v < 1e15 {
        Ok(v as u64)
    } else {
        Err(usage(format!("{key} must be a positive integer, got {v}")))
    }
}

impl PreparedRun {
    /// Execute from the projected origin. Failures here are numeric, not usage.
    pub fn execute(&self) -> anyhow::Result<(SolverTrace, Vec<(String, String)>)> {
        let p = &self.problem;
        let z0 = PrimalDualPoint::zeros(p.dim_x(), p.dim_y());
        let trace = match &self.plan {
            SolverPlan::Eg(params) => extragradient_run(p, &z0, params, &self.opts)?,
            SolverPlan::Lsvre(params) => lsvre_run(p, &z0, params, &self.opts)?,
            SolverPlan::Alsvre(params) => {
                alsvre_run(p, &z0, params, Some(self.budget), &self.opts)?
            }
        };
        let mut meta = self.meta.clone();
        meta.extend(trace.params.iter().cloned());
        Ok((trace, meta))
    }
}

/// One run described the way the `run` subcommand takes it, for callers
/// that want the trace in memory rather than a file.
#[derive(Debug, Clone)]
pub struct RunRequest {
    pub problem: String,
    pub solver: String,
    pub seed: u64,
    pub budget: Budget,
    pub mode: ScheduleMode,
    /// `key=value` solver parameters.
    pub params: Vec<String>,
    /// Metric names; empty picks the problem's default.
    pub metrics: Vec<String>,
    pub trace_every: u64,
    /// Step-size override, as one point of a sweep.
    pub tau: Option<f64>,
}

impl RunRequest {
    pub fn new(problem: &str, solver: &str, budget: Budget) -> Self {
        Self {
            problem: problem.to_string(),
            solver: solver.to_string(),
            seed: 0,
            budget,
            mode: ScheduleMode::Practical,
            params: Vec::new(),
            metrics: Vec::new(),
            trace_every: 0,
            tau: None,
        }
    }

    pub fn execute(&self) -> anyhow::Result<SolverTrace> {
        let solver: SolverKind = self.solver.parse()?;
        let built = build_problem(&self.problem)?;
        let params = ParamList::parse(&self.params, &[solver])?.for_solver(solver);
        let metrics = parse_metrics(&self.metrics, &built)?;
        let s = RunSettings {
            budget: self.budget,
            mode: self.mode,
            params: &params,
            metrics: &metrics,
            trace_every: self.trace_every,
            tau: self.tau,
        };
        Ok(prepare(&built, solver, self.seed, &s)?.execute()?.0)
    }
}

fn final_line(trace: &SolverTrace) -> String {
    let mut s = format!(
        "solver={} seed={} iterations={} sfo_calls={} epochs={}",
        trace.solver,
        trace.seed,
        trace.iterations,
        trace.sfo_calls,
        format_real(trace.sfo_calls as f64 / trace.n.max(1) as f64)
    );
    for (j, name) in trace.metric_names.iter().enumerate() {
        if let Some(v) = trace.checkpoints.last().map(|c| c.metrics[j]) {
            s.push_str(&format!(
                " {name}={} log10_{name}={:.4}",
                format_real(v),
                v.log10()
            ));
        }
    }
    s
}

fn write_csv(path: &Path, trace: &SolverTrace, meta: &[(String, String)]) -> anyhow::Result<()> {
    let f = File::create(path).with_context(|| format!("cannot create {}", path.display()))?;
    let mut w = BufWriter::new(f);
    write_trace_csv_with_meta(trace, meta, &mut w)?;
    Ok(())
}

fn tau_path(path: &Path, tau: f64) -> PathBuf {
    let stem = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    let ext = path
        .extension()
        .map(|e| format!(".{}", e.to_string_lossy()))
        .unwrap_or_default();
    path.with_file_name(format!("{stem}_tau{}{ext}", format_real(tau)))
}

fn primary_final(trace: &SolverTrace) -> f64 {
    trace
        .checkpoints
        .last()
        .and_then(|c| c.metrics.first().copied())
        .unwrap_or(f64::INFINITY)
}

fn cmd_run(a: &RunArgs) -> anyhow::Result<i32> {
    let solver: SolverKind = a.solver.parse()?;
    let built = build_problem(&a.common.problem)?;
    let budget = budget_of(&a.common.budget, built.problem.num_components())?;
    let mode: ScheduleMode = a.common.mode.parse().usage()?;
    let params = ParamList::parse(&a.common.params, &[solver])?.for_solver(solver);
    let metrics = parse_metrics(&a.common.metrics, &built)?;
    let grid = a
        .common
        .sweep_tau
        .as_deref()
        .map(parse_tau_grid)
        .transpose()?;

    let settings = |tau| RunSettings {
        budget,
        mode,
        params: &params,
        metrics: &metrics,
        trace_every: a.common.trace_every,
        tau,
    };
    let Some(grid) = grid else {
        let run = prepare(&built, solver, a.seed, &settings(None))?;
        let (trace, meta) = run.execute()?;
        match &a.out {
            Some(path) => {
                write_csv(path, &trace, &meta)?;
                println!("{}", final_line(&trace));
            }
            None => {
                let stdout = std::io::stdout();
                write_trace_csv_with_meta(&trace, &meta, &mut stdout.lock())?;
                eprintln!("{}", final_line(&trace));
            }
        }
        return Ok(0);
    };

    let out = a
        .out
        .as_ref()
        .ok_or_else(|| usage("--sweep-tau needs --out to name the per-step files"))?;
    let runs = grid
        .iter()
        .map(|&t| prepare(&built, solver, a.seed, &settings(Some(t))))
        .collect::<anyhow::Result<Vec<_>>>()?;
    let mut best: Option<(f64, f64)> = None;
    for (tau, run) in grid.iter().zip(&runs) {
        match run.execute() {
            Ok((trace, meta)) => {
                write_csv(&tau_path(out, *tau), &trace, &meta)?;
                let v = primary_final(&trace);
                println!("tau={} {}", format_real(*tau), final_line(&trace));
                if v.is_finite() && best.is_none_or(|(_, b)| v < b) {
                    best = Some((*tau, v));
                }
            }
            Err(e) => println!("tau={} failed: {e:#}", format_real(*tau)),
        }
    }
    match best {
        Some((tau, v)) => {
            println!("best tau={} final={}", format_real(tau), format_real(v));
            Ok(0)
        }
        None => anyhow::bail!("every step size in the grid failed"),
    }
}

/// One bench cell: a solver at one step size over all seeds.
struct Cell {
    tau: Option<f64>,
    results: Vec<anyhow::Result<(SolverTrace, Vec<(String, String)>)>>,
}

impl Cell {
    fn mean_final(&self) -> f64 {
        let vals: Vec<f64> = self
            .results
            .iter()
            .map(|r| r.as_ref().map_or(f64::INFINITY, |(t, _)| primary_final(t)))
            .collect();
        vals.iter().sum::<f64>() / vals.len() as f64
    }
}

fn cmd_bench(a: &BenchArgs) -> anyhow::Result<i32> {
    let solvers = a
        .solvers
        .iter()
        .map(|s| s.trim().parse())
        .collect::<anyhow::Result<Vec<SolverKind>>>()?;
    if solvers.len() < 2 {
        return Err(usage("bench needs at least two solvers"));
    }
    let seeds: Vec<u64> = match a.num_seeds {
        Some(0) => return Err(usage("--num-seeds must be at least 1")),
        Some(k) => (0..k).collect(),
        None if a.seeds.is_empty() => vec![0],
        None => a.seeds.clone(),
    };
    let built = build_problem(&a.common.problem)?;
    let budget = budget_of(&a.common.budget, built.problem.num_components())?;
    let mode: ScheduleMode = a.common.mode.parse().usage()?;
    let params = ParamList::parse(&a.common.params, &solvers)?;
    let metrics = parse_metrics(&a.common.metrics, &built)?;
    let grid: Vec<Option<f64>> = match a.common.sweep_tau.as_deref() {
        Some(g) => parse_tau_grid(g)?.into_iter().map(Some).collect(),
        None => vec![None],
    };
    std::fs::create_dir_all(&a.out_dir)
        .with_context(|| format!("cannot create {}", a.out_dir.display()))?;

    // resolve every run up front so configuration errors surface before any work
    let mut jobs = Vec::new();
    for (slot, &solver) in solvers.iter().enumerate() {
        let sp = params.for_solver(solver);
        for &tau in &grid {
            for &seed in &seeds {
                let s = RunSettings {
                    budget,
                    mode,
                    params: &sp,
                    metrics: &metrics,
                    trace_every: a.common.trace_every,
                    tau,
                };
                jobs.push((slot, tau, prepare(&built, solver, seed, &s)?));
            }
        }
    }
    let outputs: Vec<_> = jobs.par_iter().map(|(_, _, run)| run.execute()).collect();

    let mut cells: Vec<(usize, Cell)> = Vec::new();
    for ((slot, tau, _), out) in jobs.iter().zip(outputs) {
        match cells.iter_mut().find(|(s, c)| s == slot && c.tau == *tau) {
            Some((_, c)) => c.results.push(out),
            None => cells.push((
                *slot,
                Cell {
                    tau: *tau,
                    results: vec![out],
                },
            )),
        }
    }
    // per solver slot keep the step size with the best seed-mean
    let mut chosen: Vec<Cell> = Vec::new();
    for slot in 0..solvers.len() {
        let best = cells
            .iter()
            .enumerate()
            .filter(|(_, (s, _))| *s == slot)
            .min_by(|(_, (_, x)), (_, (_, y))| x.mean_final().total_cmp(&y.mean_final()))
            .map(|(k, _)| k)
            .expect("one cell per slot");
        chosen.push(cells.remove(best).1);
        cells.retain(|(s, _)| *s != slot);
    }

    let names = file_names(&solvers);
    let metric_names: Vec<String> = metrics
        .iter()
        .map(|m| {
            match m {
                MetricChoice::Dist2 => "dist2",
                MetricChoice::Gap => "gap",
                MetricChoice::GradNorm => "grad_norm",
                MetricChoice::GradMapping(_) => "grad_mapping",
            }
            .to_string()
        })
        .collect();
    let mut summary = format!(
        "solver,seed,tau,iterations,sfo_calls,epochs,{}\n",
        metric_names.join(",")
    );
    let mut failures = 0;
    for (cell, name) in chosen.iter().zip(&names) {
        let tau_text = cell.tau.map(format_real).unwrap_or_else(|| "auto".into());
        let mut sums = vec![0.0; metric_names.len()];
        for (seed, r) in seeds.iter().zip(&cell.results) {
            match r {
                Ok((trace, meta)) => {
                    write_csv(
                        &a.out_dir.join(format!("{name}_seed{seed}.csv")),
                        trace,
                        meta,
                    )?;
                    let last = trace
                        .checkpoints
                        .last()
                        .map(|c| c.metrics.clone())
                        .unwrap_or_default();
                    for (s, v) in sums.iter_mut().zip(&last) {
                        *s += v;
                    }
                    summary.push_str(&format!(
                        "{name},{seed},{tau_text},{},{},{},{}\n",
                        trace.iterations,
                        trace.sfo_calls,
                        format_real(trace.sfo_calls as f64 / trace.n.max(1) as f64),
                        last.iter()
                            .map(|v| format_real(*v))
                            .collect::<Vec<_>>()
                            .join(",")
                    ));
                }
                Err(e) => {
                    failures += 1;
                    eprintln!("{name} seed {seed} failed: {e:#}");
                    for s in sums.iter_mut() {
                        *s = f64::NAN;
                    }
                }
            }
        }
        let k = seeds.len() as f64;
        summary.push_str(&format!(
            "{name},mean,{tau_text},,,,{}\n",
            sums.iter()
                .map(|s| format_real(s / k))
                .collect::<Vec<_>>()
                .join(",")
        ));
        println!(
            "{:<10} tau={:<8} mean {}",
            name,
            tau_text,
            metric_names
                .iter()
                .zip(&sums)
                .map(|(m, s)| format!("{m}={}", format_real(s / k)))
                .collect::<Vec<_>>()
                .join(" ")
        );
    }
    std::fs::write(a.out_dir.join("summary.csv"), summary).context("cannot write summary.csv")?;
    if failures > 0 {
        anyhow::bail!("{failures} run(s) failed");
    }
    Ok(0)
}

/// `eg`, `lsvre`, ... with `-2`, `-3` suffixes on repeats.
fn file_names(solvers: &[SolverKind]) -> Vec<String> {
    let mut seen: BTreeMap<&str, usize> = BTreeMap::new();
    solvers
        .iter()
        .map(|s| {
            let k = seen.entry(s.name()).or_insert(0);
            *k += 1;
            if *k == 1 {
                s.name().to_string()
            } else {
                format!("{}-{}", s.name(), k)
            }
        })
        .collect()
}

fn cmd_verify(a: &VerifyArgs) -> anyhow::Result<i32> {
    let results = verify::run_suite(&a.suite).ok_or_else(|| {
        usage(format!(
            "unknown suite {:?}, expected one of {}",
            a.suite,
            verify::SUITES.join(", ")
        ))
    })?;
    let mut failed = 0;
    for r in &results {
        let status = if r.passed { "pass" } else { "FAIL" };
        failed += usize::from(!r.passed);
        if r.detail.is_empty() {
            println!("[{status}] {}: {}", r.suite, r.name);
        } else {
            println!("[{status}] {}: {} ({})", r.suite, r.name, r.detail);
        }
    }
    println!("{} checks, {} failed", results.len(), failed);
    Ok(if failed == 0 { 0 } else { 1 })
}

fn cmd_gen_data(a: &GenDataArgs) -> anyhow::Result<i32> {
    if a.kind != "wireless" {
        return Err(usage(format!(
            "unknown data kind {:?}, expected wireless",
            a.kind
        )));
    }
    if !(a.radius > 0.0 && a.radius.is_finite()) {
        return Err(usage("radius must be positive"));
    }
    let gains = gen_wireless_gains(a.n, a.lo, a.hi, a.seed).usage()?;
    let header = [
        ("kind", a.kind.clone()),
        ("n", a.n.to_string()),
        ("lo", format_real(a.lo)),
        ("hi", format_real(a.hi)),
        ("radius", format_real(a.radius)),
        ("seed", a.seed.to_string()),
    ]
    .map(|(k, v)| (k.to_string(), v));
    let f = File::create(&a.out).with_context(|| format!("cannot create {}", a.out.display()))?;
    let mut w = BufWriter::new(f);
    write_vector_file(&gains, &header, &mut w)?;
    w.flush()?;
    println!("wrote {} values to {}", gains.len(), a.out.display());
    Ok(0)
}
