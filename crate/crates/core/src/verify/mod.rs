//! Invariant suites with fixed seeds, shared by the CLI `verify` command and
//! the test suite. Each check reports its own pass/fail line.

mod oracle;

pub use oracle::{brute_force_projection, MAX_ORACLE_DIM};

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::lowerbound::{
    build_hard_chain, build_separable, chain_constants, hard_chain_saddle, separable_saddle,
    zero_chain_audit, HardChainInstance,
};
use crate::metrics::{
    correction_step_bound, projected_gradient_step, weighted_distance, QuadraticGap,
};
use crate::oracle::{
    estimate_average_smoothness, gradient_operator, seeded_rng, FiniteSumProblem, SfoCounter,
};
use crate::point::{dot, PrimalDualPoint};
use crate::problems::{
    gen_wireless, make_quadratic_scsc, quadratic_saddle_oracle, CoordinateSquares,
};
use crate::projections::FeasibleSet;
use crate::solvers::{
    extragradient_run, lsvre_default_params, lsvre_run, Budget, ChainStep, EgParams, RunOptions,
};

/// Names accepted by [`run_suite`].
pub const SUITES: [&str; 6] = [
    "projections",
    "smoothness",
    "saddles",
    "zero_chain",
    "lemmas",
    "all",
];

#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub suite: &'static str,
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl CheckResult {
    fn new(
        suite: &'static str,
        name: impl Into<String>,
        passed: bool,
        detail: impl Into<String>,
    ) -> Self {
        Self {
            suite,
            name: name.into(),
            passed,
            detail: detail.into(),
        }
    }
}

/// Run one suite by name; `None` for an unknown name.
pub fn run_suite(name: &str) -> Option<Vec<CheckResult>> {
    Some(match name {
        "projections" => projection_suite(),
        "smoothness" => smoothness_suite(),
        "saddles" => saddle_suite(),
        "zero_chain" => zero_chain_suite(),
        "lemmas" => lemma_suite(),
        "all" => {
            let mut all = projection_suite();
            all.extend(smoothness_suite());
            all.extend(saddle_suite());
            all.extend(zero_chain_suite());
            all.extend(lemma_suite());
            all
        }
        _ => return None,
    })
}

fn gaussian_vec(rng: &mut ChaCha8Rng, d: usize, scale: f64) -> Vec<f64> {
    (0..d)
        .map(|_| scale * rng.sample::<f64, _>(rand_distr::StandardNormal))
        .collect()
}

/// A random set of each kind in dimension `d`.
pub fn random_sets(rng: &mut ChaCha8Rng, d: usize) -> Vec<(&'static str, FeasibleSet)> {
    let lo: Vec<f64> = (0..d).map(|_| rng.gen_range(-2.0..0.5)).collect();
    let hi: Vec<f64> = lo.iter().map(|l| l + rng.gen_range(0.0..2.0)).collect();
    vec![
        (
            "ball",
            FeasibleSet::ball(rng.gen_range(0.2..2.0)).expect("positive radius"),
        ),
        (
            "nonneg_ball",
            FeasibleSet::nonneg_ball(rng.gen_range(0.2..2.0)).expect("positive radius"),
        ),
        (
            "simplex_sum",
            FeasibleSet::simplex_sum(rng.gen_range(0.2..3.0)).expect("positive sum"),
        ),
        ("box", FeasibleSet::boxed(lo, hi).expect("ordered bounds")),
    ]
}

/// Largest deviation between `project` and the brute-force oracle over
/// `trials` random inputs per set kind in dims 1..=4.
pub fn projection_oracle_gap(trials: usize, seed: u64) -> Vec<(&'static str, f64)> {
    let mut rng = seeded_rng(seed, 101);
    let mut worst = vec![
        ("ball", 0.0),
        ("nonneg_ball", 0.0),
        ("simplex_sum", 0.0),
        ("box", 0.0),
    ];
    for t in 0..trials {
        let d = 1 + t % 4;
        for (k, (_, set)) in random_sets(&mut rng, d).into_iter().enumerate() {
            let z = gaussian_vec(&mut rng, d, 2.0);
            let fast = set.project(&z);
            let slow = brute_force_projection(&set, &z);
            let dev = fast
                .iter()
                .zip(&slow)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            worst[k].1 = f64::max(worst[k].1, dev);
        }
    }
    worst
}

/// Worst violations of nonexpansiveness and of the variational inequality
/// `⟨P(u) − u, P(u) − v⟩ ≤ 0` over `pairs` random draws per set kind.
pub fn projection_property_violations(pairs: usize, seed: u64) -> (f64, f64) {
    let mut rng = seeded_rng(seed, 202);
    let (mut nonexp, mut vi): (f64, f64) = (f64::NEG_INFINITY, f64::NEG_INFINITY);
    for t in 0..pairs {
        let d = 1 + t % 6;
        for (_, set) in random_sets(&mut rng, d) {
            let u = gaussian_vec(&mut rng, d, 3.0);
            let v = gaussian_vec(&mut rng, d, 3.0);
            let (pu, pv) = (set.project(&u), set.project(&v));
            let lhs = crate::point::dist2(&pu, &pv).sqrt();
            let rhs = crate::point::dist2(&u, &v).sqrt();
            nonexp = nonexp.max(lhs - rhs);
            // any projected point is a member of the set
            let w = set.project(&gaussian_vec(&mut rng, d, 3.0));
            let a: Vec<f64> = pu.iter().zip(&u).map(|(p, q)| p - q).collect();
            let b: Vec<f64> = pu.iter().zip(&w).map(|(p, q)| p - q).collect();
            vi = vi.max(dot(&a, &b));
        }
    }
    (nonexp, vi)
}

fn projection_suite() -> Vec<CheckResult> {
    let mut out = Vec::new();
    for (kind, dev) in projection_oracle_gap(200, 1) {
        out.push(CheckResult::new(
            "projections",
            format!("oracle equivalence ({kind})"),
            dev <= 1e-6,
            format!("max deviation {dev:.3e}"),
        ));
    }
    let (nonexp, vi) = projection_property_violations(1000, 2);
    out.push(CheckResult::new(
        "projections",
        "nonexpansiveness",
        nonexp <= 1e-12,
        format!("max ‖Pu − Pv‖ − ‖u − v‖ = {nonexp:.3e}"),
    ));
    out.push(CheckResult::new(
        "projections",
        "variational inequality",
        vi <= 1e-10,
        format!("max inner product {vi:.3e}"),
    ));
    let mut rng = seeded_rng(3, 303);
    let mut idem: f64 = 0.0;
    for t in 0..200 {
        for (_, set) in random_sets(&mut rng, 1 + t % 5) {
            let z = gaussian_vec(&mut rng, set.fixed_dim().unwrap_or(1 + t % 5), 3.0);
            let p = set.project(&z);
            let pp = set.project(&p);
            idem = idem.max(
                p.iter()
                    .zip(&pp)
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0, f64::max),
            );
        }
    }
    out.push(CheckResult::new(
        "projections",
        "idempotence",
        idem <= 1e-12,
        format!("max deviation {idem:.3e}"),
    ));
    out
}

fn smoothness_check(name: &str, problem: &dyn FiniteSumProblem, radius: f64) -> CheckResult {
    let l = problem.constants().l;
    match estimate_average_smoothness(problem, 300, radius, 17) {
        Ok(est) => CheckResult::new(
            "smoothness",
            format!("estimate below declared L ({name})"),
            est <= l * (1.0 + 1e-6),
            format!("estimate {est:.6}, declared {l:.6}"),
        ),
        Err(e) => CheckResult::new("smoothness", name.to_string(), false, e.to_string()),
    }
}

fn smoothness_suite() -> Vec<CheckResult> {
    let mut out = Vec::new();
    let sq = CoordinateSquares::new(16, 1.0).expect("valid");
    let est = estimate_average_smoothness(&sq, 400, 1.0, 5).unwrap_or(f64::NAN);
    out.push(CheckResult::new(
        "smoothness",
        "coordinate squares, L = 1, n = 16",
        (0.99..=1.0 + 1e-6).contains(&est),
        format!("estimate {est:.6}"),
    ));
    if let Ok(q) = make_quadratic_scsc((4, 3), 8, 0.1, 0.3, 2.0, 5) {
        out.push(smoothness_check("quadratic", &q, 3.0));
    }
    if let Ok(c) = build_hard_chain(40.0, 1.0, 4, 1e-3) {
        out.push(smoothness_check("hard chain", &c, 3.0));
    }
    if let Ok(s) = build_separable(2.0, 0.5, 4) {
        out.push(smoothness_check("separable", &s, 3.0));
    }
    if let Ok(w) = gen_wireless(8, 1.0, 0.5, 10.0, 7) {
        out.push(smoothness_check("wireless", &w, 3.0));
    }
    out
}

/// Relative norm of the gradient operator at the closed-form saddle of
/// random chain and separable instances; also the worst `|αω − (1 − q)|`.
pub fn saddle_residuals(draws: usize, seed: u64) -> (f64, f64, f64) {
    let mut rng = seeded_rng(seed, 404);
    let (mut chain, mut sep, mut ident): (f64, f64, f64) = (0.0, 0.0, 0.0);
    for _ in 0..draws {
        let alpha = rng.gen_range(0.01..5.0);
        let (w, q) = chain_constants(alpha);
        ident = ident
            .max((alpha * w - (1.0 - q)).abs())
            .max((q - w * w).abs());
        let inst = HardChainInstance::from_parts(
            alpha,
            rng.gen_range(0.1..10.0),
            rng.gen_range(1..12),
            rng.gen_range(1..5),
        )
        .expect("valid parts");
        let z = hard_chain_saddle(&inst);
        let g = gradient_operator(&inst, &z, &mut SfoCounter::new()).expect("dims match");
        chain = chain.max(g.norm() / inst.lambda_h);

        let mu = rng.gen_range(0.01..1.0);
        let l = mu * rng.gen_range(2.1..50.0);
        let s = build_separable(l, mu, rng.gen_range(1..9)).expect("valid");
        let z = separable_saddle(&s);
        let g = gradient_operator(&s, &z, &mut SfoCounter::new()).expect("dims match");
        sep = sep.max(g.norm() / l);
    }
    (chain, sep, ident)
}

fn saddle_suite() -> Vec<CheckResult> {
    let (chain, sep, ident) = saddle_residuals(50, 4);
    let mut out = vec![
        CheckResult::new(
            "saddles",
            "hard chain closed form",
            chain <= 1e-10,
            format!("max ‖g‖/λ = {chain:.3e}"),
        ),
        CheckResult::new(
            "saddles",
            "separable closed form",
            sep <= 1e-10,
            format!("max ‖g‖/L = {sep:.3e}"),
        ),
        CheckResult::new(
            "saddles",
            "αω = 1 − q and q = ω²",
            ident <= 1e-12,
            format!("max deviation {ident:.3e}"),
        ),
    ];
    let mut worst: f64 = 0.0;
    for seed in 0..5 {
        if let Ok(p) = make_quadratic_scsc((3, 3), 4, 0.2, 0.3, 2.0, seed) {
            if let Ok(z) = quadratic_saddle_oracle(&p) {
                if let Ok(g) = gradient_operator(&p, &z, &mut SfoCounter::new()) {
                    worst = worst.max(g.norm());
                }
            }
        }
    }
    out.push(CheckResult::new(
        "saddles",
        "quadratic linear-solve saddle",
        worst <= 1e-10,
        format!("max ‖g‖ = {worst:.3e}"),
    ));
    out
}

/// Chain log of L-SVRE and EG runs from the origin on a chain instance.
pub fn chain_runs(
    inst: &HardChainInstance,
    iterations: u64,
    seed: u64,
) -> crate::error::Result<Vec<(&'static str, Vec<ChainStep>)>> {
    let z0 = PrimalDualPoint::zeros(inst.dim_x(), inst.dim_y());
    let opts = RunOptions {
        record_chain: true,
        ..Default::default()
    };
    let lsvre = lsvre_run(
        inst,
        &z0,
        &lsvre_default_params(inst, Budget::Iterations(iterations), seed),
        &opts,
    )?;
    let eg = extragradient_run(
        inst,
        &z0,
        &EgParams {
            tau: 0.5 / inst.constants().l,
            budget: Budget::Iterations(iterations),
        },
        &opts,
    )?;
    Ok(vec![
        ("lsvre", lsvre.chain.unwrap_or_default()),
        ("eg", eg.chain.unwrap_or_default()),
    ])
}

fn zero_chain_suite() -> Vec<CheckResult> {
    let mut out = Vec::new();
    let inst = HardChainInstance::from_parts(0.5, 1.0, 8, 4).expect("valid parts");
    match chain_runs(&inst, 500, 9) {
        Ok(runs) => {
            for (name, steps) in runs {
                let (passed, detail) = match zero_chain_audit(&inst, &steps) {
                    Ok(r) => (
                        r.passed(),
                        format!("{} points, max support {}", r.steps_checked, r.max_support),
                    ),
                    Err(e) => (false, e.to_string()),
                };
                out.push(CheckResult::new(
                    "zero_chain",
                    format!("{name} audit, n = 4, d = 8"),
                    passed,
                    detail,
                ));
            }
        }
        Err(e) => out.push(CheckResult::new(
            "zero_chain",
            "chain runs",
            false,
            e.to_string(),
        )),
    }
    let mut bad = PrimalDualPoint::zeros(32, 32);
    bad.y[7] = 1.0;
    let planted = vec![
        ChainStep {
            queries: vec![],
            point: PrimalDualPoint::zeros(32, 32),
        },
        ChainStep {
            queries: vec![0],
            point: bad,
        },
    ];
    let caught = zero_chain_audit(&inst, &planted)
        .map(|r| {
            r.first_violation
                .is_some_and(|v| v.step == 1 && v.block == 0)
        })
        .unwrap_or(false);
    out.push(CheckResult::new(
        "zero_chain",
        "planted violation caught",
        caught,
        "",
    ));
    out
}

/// Worst slack of the two gap relations over random quadratics:
/// `(max of μx‖x̂−x*‖² + μy‖ŷ−y*‖² − 2 gap, max of one-sided excess − bound)`.
pub fn lemma_slacks(
    problems: u64,
    points: usize,
    seed: u64,
) -> crate::error::Result<(f64, f64, f64)> {
    let mut rng = seeded_rng(seed, 505);
    let (mut dist_slack, mut corr_slack, mut min_gap) =
        (f64::NEG_INFINITY, f64::NEG_INFINITY, f64::INFINITY);
    for k in 0..problems {
        let dims = (rng.gen_range(1..5), rng.gen_range(1..5));
        let n = rng.gen_range(1..6);
        let mu_x = rng.gen_range(0.05..0.5);
        let mu_y = rng.gen_range(0.05..0.5);
        let p = make_quadratic_scsc(dims, n, mu_x, mu_y, 2.0, seed * 1000 + k)?;
        let gap = QuadraticGap::new(&p)?;
        let star = quadratic_saddle_oracle(&p)?;
        let f_star = gap.value(&star)?;
        let c = p.constants();
        let eta = 1.0 / (4.0 * (n as f64).sqrt() * c.l);
        for _ in 0..points {
            let r = 10f64.powf(rng.gen_range(-3.0..0.5));
            let z = PrimalDualPoint::new(
                star.x
                    .iter()
                    .map(|v| v + r * rng.sample::<f64, _>(rand_distr::StandardNormal))
                    .collect(),
                star.y
                    .iter()
                    .map(|v| v + r * rng.sample::<f64, _>(rand_distr::StandardNormal))
                    .collect(),
            );
            let g = gap.gap(&z)?;
            min_gap = min_gap.min(g);
            dist_slack = dist_slack.max(weighted_distance(&z, &star, c.mu_x, c.mu_y) - 2.0 * g);

            let eps = z.dist2(&star);
            let t = projected_gradient_step(&p, &z, eta, &mut SfoCounter::new())?;
            let primal = gap.primal_value(&t)? - f_star;
            let dual = f_star - gap.dual_value(&t)?;
            corr_slack = corr_slack
                .max(primal - correction_step_bound(c.l, c.kappa_y(), eta, eps))
                .max(dual - correction_step_bound(c.l, c.kappa_x(), eta, eps));
        }
    }
    Ok((dist_slack, corr_slack, min_gap))
}

fn lemma_suite() -> Vec<CheckResult> {
    match lemma_slacks(10, 100, 6) {
        Ok((dist, corr, min_gap)) => vec![
            CheckResult::new(
                "lemmas",
                "weighted distance ≤ 2 · gap",
                dist <= 1e-9,
                format!("max slack {dist:.3e}"),
            ),
            CheckResult::new(
                "lemmas",
                "correction step one-sided bounds",
                corr <= 1e-9,
                format!("max slack {corr:.3e}"),
            ),
            CheckResult::new(
                "lemmas",
                "gap nonnegative",
                min_gap >= -1e-10,
                format!("min gap {min_gap:.3e}"),
            ),
        ],
        Err(e) => vec![CheckResult::new("lemmas", "setup", false, e.to_string())],
    }
}
