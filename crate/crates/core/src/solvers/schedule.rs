//! Parameter selection for AL-SVRE.

use crate::error::{Error, Result};
use crate::oracle::{
    gradient_operator, project_point, FiniteSumProblem, ProblemConstants, SfoCounter,
};
use crate::point::{norm, PrimalDualPoint};

/// How the inner iteration count and number of rounds are chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScheduleMode {
    /// Worst-case ceilings from the convergence analysis.
    Theory,
    /// `T_k = ⌈c·n⌉` and a caller-supplied budget.
    Practical,
}

impl std::str::FromStr for ScheduleMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "theory" => Ok(Self::Theory),
            "practical" => Ok(Self::Practical),
            other => Err(Error::invalid(format!(
                "unknown mode {other:?}, expected theory or practical"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScheduleParams {
    pub beta: f64,
    pub q: f64,
    pub gamma: f64,
    pub rho: f64,
    pub p: f64,
    /// Inner step `τ_k`, the same in every round.
    pub tau: f64,
    /// Inner iterations `T_k`, the same in every round.
    pub inner_iterations: u64,
    /// Outer rounds `K`; `None` means the run budget decides.
    pub rounds: Option<u64>,
    pub mode: ScheduleMode,
    /// Run on the transposed problem (set when `mu_x > mu_y`).
    pub transpose: bool,
    pub seed: u64,
}

impl ScheduleParams {
    /// `(1 − √q)/(1 + √q)`.
    pub fn gamma_for(q: f64) -> f64 {
        let s = q.sqrt();
        (1.0 - s) / (1.0 + s)
    }

    /// Set `β` and re-derive `q`, `γ`, `ρ` from the working constants.
    pub fn set_beta(&mut self, beta: f64, working_mu_x: f64) {
        self.beta = beta;
        self.q = working_mu_x / (working_mu_x + beta);
        self.gamma = Self::gamma_for(self.q);
        self.rho = 0.5 * self.q.sqrt();
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.beta >= 0.0 && self.beta.is_finite()) {
            return Err(Error::invalid(format!(
                "beta must be nonnegative, got {}",
                self.beta
            )));
        }
        if !(self.q > 0.0 && self.q <= 1.0) {
            return Err(Error::invalid(format!(
                "q must be in (0, 1], got {}",
                self.q
            )));
        }
        if !(self.rho > 0.0 && self.rho < self.q.sqrt()) {
            return Err(Error::invalid(format!(
                "rho must be in (0, sqrt(q)), got {}",
                self.rho
            )));
        }
        if self.inner_iterations == 0 {
            return Err(Error::invalid("inner iteration count must be at least 1"));
        }
        if self.rounds == Some(0) {
            return Err(Error::invalid("outer round count K must be at least 1"));
        }
        super::lsvre::validate_step(self.tau, self.p)
    }

    pub fn snapshot(&self) -> Vec<(String, String)> {
        let f = super::fmt_param;
        let mut out = vec![
            ("beta".to_string(), f(self.beta)),
            ("q".to_string(), f(self.q)),
            ("gamma".to_string(), f(self.gamma)),
            ("rho".to_string(), f(self.rho)),
            ("p".to_string(), f(self.p)),
            ("tau".to_string(), f(self.tau)),
            (
                "inner_iterations".to_string(),
                self.inner_iterations.to_string(),
            ),
            (
                "mode".to_string(),
                match self.mode {
                    ScheduleMode::Theory => "theory".into(),
                    ScheduleMode::Practical => "practical".into(),
                },
            ),
            ("transpose".to_string(), self.transpose.to_string()),
        ];
        if let Some(k) = self.rounds {
            out.push(("rounds".to_string(), k.to_string()));
        }
        out
    }
}

/// Knobs for [`alsvre_params_with`].
#[derive(Debug, Clone)]
pub struct ScheduleOptions {
    /// Upper bound on the initial duality gap; estimated when absent.
    pub delta_f: Option<f64>,
    /// Practical mode uses `T_k = ⌈c·n⌉`.
    pub inner_factor: f64,
    /// Starting point used for the gap estimate; the projected origin by default.
    pub z0: Option<PrimalDualPoint>,
    pub seed: u64,
}

impl Default for ScheduleOptions {
    fn default() -> Self {
        Self {
            delta_f: None,
            inner_factor: 0.5,
            z0: None,
            seed: 0,
        }
    }
}

/// Three-case choice of `β` for constants with `mu_x ≤ mu_y`:
/// `μy − μx` if `κy ≥ √n`, `L/√n − μx` if `κx > √n > κy`, else `0`.
pub fn beta_rule(c: &ProblemConstants) -> f64 {
    let sqrt_n = (c.n as f64).sqrt();
    let (kx, ky) = (c.kappa_x(), c.kappa_y());
    if ky >= sqrt_n {
        c.mu_y - c.mu_x
    } else if kx > sqrt_n {
        c.l / sqrt_n - c.mu_x
    } else {
        0.0
    }
}

/// Parameters with default options.
pub fn alsvre_default_params<P: FiniteSumProblem + ?Sized>(
    problem: &P,
    epsilon: f64,
    mode: ScheduleMode,
) -> Result<ScheduleParams> {
    alsvre_params_with(problem, epsilon, mode, &ScheduleOptions::default())
}

/// Resolve a full schedule. Problems with `mu_x > mu_y` are handled by
/// transposition, so every formula below sees `mu_x ≤ mu_y`.
pub fn alsvre_params_with<P: FiniteSumProblem + ?Sized>(
    problem: &P,
    epsilon: f64,
    mode: ScheduleMode,
    opts: &ScheduleOptions,
) -> Result<ScheduleParams> {
    let original = problem.constants();
    if !(original.mu_x > 0.0 && original.mu_y > 0.0) {
        return Err(Error::invalid(
            "AL-SVRE needs mu_x > 0 and mu_y > 0; wrap the problem with wrap_strongly_concave or wrap_both first",
        ));
    }
    let transpose = original.mu_x > original.mu_y;
    let c = if transpose {
        original.transposed()
    } else {
        original
    };
    let n = c.n as f64;
    let sqrt_n = n.sqrt();

    let beta = beta_rule(&c);
    let mut params = ScheduleParams {
        beta: 0.0,
        q: 1.0,
        gamma: 0.0,
        rho: 0.5,
        p: 1.0 / (2.0 * n),
        tau: 1.0 / (4.0 * sqrt_n * (c.l + beta)),
        inner_iterations: 1,
        rounds: None,
        mode,
        transpose,
        seed: opts.seed,
    };
    params.set_beta(beta, c.mu_x);

    match mode {
        ScheduleMode::Practical => {
            if !(opts.inner_factor > 0.0 && opts.inner_factor.is_finite()) {
                return Err(Error::invalid("inner factor c must be positive"));
            }
            params.inner_iterations = (opts.inner_factor * n).ceil().max(1.0) as u64;
        }
        ScheduleMode::Theory => {
            if !(epsilon > 0.0 && epsilon.is_finite()) {
                return Err(Error::invalid(format!(
                    "target epsilon must be positive, got {epsilon}"
                )));
            }
            let delta_f = match opts.delta_f {
                Some(d) if d > 0.0 && d.is_finite() => d,
                Some(d) => {
                    return Err(Error::invalid(format!("delta_f must be positive, got {d}")))
                }
                None => {
                    let z0 = match &opts.z0 {
                        Some(z) => z.clone(),
                        None => {
                            let mut z = PrimalDualPoint::zeros(problem.dim_x(), problem.dim_y());
                            project_point(problem, &mut z);
                            z
                        }
                    };
                    estimate_delta_f(problem, &z0)?
                }
            };
            params.inner_iterations =
                theory_inner_iterations(&c, params.beta, params.q, params.rho);
            params.rounds = Some(theory_rounds(&c, params.q, delta_f, epsilon));
        }
    }
    Ok(params)
}

/// `T_k = ⌈4(n + 2√n(L+β)/min{μx+β, μy}) log(12(2/(1−ρ) + 1728β(L+β)(7(L+β)+2√nμy) / (μxμy min{μx,μy}(1−ρ)²(√q−ρ)²)))⌉`.
fn theory_inner_iterations(c: &ProblemConstants, beta: f64, q: f64, rho: f64) -> u64 {
    let n = c.n as f64;
    let sqrt_n = n.sqrt();
    let lb = c.l + beta;
    let lead = 4.0 * (n + 2.0 * sqrt_n * lb / (c.mu_x + beta).min(c.mu_y));
    let num = 1728.0 * beta * lb * (7.0 * lb + 2.0 * sqrt_n * c.mu_y);
    let den = c.mu_x * c.mu_y * c.mu_x.min(c.mu_y) * (1.0 - rho).powi(2) * (q.sqrt() - rho).powi(2);
    let arg = 12.0 * (2.0 / (1.0 - rho) + num / den);
    (lead * arg.ln()).ceil().max(1.0) as u64
}

/// `K = ⌈(2/√q) log(10992 √n Δf κy κx³ / ε)⌉`.
fn theory_rounds(c: &ProblemConstants, q: f64, delta_f: f64, epsilon: f64) -> u64 {
    let sqrt_n = (c.n as f64).sqrt();
    let arg = 10992.0 * sqrt_n * delta_f * c.kappa_y() * c.kappa_x().powi(3) / epsilon;
    ((2.0 / q.sqrt()) * arg.ln().max(0.0)).ceil().max(1.0) as u64
}

/// Upper bound on `max_y f(x₀, y) − min_x f(x, y₀)` from one full gradient.
///
/// Strong convexity gives `‖∇x f‖²/(2μx) + ‖∇y f‖²/(2μy)`; on bounded sets
/// the linear bound `‖∇x f‖Dx + ‖∇y f‖Dy` also holds, and the smaller is used.
pub fn estimate_delta_f<P: FiniteSumProblem + ?Sized>(
    problem: &P,
    z0: &PrimalDualPoint,
) -> Result<f64> {
    let c = problem.constants();
    let g = gradient_operator(problem, z0, &mut SfoCounter::new())?;
    let (gx, gy) = (norm(&g.gx), norm(&g.gy_negated));
    let mut bound = f64::INFINITY;
    if c.mu_x > 0.0 && c.mu_y > 0.0 {
        bound = gx * gx / (2.0 * c.mu_x) + gy * gy / (2.0 * c.mu_y);
    }
    if let (Some(dx), Some(dy)) = (
        problem.x_set().diameter(problem.dim_x()),
        problem.y_set().diameter(problem.dim_y()),
    ) {
        bound = bound.min(gx * dx + gy * dy);
    }
    if !bound.is_finite() {
        return Err(Error::invalid(
            "cannot bound the initial gap; supply delta_f",
        ));
    }
    // a zero gradient means z0 is already a saddle; keep the logs finite
    Ok(bound.max(f64::MIN_POSITIVE))
}

/// The per-round accuracy targets of the analysis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TheorySchedule {
    pub delta_f: f64,
    pub rho: f64,
    pub q: f64,
    pub beta: f64,
    pub l: f64,
    pub mu_y: f64,
    pub n: usize,
}

impl TheorySchedule {
    /// `2μyΔf(1−ρ)^k / (3(L+β)(7(L+β) + 2√n μy))`.
    pub fn epsilon_k(&self, k: u32) -> f64 {
        let lb = self.l + self.beta;
        2.0 * self.mu_y * self.delta_f * (1.0 - self.rho).powi(k as i32)
            / (3.0 * lb * (7.0 * lb + 2.0 * (self.n as f64).sqrt() * self.mu_y))
    }

    /// `8Δf(1−ρ)^{k+1} / (√q − ρ)²`.
    pub fn delta_k(&self, k: u32) -> f64 {
        8.0 * self.delta_f * (1.0 - self.rho).powi(k as i32 + 1)
            / (self.q.sqrt() - self.rho).powi(2)
    }
}
