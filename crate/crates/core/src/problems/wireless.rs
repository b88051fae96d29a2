//! Power allocation against a jammer:
//! `f(x, y) = −(1/n) Σ log(1 + b_i x_i / (a_i + y_i))`
//! over `X = {‖x‖ ≤ R, x ≥ 0}` and `Y = {1ᵀy = n, y ≥ 0}`.
//!
//! Component `i` only touches the pair `(x_i, y_i)`.

use rand::Rng;

use crate::error::{Error, Result};
use crate::oracle::{seeded_rng, FiniteSumProblem, ProblemConstants};
use crate::point::{GradientPair, PrimalDualPoint};
use crate::projections::FeasibleSet;

const HESSIAN_GRID: usize = 401;

#[derive(Debug, Clone)]
pub struct WirelessProblem {
    a: Vec<f64>,
    b: Vec<f64>,
    radius: f64,
    constants: ProblemConstants,
    x_set: FeasibleSet,
    y_set: FeasibleSet,
}

/// Build from noise levels `a` and gains `b`.
///
/// Requires `a_i > 0` so the objective stays smooth at `y_i = 0`.
pub fn make_wireless(a: Vec<f64>, b: Vec<f64>, radius: f64) -> Result<WirelessProblem> {
    let n = a.len();
    if n == 0 || b.len() != n {
        return Err(Error::invalid(format!(
            "a and b must be nonempty and of equal length, got {} and {}",
            n,
            b.len()
        )));
    }
    if let Some(i) = b.iter().position(|&v| !(v > 0.0 && v.is_finite())) {
        return Err(Error::invalid(format!(
            "b[{i}] must be positive, got {}",
            b[i]
        )));
    }
    if let Some(i) = a.iter().position(|&v| !(v > 0.0 && v.is_finite())) {
        return Err(Error::invalid(format!(
            "a[{i}] must be positive for a finite smoothness constant, got {}",
            a[i]
        )));
    }
    let x_set = FeasibleSet::nonneg_ball(radius)?;
    let y_set = FeasibleSet::simplex_sum(n as f64)?;
    let l = (0..n)
        .map(|i| hessian_norm_bound(a[i], b[i], radius, n as f64))
        .fold(0.0, f64::max)
        / (n as f64).sqrt();
    Ok(WirelessProblem {
        a,
        b,
        radius,
        constants: ProblemConstants::new(n, l, 0.0, 0.0)?,
        x_set,
        y_set,
    })
}

/// `a` uniform on `[lo, hi]^n` and `b = 1`.
pub fn gen_wireless(n: usize, radius: f64, lo: f64, hi: f64, seed: u64) -> Result<WirelessProblem> {
    let a = gen_wireless_gains(n, lo, hi, seed)?;
    make_wireless(a, vec![1.0; n], radius)
}

/// Noise levels uniform on `[lo, hi]^n`, deterministic in `seed`.
pub fn gen_wireless_gains(n: usize, lo: f64, hi: f64, seed: u64) -> Result<Vec<f64>> {
    if n == 0 {
        return Err(Error::invalid("n must be at least 1"));
    }
    if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
        return Err(Error::invalid(format!("need lo <= hi, got [{lo}, {hi}]")));
    }
    let mut rng = seeded_rng(seed, 7);
    Ok((0..n).map(|_| lo + (hi - lo) * rng.gen::<f64>()).collect())
}

/// Largest spectral norm of the 2×2 Hessian of `−log(1 + b x/(a + y))` over
/// `x ∈ [0, R]`, `y ∈ [0, y_max]`, sampled on a grid.
///
/// Every Hessian entry shrinks in magnitude as `y` grows, so the grid is
/// concentrated near `y = 0`.
fn hessian_norm_bound(a: f64, b: f64, radius: f64, y_max: f64) -> f64 {
    let mut best: f64 = 0.0;
    for yi in 0..8 {
        let y = if yi == 0 {
            0.0
        } else {
            y_max * 10f64.powi(yi - 7)
        };
        for k in 0..HESSIAN_GRID {
            let x = radius * k as f64 / (HESSIAN_GRID - 1) as f64;
            let s = a + y;
            let t = s + b * x;
            let hxx = b * b / (t * t);
            let hxy = b / (t * t);
            let hyy = 1.0 / (t * t) - 1.0 / (s * s);
            let mean = 0.5 * (hxx + hyy);
            let rad = (0.25 * (hxx - hyy).powi(2) + hxy * hxy).sqrt();
            best = best.max((mean + rad).abs()).max((mean - rad).abs());
        }
    }
    best
}

impl WirelessProblem {
    pub fn noise(&self) -> &[f64] {
        &self.a
    }

    pub fn gains(&self) -> &[f64] {
        &self.b
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }
}

impl FiniteSumProblem for WirelessProblem {
    fn constants(&self) -> ProblemConstants {
        self.constants
    }
    fn dim_x(&self) -> usize {
        self.a.len()
    }
    fn dim_y(&self) -> usize {
        self.a.len()
    }
    fn x_set(&self) -> &FeasibleSet {
        &self.x_set
    }
    fn y_set(&self) -> &FeasibleSet {
        &self.y_set
    }

    fn component_value(&self, i: usize, z: &PrimalDualPoint) -> f64 {
        -(self.b[i] * z.x[i] / (self.a[i] + z.y[i])).ln_1p()
    }

    fn add_component_operator(
        &self,
        i: usize,
        z: &PrimalDualPoint,
        scale: f64,
        out: &mut GradientPair,
    ) {
        let (a, b, x) = (self.a[i], self.b[i], z.x[i]);
        let s = a + z.y[i];
        let t = s + b * x;
        out.gx[i] -= scale * b / t;
        // ∂y f_i = b x / (s t), stored negated
        out.gy_negated[i] -= scale * b * x / (s * t);
    }
}
