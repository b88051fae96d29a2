//! Separable instance
//! `f̂_i = (μ/2)‖x‖² + (√n L̂/2)(x_i − 1)² − (μ/2)‖y‖² − (√n L̂/2)(y_i − 1)²`
//! with `L̂ = √(L²/2 − μ²)`.

use crate::error::{Error, Result};
use crate::oracle::{FiniteSumProblem, ProblemConstants};
use crate::point::{GradientPair, PrimalDualPoint};
use crate::projections::FeasibleSet;

#[derive(Debug, Clone)]
pub struct SeparableHardInstance {
    pub n: usize,
    pub mu: f64,
    pub l: f64,
    pub l_hat: f64,
    constants: ProblemConstants,
    set: FeasibleSet,
}

/// Needs `L/μ > 2`.
pub fn build_separable(l: f64, mu: f64, n: usize) -> Result<SeparableHardInstance> {
    if n == 0 {
        return Err(Error::invalid("n must be at least 1"));
    }
    if !(mu > 0.0 && l.is_finite() && l / mu > 2.0) {
        return Err(Error::invalid(format!(
            "separable instance needs L/mu > 2, got L = {l}, mu = {mu}"
        )));
    }
    Ok(SeparableHardInstance {
        n,
        mu,
        l,
        l_hat: (l * l / 2.0 - mu * mu).sqrt(),
        constants: ProblemConstants::new(n, l, mu, mu)?,
        set: FeasibleSet::whole_space(),
    })
}

/// `x* = y* = L̂/(L̂ + √n μ) · 1`.
pub fn separable_saddle(inst: &SeparableHardInstance) -> PrimalDualPoint {
    let v = inst.l_hat / (inst.l_hat + (inst.n as f64).sqrt() * inst.mu);
    PrimalDualPoint::new(vec![v; inst.n], vec![v; inst.n])
}

impl SeparableHardInstance {
    fn coef(&self) -> f64 {
        (self.n as f64).sqrt() * self.l_hat
    }

    /// Smoothness of each single component, `μ + √n L̂`.
    pub fn component_smoothness(&self) -> f64 {
        self.mu + self.coef()
    }

    /// Exact average-smoothness constant `√(μ² + 2μL̂/√n + L̂²)`, below the declared `L`.
    pub fn exact_average_smoothness(&self) -> f64 {
        let s = (self.n as f64).sqrt();
        (self.mu * self.mu + 2.0 * self.mu * self.l_hat / s + self.l_hat * self.l_hat).sqrt()
    }
}

impl FiniteSumProblem for SeparableHardInstance {
    fn constants(&self) -> ProblemConstants {
        self.constants
    }
    fn dim_x(&self) -> usize {
        self.n
    }
    fn dim_y(&self) -> usize {
        self.n
    }
    fn x_set(&self) -> &FeasibleSet {
        &self.set
    }
    fn y_set(&self) -> &FeasibleSet {
        &self.set
    }

    fn component_value(&self, i: usize, z: &PrimalDualPoint) -> f64 {
        let sq = |v: &[f64]| v.iter().map(|t| t * t).sum::<f64>();
        let c = self.coef();
        0.5 * self.mu * sq(&z.x) + 0.5 * c * (z.x[i] - 1.0).powi(2)
            - 0.5 * self.mu * sq(&z.y)
            - 0.5 * c * (z.y[i] - 1.0).powi(2)
    }

    fn add_component_operator(
        &self,
        i: usize,
        z: &PrimalDualPoint,
        scale: f64,
        out: &mut GradientPair,
    ) {
        let m = scale * self.mu;
        for (g, x) in out.gx.iter_mut().zip(&z.x) {
            *g += m * x;
        }
        for (g, y) in out.gy_negated.iter_mut().zip(&z.y) {
            *g += m * y;
        }
        let c = scale * self.coef();
        out.gx[i] += c * (z.x[i] - 1.0);
        out.gy_negated[i] += c * (z.y[i] - 1.0);
    }
}
