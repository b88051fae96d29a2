//! The bidiagonal zero-chain instance.
//!
//! `H(x, y) = (α/2)‖x‖² + xᵀ(By − c) − (α/2)‖y‖²` on `R^d × R^d`, where `B`
//! has ones on the diagonal, `−1` below it and last diagonal entry `√(αω)`,
//! and `c = (ω, 0, …, 0)`. The finite-sum problem is
//! `f = (1/n) Σ λ H(U_i x, U_i y)` over `n` disjoint blocks of size `d`.

use crate::error::{Error, Result};
use crate::oracle::{FiniteSumProblem, ProblemConstants};
use crate::point::{GradientPair, PrimalDualPoint};
use crate::projections::FeasibleSet;

#[derive(Debug, Clone)]
pub struct HardChainInstance {
    pub alpha_h: f64,
    pub lambda_h: f64,
    pub d: usize,
    pub n: usize,
    /// `(√(α²+4) − α)/2`.
    pub omega: f64,
    /// `(2 + α² − α√(α²+4))/2`.
    pub q_h: f64,
    b_last: f64,
    constants: ProblemConstants,
    set: FeasibleSet,
}

/// `ω(α)` and `q(α)` from their closed forms.
pub fn chain_constants(alpha: f64) -> (f64, f64) {
    let r = (alpha * alpha + 4.0).sqrt();
    ((r - alpha) / 2.0, (2.0 + alpha * alpha - alpha * r) / 2.0)
}

impl HardChainInstance {
    /// Build from the raw parameters. The declared constants are
    /// `μ = λα/n` for both blocks and `L = λ√((8 + 2α²)/n)`.
    pub fn from_parts(alpha_h: f64, lambda_h: f64, d: usize, n: usize) -> Result<Self> {
        if !(alpha_h > 0.0 && alpha_h.is_finite()) {
            return Err(Error::invalid(format!(
                "alpha must be positive, got {alpha_h}"
            )));
        }
        if !(lambda_h > 0.0 && lambda_h.is_finite()) {
            return Err(Error::invalid(format!(
                "lambda must be positive, got {lambda_h}"
            )));
        }
        if d == 0 || n == 0 {
            return Err(Error::invalid("chain needs d >= 1 and n >= 1"));
        }
        let (omega, q_h) = chain_constants(alpha_h);
        let nf = n as f64;
        let mu = lambda_h * alpha_h / nf;
        let l = lambda_h * ((8.0 + 2.0 * alpha_h * alpha_h) / nf).sqrt();
        Ok(Self {
            alpha_h,
            lambda_h,
            d,
            n,
            omega,
            q_h,
            b_last: (alpha_h * omega).sqrt(),
            constants: ProblemConstants::new(n, l, mu, mu)?,
            set: FeasibleSet::whole_space(),
        })
    }

    fn diag(&self, j: usize) -> f64 {
        if j + 1 == self.d {
            self.b_last
        } else {
            1.0
        }
    }

    /// `By` for one block.
    pub fn b_times(&self, y: &[f64], out: &mut [f64]) {
        for j in 0..self.d {
            out[j] = self.diag(j) * y[j] - if j > 0 { y[j - 1] } else { 0.0 };
        }
    }

    /// `Bᵀx` for one block.
    pub fn bt_times(&self, x: &[f64], out: &mut [f64]) {
        for j in 0..self.d {
            out[j] = self.diag(j) * x[j] - if j + 1 < self.d { x[j + 1] } else { 0.0 };
        }
    }

    /// `H` on one block.
    pub fn h_value(&self, x: &[f64], y: &[f64]) -> f64 {
        let mut by = vec![0.0; self.d];
        self.b_times(y, &mut by);
        let a = self.alpha_h;
        let mut v = -x[0] * self.omega;
        for j in 0..self.d {
            v += 0.5 * a * x[j] * x[j] + x[j] * by[j] - 0.5 * a * y[j] * y[j];
        }
        v
    }

    /// Closed-form saddle of one block:
    /// `x* = (q, …, q^d)`, `y* = ω(q, …, q^{d−1}, q^d/√(1−q))`.
    pub fn block_saddle(&self) -> (Vec<f64>, Vec<f64>) {
        let q = self.q_h;
        let x: Vec<f64> = (1..=self.d).map(|k| q.powi(k as i32)).collect();
        let mut y: Vec<f64> = x.iter().map(|v| self.omega * v).collect();
        if let Some(last) = y.last_mut() {
            *last /= (1.0 - q).sqrt();
        }
        (x, y)
    }
}

/// Instance with `(μ, μ)` convexity and `L` average smoothness:
/// `α = √(8n/(L²/μ² − 2n))`, `λ = nμ/α`, `d = ⌊ln(1/(2ε))/α⌋ − 4`.
///
/// Needs `L/μ > √(10n)` and `ε < ½e⁻⁵`, and the resulting `d ≥ 1`.
pub fn build_hard_chain(l: f64, mu: f64, n: usize, epsilon: f64) -> Result<HardChainInstance> {
    if n == 0 {
        return Err(Error::invalid("n must be at least 1"));
    }
    if !(mu > 0.0 && l > 0.0 && l.is_finite()) {
        return Err(Error::invalid("L and mu must be positive"));
    }
    let nf = n as f64;
    if !(l / mu > (10.0 * nf).sqrt()) {
        return Err(Error::invalid(format!(
            "hard chain needs L/mu > sqrt(10 n) = {}, got {}",
            (10.0 * nf).sqrt(),
            l / mu
        )));
    }
    let eps_cap = 0.5 * (-5f64).exp();
    if !(epsilon > 0.0 && epsilon < eps_cap) {
        return Err(Error::invalid(format!(
            "hard chain needs 0 < eps < e^-5 / 2 = {eps_cap:.6}, got {epsilon}"
        )));
    }
    let ratio2 = (l / mu).powi(2);
    let alpha = (8.0 * nf / (ratio2 - 2.0 * nf)).sqrt();
    let lambda = nf * mu / alpha;
    let d = ((1.0 / (2.0 * epsilon)).ln() / alpha).floor() - 4.0;
    if d < 1.0 {
        return Err(Error::invalid(format!(
            "chain length d = {d} < 1; decrease eps"
        )));
    }
    HardChainInstance::from_parts(alpha, lambda, d as usize, n)
}

/// The saddle replicated over all `n` blocks.
pub fn hard_chain_saddle(inst: &HardChainInstance) -> PrimalDualPoint {
    let (bx, by) = inst.block_saddle();
    let x = bx.iter().copied().cycle().take(inst.n * inst.d).collect();
    let y = by.iter().copied().cycle().take(inst.n * inst.d).collect();
    PrimalDualPoint::new(x, y)
}

impl FiniteSumProblem for HardChainInstance {
    fn constants(&self) -> ProblemConstants {
        self.constants
    }
    fn dim_x(&self) -> usize {
        self.n * self.d
    }
    fn dim_y(&self) -> usize {
        self.n * self.d
    }
    fn x_set(&self) -> &FeasibleSet {
        &self.set
    }
    fn y_set(&self) -> &FeasibleSet {
        &self.set
    }
    fn num_components(&self) -> usize {
        self.n
    }

    fn component_value(&self, i: usize, z: &PrimalDualPoint) -> f64 {
        let r = i * self.d..(i + 1) * self.d;
        self.lambda_h * self.h_value(&z.x[r.clone()], &z.y[r])
    }

    fn add_component_operator(
        &self,
        i: usize,
        z: &PrimalDualPoint,
        scale: f64,
        out: &mut GradientPair,
    ) {
        let (d, a, s) = (self.d, self.alpha_h, scale * self.lambda_h);
        let off = i * d;
        let x = &z.x[off..off + d];
        let y = &z.y[off..off + d];
        for j in 0..d {
            let by = self.diag(j) * y[j] - if j > 0 { y[j - 1] } else { 0.0 };
            let btx = self.diag(j) * x[j] - if j + 1 < d { x[j + 1] } else { 0.0 };
            let c = if j == 0 { self.omega } else { 0.0 };
            out.gx[off + j] += s * (a * x[j] + by - c);
            out.gy_negated[off + j] += s * (a * y[j] - btx);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::{gradient_operator, SfoCounter};

    #[test]
    fn unit_alpha_constants() {
        let (w, q) = chain_constants(1.0);
        assert!((w - 0.618034).abs() < 1e-6);
        assert!((q - 0.381966).abs() < 1e-6);
        assert!((w - (1.0 - q)).abs() < 1e-12);
        assert!((q - w * w).abs() < 1e-12);
    }

    #[test]
    fn small_alpha_limit() {
        let (w, q) = chain_constants(1e-9);
        assert!((w - 1.0).abs() < 1e-8 && (q - 1.0).abs() < 1e-8);
    }

    #[test]
    fn saddles_zero_the_gradient() {
        for d in 1..6 {
            let inst = HardChainInstance::from_parts(1.0, 1.0, d, 3).unwrap();
            let z = hard_chain_saddle(&inst);
            let g = gradient_operator(&inst, &z, &mut SfoCounter::new()).unwrap();
            assert!(g.norm() < 1e-12, "d={d}: {}", g.norm());
        }
    }

    #[test]
    fn two_step_closed_form() {
        let inst = HardChainInstance::from_parts(1.0, 1.0, 2, 1).unwrap();
        let (x, y) = inst.block_saddle();
        assert!((x[0] - 0.381966).abs() < 1e-6 && (x[1] - 0.145898).abs() < 1e-6);
        assert!((y[0] - 0.236068).abs() < 1e-6 && (y[1] - 0.1146979).abs() < 1e-6);
    }

    #[test]
    fn built_instance_matches_requested_constants() {
        let inst = build_hard_chain(40.0, 1.0, 4, 1e-3).unwrap();
        let c = inst.constants();
        assert!((c.l - 40.0).abs() < 1e-9 && (c.mu_x - 1.0).abs() < 1e-12);
        assert_eq!(inst.d, 39);
    }

    #[test]
    fn preconditions_enforced() {
        assert!(build_hard_chain(5.0, 1.0, 4, 1e-3).is_err());
        assert!(build_hard_chain(40.0, 1.0, 4, 0.01).is_err());
    }
}
