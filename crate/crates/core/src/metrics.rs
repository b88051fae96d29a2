//! Convergence measurements and the checkable gap relations.

use std::sync::Arc;

use nalgebra::{Cholesky, DVector, Dyn};

use crate::error::{Error, Result};
use crate::oracle::{gradient_operator, FiniteSumProblem, SfoCounter};
use crate::point::{dist2, PrimalDualPoint};
use crate::problems::{MeanQuadratic, QuadraticScscProblem};

/// Step used by the gradient-mapping metric unless told otherwise.
pub const DEFAULT_TAU_HAT: f64 = 0.1;

/// A quantity recorded at every checkpoint.
#[derive(Clone)]
pub enum Metric {
    /// Squared distance to a known saddle point.
    DistToSaddle(PrimalDualPoint),
    /// `‖g(z)‖`.
    GradNorm,
    /// Gradient mapping with step `τ̂`.
    GradMapping(f64),
    /// Exact duality gap of an unconstrained quadratic.
    DualityGap(Arc<QuadraticGap>),
    /// The inner metric evaluated on a fixed problem instead of the one
    /// being solved, e.g. the original objective under a regularized run.
    Against(Arc<dyn FiniteSumProblem + Send + Sync>, Box<Metric>),
}

impl std::fmt::Debug for Metric {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Metric::DistToSaddle(z) => f.debug_tuple("DistToSaddle").field(z).finish(),
            Metric::GradNorm => f.write_str("GradNorm"),
            Metric::GradMapping(t) => f.debug_tuple("GradMapping").field(t).finish(),
            Metric::DualityGap(_) => f.write_str("DualityGap(..)"),
            Metric::Against(_, m) => f.debug_tuple("Against").field(m).finish(),
        }
    }
}

impl Metric {
    pub fn name(&self) -> &'static str {
        match self {
            Metric::DistToSaddle(_) => "dist2",
            Metric::GradNorm => "grad_norm",
            Metric::GradMapping(_) => "grad_mapping",
            Metric::DualityGap(_) => "gap",
            Metric::Against(_, m) => m.name(),
        }
    }

    /// Evaluate at `z`; full-gradient costs go to `counter`.
    pub fn evaluate(
        &self,
        problem: &dyn FiniteSumProblem,
        z: &PrimalDualPoint,
        counter: &mut SfoCounter,
    ) -> Result<f64> {
        match self {
            Metric::DistToSaddle(star) => distance_to_saddle_squared(z, star),
            Metric::GradNorm => Ok(gradient_operator(problem, z, counter)?.norm()),
            Metric::GradMapping(tau_hat) => gradient_mapping_norm(problem, z, *tau_hat, counter),
            Metric::DualityGap(gap) => gap.gap(z),
            Metric::Against(reference, m) => m.evaluate(reference.as_ref(), z, counter),
        }
    }
}

fn check_same_dims(z: &PrimalDualPoint, star: &PrimalDualPoint) -> Result<()> {
    if z.dims() != star.dims() {
        let (ex, ey) = star.dims();
        let (gx, gy) = z.dims();
        return Err(Error::DimensionMismatch {
            expected_x: ex,
            expected_y: ey,
            got_x: gx,
            got_y: gy,
        });
    }
    Ok(())
}

/// `‖z − z*‖`.
pub fn distance_to_saddle(z: &PrimalDualPoint, z_star: &PrimalDualPoint) -> Result<f64> {
    Ok(distance_to_saddle_squared(z, z_star)?.sqrt())
}

/// `‖z − z*‖²`, the form stored in traces.
pub fn distance_to_saddle_squared(z: &PrimalDualPoint, z_star: &PrimalDualPoint) -> Result<f64> {
    check_same_dims(z, z_star)?;
    Ok(z.dist2(z_star))
}

/// `(‖x − P_X(x − τ̂∇x f)‖ + ‖y − P_Y(y + τ̂∇y f)‖) / τ̂`, costing `n` SFO calls.
pub fn gradient_mapping_norm<P: FiniteSumProblem + ?Sized>(
    problem: &P,
    z: &PrimalDualPoint,
    tau_hat: f64,
    counter: &mut SfoCounter,
) -> Result<f64> {
    if !(tau_hat > 0.0 && tau_hat.is_finite()) {
        return Err(Error::invalid(format!(
            "tau_hat must be positive, got {tau_hat}"
        )));
    }
    let g = gradient_operator(problem, z, counter)?;
    let mut x = z.x.clone();
    crate::point::axpy(-tau_hat, &g.gx, &mut x);
    problem.x_set().project_in_place(&mut x);
    let mut y = z.y.clone();
    crate::point::axpy(-tau_hat, &g.gy_negated, &mut y);
    problem.y_set().project_in_place(&mut y);
    Ok((dist2(&z.x, &x).sqrt() + dist2(&z.y, &y).sqrt()) / tau_hat)
}

/// Exact duality gap of an unconstrained quadratic, from two linear solves.
#[derive(Debug, Clone)]
pub struct QuadraticGap {
    mean: MeanQuadratic,
    chol_a: Cholesky<f64, Dyn>,
    chol_c: Cholesky<f64, Dyn>,
}

impl QuadraticGap {
    pub fn new(problem: &QuadraticScscProblem) -> Result<Self> {
        if !problem.is_unconstrained() {
            return Err(Error::invalid(
                "exact duality gap needs unconstrained feasible sets",
            ));
        }
        Self::from_mean(problem.mean_blocks())
    }

    pub fn from_mean(mean: MeanQuadratic) -> Result<Self> {
        let chol_a = Cholesky::new(mean.a.clone())
            .ok_or_else(|| Error::Singular("mean A block is not positive definite".into()))?;
        let chol_c = Cholesky::new(mean.c.clone())
            .ok_or_else(|| Error::Singular("mean C block is not positive definite".into()))?;
        Ok(Self {
            mean,
            chol_a,
            chol_c,
        })
    }

    fn split(&self, z: &PrimalDualPoint) -> Result<(DVector<f64>, DVector<f64>)> {
        let (dx, dy) = (self.mean.a.nrows(), self.mean.c.nrows());
        if z.dims() != (dx, dy) {
            return Err(Error::DimensionMismatch {
                expected_x: dx,
                expected_y: dy,
                got_x: z.x.len(),
                got_y: z.y.len(),
            });
        }
        Ok((
            DVector::from_column_slice(&z.x),
            DVector::from_column_slice(&z.y),
        ))
    }

    /// `argmax_y f(x, y) = C⁻¹(Bᵀx − c)`.
    fn best_response_y(&self, x: &DVector<f64>) -> DVector<f64> {
        self.chol_c
            .solve(&(self.mean.b.transpose() * x - &self.mean.lin_y))
    }

    /// `argmin_x f(x, y) = −A⁻¹(By + a)`.
    fn best_response_x(&self, y: &DVector<f64>) -> DVector<f64> {
        -self.chol_a.solve(&(&self.mean.b * y + &self.mean.lin_x))
    }

    /// `max_y f(x̂, y)`.
    pub fn primal_value(&self, z: &PrimalDualPoint) -> Result<f64> {
        let (x, _) = self.split(z)?;
        let y = self.best_response_y(&x);
        Ok(self.mean.value(&x, &y))
    }

    /// `min_x f(x, ŷ)`.
    pub fn dual_value(&self, z: &PrimalDualPoint) -> Result<f64> {
        let (_, y) = self.split(z)?;
        let x = self.best_response_x(&y);
        Ok(self.mean.value(&x, &y))
    }

    /// `max_y f(x̂, y) − min_x f(x, ŷ)`.
    pub fn gap(&self, z: &PrimalDualPoint) -> Result<f64> {
        Ok(self.primal_value(z)? - self.dual_value(z)?)
    }

    pub fn value(&self, z: &PrimalDualPoint) -> Result<f64> {
        let (x, y) = self.split(z)?;
        Ok(self.mean.value(&x, &y))
    }

    pub fn mean_blocks(&self) -> &MeanQuadratic {
        &self.mean
    }
}

/// Exact duality gap of an unconstrained quadratic at `z`.
pub fn duality_gap_quadratic(problem: &QuadraticScscProblem, z: &PrimalDualPoint) -> Result<f64> {
    QuadraticGap::new(problem)?.gap(z)
}

/// Right-hand side of the correction-step bound for one side of the gap:
/// `(√2(1+ηL) + 2(1+ηL)² + 2) κ L ε + ε/(2η)`.
///
/// Use `kappa = κ_y` for the primal side and `κ_x` for the dual side.
pub fn correction_step_bound(l: f64, kappa: f64, eta: f64, epsilon: f64) -> f64 {
    let a = 1.0 + eta * l;
    (2f64.sqrt() * a + 2.0 * a * a + 2.0) * kappa * l * epsilon + epsilon / (2.0 * eta)
}

/// `μx‖x − x*‖² + μy‖y − y*‖²`, bounded by twice the duality gap.
pub fn weighted_distance(
    z: &PrimalDualPoint,
    z_star: &PrimalDualPoint,
    mu_x: f64,
    mu_y: f64,
) -> f64 {
    mu_x * dist2(&z.x, &z_star.x) + mu_y * dist2(&z.y, &z_star.y)
}

/// One projected gradient pair step `(P(x − η∇x f), P(y + η∇y f))` from `z`.
pub fn projected_gradient_step<P: FiniteSumProblem + ?Sized>(
    problem: &P,
    z: &PrimalDualPoint,
    eta: f64,
    counter: &mut SfoCounter,
) -> Result<PrimalDualPoint> {
    let g = gradient_operator(problem, z, counter)?;
    let mut out = z.clone();
    out.step_against(eta, &g);
    crate::oracle::project_point(problem, &mut out);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::QuadraticComponent;

    fn scalar(a: f64, b: f64, c: f64, lx: f64, ly: f64) -> QuadraticScscProblem {
        QuadraticScscProblem::new(
            1,
            1,
            vec![QuadraticComponent {
                a: vec![a],
                b: vec![b],
                c: vec![c],
                lin_x: vec![lx],
                lin_y: vec![ly],
            }],
        )
        .unwrap()
    }

    #[test]
    fn hand_gap() {
        let p = scalar(1.0, 1.0, 1.0, 0.0, 0.0);
        let gap = duality_gap_quadratic(&p, &PrimalDualPoint::new(vec![1.0], vec![0.0])).unwrap();
        assert!((gap - 1.0).abs() < 1e-14);
        let zero = duality_gap_quadratic(&p, &PrimalDualPoint::zeros(1, 1)).unwrap();
        assert!(zero.abs() < 1e-14);
    }

    #[test]
    fn pythagorean_distance() {
        let a = PrimalDualPoint::new(vec![3.0, 4.0], vec![0.0]);
        assert_eq!(
            distance_to_saddle(&a, &PrimalDualPoint::zeros(2, 1)).unwrap(),
            5.0
        );
        assert!(distance_to_saddle(&a, &PrimalDualPoint::zeros(1, 1)).is_err());
    }

    #[test]
    fn mapping_on_whole_space_is_gradient_sum() {
        let p = scalar(1.0, 1.0, 1.0, 0.0, 0.0);
        let z = PrimalDualPoint::new(vec![1.0], vec![1.0]);
        let v = gradient_mapping_norm(&p, &z, 0.1, &mut SfoCounter::new()).unwrap();
        // ∇x = 2, ∇y = 0
        assert!((v - 2.0).abs() < 1e-12);
    }

    #[test]
    fn singular_block_rejected() {
        let p = scalar(0.0, 1.0, 1.0, 0.0, 0.0);
        assert!(matches!(QuadraticGap::new(&p), Err(Error::Singular(_))));
    }
}
