//! Proximal regularization that turns a convex-concave problem into an SCSC one.
//!
//! `f_w(x, y) = f(x, y) + w_x‖x − x₀‖² − w_y‖y − y₀‖²`, applied to every
//! component. Over sets of diameters `Dx`, `Dy` the values move by at most
//! `w_x Dx² + w_y Dy²`, which is `ε/4` for both wrappers.

use crate::error::{Error, Result};
use crate::oracle::{FiniteSumProblem, ProblemConstants};
use crate::point::{dist2, GradientPair, PrimalDualPoint};
use crate::projections::FeasibleSet;

#[derive(Debug, Clone)]
pub struct RegularizedProblem<P> {
    inner: P,
    x0: Vec<f64>,
    y0: Vec<f64>,
    weight_x: f64,
    weight_y: f64,
    constants: ProblemConstants,
}

/// Adds `(ε/4Dx²)‖x − x₀‖²`; needs `0 < ε ≤ 4 L Dx²`.
///
/// The declared `mu_x` is the exact added modulus `ε/(2Dx²)`, and `L` doubles.
pub fn wrap_strongly_concave<P: FiniteSumProblem>(
    inner: P,
    epsilon: f64,
    dx: f64,
    x0: Vec<f64>,
) -> Result<RegularizedProblem<P>> {
    check_diameter("Dx", dx)?;
    let l = inner.constants().l;
    if !(epsilon > 0.0 && epsilon <= 4.0 * l * dx * dx) {
        return Err(Error::invalid(format!(
            "one-sided wrapper needs 0 < eps <= 4 L Dx^2 = {}, got {epsilon}",
            4.0 * l * dx * dx
        )));
    }
    let y0 = vec![0.0; inner.dim_y()];
    build(inner, x0, y0, epsilon / (4.0 * dx * dx), 0.0)
}

/// Adds `(ε/8Dx²)‖x − x₀‖² − (ε/8Dy²)‖y − y₀‖²`; needs `0 < ε ≤ 4 L min(Dx², Dy²)`.
///
/// Declared moduli are `ε/(4Dx²)` and `ε/(4Dy²)` on top of the inner ones.
pub fn wrap_both<P: FiniteSumProblem>(
    inner: P,
    epsilon: f64,
    dx: f64,
    dy: f64,
    x0: Vec<f64>,
    y0: Vec<f64>,
) -> Result<RegularizedProblem<P>> {
    check_diameter("Dx", dx)?;
    check_diameter("Dy", dy)?;
    let l = inner.constants().l;
    let cap = 4.0 * l * (dx * dx).min(dy * dy);
    if !(epsilon > 0.0 && epsilon <= cap) {
        return Err(Error::invalid(format!(
            "two-sided wrapper needs 0 < eps <= 4 L min(Dx^2, Dy^2) = {cap}, got {epsilon}"
        )));
    }
    build(
        inner,
        x0,
        y0,
        epsilon / (8.0 * dx * dx),
        epsilon / (8.0 * dy * dy),
    )
}

fn check_diameter(name: &str, d: f64) -> Result<()> {
    if d > 0.0 && d.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(format!(
            "{name} must be positive and finite, got {d}"
        )))
    }
}

fn build<P: FiniteSumProblem>(
    inner: P,
    x0: Vec<f64>,
    y0: Vec<f64>,
    weight_x: f64,
    weight_y: f64,
) -> Result<RegularizedProblem<P>> {
    if x0.len() != inner.dim_x() || y0.len() != inner.dim_y() {
        return Err(Error::DimensionMismatch {
            expected_x: inner.dim_x(),
            expected_y: inner.dim_y(),
            got_x: x0.len(),
            got_y: y0.len(),
        });
    }
    if x0.iter().chain(&y0).any(|v| !v.is_finite()) {
        return Err(Error::invalid("anchor points must be finite"));
    }
    let c = inner.constants();
    let l = 2.0 * c.l;
    let constants = ProblemConstants::new(
        c.n,
        l,
        (c.mu_x + 2.0 * weight_x).min(l),
        (c.mu_y + 2.0 * weight_y).min(l),
    )?;
    Ok(RegularizedProblem {
        inner,
        x0,
        y0,
        weight_x,
        weight_y,
        constants,
    })
}

impl<P> RegularizedProblem<P> {
    pub fn inner(&self) -> &P {
        &self.inner
    }

    /// Coefficients `(w_x, w_y)` of the two quadratic terms.
    pub fn weights(&self) -> (f64, f64) {
        (self.weight_x, self.weight_y)
    }

    pub fn anchors(&self) -> (&[f64], &[f64]) {
        (&self.x0, &self.y0)
    }
}

impl<P: FiniteSumProblem> FiniteSumProblem for RegularizedProblem<P> {
    fn constants(&self) -> ProblemConstants {
        self.constants
    }
    fn dim_x(&self) -> usize {
        self.inner.dim_x()
    }
    fn dim_y(&self) -> usize {
        self.inner.dim_y()
    }
    fn x_set(&self) -> &FeasibleSet {
        self.inner.x_set()
    }
    fn y_set(&self) -> &FeasibleSet {
        self.inner.y_set()
    }
    fn num_components(&self) -> usize {
        self.inner.num_components()
    }

    fn component_value(&self, i: usize, z: &PrimalDualPoint) -> f64 {
        self.inner.component_value(i, z) + self.weight_x * dist2(&z.x, &self.x0)
            - self.weight_y * dist2(&z.y, &self.y0)
    }

    fn value(&self, z: &PrimalDualPoint) -> f64 {
        self.inner.value(z) + self.weight_x * dist2(&z.x, &self.x0)
            - self.weight_y * dist2(&z.y, &self.y0)
    }

    fn add_component_operator(
        &self,
        i: usize,
        z: &PrimalDualPoint,
        scale: f64,
        out: &mut GradientPair,
    ) {
        self.inner.add_component_operator(i, z, scale, out);
        self.add_shift(z, scale, out);
    }

    fn add_full_operator(&self, z: &PrimalDualPoint, scale: f64, out: &mut GradientPair) {
        self.inner.add_full_operator(z, scale, out);
        self.add_shift(z, scale, out);
    }
}

impl<P> RegularizedProblem<P> {
    fn add_shift(&self, z: &PrimalDualPoint, scale: f64, out: &mut GradientPair) {
        let sx = scale * 2.0 * self.weight_x;
        if sx != 0.0 {
            for ((g, x), x0) in out.gx.iter_mut().zip(&z.x).zip(&self.x0) {
                *g += sx * (x - x0);
            }
        }
        let sy = scale * 2.0 * self.weight_y;
        if sy != 0.0 {
            for ((g, y), y0) in out.gy_negated.iter_mut().zip(&z.y).zip(&self.y0) {
                *g += sy * (y - y0);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::gen_wireless;

    #[test]
    fn anchors_leave_values_unchanged() {
        let p = gen_wireless(4, 1.0, 0.5, 10.0, 2).unwrap();
        let x0 = vec![0.1, 0.2, 0.3, 0.4];
        let y0 = vec![1.0; 4];
        let w = wrap_both(&p, 1e-2, 1.0, 4.0 * 2f64.sqrt(), x0.clone(), y0.clone()).unwrap();
        let z = PrimalDualPoint::new(x0, y0);
        assert_eq!(w.value(&z), p.value(&z));
    }

    #[test]
    fn constants_after_wrapping() {
        let p = gen_wireless(4, 1.0, 0.5, 10.0, 2).unwrap();
        let l = p.constants().l;
        let eps = 1e-3;
        let w = wrap_strongly_concave(&p, eps, 2.0, vec![0.0; 4]).unwrap();
        let c = w.constants();
        assert_eq!(c.l, 2.0 * l);
        assert!((c.mu_x - eps / 8.0).abs() < 1e-18);
        assert_eq!(c.mu_y, 0.0);
    }

    #[test]
    fn epsilon_range_enforced() {
        let p = gen_wireless(4, 1.0, 0.5, 10.0, 2).unwrap();
        let l = p.constants().l;
        assert!(wrap_strongly_concave(&p, 4.0 * l * 4.0 * 1.01, 2.0, vec![0.0; 4]).is_err());
        assert!(wrap_strongly_concave(&p, 0.0, 2.0, vec![0.0; 4]).is_err());
        assert!(wrap_both(&p, 1e-3, 1.0, 1.0, vec![0.0; 3], vec![0.0; 4]).is_err());
    }
}
