//! `g_i(z) = (√n L/2)(e_iᵀz)²` over `z = (x, y)` with `n` coordinates in total.
//!
//! Component `i` only sees coordinate `i`, and the family is exactly
//! `L`-average smooth while each member is `√n L`-smooth. It exists to
//! exercise the smoothness estimator.

use crate::error::{Error, Result};
use crate::oracle::{FiniteSumProblem, ProblemConstants};
use crate::point::{GradientPair, PrimalDualPoint};
use crate::projections::FeasibleSet;

#[derive(Debug, Clone)]
pub struct CoordinateSquares {
    n: usize,
    l: f64,
    dim_x: usize,
    set: FeasibleSet,
}

impl CoordinateSquares {
    /// `n ≥ 2` coordinates, split as `x = z[..⌈n/2⌉]`, `y = z[⌈n/2⌉..]`.
    pub fn new(n: usize, l: f64) -> Result<Self> {
        if n < 2 {
            return Err(Error::invalid("coordinate squares need n >= 2"));
        }
        if !(l > 0.0 && l.is_finite()) {
            return Err(Error::invalid("L must be positive"));
        }
        Ok(Self {
            n,
            l,
            dim_x: n.div_ceil(2),
            set: FeasibleSet::whole_space(),
        })
    }

    fn coef(&self) -> f64 {
        (self.n as f64).sqrt() * self.l / 2.0
    }

    fn coordinate(&self, i: usize, z: &PrimalDualPoint) -> f64 {
        if i < self.dim_x {
            z.x[i]
        } else {
            z.y[i - self.dim_x]
        }
    }
}

impl FiniteSumProblem for CoordinateSquares {
    fn constants(&self) -> ProblemConstants {
        ProblemConstants {
            n: self.n,
            l: self.l,
            mu_x: 0.0,
            mu_y: 0.0,
        }
    }
    fn dim_x(&self) -> usize {
        self.dim_x
    }
    fn dim_y(&self) -> usize {
        self.n - self.dim_x
    }
    fn x_set(&self) -> &FeasibleSet {
        &self.set
    }
    fn y_set(&self) -> &FeasibleSet {
        &self.set
    }

    fn component_value(&self, i: usize, z: &PrimalDualPoint) -> f64 {
        let v = self.coordinate(i, z);
        self.coef() * v * v
    }

    fn add_component_operator(
        &self,
        i: usize,
        z: &PrimalDualPoint,
        scale: f64,
        out: &mut GradientPair,
    ) {
        let d = 2.0 * self.coef() * self.coordinate(i, z);
        if i < self.dim_x {
            out.gx[i] += scale * d;
        } else {
            out.gy_negated[i - self.dim_x] -= scale * d;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::{stochastic_gradient_operator, SfoCounter};

    #[test]
    fn gradient_at_first_unit_vector() {
        let p = CoordinateSquares::new(4, 1.0).unwrap();
        let z = PrimalDualPoint::new(vec![1.0, 0.0], vec![0.0, 0.0]);
        let g = stochastic_gradient_operator(&p, 0, &z, &mut SfoCounter::new()).unwrap();
        assert_eq!(g.gx, vec![2.0, 0.0]);
        assert_eq!(g.gy_negated, vec![0.0, 0.0]);
    }
}
