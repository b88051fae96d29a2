//! Random strongly-convex-strongly-concave quadratic test family.
//!
//! Component `i` is
//! `f_i(x, y) = ½xᵀA_i x + xᵀB_i y − ½yᵀC_i y + a_iᵀx − c_iᵀy`,
//! so its operator is affine: `g_i(z) = M_i z + m_i` with
//! `M_i = [A_i, B_i; −B_iᵀ, C_i]` and `m_i = (a_i, c_i)`.
//! The average-smoothness constant is therefore exactly
//! `sqrt(λmax((1/n) Σ M_iᵀ M_i))`, which is what gets declared.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::linalg::{from_row_major, sym_eig_range, to_row_major};
use crate::oracle::{seeded_rng, FiniteSumProblem, ProblemConstants};
use crate::point::{GradientPair, PrimalDualPoint};
use crate::projections::FeasibleSet;

/// Largest dimension the dense family is meant for.
pub const MAX_QUADRATIC_DIM: usize = 512;

/// One component, matrices stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticComponent {
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub c: Vec<f64>,
    pub lin_x: Vec<f64>,
    pub lin_y: Vec<f64>,
}

/// Mean blocks `(Ā, B̄, C̄, ā, c̄)` of a quadratic problem.
#[derive(Debug, Clone)]
pub struct MeanQuadratic {
    pub a: DMatrix<f64>,
    pub b: DMatrix<f64>,
    pub c: DMatrix<f64>,
    pub lin_x: DVector<f64>,
    pub lin_y: DVector<f64>,
}

impl MeanQuadratic {
    pub fn value(&self, x: &DVector<f64>, y: &DVector<f64>) -> f64 {
        0.5 * x.dot(&(&self.a * x)) + x.dot(&(&self.b * y)) - 0.5 * y.dot(&(&self.c * y))
            + self.lin_x.dot(x)
            - self.lin_y.dot(y)
    }
}

#[derive(Debug, Clone)]
pub struct QuadraticScscProblem {
    dim_x: usize,
    dim_y: usize,
    components: Vec<QuadraticComponent>,
    constants: ProblemConstants,
    x_set: FeasibleSet,
    y_set: FeasibleSet,
}

impl QuadraticScscProblem {
    /// Build from explicit components on the whole space. The declared
    /// constants are computed exactly: `L` from the operator Jacobians,
    /// `mu_x`/`mu_y` from the extreme eigenvalues of the mean `A` and `C`.
    pub fn new(dim_x: usize, dim_y: usize, components: Vec<QuadraticComponent>) -> Result<Self> {
        if dim_x == 0 || dim_y == 0 {
            return Err(Error::invalid("quadratic dimensions must be at least 1"));
        }
        if components.is_empty() {
            return Err(Error::invalid("quadratic needs at least one component"));
        }
        for (i, comp) in components.iter().enumerate() {
            let ok = comp.a.len() == dim_x * dim_x
                && comp.b.len() == dim_x * dim_y
                && comp.c.len() == dim_y * dim_y
                && comp.lin_x.len() == dim_x
                && comp.lin_y.len() == dim_y;
            if !ok {
                return Err(Error::invalid(format!(
                    "component {i} has inconsistent block sizes"
                )));
            }
            let a = from_row_major(dim_x, dim_x, &comp.a);
            let c = from_row_major(dim_y, dim_y, &comp.c);
            if (&a - a.transpose()).amax() > 1e-12 || (&c - c.transpose()).amax() > 1e-12 {
                return Err(Error::invalid(format!(
                    "component {i}: A_i and C_i must be symmetric"
                )));
            }
        }
        let mut problem = Self {
            dim_x,
            dim_y,
            components,
            constants: ProblemConstants::new(1, 1.0, 0.0, 0.0)?,
            x_set: FeasibleSet::whole_space(),
            y_set: FeasibleSet::whole_space(),
        };
        let mean = problem.mean_blocks();
        let mu_x = sym_eig_range(&mean.a).0.max(0.0);
        let mu_y = sym_eig_range(&mean.c).0.max(0.0);
        let l = problem.exact_average_smoothness();
        problem.constants =
            ProblemConstants::new(problem.components.len(), l, mu_x.min(l), mu_y.min(l))?;
        Ok(problem)
    }

    /// Replace the feasible sets (whole space by default).
    pub fn with_sets(mut self, x_set: FeasibleSet, y_set: FeasibleSet) -> Result<Self> {
        for (set, dim) in [(&x_set, self.dim_x), (&y_set, self.dim_y)] {
            if set.fixed_dim().is_some_and(|d| d != dim) {
                return Err(Error::invalid(
                    "feasible set dimension does not match the problem",
                ));
            }
        }
        self.x_set = x_set;
        self.y_set = y_set;
        Ok(self)
    }

    /// Drop all linear terms, which moves the unconstrained saddle to the origin.
    pub fn without_linear_terms(mut self) -> Self {
        for comp in &mut self.components {
            comp.lin_x.iter_mut().for_each(|v| *v = 0.0);
            comp.lin_y.iter_mut().for_each(|v| *v = 0.0);
        }
        self
    }

    pub fn components(&self) -> &[QuadraticComponent] {
        &self.components
    }

    pub fn is_unconstrained(&self) -> bool {
        self.x_set.is_whole_space() && self.y_set.is_whole_space()
    }

    pub fn mean_blocks(&self) -> MeanQuadratic {
        let (dx, dy) = (self.dim_x, self.dim_y);
        let inv_n = 1.0 / self.components.len() as f64;
        let mut mean = MeanQuadratic {
            a: DMatrix::zeros(dx, dx),
            b: DMatrix::zeros(dx, dy),
            c: DMatrix::zeros(dy, dy),
            lin_x: DVector::zeros(dx),
            lin_y: DVector::zeros(dy),
        };
        for comp in &self.components {
            mean.a += from_row_major(dx, dx, &comp.a) * inv_n;
            mean.b += from_row_major(dx, dy, &comp.b) * inv_n;
            mean.c += from_row_major(dy, dy, &comp.c) * inv_n;
            mean.lin_x += DVector::from_column_slice(&comp.lin_x) * inv_n;
            mean.lin_y += DVector::from_column_slice(&comp.lin_y) * inv_n;
        }
        mean
    }

    /// `sqrt(λmax((1/n) Σ M_iᵀ M_i))`.
    pub fn exact_average_smoothness(&self) -> f64 {
        average_smoothness_of(self.dim_x, self.dim_y, &self.components)
    }
}

fn jacobian(dx: usize, dy: usize, comp: &QuadraticComponent) -> DMatrix<f64> {
    let d = dx + dy;
    let mut m = DMatrix::zeros(d, d);
    for r in 0..dx {
        for c in 0..dx {
            m[(r, c)] = comp.a[r * dx + c];
        }
        for c in 0..dy {
            m[(r, dx + c)] = comp.b[r * dy + c];
            m[(dx + c, r)] = -comp.b[r * dy + c];
        }
    }
    for r in 0..dy {
        for c in 0..dy {
            m[(dx + r, dx + c)] = comp.c[r * dy + c];
        }
    }
    m
}

fn average_smoothness_of(dx: usize, dy: usize, comps: &[QuadraticComponent]) -> f64 {
    let d = dx + dy;
    let mut e = DMatrix::zeros(d, d);
    for comp in comps {
        let m = jacobian(dx, dy, comp);
        e += m.transpose() * &m;
    }
    e /= comps.len() as f64;
    sym_eig_range(&e).1.max(0.0).sqrt()
}

impl FiniteSumProblem for QuadraticScscProblem {
    fn constants(&self) -> ProblemConstants {
        self.constants
    }
    fn dim_x(&self) -> usize {
        self.dim_x
    }
    fn dim_y(&self) -> usize {
        self.dim_y
    }
    fn x_set(&self) -> &FeasibleSet {
        &self.x_set
    }
    fn y_set(&self) -> &FeasibleSet {
        &self.y_set
    }
    fn num_components(&self) -> usize {
        self.components.len()
    }

    fn component_value(&self, i: usize, z: &PrimalDualPoint) -> f64 {
        let comp = &self.components[i];
        let (dx, dy) = (self.dim_x, self.dim_y);
        let (x, y) = (&z.x, &z.y);
        let mut v = 0.0;
        for r in 0..dx {
            let ax: f64 = (0..dx).map(|c| comp.a[r * dx + c] * x[c]).sum();
            let by: f64 = (0..dy).map(|c| comp.b[r * dy + c] * y[c]).sum();
            v += x[r] * (0.5 * ax + by + comp.lin_x[r]);
        }
        for r in 0..dy {
            let cy: f64 = (0..dy).map(|c| comp.c[r * dy + c] * y[c]).sum();
            v -= y[r] * (0.5 * cy + comp.lin_y[r]);
        }
        v
    }

    fn add_component_operator(
        &self,
        i: usize,
        z: &PrimalDualPoint,
        scale: f64,
        out: &mut GradientPair,
    ) {
        let comp = &self.components[i];
        let (dx, dy) = (self.dim_x, self.dim_y);
        let (x, y) = (&z.x, &z.y);
        // gx = A x + B y + a
        for r in 0..dx {
            let mut acc = comp.lin_x[r];
            for c in 0..dx {
                acc += comp.a[r * dx + c] * x[c];
            }
            for c in 0..dy {
                acc += comp.b[r * dy + c] * y[c];
            }
            out.gx[r] += scale * acc;
        }
        // −∇y f_i = −Bᵀx + C y + c
        for r in 0..dy {
            let mut acc = comp.lin_y[r];
            for c in 0..dy {
                acc += comp.c[r * dy + c] * y[c];
            }
            for c in 0..dx {
                acc -= comp.b[c * dy + r] * x[c];
            }
            out.gy_negated[r] += scale * acc;
        }
    }
}

/// Random SCSC quadratic with declared constants `(target_l, mu_x, mu_y)`.
///
/// Components are `A_i = mu_x I + s(P_i − λmin(P̄) I)`, `C_i` alike,
/// `B_i = s N_i`, with `P_i, Q_i` random PSD and `N_i` Gaussian; the mean
/// blocks then have minimum eigenvalue exactly `mu_x` and `mu_y`. The scale
/// `s` is bisected so the exact average-smoothness constant hits `target_l`.
/// Linear terms are standard normal.
pub fn make_quadratic_scsc(
    dims: (usize, usize),
    n: usize,
    mu_x: f64,
    mu_y: f64,
    target_l: f64,
    seed: u64,
) -> Result<QuadraticScscProblem> {
    let (dx, dy) = dims;
    if dx == 0 || dy == 0 || dx > MAX_QUADRATIC_DIM || dy > MAX_QUADRATIC_DIM {
        return Err(Error::invalid(format!(
            "quadratic dims must be in 1..={MAX_QUADRATIC_DIM}, got ({dx}, {dy})"
        )));
    }
    if n == 0 {
        return Err(Error::invalid("n must be at least 1"));
    }
    if !(mu_x >= 0.0 && mu_y >= 0.0) || !(target_l > mu_x.max(mu_y)) || !target_l.is_finite() {
        return Err(Error::invalid(format!(
            "need target_L > max(mu_x, mu_y) >= 0, got L = {target_l}, mu_x = {mu_x}, mu_y = {mu_y}"
        )));
    }

    let mut rng = seeded_rng(seed, 1);
    let mut gauss = |rows: usize, cols: usize| -> DMatrix<f64> {
        DMatrix::from_fn(rows, cols, |_, _| rng.sample::<f64, _>(StandardNormal))
    };
    let mut p = Vec::with_capacity(n);
    let mut q = Vec::with_capacity(n);
    let mut bn = Vec::with_capacity(n);
    let mut lin = Vec::with_capacity(n);
    for _ in 0..n {
        let g = gauss(dx, dx);
        p.push(&g * g.transpose() / dx as f64);
        let h = gauss(dy, dy);
        q.push(&h * h.transpose() / dy as f64);
        bn.push(gauss(dx, dy) / (dx.max(dy) as f64).sqrt());
        lin.push((gauss(dx, 1), gauss(dy, 1)));
    }
    let p_min = sym_eig_range(&(p.iter().sum::<DMatrix<f64>>() / n as f64)).0;
    let q_min = sym_eig_range(&(q.iter().sum::<DMatrix<f64>>() / n as f64)).0;

    let build = |s: f64| -> Vec<QuadraticComponent> {
        (0..n)
            .map(|i| {
                let a = DMatrix::identity(dx, dx) * mu_x
                    + (&p[i] - DMatrix::identity(dx, dx) * p_min) * s;
                let c = DMatrix::identity(dy, dy) * mu_y
                    + (&q[i] - DMatrix::identity(dy, dy) * q_min) * s;
                let b = &bn[i] * s;
                QuadraticComponent {
                    a: to_row_major(&((&a + a.transpose()) * 0.5)),
                    b: to_row_major(&b),
                    c: to_row_major(&((&c + c.transpose()) * 0.5)),
                    lin_x: lin[i].0.iter().copied().collect(),
                    lin_y: lin[i].1.iter().copied().collect(),
                }
            })
            .collect()
    };
    let l_of = |s: f64| average_smoothness_of(dx, dy, &build(s));

    let mut hi = 1.0;
    let mut grow = 0;
    while l_of(hi) < target_l {
        hi *= 2.0;
        grow += 1;
        if grow > 200 {
            return Err(Error::invalid(
                "could not reach target_L; random parts degenerate",
            ));
        }
    }
    let mut lo = 0.0;
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if l_of(mid) < target_l {
            lo = mid;
        } else {
            hi = mid;
        }
    }

    let mut problem = QuadraticScscProblem::new(dx, dy, build(hi))?;
    // the construction pins the mean eigenvalues; keep the requested values
    // rather than their rounded eigensolver echoes
    problem.constants.mu_x = mu_x;
    problem.constants.mu_y = mu_y;
    Ok(problem)
}

/// Saddle of an unconstrained quadratic: solves
/// `[Ā, B̄; −B̄ᵀ, C̄] z = −(ā, c̄)`.
pub fn quadratic_saddle_oracle(problem: &QuadraticScscProblem) -> Result<PrimalDualPoint> {
    if !problem.is_unconstrained() {
        return Err(Error::invalid(
            "saddle oracle needs unconstrained feasible sets",
        ));
    }
    let (dx, dy) = (problem.dim_x, problem.dim_y);
    let mean = problem.mean_blocks();
    let d = dx + dy;
    let mut m = DMatrix::zeros(d, d);
    m.view_mut((0, 0), (dx, dx)).copy_from(&mean.a);
    m.view_mut((0, dx), (dx, dy)).copy_from(&mean.b);
    m.view_mut((dx, 0), (dy, dx))
        .copy_from(&(-mean.b.transpose()));
    m.view_mut((dx, dx), (dy, dy)).copy_from(&mean.c);
    let mut rhs = DVector::zeros(d);
    rhs.rows_mut(0, dx).copy_from(&(-&mean.lin_x));
    rhs.rows_mut(dx, dy).copy_from(&(-&mean.lin_y));

    let sol = m
        .clone()
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::Singular("saddle KKT system".into()))?;
    let residual = (&m * &sol - &rhs).amax();
    let scale = 1.0 + rhs.amax() + m.amax() * sol.amax();
    if !residual.is_finite() || residual > 1e-9 * scale {
        return Err(Error::Singular(format!(
            "saddle KKT system, residual {residual:e}"
        )));
    }
    Ok(PrimalDualPoint::new(
        sol.rows(0, dx).iter().copied().collect(),
        sol.rows(dx, dy).iter().copied().collect(),
    ))
}
