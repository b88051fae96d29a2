//! Square-loss AUC maximization as an unbalanced SCSC minimax problem.
//!
//! Primal `x = [θ; u; v] ∈ R^{d+2}`, dual `y ∈ R`. With `p = n⁺/n` and
//! `s = θᵀa_i`, component `i` is
//!
//! ```text
//! f_i = (λ/2)‖x‖² − p(1−p)y²
//!     + p((s − v)² + 2(1+y)s)      if b_i = −1
//!     + (1−p)((s − u)² − 2(1+y)s)  if b_i = +1
//! ```

use nalgebra::DMatrix;

use crate::data_io::LabeledSparseRow;
use crate::error::{Error, Result};
use crate::linalg::sym_eig_range;
use crate::oracle::{FiniteSumProblem, ProblemConstants};
use crate::point::{GradientPair, PrimalDualPoint};
use crate::projections::FeasibleSet;

#[derive(Debug, Clone)]
pub struct AucProblem {
    /// Per row: 0-based feature indices with values, and whether the label is +1.
    rows: Vec<(Vec<(usize, f64)>, bool)>,
    dim: usize,
    lambda: f64,
    p_hat: f64,
    constants: ProblemConstants,
    set: FeasibleSet,
}

/// AUC problem with feature dimension taken from the largest index seen.
pub fn make_auc(rows: &[LabeledSparseRow], lambda: f64) -> Result<AucProblem> {
    make_auc_with_dim(rows, lambda, None)
}

/// AUC problem with an optional declared feature dimension (e.g. 123 for a9a).
pub fn make_auc_with_dim(
    rows: &[LabeledSparseRow],
    lambda: f64,
    dim: Option<usize>,
) -> Result<AucProblem> {
    if rows.is_empty() {
        return Err(Error::invalid("AUC needs at least one row"));
    }
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::invalid(format!(
            "lambda must be positive, got {lambda}"
        )));
    }
    let max_index = rows
        .iter()
        .flat_map(|r| r.features.iter().map(|&(j, _)| j))
        .max()
        .unwrap_or(0);
    let d = match dim {
        Some(d) if d < max_index => {
            return Err(Error::invalid(format!(
                "declared dimension {d} is below the largest feature index {max_index}"
            )))
        }
        Some(d) => d,
        None => max_index,
    };
    if d == 0 {
        return Err(Error::invalid("AUC data has no features"));
    }
    let n = rows.len();
    let positives = rows.iter().filter(|r| r.label > 0).count();
    if positives == 0 || positives == n {
        return Err(Error::invalid("AUC data must contain both labels"));
    }
    let p_hat = positives as f64 / n as f64;
    let stored = rows
        .iter()
        .map(|r| {
            (
                r.features.iter().map(|&(j, v)| (j - 1, v)).collect(),
                r.label > 0,
            )
        })
        .collect();
    let mut problem = AucProblem {
        rows: stored,
        dim: d,
        lambda,
        p_hat,
        constants: ProblemConstants {
            n,
            l: 1.0,
            mu_x: 0.0,
            mu_y: 0.0,
        },
        set: FeasibleSet::whole_space(),
    };
    let mu_y = 2.0 * p_hat * (1.0 - p_hat);
    let l = problem.exact_average_smoothness().max(lambda).max(mu_y);
    problem.constants = ProblemConstants::new(n, l, lambda, mu_y)?;
    Ok(problem)
}

impl AucProblem {
    pub fn p_hat(&self) -> f64 {
        self.p_hat
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    /// Number of features `d`; the primal dimension is `d + 2`.
    pub fn feature_dim(&self) -> usize {
        self.dim
    }

    fn u_index(&self) -> usize {
        self.dim
    }

    fn v_index(&self) -> usize {
        self.dim + 1
    }

    /// Local Jacobian of `g_i` on the indices it couples, minus the
    /// diagonal part shared by all components.
    ///
    /// Returns the coupled global indices (features, then u or v, then the
    /// dual coordinate at index `d + 2`) and the dense local block.
    fn local_jacobian(&self, i: usize) -> (Vec<usize>, DMatrix<f64>) {
        let (feats, positive) = &self.rows[i];
        let k = feats.len();
        let mut idx: Vec<usize> = feats.iter().map(|&(j, _)| j).collect();
        idx.push(if *positive {
            self.u_index()
        } else {
            self.v_index()
        });
        idx.push(self.dim + 2);
        let m = k + 2;
        let (w, sign) = if *positive {
            (1.0 - self.p_hat, -1.0)
        } else {
            (self.p_hat, 1.0)
        };
        let mut jac = DMatrix::zeros(m, m);
        // θ rows: 2w aaᵀ, −2w a (against u or v), ±2w a against y
        for (r, &(_, ar)) in feats.iter().enumerate() {
            for (c, &(_, ac)) in feats.iter().enumerate() {
                jac[(r, c)] = 2.0 * w * ar * ac;
            }
            jac[(r, k)] = -2.0 * w * ar;
            jac[(r, k + 1)] = sign * 2.0 * w * ar;
        }
        // u or v row: −2w aᵀ, +2w on itself
        for (c, &(_, ac)) in feats.iter().enumerate() {
            jac[(k, c)] = -2.0 * w * ac;
            // the −∇y row: ∓2w aᵀ
            jac[(k + 1, c)] = -sign * 2.0 * w * ac;
        }
        jac[(k, k)] = 2.0 * w;
        (idx, jac)
    }

    /// `sqrt(λmax((1/n) Σ J_iᵀJ_i))` for the constant operator Jacobians `J_i`.
    ///
    /// Every `J_i = Λ + N_i` with the shared diagonal
    /// `Λ = diag(λ, …, λ, 2p(1−p))` and `N_i` supported on a few indices, so
    /// the mean `JᵀJ` is `Λ²` plus locally supported corrections.
    pub fn exact_average_smoothness(&self) -> f64 {
        let dx = self.dim + 2;
        let total = dx + 1;
        let lam_y = 2.0 * self.p_hat * (1.0 - self.p_hat);
        let diag = |g: usize| if g < dx { self.lambda } else { lam_y };
        let mut e = DMatrix::zeros(total, total);
        let inv_n = 1.0 / self.rows.len() as f64;
        for i in 0..self.rows.len() {
            let (idx, n_loc) = self.local_jacobian(i);
            let m = idx.len();
            let mut j_loc = n_loc;
            for (a, &g) in idx.iter().enumerate() {
                j_loc[(a, a)] += diag(g);
            }
            let mut prod = j_loc.transpose() * &j_loc;
            for (a, &g) in idx.iter().enumerate() {
                prod[(a, a)] -= diag(g) * diag(g);
            }
            for r in 0..m {
                for c in 0..m {
                    e[(idx[r], idx[c])] += inv_n * prod[(r, c)];
                }
            }
        }
        for g in 0..total {
            e[(g, g)] += diag(g) * diag(g);
        }
        sym_eig_range(&e).1.max(0.0).sqrt()
    }

    fn score(&self, i: usize, x: &[f64]) -> f64 {
        self.rows[i].0.iter().map(|&(j, v)| v * x[j]).sum()
    }
}

impl FiniteSumProblem for AucProblem {
    fn constants(&self) -> ProblemConstants {
        self.constants
    }
    fn dim_x(&self) -> usize {
        self.dim + 2
    }
    fn dim_y(&self) -> usize {
        1
    }
    fn x_set(&self) -> &FeasibleSet {
        &self.set
    }
    fn y_set(&self) -> &FeasibleSet {
        &self.set
    }
    fn num_components(&self) -> usize {
        self.rows.len()
    }

    fn component_value(&self, i: usize, z: &PrimalDualPoint) -> f64 {
        let (x, y) = (&z.x, z.y[0]);
        let p = self.p_hat;
        let s = self.score(i, x);
        let reg = 0.5 * self.lambda * x.iter().map(|v| v * v).sum::<f64>() - p * (1.0 - p) * y * y;
        if self.rows[i].1 {
            let u = x[self.u_index()];
            reg + (1.0 - p) * ((s - u).powi(2) - 2.0 * (1.0 + y) * s)
        } else {
            let v = x[self.v_index()];
            reg + p * ((s - v).powi(2) + 2.0 * (1.0 + y) * s)
        }
    }

    fn add_component_operator(
        &self,
        i: usize,
        z: &PrimalDualPoint,
        scale: f64,
        out: &mut GradientPair,
    ) {
        let (x, y) = (&z.x, z.y[0]);
        let p = self.p_hat;
        let s = self.score(i, x);
        for (g, xv) in out.gx.iter_mut().zip(x) {
            *g += scale * self.lambda * xv;
        }
        let gy_base = 2.0 * p * (1.0 - p) * y;
        let (coef_theta, gy) = if self.rows[i].1 {
            let r = 1.0 - p;
            let u = x[self.u_index()];
            out.gx[self.u_index()] -= scale * 2.0 * r * (s - u);
            (r * (2.0 * (s - u) - 2.0 * (1.0 + y)), gy_base + 2.0 * r * s)
        } else {
            let v = x[self.v_index()];
            out.gx[self.v_index()] -= scale * 2.0 * p * (s - v);
            (p * (2.0 * (s - v) + 2.0 * (1.0 + y)), gy_base - 2.0 * p * s)
        };
        for &(j, a) in &self.rows[i].0 {
            out.gx[j] += scale * coef_theta * a;
        }
        out.gy_negated[0] += scale * gy;
    }
}
