//! Primal-dual iterates and gradient pairs.

/// An iterate `z = (x, y)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PrimalDualPoint {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

impl PrimalDualPoint {
    pub fn new(x: Vec<f64>, y: Vec<f64>) -> Self {
        Self { x, y }
    }

    pub fn zeros(dim_x: usize, dim_y: usize) -> Self {
        Self {
            x: vec![0.0; dim_x],
            y: vec![0.0; dim_y],
        }
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.x.len(), self.y.len())
    }

    pub fn is_finite(&self) -> bool {
        self.x.iter().chain(&self.y).all(|v| v.is_finite())
    }

    /// Squared Euclidean distance to `other` over both blocks.
    pub fn dist2(&self, other: &PrimalDualPoint) -> f64 {
        dist2(&self.x, &other.x) + dist2(&self.y, &other.y)
    }

    pub fn norm2(&self) -> f64 {
        dot(&self.x, &self.x) + dot(&self.y, &self.y)
    }

    /// `self = a * u + b * v`, blockwise.
    pub fn assign_combination(&mut self, a: f64, u: &PrimalDualPoint, b: f64, v: &PrimalDualPoint) {
        combine(&mut self.x, a, &u.x, b, &v.x);
        combine(&mut self.y, a, &u.y, b, &v.y);
    }

    /// `self -= step * g`, where `g` stores `(∇x f, −∇y f)`.
    pub fn step_against(&mut self, step: f64, g: &GradientPair) {
        axpy(-step, &g.gx, &mut self.x);
        axpy(-step, &g.gy_negated, &mut self.y);
    }

    /// Swap the primal and dual blocks.
    pub fn transposed(&self) -> PrimalDualPoint {
        PrimalDualPoint {
            x: self.y.clone(),
            y: self.x.clone(),
        }
    }
}

/// The operator value `(∇x f, −∇y f)` at a point.
#[derive(Debug, Clone, PartialEq)]
pub struct GradientPair {
    pub gx: Vec<f64>,
    pub gy_negated: Vec<f64>,
}

impl GradientPair {
    pub fn zeros(dim_x: usize, dim_y: usize) -> Self {
        Self {
            gx: vec![0.0; dim_x],
            gy_negated: vec![0.0; dim_y],
        }
    }

    pub fn fill_zero(&mut self) {
        self.gx.iter_mut().for_each(|v| *v = 0.0);
        self.gy_negated.iter_mut().for_each(|v| *v = 0.0);
    }

    pub fn copy_from(&mut self, other: &GradientPair) {
        self.gx.copy_from_slice(&other.gx);
        self.gy_negated.copy_from_slice(&other.gy_negated);
    }

    /// `self += a * other`.
    pub fn add_scaled(&mut self, a: f64, other: &GradientPair) {
        axpy(a, &other.gx, &mut self.gx);
        axpy(a, &other.gy_negated, &mut self.gy_negated);
    }

    pub fn is_finite(&self) -> bool {
        self.gx
            .iter()
            .chain(&self.gy_negated)
            .all(|v| v.is_finite())
    }

    pub fn norm(&self) -> f64 {
        (dot(&self.gx, &self.gx) + dot(&self.gy_negated, &self.gy_negated)).sqrt()
    }

    pub fn dist2(&self, other: &GradientPair) -> f64 {
        dist2(&self.gx, &other.gx) + dist2(&self.gy_negated, &other.gy_negated)
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(u, v)| u * v).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn dist2(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(u, v)| (u - v) * (u - v)).sum()
}

/// `y += a * x`
pub fn axpy(a: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += a * xi;
    }
}

/// `out = a * u + b * v`
pub fn combine(out: &mut [f64], a: f64, u: &[f64], b: f64, v: &[f64]) {
    for ((o, ui), vi) in out.iter_mut().zip(u).zip(v) {
        *o = a * ui + b * vi;
    }
}
