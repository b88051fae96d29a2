//! Finite-sum problem interface, SFO accounting and the gradient operators.
//!
//! A problem is `f(x, y) = (1/n) Σ f_i(x, y)`. Every solver talks to it only
//! through the operator `g_i(z) = (∇x f_i(z), −∇y f_i(z))` and its mean `g(z)`,
//! and every such query is charged to an [`SfoCounter`]: one component
//! gradient costs 1 call, the full operator costs `n`.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::point::{GradientPair, PrimalDualPoint};
use crate::projections::FeasibleSet;

/// Declared smoothness and convexity constants of a finite-sum problem.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProblemConstants {
    pub n: usize,
    /// Average-smoothness constant.
    pub l: f64,
    pub mu_x: f64,
    pub mu_y: f64,
}

impl ProblemConstants {
    pub fn new(n: usize, l: f64, mu_x: f64, mu_y: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::invalid("component count n must be at least 1"));
        }
        if !(l > 0.0 && l.is_finite()) {
            return Err(Error::invalid(format!(
                "L must be positive and finite, got {l}"
            )));
        }
        for (name, mu) in [("mu_x", mu_x), ("mu_y", mu_y)] {
            if !(mu >= 0.0 && mu.is_finite()) {
                return Err(Error::invalid(format!(
                    "{name} must be nonnegative, got {mu}"
                )));
            }
            if mu > l * (1.0 + 1e-12) {
                return Err(Error::invalid(format!("{name} = {mu} exceeds L = {l}")));
            }
        }
        Ok(Self { n, l, mu_x, mu_y })
    }

    /// `L / mu_x`, infinite when `mu_x = 0`.
    pub fn kappa_x(&self) -> f64 {
        if self.mu_x > 0.0 {
            self.l / self.mu_x
        } else {
            f64::INFINITY
        }
    }

    pub fn kappa_y(&self) -> f64 {
        if self.mu_y > 0.0 {
            self.l / self.mu_y
        } else {
            f64::INFINITY
        }
    }

    pub fn is_scsc(&self) -> bool {
        self.mu_x > 0.0 && self.mu_y > 0.0
    }

    pub fn transposed(&self) -> Self {
        Self {
            mu_x: self.mu_y,
            mu_y: self.mu_x,
            ..*self
        }
    }
}

/// `min_{x∈X} max_{y∈Y} (1/n) Σ f_i(x, y)`.
///
/// Implementations are immutable after construction and may be shared
/// between concurrent runs.
pub trait FiniteSumProblem: Send + Sync {
    fn constants(&self) -> ProblemConstants;
    fn dim_x(&self) -> usize;
    fn dim_y(&self) -> usize;
    fn x_set(&self) -> &FeasibleSet;
    fn y_set(&self) -> &FeasibleSet;

    fn num_components(&self) -> usize {
        self.constants().n
    }

    /// `f_i(z)` for a 0-based component index.
    fn component_value(&self, i: usize, z: &PrimalDualPoint) -> f64;

    /// `out += scale * g_i(z)`. Sparse components only touch their support.
    fn add_component_operator(
        &self,
        i: usize,
        z: &PrimalDualPoint,
        scale: f64,
        out: &mut GradientPair,
    );

    /// `out += scale * g(z)`.
    fn add_full_operator(&self, z: &PrimalDualPoint, scale: f64, out: &mut GradientPair) {
        let n = self.num_components();
        let w = scale / n as f64;
        for i in 0..n {
            self.add_component_operator(i, z, w, out);
        }
    }

    fn value(&self, z: &PrimalDualPoint) -> f64 {
        let n = self.num_components();
        (0..n).map(|i| self.component_value(i, z)).sum::<f64>() / n as f64
    }
}

macro_rules! forward_problem {
    ($($ty:ty),*) => {$(
        impl<P: FiniteSumProblem + ?Sized> FiniteSumProblem for $ty {
            fn constants(&self) -> ProblemConstants {
                (**self).constants()
            }
            fn dim_x(&self) -> usize {
                (**self).dim_x()
            }
            fn dim_y(&self) -> usize {
                (**self).dim_y()
            }
            fn x_set(&self) -> &FeasibleSet {
                (**self).x_set()
            }
            fn y_set(&self) -> &FeasibleSet {
                (**self).y_set()
            }
            fn num_components(&self) -> usize {
                (**self).num_components()
            }
            fn component_value(&self, i: usize, z: &PrimalDualPoint) -> f64 {
                (**self).component_value(i, z)
            }
            fn add_component_operator(&self, i: usize, z: &PrimalDualPoint, scale: f64, out: &mut GradientPair) {
                (**self).add_component_operator(i, z, scale, out)
            }
            fn add_full_operator(&self, z: &PrimalDualPoint, scale: f64, out: &mut GradientPair) {
                (**self).add_full_operator(z, scale, out)
            }
            fn value(&self, z: &PrimalDualPoint) -> f64 {
                (**self).value(z)
            }
        }
    )*};
}

forward_problem!(&P, Box<P>, std::sync::Arc<P>);

/// Counts stochastic first-order oracle calls for one run.
///
/// When query logging is enabled every charged component index is recorded,
/// which the zero-chain audit consumes.
#[derive(Debug, Clone, Default)]
pub struct SfoCounter {
    calls: u64,
    log: Option<Vec<usize>>,
}

impl SfoCounter {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_query_log() -> Self {
        Self {
            calls: 0,
            log: Some(Vec::new()),
        }
    }

    pub fn calls(&self) -> u64 {
        self.calls
    }

    pub fn logs_queries(&self) -> bool {
        self.log.is_some()
    }

    /// Take the component indices queried since the last drain.
    pub fn drain_queries(&mut self) -> Vec<usize> {
        self.log.as_mut().map(std::mem::take).unwrap_or_default()
    }

    fn charge_component(&mut self, i: usize) {
        self.calls += 1;
        if let Some(log) = self.log.as_mut() {
            log.push(i);
        }
    }

    fn charge_full(&mut self, n: usize) {
        self.calls += n as u64;
        if let Some(log) = self.log.as_mut() {
            log.extend(0..n);
        }
    }
}

pub fn check_dims<P: FiniteSumProblem + ?Sized>(problem: &P, z: &PrimalDualPoint) -> Result<()> {
    let (dx, dy) = z.dims();
    if dx != problem.dim_x() || dy != problem.dim_y() {
        return Err(Error::DimensionMismatch {
            expected_x: problem.dim_x(),
            expected_y: problem.dim_y(),
            got_x: dx,
            got_y: dy,
        });
    }
    Ok(())
}

/// `g(z) = (∇x f(z), −∇y f(z))`, charging `n` SFO calls.
pub fn gradient_operator<P: FiniteSumProblem + ?Sized>(
    problem: &P,
    z: &PrimalDualPoint,
    counter: &mut SfoCounter,
) -> Result<GradientPair> {
    let mut out = GradientPair::zeros(problem.dim_x(), problem.dim_y());
    gradient_operator_into(problem, z, counter, &mut out)?;
    Ok(out)
}

/// Allocation-free form of [`gradient_operator`]; overwrites `out`.
pub fn gradient_operator_into<P: FiniteSumProblem + ?Sized>(
    problem: &P,
    z: &PrimalDualPoint,
    counter: &mut SfoCounter,
    out: &mut GradientPair,
) -> Result<()> {
    check_dims(problem, z)?;
    out.fill_zero();
    problem.add_full_operator(z, 1.0, out);
    counter.charge_full(problem.num_components());
    if !out.is_finite() {
        return Err(Error::NonFinite {
            context: "full gradient operator".into(),
        });
    }
    Ok(())
}

/// `g_i(z)` for a 0-based index `i`, charging one SFO call.
pub fn stochastic_gradient_operator<P: FiniteSumProblem + ?Sized>(
    problem: &P,
    i: usize,
    z: &PrimalDualPoint,
    counter: &mut SfoCounter,
) -> Result<GradientPair> {
    let mut out = GradientPair::zeros(problem.dim_x(), problem.dim_y());
    add_stochastic_operator(problem, i, z, 1.0, counter, &mut out)?;
    Ok(out)
}

/// `out += scale * g_i(z)`, charging one SFO call.
pub fn add_stochastic_operator<P: FiniteSumProblem + ?Sized>(
    problem: &P,
    i: usize,
    z: &PrimalDualPoint,
    scale: f64,
    counter: &mut SfoCounter,
    out: &mut GradientPair,
) -> Result<()> {
    let n = problem.num_components();
    if i >= n {
        return Err(Error::IndexOutOfRange { index: i, n });
    }
    check_dims(problem, z)?;
    problem.add_component_operator(i, z, scale, out);
    counter.charge_component(i);
    if !out.is_finite() {
        return Err(Error::NonFinite {
            context: format!("component gradient {i}"),
        });
    }
    Ok(())
}

/// Project both blocks of `z` onto the problem's feasible sets.
pub fn project_point<P: FiniteSumProblem + ?Sized>(problem: &P, z: &mut PrimalDualPoint) {
    problem.x_set().project_in_place(&mut z.x);
    problem.y_set().project_in_place(&mut z.y);
}

/// Deterministic generator for `(seed, stream)`; distinct streams are independent.
pub fn seeded_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn sample_in_ball<R: Rng>(rng: &mut R, dim: usize, radius: f64) -> Vec<f64> {
    let dir: Vec<f64> = (0..dim).map(|_| rng.sample(StandardNormal)).collect();
    let nrm = crate::point::norm(&dir).max(f64::MIN_POSITIVE);
    let r = radius * rng.gen::<f64>().powf(1.0 / dim as f64);
    dir.into_iter().map(|v| v * r / nrm).collect()
}

/// Draw a feasible point: uniform in the centered ball of `radius`, then projected.
pub fn sample_feasible_point<P: FiniteSumProblem + ?Sized, R: Rng>(
    problem: &P,
    rng: &mut R,
    radius: f64,
) -> PrimalDualPoint {
    let dx = problem.dim_x();
    let dy = problem.dim_y();
    let v = sample_in_ball(rng, dx + dy, radius);
    let mut z = PrimalDualPoint::new(v[..dx].to_vec(), v[dx..].to_vec());
    project_point(problem, &mut z);
    z
}

/// Monte-Carlo lower estimate of the average-smoothness constant:
/// the largest sampled `sqrt((1/n) Σ ‖g_i(z) − g_i(z′)‖² / ‖z − z′‖²)`.
///
/// Points are drawn uniformly in the centered ball of `radius` and projected
/// onto the feasible sets. Coinciding pairs are redrawn.
pub fn estimate_average_smoothness<P: FiniteSumProblem + ?Sized>(
    problem: &P,
    num_pairs: usize,
    radius: f64,
    seed: u64,
) -> Result<f64> {
    if num_pairs == 0 {
        return Err(Error::invalid("num_pairs must be at least 1"));
    }
    if !(radius > 0.0) {
        return Err(Error::invalid("radius must be positive"));
    }
    let n = problem.num_components();
    let mut rng = seeded_rng(seed, 0x5a5a);
    let mut best: f64 = 0.0;
    let mut ga = GradientPair::zeros(problem.dim_x(), problem.dim_y());
    let mut gb = ga.clone();
    for _ in 0..num_pairs {
        let mut pair = None;
        for _ in 0..100 {
            let a = sample_feasible_point(problem, &mut rng, radius);
            let b = sample_feasible_point(problem, &mut rng, radius);
            let d2 = a.dist2(&b);
            if d2 > 0.0 {
                pair = Some((a, b, d2));
                break;
            }
        }
        let Some((a, b, d2)) = pair else { continue };
        let mut acc = 0.0;
        for i in 0..n {
            ga.fill_zero();
            gb.fill_zero();
            problem.add_component_operator(i, &a, 1.0, &mut ga);
            problem.add_component_operator(i, &b, 1.0, &mut gb);
            acc += ga.dist2(&gb);
        }
        let ratio = (acc / n as f64 / d2).sqrt();
        if !ratio.is_finite() {
            return Err(Error::NonFinite {
                context: "average-smoothness ratio".into(),
            });
        }
        best = best.max(ratio);
    }
    Ok(best)
}

/// Wraps a problem with its primal and dual roles exchanged:
/// `f'(x', y') = −f(y', x')`, so `x'` lives in the old dual set.
///
/// The saddle of `f'` is `(y*, x*)`, and `g'(x', y') = swap(g(y', x'))`.
pub struct Transposed<'a, P: ?Sized> {
    inner: &'a P,
}

impl<'a, P: FiniteSumProblem + ?Sized> Transposed<'a, P> {
    pub fn new(inner: &'a P) -> Self {
        Self { inner }
    }
}

impl<P: FiniteSumProblem + ?Sized> FiniteSumProblem for Transposed<'_, P> {
    fn constants(&self) -> ProblemConstants {
        self.inner.constants().transposed()
    }
    fn dim_x(&self) -> usize {
        self.inner.dim_y()
    }
    fn dim_y(&self) -> usize {
        self.inner.dim_x()
    }
    fn x_set(&self) -> &FeasibleSet {
        self.inner.y_set()
    }
    fn y_set(&self) -> &FeasibleSet {
        self.inner.x_set()
    }
    fn num_components(&self) -> usize {
        self.inner.num_components()
    }
    fn component_value(&self, i: usize, z: &PrimalDualPoint) -> f64 {
        -self.inner.component_value(i, &z.transposed())
    }
    fn add_component_operator(
        &self,
        i: usize,
        z: &PrimalDualPoint,
        scale: f64,
        out: &mut GradientPair,
    ) {
        let zt = z.transposed();
        let mut swapped = GradientPair {
            gx: std::mem::take(&mut out.gy_negated),
            gy_negated: std::mem::take(&mut out.gx),
        };
        self.inner
            .add_component_operator(i, &zt, scale, &mut swapped);
        out.gx = swapped.gy_negated;
        out.gy_negated = swapped.gx;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// f(x, y) = ½x² + xy − ½y², a single component.
    struct Toy;

    impl FiniteSumProblem for Toy {
        fn constants(&self) -> ProblemConstants {
            ProblemConstants::new(1, 2f64.sqrt(), 1.0, 1.0).unwrap()
        }
        fn dim_x(&self) -> usize {
            1
        }
        fn dim_y(&self) -> usize {
            1
        }
        fn x_set(&self) -> &FeasibleSet {
            &WHOLE
        }
        fn y_set(&self) -> &FeasibleSet {
            &WHOLE
        }
        fn component_value(&self, _i: usize, z: &PrimalDualPoint) -> f64 {
            let (x, y) = (z.x[0], z.y[0]);
            0.5 * x * x + x * y - 0.5 * y * y
        }
        fn add_component_operator(
            &self,
            _i: usize,
            z: &PrimalDualPoint,
            s: f64,
            out: &mut GradientPair,
        ) {
            let (x, y) = (z.x[0], z.y[0]);
            out.gx[0] += s * (x + y);
            out.gy_negated[0] += s * (y - x);
        }
    }

    static WHOLE: FeasibleSet = FeasibleSet::whole_space();

    #[test]
    fn toy_operator_at_one_one() {
        let mut c = SfoCounter::new();
        let g =
            gradient_operator(&Toy, &PrimalDualPoint::new(vec![1.0], vec![1.0]), &mut c).unwrap();
        assert_eq!(g.gx, vec![2.0]);
        assert_eq!(g.gy_negated, vec![0.0]);
        assert_eq!(c.calls(), 1);
    }

    #[test]
    fn usage_errors() {
        let mut c = SfoCounter::new();
        let z = PrimalDualPoint::zeros(1, 1);
        assert!(matches!(
            stochastic_gradient_operator(&Toy, 1, &z, &mut c),
            Err(Error::IndexOutOfRange { index: 1, n: 1 })
        ));
        let bad = PrimalDualPoint::zeros(2, 1);
        assert!(matches!(
            gradient_operator(&Toy, &bad, &mut c),
            Err(Error::DimensionMismatch { .. })
        ));
        assert_eq!(c.calls(), 0);
    }

    #[test]
    fn transposition_swaps_operator_blocks() {
        let t = Transposed::new(&Toy);
        let mut c = SfoCounter::new();
        // z' = (x', y') = (y, x) = (3, 2)
        let g = gradient_operator(&t, &PrimalDualPoint::new(vec![3.0], vec![2.0]), &mut c).unwrap();
        // original at (x, y) = (2, 3): gx = 5, gy_neg = 1
        assert_eq!(g.gx, vec![1.0]);
        assert_eq!(g.gy_negated, vec![5.0]);
        assert_eq!(
            t.value(&PrimalDualPoint::new(vec![3.0], vec![2.0])),
            -Toy.value(&PrimalDualPoint::new(vec![2.0], vec![3.0]))
        );
    }

    #[test]
    fn query_log_records_indices() {
        let mut c = SfoCounter::with_query_log();
        let z = PrimalDualPoint::zeros(1, 1);
        gradient_operator(&Toy, &z, &mut c).unwrap();
        stochastic_gradient_operator(&Toy, 0, &z, &mut c).unwrap();
        assert_eq!(c.drain_queries(), vec![0, 0]);
        assert!(c.drain_queries().is_empty());
        assert_eq!(c.calls(), 2);
    }

    #[test]
    fn constants_validation() {
        assert!(ProblemConstants::new(0, 1.0, 0.0, 0.0).is_err());
        assert!(ProblemConstants::new(1, 0.0, 0.0, 0.0).is_err());
        assert!(ProblemConstants::new(1, 1.0, 2.0, 0.0).is_err());
        let c = ProblemConstants::new(4, 2.0, 0.0, 0.5).unwrap();
        assert!(c.kappa_x().is_infinite());
        assert_eq!(c.kappa_y(), 4.0);
    }
}
