//! Exact Euclidean projections onto the feasible sets used by the problem families.

use crate::error::{Error, Result};
use crate::point::{dot, norm};

/// Shape of a feasible set. Obtain one through the validating constructors on
/// [`FeasibleSet`].
#[derive(Debug, Clone, PartialEq)]
pub enum SetKind {
    WholeSpace,
    /// `{u : ‖u‖ ≤ R}`
    Ball {
        radius: f64,
    },
    /// `{u : ‖u‖ ≤ R, u ≥ 0}`
    NonnegBall {
        radius: f64,
    },
    /// `{u : 1ᵀu = s, u ≥ 0}`
    SimplexSum {
        sum: f64,
    },
    /// `{u : lo ≤ u ≤ hi}` coordinatewise.
    Box {
        lo: Vec<f64>,
        hi: Vec<f64>,
    },
}

/// A nonempty closed convex set with an exact projection.
#[derive(Debug, Clone, PartialEq)]
pub struct FeasibleSet {
    kind: SetKind,
}

impl FeasibleSet {
    pub const fn whole_space() -> Self {
        Self {
            kind: SetKind::WholeSpace,
        }
    }

    pub fn ball(radius: f64) -> Result<Self> {
        check_positive("ball radius", radius)?;
        Ok(Self {
            kind: SetKind::Ball { radius },
        })
    }

    pub fn nonneg_ball(radius: f64) -> Result<Self> {
        check_positive("nonneg_ball radius", radius)?;
        Ok(Self {
            kind: SetKind::NonnegBall { radius },
        })
    }

    pub fn simplex_sum(sum: f64) -> Result<Self> {
        check_positive("simplex target sum", sum)?;
        Ok(Self {
            kind: SetKind::SimplexSum { sum },
        })
    }

    pub fn boxed(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        if lo.len() != hi.len() || lo.is_empty() {
            return Err(Error::invalid(
                "box bounds must be nonempty and of equal length",
            ));
        }
        if lo
            .iter()
            .zip(&hi)
            .any(|(l, h)| !(l <= h) || l.is_nan() || h.is_nan())
        {
            return Err(Error::invalid("box requires lo <= hi coordinatewise"));
        }
        Ok(Self {
            kind: SetKind::Box { lo, hi },
        })
    }

    /// The same interval `[lo, hi]` in every one of `dim` coordinates.
    pub fn uniform_box(dim: usize, lo: f64, hi: f64) -> Result<Self> {
        Self::boxed(vec![lo; dim], vec![hi; dim])
    }

    pub fn kind(&self) -> &SetKind {
        &self.kind
    }

    pub fn is_whole_space(&self) -> bool {
        matches!(self.kind, SetKind::WholeSpace)
    }

    /// Dimension required by the set, if it fixes one.
    pub fn fixed_dim(&self) -> Option<usize> {
        match &self.kind {
            SetKind::Box { lo, .. } => Some(lo.len()),
            _ => None,
        }
    }

    /// Euclidean diameter of the set in `dim` coordinates; `None` if unbounded.
    pub fn diameter(&self, dim: usize) -> Option<f64> {
        match &self.kind {
            SetKind::WholeSpace => None,
            SetKind::Ball { radius } => Some(2.0 * radius),
            // two orthogonal points on the sphere are the farthest pair
            SetKind::NonnegBall { radius } if dim >= 2 => Some(radius * 2f64.sqrt()),
            SetKind::NonnegBall { radius } => Some(*radius),
            SetKind::SimplexSum { sum } if dim >= 2 => Some(sum * 2f64.sqrt()),
            SetKind::SimplexSum { .. } => Some(0.0),
            SetKind::Box { lo, hi } => Some(
                lo.iter()
                    .zip(hi)
                    .map(|(l, h)| (h - l) * (h - l))
                    .sum::<f64>()
                    .sqrt(),
            ),
        }
    }

    /// Membership test with absolute tolerance `tol`.
    pub fn contains(&self, u: &[f64], tol: f64) -> bool {
        match &self.kind {
            SetKind::WholeSpace => true,
            SetKind::Ball { radius } => norm(u) <= radius + tol,
            SetKind::NonnegBall { radius } => {
                u.iter().all(|&v| v >= -tol) && norm(u) <= radius + tol
            }
            SetKind::SimplexSum { sum } => {
                u.iter().all(|&v| v >= -tol) && (u.iter().sum::<f64>() - sum).abs() <= tol
            }
            SetKind::Box { lo, hi } => u
                .iter()
                .zip(lo.iter().zip(hi))
                .all(|(&v, (&l, &h))| v >= l - tol && v <= h + tol),
        }
    }

    pub fn project(&self, z: &[f64]) -> Vec<f64> {
        let mut u = z.to_vec();
        self.project_in_place(&mut u);
        u
    }

    /// Replace `u` with its projection onto the set.
    pub fn project_in_place(&self, u: &mut [f64]) {
        match &self.kind {
            SetKind::WholeSpace => {}
            SetKind::Ball { radius } => scale_into_ball(u, *radius),
            SetKind::NonnegBall { radius } => {
                // clip then scale: the orthogonal face and the radial multiplier decouple
                u.iter_mut().for_each(|v| *v = v.max(0.0));
                scale_into_ball(u, *radius);
            }
            SetKind::SimplexSum { sum } => project_simplex(u, *sum),
            SetKind::Box { lo, hi } => {
                debug_assert_eq!(u.len(), lo.len());
                for ((v, l), h) in u.iter_mut().zip(lo).zip(hi) {
                    *v = v.clamp(*l, *h);
                }
            }
        }
    }
}

fn check_positive(what: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(format!(
            "{what} must be positive and finite, got {v}"
        )))
    }
}

fn scale_into_ball(u: &mut [f64], radius: f64) {
    let nrm = dot(u, u).sqrt();
    if nrm > radius {
        let s = radius / nrm;
        u.iter_mut().for_each(|v| *v *= s);
    }
}

/// Sort-based threshold projection onto `{u ≥ 0, 1ᵀu = s}`.
fn project_simplex(u: &mut [f64], s: f64) {
    if u.is_empty() {
        return;
    }
    let mut sorted = u.to_vec();
    sorted.sort_unstable_by(|a, b| b.total_cmp(a));

    let mut cumsum = 0.0;
    let mut theta = 0.0;
    for (j, &v) in sorted.iter().enumerate() {
        cumsum += v;
        let candidate = (cumsum - s) / (j + 1) as f64;
        if v - candidate > 0.0 {
            theta = candidate;
        } else {
            break;
        }
    }
    u.iter_mut().for_each(|v| *v = (*v - theta).max(0.0));
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
        a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
    }

    #[test]
    fn ball_scales_radially() {
        let set = FeasibleSet::ball(1.0).unwrap();
        assert!(close(&set.project(&[3.0, 4.0]), &[0.6, 0.8], 1e-15));
    }

    #[test]
    fn simplex_corner() {
        let set = FeasibleSet::simplex_sum(1.0).unwrap();
        assert_eq!(set.project(&[2.0, 0.0, 0.0]), vec![1.0, 0.0, 0.0]);
    }

    #[test]
    fn nonneg_ball_clips_then_scales() {
        let set = FeasibleSet::nonneg_ball(1.0).unwrap();
        assert!(close(
            &set.project(&[-1.0, 3.0, 4.0]),
            &[0.0, 0.6, 0.8],
            1e-15
        ));
    }

    #[test]
    fn members_are_fixed() {
        let sets = [
            FeasibleSet::whole_space(),
            FeasibleSet::ball(2.0).unwrap(),
            FeasibleSet::nonneg_ball(2.0).unwrap(),
            FeasibleSet::simplex_sum(1.0).unwrap(),
            FeasibleSet::uniform_box(3, -1.0, 1.0).unwrap(),
        ];
        let z = [0.25, 0.5, 0.25];
        for set in &sets {
            assert!(close(&set.project(&z), &z, 1e-15), "{set:?}");
        }
    }

    #[test]
    fn simplex_tie_at_threshold_maps_to_zero() {
        // theta = 1 here, so the middle coordinate sits exactly on the threshold
        let set = FeasibleSet::simplex_sum(1.0).unwrap();
        assert_eq!(set.project(&[2.0, 1.0, 0.0]), vec![1.0, 0.0, 0.0]);
    }

    #[test]
    fn invalid_parameters_rejected_at_construction() {
        assert!(FeasibleSet::ball(0.0).is_err());
        assert!(FeasibleSet::nonneg_ball(-1.0).is_err());
        assert!(FeasibleSet::simplex_sum(f64::NAN).is_err());
        assert!(FeasibleSet::boxed(vec![1.0], vec![0.0]).is_err());
        assert!(FeasibleSet::boxed(vec![0.0], vec![0.0, 1.0]).is_err());
    }

    #[test]
    fn diameters() {
        assert_eq!(FeasibleSet::ball(1.5).unwrap().diameter(4), Some(3.0));
        let s = FeasibleSet::simplex_sum(3.0).unwrap().diameter(5).unwrap();
        assert!((s - 3.0 * 2f64.sqrt()).abs() < 1e-15);
        assert_eq!(FeasibleSet::whole_space().diameter(2), None);
        assert_eq!(
            FeasibleSet::uniform_box(1, -1.0, 1.0).unwrap().diameter(1),
            Some(2.0)
        );
    }
}
