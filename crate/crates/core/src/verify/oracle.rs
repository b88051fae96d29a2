//! Brute-force projection oracle for small dimensions.
//!
//! The projection lies in the relative interior of some face of the set and
//! is the nearest point of that face's affine hull (or sphere). Enumerating
//! every face, solving the restricted problem in closed form and keeping the
//! nearest feasible candidate therefore recovers the projection exactly,
//! without sharing any code with the production routines.

use crate::projections::{FeasibleSet, SetKind};

/// Largest dimension the enumeration accepts.
pub const MAX_ORACLE_DIM: usize = 6;

#[derive(Clone, Copy, PartialEq)]
enum Coord {
    Free,
    Lower,
    Upper,
}

/// Projection of `z` onto `set` by active-set enumeration.
///
/// Panics if `z.len() > MAX_ORACLE_DIM`.
pub fn brute_force_projection(set: &FeasibleSet, z: &[f64]) -> Vec<f64> {
    let d = z.len();
    assert!(
        d <= MAX_ORACLE_DIM,
        "oracle is exponential in the dimension"
    );
    let (lo, hi, states, sum, radius): (Vec<f64>, Vec<f64>, &[Coord], Option<f64>, Option<f64>) =
        match set.kind() {
            SetKind::WholeSpace => return z.to_vec(),
            SetKind::Ball { radius } => (
                vec![0.0; d],
                vec![0.0; d],
                &[Coord::Free],
                None,
                Some(*radius),
            ),
            SetKind::NonnegBall { radius } => (
                vec![0.0; d],
                vec![0.0; d],
                &[Coord::Free, Coord::Lower],
                None,
                Some(*radius),
            ),
            SetKind::SimplexSum { sum } => (
                vec![0.0; d],
                vec![0.0; d],
                &[Coord::Free, Coord::Lower],
                Some(*sum),
                None,
            ),
            SetKind::Box { lo, hi } => (
                lo.clone(),
                hi.clone(),
                &[Coord::Free, Coord::Lower, Coord::Upper],
                None,
                None,
            ),
        };

    let tol = 1e-12 * (1.0 + z.iter().map(|v| v.abs()).fold(0.0, f64::max));
    let mut best: Option<(f64, Vec<f64>)> = None;
    let total = states.len().pow(d as u32);
    for code in 0..total {
        let mut c = code;
        let assignment: Vec<Coord> = (0..d)
            .map(|_| {
                let s = states[c % states.len()];
                c /= states.len();
                s
            })
            .collect();
        let sphere_options: &[bool] = if radius.is_some() {
            &[false, true]
        } else {
            &[false]
        };
        for &on_sphere in sphere_options {
            let Some(u) =
                face_candidate(z, &assignment, &lo, &hi, sum, radius.filter(|_| on_sphere))
            else {
                continue;
            };
            if !set.contains(&u, tol.max(1e-12)) {
                continue;
            }
            let dist: f64 = u.iter().zip(z).map(|(a, b)| (a - b) * (a - b)).sum();
            if best.as_ref().is_none_or(|(bd, _)| dist < *bd) {
                best = Some((dist, u));
            }
        }
    }
    best.expect("some face candidate is always feasible").1
}

/// Nearest point to `z` with the given coordinates pinned and, optionally,
/// on the hyperplane `1ᵀu = sum` or the sphere `‖u‖ = radius`.
fn face_candidate(
    z: &[f64],
    assignment: &[Coord],
    lo: &[f64],
    hi: &[f64],
    sum: Option<f64>,
    sphere: Option<f64>,
) -> Option<Vec<f64>> {
    let mut u = z.to_vec();
    let mut free = Vec::new();
    for (j, s) in assignment.iter().enumerate() {
        match s {
            Coord::Free => free.push(j),
            Coord::Lower => u[j] = lo[j],
            Coord::Upper => u[j] = hi[j],
        }
    }
    if let Some(s) = sum {
        let fixed: f64 = (0..u.len())
            .filter(|j| !free.contains(j))
            .map(|j| u[j])
            .sum();
        if free.is_empty() {
            return ((fixed - s).abs() < 1e-12 * (1.0 + s)).then_some(u);
        }
        let free_sum: f64 = free.iter().map(|&j| z[j]).sum();
        let shift = (s - fixed - free_sum) / free.len() as f64;
        for &j in &free {
            u[j] = z[j] + shift;
        }
    }
    if let Some(r) = sphere {
        let fixed2: f64 = (0..u.len())
            .filter(|j| !free.contains(j))
            .map(|j| u[j] * u[j])
            .sum();
        let rem = r * r - fixed2;
        let free_norm = free.iter().map(|&j| z[j] * z[j]).sum::<f64>().sqrt();
        if rem < 0.0 || free.is_empty() || free_norm == 0.0 {
            return None;
        }
        let scale = rem.sqrt() / free_norm;
        for &j in &free {
            u[j] = z[j] * scale;
        }
    }
    Some(u)
}
