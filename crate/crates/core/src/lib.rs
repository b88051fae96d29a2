//! Variance-reduced extragradient methods for finite-sum convex-concave
//! minimax problems `min_x max_y (1/n) Σ f_i(x, y)`.
//!
//! [`solvers::lsvre_run`] is the loopless variance-reduced extragradient
//! method and [`solvers::alsvre_run`] its accelerated proximal-point
//! variant. [`problems`] holds the benchmark families, [`lowerbound`] the
//! hard instances used to probe oracle complexity.

// `!(a > b)` is how NaN inputs get rejected throughout
#![allow(clippy::neg_cmp_op_on_partial_ord)]
// dense kernels index several arrays with one counter
#![allow(clippy::needless_range_loop)]
#![allow(clippy::type_complexity)]

pub mod data_io;
pub mod error;
mod linalg;
pub mod lowerbound;
pub mod metrics;
pub mod oracle;
pub mod point;
pub mod problems;
pub mod projections;
pub mod solvers;
pub mod verify;

#[cfg(feature = "cli")]
pub mod cli;

pub use error::{Error, Result};
pub use oracle::{FiniteSumProblem, ProblemConstants, SfoCounter};
pub use point::{GradientPair, PrimalDualPoint};
pub use projections::FeasibleSet;
