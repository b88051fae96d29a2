//! Concrete problem families and the regularization wrappers.

mod auc;
mod coordinate;
mod quadratic;
mod regularized;
mod wireless;

pub use auc::{make_auc, make_auc_with_dim, AucProblem};
pub use coordinate::CoordinateSquares;
pub use quadratic::{
    make_quadratic_scsc, quadratic_saddle_oracle, MeanQuadratic, QuadraticComponent,
    QuadraticScscProblem, MAX_QUADRATIC_DIM,
};
pub use regularized::{wrap_both, wrap_strongly_concave, RegularizedProblem};
pub use wireless::{gen_wireless, gen_wireless_gains, make_wireless, WirelessProblem};
