//! Special functions, quadrature, root finding and 1-D maximization.

pub mod interp;
pub mod quadrature;
pub mod roots;
pub mod special;

pub use quadrature::{integrate, Domain, QuadratureKind, QuadratureSpec};
pub use roots::{find_root, maximize_unimodal, BracketedRoot};
pub use special::{
    digamma, erfc, laguerre_assoc, ln_ball_volume, ln_gamma, ln_q_function, q_function, q_inverse,
    regularized_gamma_upper, trigamma, EULER_GAMMA,
};
