//! Special functions, quadrature, and scalar root finding / minimization
//! shared by every model in the crate.
//!
//! All routines are pure and thread-safe.

mod quadrature;
mod roots;
mod special;

pub use quadrature::{integrate_interval, integrate_semi_infinite, Integral, QuadratureSpec};
pub use roots::{find_root_bracketed, minimize_scalar, Bracket, Minimum, RootBracket};
pub use roots::refine_root;
pub use special::{
    gamma, gauss_2f1, ln_beta, ln_gamma, reg_lower_gamma, upper_incomplete_gamma_reg,
};
