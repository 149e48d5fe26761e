//! Dense linear algebra and the scalar numerics used by training and order
//! selection. Everything is `f64` and evaluated in a fixed summation order.

mod activation;
mod adam;
mod chi2;
mod matrix;

pub use activation::{elu, elu_derivative, softmax_cross_entropy};
pub use adam::AdamState;
pub use chi2::{chi_squared_cdf, chi_squared_sf, ln_gamma, regularized_gamma_p, regularized_gamma_q};
pub use matrix::Matrix;
