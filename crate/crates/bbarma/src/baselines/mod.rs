//! Competing methods: ARMA with covariates, the classical Gaussian linear
//! detector, and additive Holt-Winters smoothing.

mod arma;
mod gaussian;
mod holt_winters;

pub use arma::{arma_detect, arma_fit, ArmaFit};
pub use gaussian::gaussian_detect;
pub use holt_winters::{holt_winters_fit_forecast, HoltWinters};
