//! Beta-binomial ARMA modeling of bounded, quantized count signals.
//!
//! The observation law is beta-binomial on {0, …, K} with precision φ and a
//! conditional mean driven through a link function by an ARMA-style recursion
//! on the scaled signal. The crate provides conditional maximum-likelihood
//! estimation with analytic score and observed information, Wald-type signal
//! detection, h-step forecasting, residual diagnostics, classical baselines
//! (ARMA, Gaussian regression, Holt-Winters) and a Monte Carlo harness.

pub mod baselines;
pub mod betabinom;
pub mod diag;
pub mod error;
pub mod estimate;
pub mod filter;
pub mod forecast;
pub mod infer;
pub mod ingest;
pub mod likelihood;
mod linalg;
pub mod links;
pub mod mc;
pub mod model;
pub mod numkernel;
mod optim;
pub mod sim;

pub use betabinom::BetaBinomial;
pub use error::{Error, Result};
pub use diag::{acf, goodness, pacf, portmanteau, residuals, ForecastAccuracy, PortmanteauReport, Residuals};
pub use estimate::{confidence_interval, fit, ols_init, FitOptions, FitResult};
pub use forecast::{forecast, Forecast};
pub use infer::{detect_signal, wald_test, DetectionReport};
pub use ingest::ingest_csv;
pub use mc::{mc_estimation, mc_roc, EstimationSummary, RocCurve, RocStudy, ScenarioConfig};
pub use filter::{filter, FilterState};
pub use likelihood::{log_likelihood, log_likelihood_and_score, observed_information, score};
pub use links::LinkKind;
pub use model::{ModelSpec, ParamVector, SignalData};
pub use sim::simulate;
