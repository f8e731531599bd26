//! Out-of-signal forecasting.
//!
//! The recursion reuses the fitted filter: lagged scaled observations are
//! replaced by earlier forecasts once the lag crosses the end of the record,
//! and unknown future MA errors are set to zero. Mean forecasts map to the
//! integer support through round(μ̂ · K), ties away from zero.

use crate::error::{Error, Result};
use crate::estimate::FitResult;
use crate::filter::filter;
use crate::links;
use crate::model::SignalData;

#[derive(Debug, Clone, PartialEq)]
pub struct Forecast {
    /// Mean-response path μ̂[N+1], …, μ̂[N+H].
    pub mean: Vec<f64>,
    /// Integer forecasts round(μ̂ · K).
    pub counts: Vec<u32>,
}

/// Forecast `horizon` steps past the end of `data`.
///
/// `future_covariates` must hold `horizon` rows of `l` values (row-major);
/// deterministic covariates such as seasonal harmonics are extended by the
/// caller.
pub fn forecast(
    fit: &FitResult,
    data: &SignalData,
    future_covariates: &[f64],
    horizon: usize,
) -> Result<Forecast> {
    let spec = &fit.spec;
    let l = spec.n_covariates;
    if future_covariates.len() != horizon * l {
        return Err(Error::MissingFutureCovariates {
            needed: horizon * l,
            got: if l == 0 { 0 } else { future_covariates.len() / l },
        });
    }
    let state = filter(spec, &fit.params, data)?;
    let n = data.len();
    let kf = spec.k_max as f64;

    // Extended series: observed scaled signal then forecasts; observed
    // residuals then zeros.
    let mut ys_ext: Vec<f64> = data.scaled().to_vec();
    let mut resid_ext: Vec<f64> = state.resid.clone();
    let mut mean = Vec::with_capacity(horizon);
    let mut counts = Vec::with_capacity(horizon);

    for h in 0..horizon {
        let t = n + h;
        let mut eta = fit.params.intercept;
        for k in 0..l {
            eta += fit.params.covariates[k] * future_covariates[h * l + k];
        }
        for (i, &ar) in fit.params.ar.iter().enumerate() {
            eta += ar * ys_ext[t - 1 - i];
        }
        for (j, &ma) in fit.params.ma.iter().enumerate() {
            eta += ma * resid_ext[t - 1 - j];
        }
        if !eta.is_finite() {
            return Err(Error::NonFinitePredictor { index: t });
        }
        let mu = links::link_inv(spec.link, eta);
        mean.push(mu);
        counts.push((mu * kf).round() as u32);
        ys_ext.push(mu);
        resid_ext.push(0.0);
    }
    Ok(Forecast { mean, counts })
}
