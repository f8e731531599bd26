//! Predictor recursion and parameter sensitivities.
//!
//! One pass over the signal computes η[n], μ[n] = g⁻¹(η[n]), the MA error
//! terms y⋆[n] − μ[n], and the derivative of η[n] with respect to every mean
//! parameter. Each sensitivity obeys the same recursion: its own driver minus
//! Σ_s θ_s (1/g′(μ[n−s])) ∂η[n−s]/∂·.
//!
//! Presample convention: for the first m = max(p, q) indices the error terms
//! and all sensitivities are held at zero; lagged observed values are used
//! wherever the index is valid. Entries of η, μ, 1/g′ and κ below m are
//! stored as 0 and must never be read as predictions.

use crate::error::{Error, Result};
use crate::links;
use crate::model::{ModelSpec, ParamVector, SignalData};

#[derive(Debug, Clone, PartialEq)]
pub struct FilterState {
    /// Linear predictor η[n]; defined for n >= m.
    pub eta: Vec<f64>,
    /// Conditional mean μ[n]; defined for n >= m.
    pub mu: Vec<f64>,
    /// MA error terms y⋆[n] − μ[n]; zero for n < m.
    pub resid: Vec<f64>,
    /// dμ/dη = 1/g′(μ[n]); zero for n < m.
    pub dmu: Vec<f64>,
    /// κ[n] = g″(μ[n])/(g′(μ[n]))²; zero for n < m.
    pub kappa: Vec<f64>,
    /// sens[d][n] = ∂η[n]/∂γ_d over the mean parameters, zero for n < m.
    pub sens: Vec<Vec<f64>>,
    /// Conditioning length m.
    pub presample: usize,
}

impl FilterState {
    pub fn len(&self) -> usize {
        self.eta.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eta.is_empty()
    }

    /// Number of terms entering the conditional likelihood.
    pub fn effective_len(&self) -> usize {
        self.len() - self.presample
    }

    pub fn sens_intercept(&self) -> &[f64] {
        &self.sens[0]
    }

    pub fn sens_covariate(&self, spec: &ModelSpec, k: usize) -> &[f64] {
        &self.sens[spec.idx_covariate(k)]
    }

    pub fn sens_ar(&self, spec: &ModelSpec, i: usize) -> &[f64] {
        &self.sens[spec.idx_ar(i)]
    }

    pub fn sens_ma(&self, spec: &ModelSpec, j: usize) -> &[f64] {
        &self.sens[spec.idx_ma(j)]
    }
}

/// Run the recursion over the whole signal.
pub fn filter(spec: &ModelSpec, params: &ParamVector, data: &SignalData) -> Result<FilterState> {
    data.check_spec(spec)?;
    if !params.matches(spec) {
        return Err(Error::Domain {
            what: "parameter vector does not match the model spec",
            value: params.dim() as f64,
        });
    }
    let n = data.len();
    let m = spec.presample();
    let n_mean = spec.n_mean_params();
    let y_star = data.scaled();

    let mut state = FilterState {
        eta: vec![0.0; n],
        mu: vec![0.0; n],
        resid: vec![0.0; n],
        dmu: vec![0.0; n],
        kappa: vec![0.0; n],
        sens: vec![vec![0.0; n]; n_mean],
        presample: m,
    };

    for t in m..n {
        let mut eta = params.intercept;
        let row = data.covariate_row(t);
        for (k, &xv) in row.iter().enumerate() {
            eta += params.covariates[k] * xv;
        }
        for (i, &ar) in params.ar.iter().enumerate() {
            eta += ar * y_star[t - 1 - i];
        }
        for (j, &ma) in params.ma.iter().enumerate() {
            eta += ma * state.resid[t - 1 - j];
        }
        if !eta.is_finite() {
            return Err(Error::NonFinitePredictor { index: t });
        }
        let mu = links::link_inv(spec.link, eta);
        state.eta[t] = eta;
        state.mu[t] = mu;
        state.resid[t] = y_star[t] - mu;
        state.dmu[t] = links::dmu_deta(spec.link, mu);
        state.kappa[t] = links::curvature_ratio(spec.link, mu);

        for d in 0..n_mean {
            let driver = if d == spec.idx_intercept() {
                1.0
            } else if d < 1 + spec.n_covariates {
                row[d - 1]
            } else if d < 1 + spec.n_covariates + spec.ar_order {
                y_star[t - 1 - (d - 1 - spec.n_covariates)]
            } else {
                state.resid[t - 1 - (d - 1 - spec.n_covariates - spec.ar_order)]
            };
            let mut v = driver;
            for (s, &ma) in params.ma.iter().enumerate() {
                let lag = t - 1 - s;
                // Presample entries carry zero sensitivity and zero dmu.
                v -= ma * state.dmu[lag] * state.sens[d][lag];
            }
            state.sens[d][t] = v;
        }
    }
    Ok(state)
}
