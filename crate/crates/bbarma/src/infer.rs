//! Wald hypothesis testing and the model-based signal detector.
//!
//! The statistic is the quadratic form of the estimate-minus-null vector in
//! the inverse of the corresponding sub-block of the inverse observed
//! information; under the null it is asymptotically χ²_ν, and the detector
//! compares it with the χ² quantile at 1 − PFA.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::estimate::{fit, FitOptions, FitResult};
use crate::model::{ModelSpec, SignalData};
use crate::numkernel::{chi2_quantile, chi2_sf};

/// Decision record for one Wald test.
#[derive(Debug, Clone, Serialize)]
pub struct DetectionReport {
    pub wald_stat: f64,
    pub dof: usize,
    pub threshold: f64,
    pub p_value: f64,
    pub detected: bool,
}

/// Wald test of H₀: γ_I = null_values at probability of false alarm `pfa`.
///
/// `interest` holds distinct flat parameter indices (canonical ordering).
pub fn wald_test(
    fit: &FitResult,
    interest: &[usize],
    null_values: &[f64],
    pfa: f64,
) -> Result<DetectionReport> {
    if !fit.converged {
        return Err(Error::NotConverged);
    }
    let stat = wald_statistic(fit, interest, null_values)?;
    let dof = interest.len();
    let threshold = detection_threshold(pfa, dof)?;
    Ok(DetectionReport {
        wald_stat: stat,
        dof,
        threshold,
        p_value: chi2_sf(stat, dof),
        detected: stat > threshold,
    })
}

/// The quadratic-form statistic alone (no thresholding).
pub fn wald_statistic(fit: &FitResult, interest: &[usize], null_values: &[f64]) -> Result<f64> {
    let dim = fit.spec.n_params();
    let nu = interest.len();
    if nu == 0 || nu != null_values.len() {
        return Err(Error::Domain {
            what: "interest indices and null values must be non-empty and equal length",
            value: nu as f64,
        });
    }
    let mut seen = vec![false; dim];
    for &idx in interest {
        if idx >= dim || seen[idx] {
            return Err(Error::Domain {
                what: "interest indices must be distinct and within the parameter vector",
                value: idx as f64,
            });
        }
        seen[idx] = true;
    }
    let inv = fit.info_inverse.as_ref().ok_or(Error::MissingStdErr)?;
    let estimates = fit.estimates();
    let diff = DVector::from_iterator(nu, interest.iter().zip(null_values).map(|(&i, &v)| estimates[i] - v));
    let mut sub = DMatrix::zeros(nu, nu);
    for (r, &i) in interest.iter().enumerate() {
        for (c, &j) in interest.iter().enumerate() {
            sub[(r, c)] = inv[(i, j)];
        }
    }
    let chol = sub.cholesky().ok_or(Error::SingularSubBlock)?;
    let solved = chol.solve(&diff);
    let stat = diff.dot(&solved);
    Ok(stat.max(0.0))
}

/// χ²_ν threshold at probability of false alarm `pfa`, with the endpoints
/// pfa = 0 (never detect) and pfa = 1 (always detect) handled exactly.
pub fn detection_threshold(pfa: f64, dof: usize) -> Result<f64> {
    if !(0.0..=1.0).contains(&pfa) {
        return Err(Error::Domain {
            what: "probability of false alarm must lie in [0,1]",
            value: pfa,
        });
    }
    if pfa == 0.0 {
        return Ok(f64::INFINITY);
    }
    if pfa == 1.0 {
        return Ok(0.0);
    }
    chi2_quantile(1.0 - pfa, dof)
}

/// Fit the detection model (candidate signal as the single covariate) and test
/// its amplitude against zero.
pub fn detect_signal(
    counts: &[u32],
    candidate: &[f64],
    spec: &ModelSpec,
    pfa: f64,
) -> Result<DetectionReport> {
    if spec.n_covariates != 1 {
        return Err(Error::Domain {
            what: "detection model must declare exactly one covariate",
            value: spec.n_covariates as f64,
        });
    }
    if candidate.len() != counts.len() {
        return Err(Error::Domain {
            what: "candidate signal length must match the data",
            value: candidate.len() as f64,
        });
    }
    let data = SignalData::new(counts.to_vec(), candidate.to_vec(), 1, spec.k_max)?;
    let fitted = fit(spec, &data, &FitOptions::default())?;
    wald_test(&fitted, &[spec.idx_covariate(0)], &[0.0], pfa)
}
