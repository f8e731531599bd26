//! Conditional maximum-likelihood estimation.
//!
//! Starting values come from least squares of the scaled signal on an
//! intercept, the covariates and the lagged scaled signal, with the MA
//! coefficients at zero and the precision at one. BFGS then maximizes the
//! conditional log-likelihood with the analytic score; the precision is
//! optimized as log φ so positivity never needs a constraint, while results
//! and standard errors are reported on the φ scale.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::likelihood::observed_information;
use crate::model::{ModelSpec, ParamVector, SignalData};
use crate::numkernel::normal_quantile;
use crate::optim;

#[derive(Debug, Clone)]
pub struct FitOptions {
    /// BFGS iteration cap.
    pub max_iters: usize,
    /// Sup-norm gradient tolerance in the reported parameterization;
    /// `None` means 1e-6 · (1 + |ℓ|).
    pub grad_tol: Option<f64>,
    /// Optional explicit starting point (otherwise least-squares init).
    pub init: Option<ParamVector>,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            max_iters: 500,
            grad_tol: None,
            init: None,
        }
    }
}

/// Estimation output: point estimates, curvature and fit criteria.
#[derive(Debug, Clone)]
pub struct FitResult {
    pub spec: ModelSpec,
    pub params: ParamVector,
    /// Standard errors from the inverse observed information; `None` when the
    /// information matrix was singular at the optimum.
    pub std_err: Option<Vec<f64>>,
    pub loglik: f64,
    pub info: DMatrix<f64>,
    pub info_inverse: Option<DMatrix<f64>>,
    pub aic: f64,
    pub sic: f64,
    pub hq: f64,
    pub n_iters: usize,
    pub converged: bool,
    /// Sup-norm of the score at the reported estimate.
    pub grad_norm: f64,
    /// Observations actually entering the likelihood (N − m).
    pub n_effective: usize,
    pub warnings: Vec<String>,
}

impl FitResult {
    /// Flat estimate vector in canonical order.
    pub fn estimates(&self) -> Vec<f64> {
        self.params.to_vec()
    }
}

/// Least-squares starting values.
///
/// Regresses y⋆[n], n = m+1..N, on [1 | x[n] | y⋆[n−1] … y⋆[n−p]]. MA
/// coefficients start at zero and the precision at one. A rank-deficient
/// design (a constant signal makes the lag columns collinear with the
/// intercept) falls back to the minimum-norm least-squares solution, whose
/// fitted values are still the projection onto the column space.
pub fn ols_init(spec: &ModelSpec, data: &SignalData) -> Result<ParamVector> {
    data.check_spec(spec)?;
    let m = spec.presample();
    let n = data.len();
    let l = spec.n_covariates;
    let p = spec.ar_order;
    let cols = 1 + l + p;
    let rows = n.saturating_sub(m);
    if rows < cols {
        return Err(Error::InsufficientData {
            what: "least-squares initialization",
            needed: cols + m,
            got: n,
        });
    }
    let y_star = data.scaled();
    let mut design = DMatrix::zeros(rows, cols);
    let mut response = DVector::zeros(rows);
    for (r, t) in (m..n).enumerate() {
        design[(r, 0)] = 1.0;
        for (k, &xv) in data.covariate_row(t).iter().enumerate() {
            design[(r, 1 + k)] = xv;
        }
        for i in 0..p {
            design[(r, 1 + l + i)] = y_star[t - 1 - i];
        }
        response[r] = y_star[t];
    }
    let (sol, _rank) = crate::linalg::min_norm_least_squares(&design, &response);
    Ok(ParamVector {
        intercept: sol[0],
        covariates: (0..l).map(|k| sol[1 + k]).collect(),
        ar: (0..p).map(|i| sol[1 + l + i]).collect(),
        ma: vec![0.0; spec.ma_order],
        precision: 1.0,
    })
}

/// Precision estimate from the residual dispersion of an initial mean fit,
/// inverting Var(y⋆ | μ) = μ(1−μ)(K+φ)/(K(1+φ)). Used as a fallback start
/// when the standard initialization fails to converge.
fn moment_precision(spec: &ModelSpec, data: &SignalData, init: &ParamVector) -> Option<f64> {
    let fs = crate::filter::filter(spec, init, data).ok()?;
    let mut resid_sq = 0.0;
    let mut dispersion = 0.0;
    for t in fs.presample..data.len() {
        let mu = fs.mu[t].clamp(0.02, 0.98);
        let r = data.scaled()[t] - mu;
        resid_sq += r * r;
        dispersion += mu * (1.0 - mu);
    }
    if dispersion <= 0.0 {
        return None;
    }
    let k = spec.k_max as f64;
    // ratio estimates (K+φ)/(K(1+φ)) ∈ (1/K, 1).
    let ratio = (resid_sq / dispersion).clamp(1.0 / k + 1e-9, 1.0 - 1e-9);
    let phi = (1.0 - ratio) / (ratio - 1.0 / k);
    (phi.is_finite() && phi > 0.0).then(|| phi.clamp(0.1, 1e6))
}

struct Attempt {
    x: DVector<f64>,
    value: f64,
    grad_norm: f64,
    iterations: usize,
    converged: bool,
}

fn bfgs_attempt(
    spec: &ModelSpec,
    data: &SignalData,
    opts: &FitOptions,
    init: &ParamVector,
) -> Result<Attempt> {
    let dim = spec.n_params();
    let mut x0 = DVector::from_vec(init.to_vec());
    x0[dim - 1] = init.precision.ln();

    let unpack = |x: &DVector<f64>| -> Option<ParamVector> {
        let precision = x[dim - 1].exp();
        if !precision.is_finite() || precision <= 0.0 {
            return None;
        }
        let mut flat: Vec<f64> = x.iter().copied().collect();
        flat[dim - 1] = precision;
        ParamVector::from_slice(spec, &flat).ok()
    };

    let objective = |x: &DVector<f64>| -> Option<(f64, DVector<f64>)> {
        let params = unpack(x)?;
        let (loglik, score, ma_gain) = crate::likelihood::loglik_score_gain(spec, &params, data).ok()?;
        // An explosive MA feedback loop turns the filter into an error
        // amplifier whose "likelihood" is a numerical artifact; treat that
        // region as out of domain so the line search backs off.
        if ma_gain >= 1.0 {
            return None;
        }
        if !loglik.is_finite() {
            return None;
        }
        let mut grad = -score;
        if !grad.iter().all(|g| g.is_finite()) {
            return None;
        }
        // Chain rule for the log-precision coordinate.
        grad[dim - 1] *= params.precision;
        Some((-loglik, grad))
    };

    // Convergence on the reported-parameterization score.
    let reported_norm = |x: &DVector<f64>, grad: &DVector<f64>| -> f64 {
        let precision = x[dim - 1].exp();
        let mut worst = 0.0f64;
        for j in 0..dim {
            let g = if j == dim - 1 {
                grad[j] / precision
            } else {
                grad[j]
            };
            worst = worst.max(g.abs());
        }
        worst
    };
    let grad_tol = opts.grad_tol;
    let accept = |x: &DVector<f64>, value: f64, grad: &DVector<f64>| -> bool {
        let tol = grad_tol.unwrap_or_else(|| 1e-6 * (1.0 + value.abs()));
        reported_norm(x, grad) <= tol
    };

    // Seed the inverse Hessian at 1/(1 + |ℓ₀|).
    let scale0 = match objective(&x0) {
        Some((f0, _)) => 1.0 / (1.0 + f0.abs()),
        None => {
            return Err(Error::Domain {
                what: "initial point has non-finite likelihood",
                value: f64::NAN,
            })
        }
    };
    let out = optim::minimize(objective, x0, scale0, opts.max_iters, accept);
    let grad_norm = reported_norm(&out.x, &out.grad);
    Ok(Attempt {
        x: out.x,
        value: out.value,
        grad_norm,
        iterations: out.iterations,
        converged: out.converged,
    })
}

/// Maximize the conditional log-likelihood.
pub fn fit(spec: &ModelSpec, data: &SignalData, opts: &FitOptions) -> Result<FitResult> {
    data.check_spec(spec)?;
    let dim = spec.n_params();
    let m = spec.presample();
    if data.len() <= m + dim {
        return Err(Error::InsufficientData {
            what: "fit",
            needed: m + dim + 1,
            got: data.len(),
        });
    }
    let init = match &opts.init {
        Some(p) => {
            if !p.matches(spec) {
                return Err(Error::Domain {
                    what: "initial parameter vector does not match the model spec",
                    value: p.dim() as f64,
                });
            }
            p.clone()
        }
        None => ols_init(spec, data)?,
    };

    let mut best = bfgs_attempt(spec, data, opts, &init)?;
    let mut n_attempts = 1;
    if !best.converged && spec.ma_order > 0 && opts.init.is_none() {
        // Staged buildup: fit the MA-free model, then restart the full model
        // from its solution with the MA coefficients at zero. The reduced fit
        // is immune to the MA feedback ridge and lands in the sane basin.
        let reduced_spec = ModelSpec {
            ma_order: 0,
            ..*spec
        };
        if data.len() > reduced_spec.presample() + reduced_spec.n_params() {
            if let Ok(reduced) = fit(&reduced_spec, data, &FitOptions::default()) {
                if reduced.converged {
                    let staged = ParamVector {
                        ma: vec![0.0; spec.ma_order],
                        ..reduced.params
                    };
                    if let Ok(retry) = bfgs_attempt(spec, data, opts, &staged) {
                        n_attempts += 1;
                        if retry.converged || retry.value < best.value {
                            best = retry;
                        }
                    }
                }
            }
        }
    }
    if !best.converged {
        // Retry from a dispersion-matched precision before giving up.
        if let Some(phi) = moment_precision(spec, data, &init) {
            if (phi - init.precision).abs() > 1e-9 {
                let mut retry_init = init.clone();
                retry_init.precision = phi;
                if let Ok(retry) = bfgs_attempt(spec, data, opts, &retry_init) {
                    n_attempts += 1;
                    if retry.converged || retry.value < best.value {
                        best = retry;
                    }
                }
            }
        }
    }
    let out = best;

    let precision = out.x[dim - 1].exp();
    let mut flat: Vec<f64> = out.x.iter().copied().collect();
    flat[dim - 1] = precision;
    let params = ParamVector::from_slice(spec, &flat)?;
    let loglik = -out.value;
    let grad_norm = out.grad_norm;

    let mut warnings = Vec::new();
    if !out.converged {
        warnings.push(format!(
            "no convergence after {} iterations over {n_attempts} starts (score sup-norm {:.3e})",
            out.iterations, grad_norm
        ));
    }

    let info = observed_information(spec, &params, data)?;
    let (info_inverse, std_err) = match info.clone().cholesky() {
        Some(chol) => {
            let inv = chol.inverse();
            let se = (0..dim).map(|i| inv[(i, i)].sqrt()).collect();
            (Some(inv), Some(se))
        }
        None => {
            warnings.push("observed information not positive definite; standard errors unavailable".to_string());
            (None, None)
        }
    };

    let n_effective = data.len() - m;
    let r = dim as f64;
    let mf = n_effective as f64;
    let aic = -2.0 * loglik + 2.0 * r;
    let sic = -2.0 * loglik + r * mf.ln();
    let hq = -2.0 * loglik + 2.0 * r * mf.ln().ln();

    Ok(FitResult {
        spec: *spec,
        params,
        std_err,
        loglik,
        info,
        info_inverse,
        aic,
        sic,
        hq,
        n_iters: out.iterations,
        converged: out.converged,
        grad_norm,
        n_effective,
        warnings,
    })
}

/// Symmetric Wald confidence intervals at level 1 − alpha.
pub fn confidence_interval(fit: &FitResult, alpha: f64) -> Result<Vec<(f64, f64)>> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::Domain {
            what: "confidence level alpha must lie in (0,1)",
            value: alpha,
        });
    }
    let se = fit.std_err.as_ref().ok_or(Error::MissingStdErr)?;
    let z = normal_quantile(1.0 - alpha / 2.0)?;
    let estimates = fit.estimates();
    Ok(estimates
        .iter()
        .zip(se.iter())
        .map(|(&est, &s)| (est - z * s, est + z * s))
        .collect())
}
