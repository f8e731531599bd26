//! ARMA(p,q) baseline with covariates, estimated by conditional sum of squares.
//!
//! The mean structure mirrors the main model's predictor (intercept,
//! covariates, lagged observations, lagged innovations) so detector
//! comparisons are like-for-like. CSS is minimized by BFGS with an analytic
//! gradient from the innovation recursions; the coefficient covariance comes
//! from the numerical Hessian of the CSS objective via cov = 2σ̂² H⁻¹.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::infer::{detection_threshold, DetectionReport};
use crate::numkernel::chi2_sf;
use crate::optim;

#[derive(Debug, Clone)]
pub struct ArmaFit {
    pub intercept: f64,
    pub covariates: Vec<f64>,
    pub ar: Vec<f64>,
    pub ma: Vec<f64>,
    /// Innovation variance estimate S/(M − k).
    pub sigma2: f64,
    /// Covariance of (intercept, covariates, ar, ma).
    pub cov_matrix: DMatrix<f64>,
    pub css: f64,
    pub converged: bool,
    /// In-sample innovations, zero over the conditioning window.
    pub residuals: Vec<f64>,
    n_cov: usize,
    p: usize,
    q: usize,
}

struct CssProblem<'a> {
    y: &'a [f64],
    x: &'a [f64],
    n_cov: usize,
    p: usize,
    q: usize,
}

impl CssProblem<'_> {
    fn dim(&self) -> usize {
        1 + self.n_cov + self.p + self.q
    }

    fn presample(&self) -> usize {
        self.p.max(self.q)
    }

    /// Innovations and the CSS value.
    fn innovations(&self, theta: &[f64]) -> (Vec<f64>, f64) {
        let n = self.y.len();
        let m = self.presample();
        let l = self.n_cov;
        let mut e = vec![0.0; n];
        let mut css = 0.0;
        for t in m..n {
            let mut pred = theta[0];
            for k in 0..l {
                pred += theta[1 + k] * self.x[t * l + k];
            }
            for i in 0..self.p {
                pred += theta[1 + l + i] * self.y[t - 1 - i];
            }
            for j in 0..self.q {
                pred += theta[1 + l + self.p + j] * e[t - 1 - j];
            }
            e[t] = self.y[t] - pred;
            css += e[t] * e[t];
        }
        (e, css)
    }

    /// CSS value and analytic gradient.
    fn value_and_grad(&self, theta: &[f64]) -> Option<(f64, DVector<f64>)> {
        let n = self.y.len();
        let m = self.presample();
        let l = self.n_cov;
        let dim = self.dim();
        let mut e = vec![0.0; n];
        let mut de = vec![vec![0.0; n]; dim];
        let mut css = 0.0;
        let mut grad = DVector::zeros(dim);
        for t in m..n {
            let mut pred = theta[0];
            for k in 0..l {
                pred += theta[1 + k] * self.x[t * l + k];
            }
            for i in 0..self.p {
                pred += theta[1 + l + i] * self.y[t - 1 - i];
            }
            for j in 0..self.q {
                pred += theta[1 + l + self.p + j] * e[t - 1 - j];
            }
            e[t] = self.y[t] - pred;
            if !e[t].is_finite() {
                return None;
            }
            for d in 0..dim {
                let driver = if d == 0 {
                    -1.0
                } else if d < 1 + l {
                    -self.x[t * l + (d - 1)]
                } else if d < 1 + l + self.p {
                    -self.y[t - 1 - (d - 1 - l)]
                } else {
                    -e[t - 1 - (d - 1 - l - self.p)]
                };
                let mut v = driver;
                for j in 0..self.q {
                    v -= theta[1 + l + self.p + j] * de[d][t - 1 - j];
                }
                de[d][t] = v;
                grad[d] += 2.0 * e[t] * v;
            }
            css += e[t] * e[t];
        }
        Some((css, grad))
    }
}

/// Fit by conditional sum of squares.
///
/// `x` is a row-major N × n_cov covariate matrix (empty when n_cov = 0).
pub fn arma_fit(y: &[f64], x: &[f64], n_cov: usize, p: usize, q: usize) -> Result<ArmaFit> {
    let n = y.len();
    let problem = CssProblem { y, x, n_cov, p, q };
    let dim = problem.dim();
    let m = problem.presample();
    if n <= m + dim + 1 {
        return Err(Error::InsufficientData {
            what: "arma_fit",
            needed: m + dim + 2,
            got: n,
        });
    }
    if n_cov > 0 && x.len() != n * n_cov {
        return Err(Error::Domain {
            what: "covariate matrix size must be N * n_cov",
            value: x.len() as f64,
        });
    }

    // Least-squares start on intercept, covariates and AR lags; MA at zero.
    let rows = n - m;
    let cols = 1 + n_cov + p;
    let mut design = DMatrix::zeros(rows, cols);
    let mut response = DVector::zeros(rows);
    for (r, t) in (m..n).enumerate() {
        design[(r, 0)] = 1.0;
        for k in 0..n_cov {
            design[(r, 1 + k)] = x[t * n_cov + k];
        }
        for i in 0..p {
            design[(r, 1 + n_cov + i)] = y[t - 1 - i];
        }
        response[r] = y[t];
    }
    let (ls, _) = crate::linalg::min_norm_least_squares(&design, &response);
    let mut theta0 = DVector::zeros(dim);
    for c in 0..cols {
        theta0[c] = ls[c];
    }

    let out = optim::minimize(
        |v: &DVector<f64>| problem.value_and_grad(v.as_slice()),
        theta0,
        1.0,
        500,
        |_, value, grad: &DVector<f64>| grad.amax() <= 1e-8 * (1.0 + value.abs()),
    );
    let theta: Vec<f64> = out.x.iter().copied().collect();
    let (resid, css) = problem.innovations(&theta);
    let m_eff = (n - m) as f64;
    let sigma2 = css / (m_eff - dim as f64).max(1.0);

    // Numerical Hessian of the CSS objective from its analytic gradient.
    let mut hess = DMatrix::zeros(dim, dim);
    for j in 0..dim {
        let h = 1e-6 * (1.0 + theta[j].abs());
        let mut hi = theta.clone();
        hi[j] += h;
        let mut lo = theta.clone();
        lo[j] -= h;
        let gh = problem.value_and_grad(&hi);
        let gl = problem.value_and_grad(&lo);
        match (gh, gl) {
            (Some((_, gh)), Some((_, gl))) => {
                for i in 0..dim {
                    hess[(i, j)] = (gh[i] - gl[i]) / (2.0 * h);
                }
            }
            _ => {
                return Err(Error::Domain {
                    what: "CSS Hessian evaluation left the domain",
                    value: theta[j],
                })
            }
        }
    }
    // Symmetrize, then cov = 2 σ̂² H⁻¹.
    let hess = (hess.clone() + hess.transpose()) * 0.5;
    let cov_matrix = match hess.cholesky() {
        Some(chol) => chol.inverse() * (2.0 * sigma2),
        None => DMatrix::from_element(dim, dim, f64::NAN),
    };

    Ok(ArmaFit {
        intercept: theta[0],
        covariates: theta[1..1 + n_cov].to_vec(),
        ar: theta[1 + n_cov..1 + n_cov + p].to_vec(),
        ma: theta[1 + n_cov + p..].to_vec(),
        sigma2,
        cov_matrix,
        css,
        converged: out.converged,
        residuals: resid,
        n_cov,
        p,
        q,
    })
}

impl ArmaFit {
    /// Forecast `horizon` steps ahead; future innovations are zero.
    pub fn forecast(&self, y: &[f64], x_future: &[f64], horizon: usize) -> Result<Vec<f64>> {
        let l = self.n_cov;
        if x_future.len() != horizon * l {
            return Err(Error::MissingFutureCovariates {
                needed: horizon * l,
                got: if l == 0 { 0 } else { x_future.len() / l },
            });
        }
        let n = y.len();
        let mut y_ext = y.to_vec();
        let mut e_ext = self.residuals.clone();
        e_ext.resize(n, 0.0);
        let mut out = Vec::with_capacity(horizon);
        for h in 0..horizon {
            let t = n + h;
            let mut pred = self.intercept;
            for k in 0..l {
                pred += self.covariates[k] * x_future[h * l + k];
            }
            for (i, &ar) in self.ar.iter().enumerate() {
                pred += ar * y_ext[t - 1 - i];
            }
            for (j, &ma) in self.ma.iter().enumerate() {
                pred += ma * e_ext[t - 1 - j];
            }
            out.push(pred);
            y_ext.push(pred);
            e_ext.push(0.0);
        }
        Ok(out)
    }

    /// Wald statistic for one coefficient against zero (flat index into
    /// (intercept, covariates, ar, ma)).
    pub fn wald_statistic(&self, index: usize) -> Result<f64> {
        let est = match index {
            0 => self.intercept,
            i if i < 1 + self.n_cov => self.covariates[i - 1],
            i if i < 1 + self.n_cov + self.p => self.ar[i - 1 - self.n_cov],
            i if i < 1 + self.n_cov + self.p + self.q => self.ma[i - 1 - self.n_cov - self.p],
            _ => {
                return Err(Error::Domain {
                    what: "coefficient index out of range",
                    value: index as f64,
                })
            }
        };
        let var = self.cov_matrix[(index, index)];
        if !var.is_finite() || var < 0.0 {
            return Err(Error::SingularSubBlock);
        }
        if var == 0.0 {
            return Ok(if est == 0.0 { 0.0 } else { f64::INFINITY });
        }
        Ok(est * est / var)
    }
}

/// Wald detector on the single-covariate coefficient.
pub fn arma_detect(y: &[f64], candidate: &[f64], p: usize, q: usize, pfa: f64) -> Result<DetectionReport> {
    if candidate.len() != y.len() {
        return Err(Error::Domain {
            what: "candidate signal length must match the data",
            value: candidate.len() as f64,
        });
    }
    let fitted = arma_fit(y, candidate, 1, p, q)?;
    if !fitted.converged {
        return Err(Error::NotConverged);
    }
    let stat = fitted.wald_statistic(1)?;
    let threshold = detection_threshold(pfa, 1)?;
    Ok(DetectionReport {
        wald_stat: stat,
        dof: 1,
        threshold,
        p_value: chi2_sf(stat, 1),
        detected: stat > threshold,
    })
}
