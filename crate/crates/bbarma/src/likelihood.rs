//! Conditional log-likelihood, analytic score and observed information.
//!
//! Each likelihood term is the beta-binomial log probability at the filtered
//! mean. Writing a = μ[n]φ and b = (1−μ[n])φ, the per-term derivatives used
//! below are
//!
//!   ∂ℓ[n]/∂μ      = φ B[n],   B[n] = ψ(y+a) − ψ(K−y+b) − ψ(a) + ψ(b)
//!   ∂²ℓ[n]/∂μ²    = φ² (ψ′(y+a) + ψ′(K−y+b) − ψ′(a) − ψ′(b))
//!   ∂²ℓ[n]/∂μ∂φ  = B[n] + φ (μ(ψ′(y+a) − ψ′(a)) + (1−μ)(ψ′(b) − ψ′(K−y+b)))
//!   ∂²ℓ[n]/∂φ²   = ψ′(φ) − ψ′(K+φ) + μ²(ψ′(y+a) − ψ′(a))
//!                    + (1−μ)²(ψ′(K−y+b) − ψ′(b))
//!
//! The observed information is the negative Hessian. With T = dμ/dη and
//! κ = g″/(g′)², the mean-parameter block combines a weighted outer product
//! of the first-order sensitivities with a correction along the second-order
//! sensitivities of the MA coefficients:
//!
//!   I(λ,δ) = Σ w[n] ∂η/∂λ ∂η/∂δ − Σ v[n] ∂²η/∂λ∂δ
//!   w[n] = ∂ℓ[n]/∂μ · κ[n] T[n] − ∂²ℓ[n]/∂μ² · T[n]²,   v[n] = ∂ℓ[n]/∂μ · T[n]
//!
//! Every sign and factor here is pinned by the finite-difference tests at the
//! bottom of this file rather than by any printed formula.

use nalgebra::{DMatrix, DVector};

use crate::error::Result;
use crate::filter::{filter, FilterState};
use crate::model::{ModelSpec, ParamVector, SignalData};
use crate::numkernel::{digamma_raw, ln_gamma_raw, trigamma_raw};

/// Conditional log-likelihood. A vacuous conditioning range (N = m) sums to 0.
pub fn log_likelihood(spec: &ModelSpec, params: &ParamVector, data: &SignalData) -> Result<f64> {
    let fs = filter(spec, params, data)?;
    Ok(loglik_from_state(spec, params, data, &fs))
}

fn loglik_from_state(spec: &ModelSpec, params: &ParamVector, data: &SignalData, fs: &FilterState) -> f64 {
    let phi = params.precision;
    let kf = spec.k_max as f64;
    let constant = ln_gamma_raw(phi) - ln_gamma_raw(kf + phi);
    let mut total = 0.0;
    for t in fs.presample..data.len() {
        let mu = fs.mu[t];
        let yf = data.counts()[t] as f64;
        let a = mu * phi;
        let b = (1.0 - mu) * phi;
        total += data.ln_choose[t] + constant + ln_gamma_raw(yf + a) - ln_gamma_raw(a)
            + ln_gamma_raw(kf - yf + b)
            - ln_gamma_raw(b);
    }
    total
}

/// Score vector U(γ) in the canonical parameter ordering.
pub fn score(spec: &ModelSpec, params: &ParamVector, data: &SignalData) -> Result<DVector<f64>> {
    Ok(log_likelihood_and_score(spec, params, data)?.1)
}

/// One filter pass computing the log-likelihood and its gradient together.
pub fn log_likelihood_and_score(
    spec: &ModelSpec,
    params: &ParamVector,
    data: &SignalData,
) -> Result<(f64, DVector<f64>)> {
    let (loglik, score, _) = loglik_score_gain(spec, params, data)?;
    Ok((loglik, score))
}

/// Log-likelihood, score, and the MA feedback gain Σ|θ| · max dμ/dη along
/// the filtered trajectory. A gain at or above one marks an explosive error
/// recursion whose likelihood values are filter artifacts.
pub(crate) fn loglik_score_gain(
    spec: &ModelSpec,
    params: &ParamVector,
    data: &SignalData,
) -> Result<(f64, DVector<f64>, f64)> {
    let fs = filter(spec, params, data)?;
    let phi = params.precision;
    let kf = spec.k_max as f64;
    let n_mean = spec.n_mean_params();
    let dim = spec.n_params();
    let mut grad = DVector::zeros(dim);
    let mut loglik = 0.0;

    let ln_const = ln_gamma_raw(phi) - ln_gamma_raw(kf + phi);
    let psi_const = digamma_raw(phi) - digamma_raw(kf + phi);

    for t in fs.presample..data.len() {
        let mu = fs.mu[t];
        let yf = data.counts()[t] as f64;
        let a = mu * phi;
        let b = (1.0 - mu) * phi;
        let ya = yf + a;
        let kyb = kf - yf + b;

        loglik += data.ln_choose[t] + ln_const + ln_gamma_raw(ya) - ln_gamma_raw(a)
            + ln_gamma_raw(kyb)
            - ln_gamma_raw(b);

        let psi_ya = digamma_raw(ya);
        let psi_kyb = digamma_raw(kyb);
        let psi_a = digamma_raw(a);
        let psi_b = digamma_raw(b);

        let bracket = psi_ya - psi_kyb - psi_a + psi_b;
        let dl_dmu = phi * bracket;
        let weight = dl_dmu * fs.dmu[t];
        for d in 0..n_mean {
            grad[d] += weight * fs.sens[d][t];
        }
        grad[dim - 1] += mu * (psi_ya - psi_a) + (1.0 - mu) * (psi_kyb - psi_b) + psi_const;
    }
    let max_dmu = fs.dmu[fs.presample..].iter().fold(0.0f64, |a, &v| a.max(v));
    let ma_sum: f64 = params.ma.iter().map(|t| t.abs()).sum();
    Ok((loglik, grad, ma_sum * max_dmu))
}

/// Per-observation second-derivative pieces of the likelihood term.
struct ObsCurvature {
    /// ∂ℓ[n]/∂μ.
    dl_dmu: f64,
    /// ∂²ℓ[n]/∂μ².
    d2l_dmu2: f64,
    /// ∂²ℓ[n]/∂μ∂φ.
    d2l_dmu_dphi: f64,
    /// ∂²ℓ[n]/∂φ².
    d2l_dphi2: f64,
}

fn obs_curvature(spec: &ModelSpec, phi: f64, mu: f64, y: u32, trig_const: f64) -> ObsCurvature {
    let kf = spec.k_max as f64;
    let yf = y as f64;
    let a = mu * phi;
    let b = (1.0 - mu) * phi;
    let ya = yf + a;
    let kyb = kf - yf + b;

    let psi_ya = digamma_raw(ya);
    let psi_kyb = digamma_raw(kyb);
    let psi_a = digamma_raw(a);
    let psi_b = digamma_raw(b);
    let tri_ya = trigamma_raw(ya);
    let tri_kyb = trigamma_raw(kyb);
    let tri_a = trigamma_raw(a);
    let tri_b = trigamma_raw(b);

    let bracket = psi_ya - psi_kyb - psi_a + psi_b;
    ObsCurvature {
        dl_dmu: phi * bracket,
        d2l_dmu2: phi * phi * (tri_ya + tri_kyb - tri_a - tri_b),
        d2l_dmu_dphi: bracket + phi * (mu * (tri_ya - tri_a) + (1.0 - mu) * (tri_b - tri_kyb)),
        d2l_dphi2: trig_const
            + mu * mu * (tri_ya - tri_a)
            + (1.0 - mu) * (1.0 - mu) * (tri_kyb - tri_b),
    }
}

/// Upper-triangular storage for the symmetric second-order sensitivity tensor.
struct SecondOrder {
    series: Vec<Vec<f64>>,
    dim: usize,
}

impl SecondOrder {
    fn tri(&self, d1: usize, d2: usize) -> usize {
        let (a, b) = if d1 <= d2 { (d1, d2) } else { (d2, d1) };
        a * self.dim - a * (a + 1) / 2 + b
    }

    fn at(&self, d1: usize, d2: usize) -> &[f64] {
        &self.series[self.tri(d1, d2)]
    }
}

/// Second-order sensitivities ∂²η[n]/∂γ_{d1}∂γ_{d2} over all mean-parameter
/// pairs. With q = 0 every series is identically zero; with q > 0 even the
/// non-MA pairs are curved, because the MA feedback weight 1/g′(μ[n−s])
/// depends on every mean parameter through μ.
fn second_order_sensitivities(spec: &ModelSpec, params: &ParamVector, fs: &FilterState) -> SecondOrder {
    let n = fs.len();
    let m = fs.presample;
    let n_mean = spec.n_mean_params();
    let q = spec.ma_order;
    let ma_start = 1 + spec.n_covariates + spec.ar_order;
    let mut out = SecondOrder {
        series: vec![vec![0.0; if q == 0 { 0 } else { n }]; n_mean * (n_mean + 1) / 2],
        dim: n_mean,
    };
    if q == 0 {
        return out;
    }
    for t in m..n {
        for d1 in 0..n_mean {
            for d2 in d1..n_mean {
                let idx = out.tri(d1, d2);
                let mut v = 0.0;
                // Differentiating the error-term driver when a parameter is θ_k.
                if d2 >= ma_start {
                    let j = d2 - ma_start;
                    v -= fs.dmu[t - 1 - j] * fs.sens[d1][t - 1 - j];
                }
                if d1 >= ma_start {
                    let k = d1 - ma_start;
                    v -= fs.dmu[t - 1 - k] * fs.sens[d2][t - 1 - k];
                }
                for (s, &ma) in params.ma.iter().enumerate() {
                    let lag = t - 1 - s;
                    v += ma
                        * (fs.kappa[lag] * fs.dmu[lag] * fs.sens[d1][lag] * fs.sens[d2][lag]
                            - fs.dmu[lag] * out.series[idx][lag]);
                }
                out.series[idx][t] = v;
            }
        }
    }
    out
}

/// Conditional observed information matrix I(γ) = −Hessian of the
/// log-likelihood, symmetric by construction.
pub fn observed_information(
    spec: &ModelSpec,
    params: &ParamVector,
    data: &SignalData,
) -> Result<DMatrix<f64>> {
    let fs = filter(spec, params, data)?;
    let phi = params.precision;
    let kf = spec.k_max as f64;
    let dim = spec.n_params();
    let n_mean = spec.n_mean_params();
    let has_ma = spec.ma_order > 0;
    let d2eta = second_order_sensitivities(spec, params, &fs);
    let trig_const = trigamma_raw(phi) - trigamma_raw(kf + phi);

    let mut info = DMatrix::zeros(dim, dim);
    for t in fs.presample..data.len() {
        let mu = fs.mu[t];
        let dmu = fs.dmu[t];
        let c = obs_curvature(spec, phi, mu, data.counts()[t], trig_const);
        let w = c.dl_dmu * fs.kappa[t] * dmu - c.d2l_dmu2 * dmu * dmu;
        let v = c.dl_dmu * dmu;
        for d1 in 0..n_mean {
            let s1 = fs.sens[d1][t];
            for d2 in d1..n_mean {
                let mut entry = w * s1 * fs.sens[d2][t];
                if has_ma {
                    entry -= v * d2eta.at(d1, d2)[t];
                }
                info[(d1, d2)] += entry;
            }
            info[(d1, dim - 1)] -= s1 * dmu * c.d2l_dmu_dphi;
        }
        info[(dim - 1, dim - 1)] -= c.d2l_dphi2;
    }
    // Mirror the strict upper triangle for exact symmetry.
    for i in 0..dim {
        for j in 0..i {
            info[(i, j)] = info[(j, i)];
        }
    }
    Ok(info)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::betabinom::BetaBinomial;
    use crate::links::LinkKind;
    use approx::assert_abs_diff_eq;

    fn synthetic_data(n: usize, k: u32, l: usize) -> SignalData {
        let y: Vec<u32> = (0..n).map(|t| ((t * 53 + 17) % (k as usize + 1)) as u32).collect();
        let x: Vec<f64> = (0..n * l).map(|i| (0.31 * i as f64).sin()).collect();
        SignalData::new(y, x, l, k).unwrap()
    }

    fn fd_gradient<F: Fn(&[f64]) -> f64>(f: F, x: &[f64]) -> Vec<f64> {
        (0..x.len())
            .map(|j| {
                let h = 1e-5 * (1.0 + x[j].abs());
                let mut hi = x.to_vec();
                hi[j] += h;
                let mut lo = x.to_vec();
                lo[j] -= h;
                (f(&hi) - f(&lo)) / (2.0 * h)
            })
            .collect()
    }

    fn fd_hessian<F: Fn(&[f64]) -> f64>(f: F, x: &[f64]) -> DMatrix<f64> {
        let dim = x.len();
        // Second differences of a loglik of size ~1e3 are roundoff-limited
        // below h ~ 1e-4; this step keeps truncation and cancellation balanced.
        let h: Vec<f64> = x.iter().map(|v| 1e-4 * (1.0 + v.abs())).collect();
        let mut out = DMatrix::zeros(dim, dim);
        let f0 = f(x);
        for i in 0..dim {
            for j in i..dim {
                let val = if i == j {
                    let mut hi = x.to_vec();
                    hi[i] += h[i];
                    let mut lo = x.to_vec();
                    lo[i] -= h[i];
                    (f(&hi) - 2.0 * f0 + f(&lo)) / (h[i] * h[i])
                } else {
                    let mut pp = x.to_vec();
                    pp[i] += h[i];
                    pp[j] += h[j];
                    let mut pm = x.to_vec();
                    pm[i] += h[i];
                    pm[j] -= h[j];
                    let mut mp = x.to_vec();
                    mp[i] -= h[i];
                    mp[j] += h[j];
                    let mut mm = x.to_vec();
                    mm[i] -= h[i];
                    mm[j] -= h[j];
                    (f(&pp) - f(&pm) - f(&mp) + f(&mm)) / (4.0 * h[i] * h[j])
                };
                out[(i, j)] = val;
                out[(j, i)] = val;
            }
        }
        out
    }

    #[test]
    fn iid_model_reduces_to_plain_beta_binomial() {
        let spec = ModelSpec::new(0, 0, 0, LinkKind::Logit, 25).unwrap();
        let params = ParamVector::new(0.4, vec![], vec![], vec![], 6.0).unwrap();
        let data = synthetic_data(30, 25, 0);
        let mu = crate::links::link_inv(LinkKind::Logit, 0.4);
        let d = BetaBinomial::new(mu, 6.0, 25).unwrap();
        let expect: f64 = data.counts().iter().map(|&y| d.log_pf(y).unwrap()).sum();
        let got = log_likelihood(&spec, &params, &data).unwrap();
        assert_abs_diff_eq!(got, expect, epsilon = 1e-9 * expect.abs());
    }

    #[test]
    fn vacuous_conditioning_sums_to_zero() {
        let spec = ModelSpec::new(1, 1, 0, LinkKind::Logit, 25).unwrap();
        let params = ParamVector::new(0.4, vec![], vec![0.2], vec![0.1], 6.0).unwrap();
        let data = synthetic_data(1, 25, 0);
        assert_eq!(log_likelihood(&spec, &params, &data).unwrap(), 0.0);
    }

    #[test]
    fn per_term_values_are_log_probabilities() {
        let spec = ModelSpec::new(1, 0, 0, LinkKind::Logit, 255).unwrap();
        let params = ParamVector::new(1.0, vec![], vec![1.0], vec![], 20.0).unwrap();
        let data = synthetic_data(50, 255, 0);
        let fs = filter(&spec, &params, &data).unwrap();
        for t in 1..50 {
            let d = BetaBinomial::new(fs.mu[t], 20.0, 255).unwrap();
            let lp = d.log_pf(data.counts()[t]).unwrap();
            assert!(lp <= 0.0, "per-term log probability must be <= 0");
        }
    }

    /// The module's ground truth: the analytic score must match central
    /// finite differences of the log-likelihood.
    #[test]
    fn score_matches_finite_differences() {
        let cases: Vec<(ModelSpec, Vec<f64>)> = vec![
            // Scenario I shape: AR(1), no MA, high mean.
            (
                ModelSpec::new(1, 0, 0, LinkKind::Logit, 255).unwrap(),
                vec![1.0, 1.0, 20.0],
            ),
            // Scenario II shape: ARMA(1,1).
            (
                ModelSpec::new(1, 1, 0, LinkKind::Logit, 255).unwrap(),
                vec![0.2, 0.5, 0.3, 15.0],
            ),
            // Covariate plus ARMA, probit link.
            (
                ModelSpec::new(1, 1, 1, LinkKind::Probit, 25).unwrap(),
                vec![0.1, 0.4, 0.3, -0.2, 5.0],
            ),
            // Two MA lags, cloglog link.
            (
                ModelSpec::new(0, 2, 0, LinkKind::Cloglog, 25).unwrap(),
                vec![-0.5, 0.3, 0.2, 8.0],
            ),
        ];
        for (spec, gamma) in cases {
            let data = synthetic_data(90, spec.k_max, spec.n_covariates);
            let params = ParamVector::from_slice(&spec, &gamma).unwrap();
            let analytic = score(&spec, &params, &data).unwrap();
            let spec_c = spec;
            let data_c = data.clone();
            let fd = fd_gradient(
                |v| {
                    let p = ParamVector::from_slice(&spec_c, v).unwrap();
                    log_likelihood(&spec_c, &p, &data_c).unwrap()
                },
                &gamma,
            );
            let scale = 1.0 + fd.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
            for j in 0..gamma.len() {
                assert_abs_diff_eq!(analytic[j], fd[j], epsilon = 1e-6 * scale);
            }
        }
    }

    /// The Hessian oracle pins every sign convention in the information matrix.
    #[test]
    fn observed_information_matches_negative_fd_hessian() {
        let cases: Vec<(ModelSpec, Vec<f64>)> = vec![
            (
                ModelSpec::new(1, 0, 0, LinkKind::Logit, 255).unwrap(),
                vec![1.0, 1.0, 20.0],
            ),
            (
                ModelSpec::new(1, 1, 0, LinkKind::Logit, 255).unwrap(),
                vec![0.2, 0.5, 0.3, 15.0],
            ),
            (
                ModelSpec::new(1, 2, 1, LinkKind::Logit, 25).unwrap(),
                vec![0.1, 0.4, 0.3, 0.25, -0.2, 5.0],
            ),
            (
                ModelSpec::new(1, 1, 0, LinkKind::Cloglog, 25).unwrap(),
                vec![-0.6, 0.3, 0.2, 9.0],
            ),
        ];
        for (spec, gamma) in cases {
            let data = synthetic_data(90, spec.k_max, spec.n_covariates);
            let params = ParamVector::from_slice(&spec, &gamma).unwrap();
            let info = observed_information(&spec, &params, &data).unwrap();
            let spec_c = spec;
            let data_c = data.clone();
            let hess = fd_hessian(
                |v| {
                    let p = ParamVector::from_slice(&spec_c, v).unwrap();
                    log_likelihood(&spec_c, &p, &data_c).unwrap()
                },
                &gamma,
            );
            let scale = hess.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
            for i in 0..gamma.len() {
                for j in 0..gamma.len() {
                    assert_abs_diff_eq!(info[(i, j)], -hess[(i, j)], epsilon = 1e-4 * scale);
                }
            }
        }
    }

    #[test]
    fn information_is_exactly_symmetric() {
        let spec = ModelSpec::new(1, 1, 0, LinkKind::Logit, 255).unwrap();
        let params = ParamVector::new(0.2, vec![], vec![0.5], vec![0.3], 15.0).unwrap();
        let data = synthetic_data(70, 255, 0);
        let info = observed_information(&spec, &params, &data).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                assert_eq!(info[(i, j)], info[(j, i)]);
            }
        }
    }

    #[test]
    fn score_rows_match_fd_of_score_components() {
        // Cross-check: the information row equals the negative finite
        // difference of each score component.
        let spec = ModelSpec::new(1, 1, 0, LinkKind::Logit, 255).unwrap();
        let gamma = [0.2, 0.5, 0.3, 15.0];
        let data = synthetic_data(90, 255, 0);
        let params = ParamVector::from_slice(&spec, &gamma).unwrap();
        let info = observed_information(&spec, &params, &data).unwrap();
        let scale = info.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
        for j in 0..4 {
            let h = 1e-6 * (1.0 + gamma[j].abs());
            let mut hi = gamma;
            hi[j] += h;
            let mut lo = gamma;
            lo[j] -= h;
            let s_hi = score(&spec, &ParamVector::from_slice(&spec, &hi).unwrap(), &data).unwrap();
            let s_lo = score(&spec, &ParamVector::from_slice(&spec, &lo).unwrap(), &data).unwrap();
            for i in 0..4 {
                let fd = (s_hi[i] - s_lo[i]) / (2.0 * h);
                assert_abs_diff_eq!(info[(i, j)], -fd, epsilon = 1e-4 * scale);
            }
        }
    }

    #[test]
    fn ma_free_model_has_no_second_order_terms() {
        let spec = ModelSpec::new(2, 0, 0, LinkKind::Logit, 255).unwrap();
        let params = ParamVector::new(0.2, vec![], vec![0.3, 0.1], vec![], 15.0).unwrap();
        let data = synthetic_data(60, 255, 0);
        let fs = filter(&spec, &params, &data).unwrap();
        let d2 = second_order_sensitivities(&spec, &params, &fs);
        for block in &d2.series {
            assert!(block.is_empty());
        }
    }

    #[test]
    fn second_order_sensitivities_match_fd_of_first_order() {
        let spec = ModelSpec::new(1, 1, 0, LinkKind::Logit, 255).unwrap();
        let gamma: [f64; 4] = [0.2, 0.5, 0.3, 15.0];
        let data = synthetic_data(60, 255, 0);
        let params = ParamVector::from_slice(&spec, &gamma).unwrap();
        let fs = filter(&spec, &params, &data).unwrap();
        let d2 = second_order_sensitivities(&spec, &params, &fs);
        for d_wrt in 0..3 {
            let h = 1e-6 * (1.0 + gamma[d_wrt].abs());
            let mut hi = gamma;
            hi[d_wrt] += h;
            let mut lo = gamma;
            lo[d_wrt] -= h;
            let fs_hi = filter(&spec, &ParamVector::from_slice(&spec, &hi).unwrap(), &data).unwrap();
            let fs_lo = filter(&spec, &ParamVector::from_slice(&spec, &lo).unwrap(), &data).unwrap();
            for d in 0..3 {
                for t in 1..60 {
                    let fd = (fs_hi.sens[d][t] - fs_lo.sens[d][t]) / (2.0 * h);
                    assert_abs_diff_eq!(d2.at(d, d_wrt)[t], fd, epsilon = 1e-6 * (1.0 + fd.abs()));
                }
            }
        }
    }
}


