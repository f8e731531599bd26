//! Model specification, parameter vector and signal container.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::links::LinkKind;
use crate::numkernel::ln_gamma_raw;

/// Orders, covariate layout, link and signal ceiling of a model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelSpec {
    /// Autoregressive order p.
    pub ar_order: usize,
    /// Moving-average order q.
    pub ma_order: usize,
    /// Number of covariate columns l.
    pub n_covariates: usize,
    pub link: LinkKind,
    /// Maximum signal value K (255 for 8-bit signals).
    pub k_max: u32,
}

impl ModelSpec {
    pub fn new(ar_order: usize, ma_order: usize, n_covariates: usize, link: LinkKind, k_max: u32) -> Result<Self> {
        if k_max < 1 {
            return Err(Error::Domain {
                what: "signal ceiling K must be >= 1",
                value: k_max as f64,
            });
        }
        Ok(Self {
            ar_order,
            ma_order,
            n_covariates,
            link,
            k_max,
        })
    }

    /// Number of conditioning observations m = max(p, q).
    pub fn presample(&self) -> usize {
        self.ar_order.max(self.ma_order)
    }

    /// Total parameter count l + p + q + 2.
    pub fn n_params(&self) -> usize {
        self.n_covariates + self.ar_order + self.ma_order + 2
    }

    /// Parameters entering the linear predictor (all but the precision).
    pub fn n_mean_params(&self) -> usize {
        self.n_params() - 1
    }

    pub fn idx_intercept(&self) -> usize {
        0
    }

    pub fn idx_covariate(&self, k: usize) -> usize {
        debug_assert!(k < self.n_covariates);
        1 + k
    }

    pub fn idx_ar(&self, i: usize) -> usize {
        debug_assert!(i < self.ar_order);
        1 + self.n_covariates + i
    }

    pub fn idx_ma(&self, j: usize) -> usize {
        debug_assert!(j < self.ma_order);
        1 + self.n_covariates + self.ar_order + j
    }

    pub fn idx_precision(&self) -> usize {
        self.n_params() - 1
    }

    /// Human-readable name of the parameter at a flat index.
    pub fn param_name(&self, idx: usize) -> String {
        let l = self.n_covariates;
        let p = self.ar_order;
        if idx == 0 {
            "intercept".to_string()
        } else if idx < 1 + l {
            format!("beta{}", idx)
        } else if idx < 1 + l + p {
            format!("ar{}", idx - l)
        } else if idx < self.n_params() - 1 {
            format!("ma{}", idx - l - p)
        } else {
            "precision".to_string()
        }
    }
}

/// Full parameter vector in the order (intercept, covariates, AR, MA, precision).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamVector {
    pub intercept: f64,
    pub covariates: Vec<f64>,
    pub ar: Vec<f64>,
    pub ma: Vec<f64>,
    pub precision: f64,
}

impl ParamVector {
    pub fn new(intercept: f64, covariates: Vec<f64>, ar: Vec<f64>, ma: Vec<f64>, precision: f64) -> Result<Self> {
        if !(precision > 0.0) {
            return Err(Error::Domain {
                what: "precision must be positive",
                value: precision,
            });
        }
        Ok(Self {
            intercept,
            covariates,
            ar,
            ma,
            precision,
        })
    }

    pub fn dim(&self) -> usize {
        1 + self.covariates.len() + self.ar.len() + self.ma.len() + 1
    }

    pub fn matches(&self, spec: &ModelSpec) -> bool {
        self.covariates.len() == spec.n_covariates
            && self.ar.len() == spec.ar_order
            && self.ma.len() == spec.ma_order
    }

    /// Flatten into the canonical ordering.
    pub fn to_vec(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(self.dim());
        v.push(self.intercept);
        v.extend_from_slice(&self.covariates);
        v.extend_from_slice(&self.ar);
        v.extend_from_slice(&self.ma);
        v.push(self.precision);
        v
    }

    /// Rebuild from the canonical ordering.
    pub fn from_slice(spec: &ModelSpec, values: &[f64]) -> Result<Self> {
        if values.len() != spec.n_params() {
            return Err(Error::Domain {
                what: "parameter slice length does not match the model spec",
                value: values.len() as f64,
            });
        }
        let l = spec.n_covariates;
        let p = spec.ar_order;
        let q = spec.ma_order;
        ParamVector::new(
            values[0],
            values[1..1 + l].to_vec(),
            values[1 + l..1 + l + p].to_vec(),
            values[1 + l + p..1 + l + p + q].to_vec(),
            values[1 + l + p + q],
        )
    }
}

/// Observed signal plus covariate matrix.
///
/// The scaled signal y/K is computed once here and reused by every filter
/// pass; `ln_choose` caches the outcome-dependent part of the log-likelihood.
#[derive(Debug, Clone, PartialEq)]
pub struct SignalData {
    y: Vec<u32>,
    y_star: Vec<f64>,
    /// Row-major N x l covariate matrix.
    x: Vec<f64>,
    n_covariates: usize,
    k_max: u32,
    pub(crate) ln_choose: Vec<f64>,
}

impl SignalData {
    pub fn new(y: Vec<u32>, x: Vec<f64>, n_covariates: usize, k_max: u32) -> Result<Self> {
        if k_max < 1 {
            return Err(Error::Domain {
                what: "signal ceiling K must be >= 1",
                value: k_max as f64,
            });
        }
        let n = y.len();
        if n_covariates > 0 && x.len() != n * n_covariates {
            return Err(Error::Domain {
                what: "covariate matrix size must be N * n_covariates",
                value: x.len() as f64,
            });
        }
        for (i, &yi) in y.iter().enumerate() {
            if yi > k_max {
                return Err(Error::Ingest {
                    row: i + 1,
                    message: format!("y = {yi} exceeds the declared maximum K = {k_max}"),
                });
            }
        }
        let kf = k_max as f64;
        let y_star = y.iter().map(|&v| v as f64 / kf).collect();
        let ln_k1 = ln_gamma_raw(kf + 1.0);
        let ln_choose = y
            .iter()
            .map(|&v| {
                let yf = v as f64;
                ln_k1 - ln_gamma_raw(yf + 1.0) - ln_gamma_raw(kf - yf + 1.0)
            })
            .collect();
        Ok(Self {
            y,
            y_star,
            x: if n_covariates == 0 { Vec::new() } else { x },
            n_covariates,
            k_max,
            ln_choose,
        })
    }

    /// Signal without covariates.
    pub fn from_counts(y: Vec<u32>, k_max: u32) -> Result<Self> {
        Self::new(y, Vec::new(), 0, k_max)
    }

    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }

    pub fn k_max(&self) -> u32 {
        self.k_max
    }

    pub fn n_covariates(&self) -> usize {
        self.n_covariates
    }

    pub fn counts(&self) -> &[u32] {
        &self.y
    }

    /// Scaled signal y/K.
    pub fn scaled(&self) -> &[f64] {
        &self.y_star
    }

    pub fn covariate_row(&self, n: usize) -> &[f64] {
        if self.n_covariates == 0 {
            &[]
        } else {
            &self.x[n * self.n_covariates..(n + 1) * self.n_covariates]
        }
    }

    /// Consistency check against a model spec.
    pub(crate) fn check_spec(&self, spec: &ModelSpec) -> Result<()> {
        if spec.k_max != self.k_max {
            return Err(Error::Domain {
                what: "model K and data K disagree",
                value: spec.k_max as f64,
            });
        }
        if spec.n_covariates != self.n_covariates {
            return Err(Error::Domain {
                what: "model covariate count and data covariate count disagree",
                value: spec.n_covariates as f64,
            });
        }
        Ok(())
    }
}
