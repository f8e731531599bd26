//! Monte Carlo experiment drivers: estimation tables, empirical size and ROC
//! comparison of the three detectors.
//!
//! Replications run on the rayon pool; every replication owns an independent
//! ChaCha stream derived from the master seed, so results are reproducible
//! and independent of the worker count.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::baselines;
use crate::error::{Error, Result};
use crate::estimate::{confidence_interval, fit, FitOptions};
use crate::infer::{detection_threshold, wald_statistic};
use crate::links::LinkKind;
use crate::model::{ModelSpec, ParamVector};
use crate::sim::{cosine_covariate, replication_rng, simulate};

/// Sinusoidal candidate signal description.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SignalSpec {
    /// Amplitude of the embedded covariate (the coefficient under test).
    pub amplitude: f64,
    /// Frequency of cos(2π f n).
    pub frequency: f64,
}

/// One Monte Carlo experiment definition.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub name: String,
    pub spec: ModelSpec,
    pub true_params: ParamVector,
    /// Present in detection studies; absent for pure estimation tables.
    pub signal: Option<SignalSpec>,
    pub n: usize,
    pub replications: usize,
    pub seed: u64,
    /// Nominal false-alarm grid for ROC studies, sorted, within [0,1].
    pub pfa_grid: Vec<f64>,
    /// Confidence level 1 − ci_alpha used for coverage rates.
    pub ci_alpha: f64,
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<()> {
        if self.replications < 1 {
            return Err(Error::Domain {
                what: "replications must be >= 1",
                value: self.replications as f64,
            });
        }
        if !self.true_params.matches(&self.spec) {
            return Err(Error::Domain {
                what: "true parameters do not match the scenario spec",
                value: self.true_params.dim() as f64,
            });
        }
        let mut prev = -1.0;
        for &a in &self.pfa_grid {
            if !(0.0..=1.0).contains(&a) || a < prev {
                return Err(Error::Domain {
                    what: "pfa grid must be sorted within [0,1]",
                    value: a,
                });
            }
            prev = a;
        }
        Ok(())
    }
}

/// Nominal false-alarm grid used in the detection studies.
pub fn default_pfa_grid() -> Vec<f64> {
    vec![0.0, 0.05, 0.1, 0.15, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0]
}

/// AR(1), high mean: intercept 1, AR 1, precision 20, K = 255.
pub fn scenario_i(n: usize, replications: usize, seed: u64) -> ScenarioConfig {
    ScenarioConfig {
        name: "scenario-i".into(),
        spec: ModelSpec::new(1, 0, 0, LinkKind::Logit, 255).unwrap(),
        true_params: ParamVector::new(1.0, vec![], vec![1.0], vec![], 20.0).unwrap(),
        signal: None,
        n,
        replications,
        seed,
        pfa_grid: vec![],
        ci_alpha: 0.10,
    }
}

/// ARMA(1,1), mid-range mean: intercept 0.2, AR 0.5, MA 0.3, precision 15.
pub fn scenario_ii(n: usize, replications: usize, seed: u64) -> ScenarioConfig {
    ScenarioConfig {
        name: "scenario-ii".into(),
        spec: ModelSpec::new(1, 1, 0, LinkKind::Logit, 255).unwrap(),
        true_params: ParamVector::new(0.2, vec![], vec![0.5], vec![0.3], 15.0).unwrap(),
        signal: None,
        n,
        replications,
        seed,
        pfa_grid: vec![],
        ci_alpha: 0.10,
    }
}

/// Detection study on the ARMA(1,1) base: amplitude 0.5 at frequency 0.5.
pub fn scenario_iii(n: usize, replications: usize, seed: u64) -> ScenarioConfig {
    ScenarioConfig {
        name: "scenario-iii".into(),
        spec: ModelSpec::new(1, 1, 1, LinkKind::Logit, 255).unwrap(),
        true_params: ParamVector::new(0.2, vec![0.5], vec![0.5], vec![0.3], 15.0).unwrap(),
        signal: Some(SignalSpec {
            amplitude: 0.5,
            frequency: 0.5,
        }),
        n,
        replications,
        seed,
        pfa_grid: default_pfa_grid(),
        ci_alpha: 0.10,
    }
}

/// Detection study with strong persistence: amplitude 0.1 at frequency 0.7,
/// AR 2, MA 1, precision 50.
pub fn scenario_iv(n: usize, replications: usize, seed: u64) -> ScenarioConfig {
    ScenarioConfig {
        name: "scenario-iv".into(),
        spec: ModelSpec::new(1, 1, 1, LinkKind::Logit, 255).unwrap(),
        true_params: ParamVector::new(1.0, vec![0.1], vec![2.0], vec![1.0], 50.0).unwrap(),
        signal: Some(SignalSpec {
            amplitude: 0.1,
            frequency: 0.7,
        }),
        n,
        replications,
        seed,
        pfa_grid: default_pfa_grid(),
        ci_alpha: 0.10,
    }
}

/// Per-parameter Monte Carlo summary.
#[derive(Debug, Clone, Serialize)]
pub struct ParamStats {
    pub name: String,
    pub truth: f64,
    pub mean: f64,
    pub bias: f64,
    pub mse: f64,
    /// Fraction of converged replications whose interval covers the truth.
    pub coverage: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct EstimationSummary {
    pub scenario: String,
    pub n: usize,
    pub replications: usize,
    pub failures: usize,
    pub ci_alpha: f64,
    pub stats: Vec<ParamStats>,
}

/// Estimation study: simulate → fit → aggregate mean, bias, MSE, coverage.
pub fn mc_estimation(config: &ScenarioConfig) -> Result<EstimationSummary> {
    config.validate()?;
    let spec = config.spec;
    let dim = spec.n_params();
    let truth = config.true_params.to_vec();

    let per_rep: Vec<Option<(Vec<f64>, Vec<(f64, f64)>)>> = (0..config.replications)
        .into_par_iter()
        .map(|rep| {
            let mut rng = replication_rng(config.seed, rep as u64);
            let cov = (spec.n_covariates > 0).then(|| {
                let signal = config.signal.as_ref().expect("covariate spec without signal");
                cosine_covariate(&spec, config.n, signal.frequency)
            });
            let data = simulate(&spec, &config.true_params, config.n, cov.as_deref(), &mut rng).ok()?;
            let fitted = fit(&spec, &data, &FitOptions::default()).ok()?;
            if !fitted.converged {
                return None;
            }
            let ci = confidence_interval(&fitted, config.ci_alpha).ok()?;
            Some((fitted.estimates(), ci))
        })
        .collect();

    let mut failures = 0;
    let mut count = 0usize;
    let mut sum = vec![0.0; dim];
    let mut sq_err = vec![0.0; dim];
    let mut covered = vec![0usize; dim];
    for rep in per_rep {
        match rep {
            Some((est, ci)) => {
                count += 1;
                for j in 0..dim {
                    sum[j] += est[j];
                    let err = est[j] - truth[j];
                    sq_err[j] += err * err;
                    if ci[j].0 <= truth[j] && truth[j] <= ci[j].1 {
                        covered[j] += 1;
                    }
                }
            }
            None => failures += 1,
        }
    }
    if count == 0 {
        return Err(Error::DegenerateSeries("every replication failed to fit"));
    }
    let cf = count as f64;
    let stats = (0..dim)
        .map(|j| ParamStats {
            name: spec.param_name(j),
            truth: truth[j],
            mean: sum[j] / cf,
            bias: sum[j] / cf - truth[j],
            mse: sq_err[j] / cf,
            coverage: covered[j] as f64 / cf,
        })
        .collect();
    Ok(EstimationSummary {
        scenario: config.name.clone(),
        n: config.n,
        replications: config.replications,
        failures,
        ci_alpha: config.ci_alpha,
        stats,
    })
}

/// One operating point of a detector.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct RocPoint {
    /// Nominal false-alarm probability setting the threshold.
    pub nominal: f64,
    /// Empirical size: rejection rate on signal-absent data.
    pub pfa_hat: f64,
    /// Detection probability: rejection rate on signal-present data.
    pub pd: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct RocCurve {
    pub detector: String,
    pub points: Vec<RocPoint>,
    /// Trapezoid area over the (pfa_hat, pd) points with forced endpoints.
    pub area: f64,
    pub failures: usize,
}

impl RocCurve {
    /// Empirical size at a nominal level present in the grid.
    pub fn empirical_size(&self, nominal: f64) -> Option<f64> {
        self.points
            .iter()
            .find(|p| (p.nominal - nominal).abs() < 1e-12)
            .map(|p| p.pfa_hat)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RocStudy {
    pub scenario: String,
    pub n: usize,
    pub replications: usize,
    pub bbarma: RocCurve,
    pub arma: RocCurve,
    pub gaussian: RocCurve,
}

/// Area by trapezoid over sorted points, with (0,0) and (1,1) inserted.
pub fn trapezoid_area(points: &[(f64, f64)]) -> f64 {
    let mut pts: Vec<(f64, f64)> = points.to_vec();
    pts.push((0.0, 0.0));
    pts.push((1.0, 1.0));
    pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    pts.dedup();
    let mut area = 0.0;
    for w in pts.windows(2) {
        area += (w[1].0 - w[0].0) * (w[1].1 + w[0].1) * 0.5;
    }
    area
}

fn build_curve(name: &str, grid: &[f64], present: &[f64], absent: &[f64], failures: usize) -> Result<RocCurve> {
    let mut points = Vec::with_capacity(grid.len());
    for &nominal in grid {
        let threshold = detection_threshold(nominal, 1)?;
        let pd = rate_above(present, threshold);
        let pfa_hat = rate_above(absent, threshold);
        points.push(RocPoint {
            nominal,
            pfa_hat,
            pd,
        });
    }
    let area = trapezoid_area(&points.iter().map(|p| (p.pfa_hat, p.pd)).collect::<Vec<_>>());
    Ok(RocCurve {
        detector: name.to_string(),
        points,
        area,
        failures,
    })
}

fn rate_above(stats: &[f64], threshold: f64) -> f64 {
    if stats.is_empty() {
        return 0.0;
    }
    stats.iter().filter(|&&s| s > threshold).count() as f64 / stats.len() as f64
}

/// Detection study: per replication, simulate one signal-present record and
/// one signal-absent record, compute each detector's Wald statistic on both,
/// then sweep the nominal grid. The signal-absent leg fitted with the
/// candidate covariate is exactly the empirical-size construction.
pub fn mc_roc(config: &ScenarioConfig) -> Result<RocStudy> {
    config.validate()?;
    let signal = config.signal.as_ref().ok_or(Error::Domain {
        what: "roc study needs a signal specification",
        value: f64::NAN,
    })?;
    if config.spec.n_covariates != 1 {
        return Err(Error::Domain {
            what: "roc study expects the candidate signal as the single covariate",
            value: config.spec.n_covariates as f64,
        });
    }
    let spec = config.spec;
    let burn = crate::sim::burn_in(&spec);
    let cov_full = cosine_covariate(&spec, config.n, signal.frequency);
    let candidate: Vec<f64> = cov_full[burn..].to_vec();
    let mut absent_params = config.true_params.clone();
    absent_params.covariates[0] = 0.0;

    struct RepStats {
        bbarma: [Option<f64>; 2],
        arma: [Option<f64>; 2],
        gaussian: [Option<f64>; 2],
    }

    let per_rep: Vec<RepStats> = (0..config.replications)
        .into_par_iter()
        .map(|rep| {
            let mut out = RepStats {
                bbarma: [None, None],
                arma: [None, None],
                gaussian: [None, None],
            };
            for (leg, params) in [(0usize, &config.true_params), (1usize, &absent_params)] {
                let mut rng = replication_rng(config.seed, (rep * 2 + leg) as u64);
                let data = match simulate(&spec, params, config.n, Some(&cov_full), &mut rng) {
                    Ok(d) => d,
                    Err(_) => continue,
                };
                // Model-based detector.
                if let Ok(fitted) = fit(&spec, &data, &FitOptions::default()) {
                    if fitted.converged {
                        if let Ok(stat) = wald_statistic(&fitted, &[spec.idx_covariate(0)], &[0.0]) {
                            out.bbarma[leg] = Some(stat);
                        }
                    }
                }
                // ARMA detector on the scaled signal with the same orders.
                if let Ok(af) = baselines::arma_fit(data.scaled(), &candidate, 1, spec.ar_order, spec.ma_order) {
                    if af.converged {
                        if let Ok(stat) = af.wald_statistic(1) {
                            out.arma[leg] = Some(stat);
                        }
                    }
                }
                // Gaussian linear detector.
                if let Ok(report) = baselines::gaussian_detect(data.scaled(), &candidate, 0.5) {
                    out.gaussian[leg] = Some(report.wald_stat);
                }
            }
            out
        })
        .collect();

    let collect = |pick: &dyn Fn(&RepStats) -> [Option<f64>; 2]| -> (Vec<f64>, Vec<f64>, usize) {
        let mut present = Vec::new();
        let mut absent = Vec::new();
        let mut failures = 0;
        for rep in &per_rep {
            let [p, a] = pick(rep);
            match p {
                Some(v) => present.push(v),
                None => failures += 1,
            }
            match a {
                Some(v) => absent.push(v),
                None => failures += 1,
            }
        }
        (present, absent, failures)
    };

    let (bp, ba, bf) = collect(&|r| r.bbarma);
    let (ap, aa, af) = collect(&|r| r.arma);
    let (gp, ga, gf) = collect(&|r| r.gaussian);
    Ok(RocStudy {
        scenario: config.name.clone(),
        n: config.n,
        replications: config.replications,
        bbarma: build_curve("bbarma", &config.pfa_grid, &bp, &ba, bf)?,
        arma: build_curve("arma", &config.pfa_grid, &ap, &aa, af)?,
        gaussian: build_curve("gaussian", &config.pfa_grid, &gp, &ga, gf)?,
    })
}
