//! Classical linear-model detector: ordinary least squares of the signal on
//! (1, s) with i.i.d. Gaussian errors and a Wald test on the s coefficient.

use crate::error::{Error, Result};
use crate::infer::{detection_threshold, DetectionReport};
use crate::numkernel::chi2_sf;

/// Wald detector from the regression y = b0 + b1 s + e.
pub fn gaussian_detect(y: &[f64], candidate: &[f64], pfa: f64) -> Result<DetectionReport> {
    let n = y.len();
    if candidate.len() != n {
        return Err(Error::Domain {
            what: "candidate signal length must match the data",
            value: candidate.len() as f64,
        });
    }
    if n < 10 {
        return Err(Error::InsufficientData {
            what: "gaussian_detect",
            needed: 10,
            got: n,
        });
    }
    let nf = n as f64;
    let mean_s = candidate.iter().sum::<f64>() / nf;
    let mean_y = y.iter().sum::<f64>() / nf;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for t in 0..n {
        let dx = candidate[t] - mean_s;
        sxx += dx * dx;
        sxy += dx * (y[t] - mean_y);
    }
    if sxx == 0.0 {
        return Err(Error::DegenerateSeries("constant candidate signal cannot be tested"));
    }
    let slope = sxy / sxx;
    let intercept = mean_y - slope * mean_s;
    let mut rss = 0.0;
    for t in 0..n {
        let r = y[t] - intercept - slope * candidate[t];
        rss += r * r;
    }
    let sigma2 = rss / (nf - 2.0);
    let var_slope = sigma2 / sxx;
    let stat = if var_slope == 0.0 {
        if slope == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    } else {
        slope * slope / var_slope
    };
    let threshold = detection_threshold(pfa, 1)?;
    Ok(DetectionReport {
        wald_stat: stat,
        dof: 1,
        threshold,
        p_value: chi2_sf(stat, 1),
        detected: stat > threshold,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn perfect_fit_always_detects() {
        let s: Vec<f64> = (0..50).map(|t| (0.3 * t as f64).sin()).collect();
        let y: Vec<f64> = s.iter().map(|v| 5.0 * v).collect();
        let report = gaussian_detect(&y, &s, 1e-9).unwrap();
        // RSS is zero up to rounding, so the statistic blows up and the
        // signal is detected at any false-alarm probability.
        assert!(report.wald_stat > 1e12, "stat {}", report.wald_stat);
        assert!(report.detected);
    }

    #[test]
    fn constant_candidate_is_rejected() {
        let y: Vec<f64> = (0..50).map(|t| t as f64).collect();
        let s = vec![2.0; 50];
        assert!(matches!(
            gaussian_detect(&y, &s, 0.05),
            Err(Error::DegenerateSeries(_))
        ));
    }

    #[test]
    fn short_series_is_rejected() {
        let y = vec![1.0; 5];
        let s = vec![0.0, 1.0, 0.0, 1.0, 0.0];
        assert!(matches!(
            gaussian_detect(&y, &s, 0.05),
            Err(Error::InsufficientData { .. })
        ));
    }

    #[test]
    fn orthogonal_noise_rarely_detects() {
        // Deterministic pseudo-noise, 200 trials at pfa 0.05.
        let mut state = 77u64;
        let mut unit = move || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state >> 11) as f64 / (1u64 << 53) as f64
        };
        let s: Vec<f64> = (0..100)
            .map(|t| (2.0 * std::f64::consts::PI * 0.25 * t as f64).cos())
            .collect();
        let mut detections = 0;
        for _ in 0..200 {
            let y: Vec<f64> = (0..100)
                .map(|_| {
                    let u: f64 = unit().max(1e-12);
                    let v: f64 = unit();
                    (-2.0 * u.ln()).sqrt() * (2.0 * std::f64::consts::PI * v).cos()
                })
                .collect();
            if gaussian_detect(&y, &s, 0.05).unwrap().detected {
                detections += 1;
            }
        }
        let rate = detections as f64 / 200.0;
        assert!(rate < 0.12, "size {rate} too far above nominal 0.05");
    }
}
