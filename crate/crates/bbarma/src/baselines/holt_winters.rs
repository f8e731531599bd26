//! Additive Holt-Winters smoothing with grid-searched constants.
//!
//! Level starts at the first-season mean, trend at zero, seasonals at the
//! first-season deviations. Seasonal terms are renormalized to sum to zero
//! after each update. Smoothing constants come from a 0.05-step grid search
//! on in-sample one-step squared error.

use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct HoltWinters {
    pub level: f64,
    pub trend: f64,
    pub seasonal: Vec<f64>,
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub sse: f64,
    period: usize,
    n_obs: usize,
}

impl HoltWinters {
    /// Fit on `y` with the given seasonal period.
    pub fn fit(y: &[f64], period: usize) -> Result<Self> {
        if period < 1 {
            return Err(Error::Domain {
                what: "seasonal period must be at least 1",
                value: period as f64,
            });
        }
        if y.len() < 2 * period {
            return Err(Error::InsufficientData {
                what: "holt-winters",
                needed: 2 * period,
                got: y.len(),
            });
        }
        let mut best: Option<HoltWinters> = None;
        let grid: Vec<f64> = (1..20).map(|i| i as f64 * 0.05).collect();
        for &alpha in &grid {
            for &beta in &grid {
                for &gamma in &grid {
                    let cand = run(y, period, alpha, beta, gamma);
                    if best.as_ref().map_or(true, |b| cand.sse < b.sse) {
                        best = Some(cand);
                    }
                }
            }
        }
        Ok(best.expect("non-empty grid"))
    }

    /// Forecast: level + h · trend + matching seasonal.
    pub fn forecast(&self, horizon: usize) -> Vec<f64> {
        (1..=horizon)
            .map(|h| {
                let idx = (self.n_obs - 1 + h) % self.period;
                self.level + h as f64 * self.trend + self.seasonal[idx]
            })
            .collect()
    }
}

fn run(y: &[f64], period: usize, alpha: f64, beta: f64, gamma: f64) -> HoltWinters {
    let mut level = y[..period].iter().sum::<f64>() / period as f64;
    let mut trend = 0.0;
    let mut seasonal: Vec<f64> = y[..period].iter().map(|v| v - level).collect();
    let mut sse = 0.0;
    for t in period..y.len() {
        let idx = t % period;
        let pred = level + trend + seasonal[idx];
        let err = y[t] - pred;
        sse += err * err;
        let new_level = alpha * (y[t] - seasonal[idx]) + (1.0 - alpha) * (level + trend);
        let new_trend = beta * (new_level - level) + (1.0 - beta) * trend;
        seasonal[idx] = gamma * (y[t] - level - trend) + (1.0 - gamma) * seasonal[idx];
        level = new_level;
        trend = new_trend;
        // Keep the additive seasonals centered.
        let mean_s = seasonal.iter().sum::<f64>() / period as f64;
        if mean_s != 0.0 {
            for s in seasonal.iter_mut() {
                *s -= mean_s;
            }
            level += mean_s;
        }
    }
    HoltWinters {
        level,
        trend,
        seasonal,
        alpha,
        beta,
        gamma,
        sse,
        period,
        n_obs: y.len(),
    }
}

/// Fit then forecast in one call.
pub fn holt_winters_fit_forecast(y: &[f64], period: usize, horizon: usize) -> Result<Vec<f64>> {
    Ok(HoltWinters::fit(y, period)?.forecast(horizon))
}
