//! Beta-binomial distribution on {0, …, K}.
//!
//! Supports the classical (a, b) shape parameterization and the mean/precision
//! form a = μφ, b = (1−μ)φ used by the time-series model. The probability
//! function is evaluated entirely in log-gamma space so K = 255 with large φ
//! never overflows. Sampling composes a Beta(a, b) draw with a Binomial(K, p)
//! draw, which reproduces the mixture law exactly.

use rand::Rng;

use crate::error::{Error, Result};
use crate::numkernel::ln_gamma_raw;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BetaBinomial {
    mu: f64,
    phi: f64,
    k: u32,
}

impl BetaBinomial {
    /// Mean/precision parameterization: mean of Y/K is `mu`, precision `phi`.
    pub fn new(mu: f64, phi: f64, k: u32) -> Result<Self> {
        if !(mu > 0.0 && mu < 1.0) {
            return Err(Error::Domain {
                what: "beta-binomial mean must lie in (0,1)",
                value: mu,
            });
        }
        if !(phi > 0.0) {
            return Err(Error::Domain {
                what: "beta-binomial precision must be positive",
                value: phi,
            });
        }
        if k < 1 {
            return Err(Error::Domain {
                what: "beta-binomial needs K >= 1",
                value: k as f64,
            });
        }
        Ok(Self { mu, phi, k })
    }

    /// Shape parameterization with a = μφ, b = (1−μ)φ.
    pub fn from_shapes(a: f64, b: f64, k: u32) -> Result<Self> {
        if !(a > 0.0) || !(b > 0.0) {
            return Err(Error::Domain {
                what: "beta-binomial shapes must be positive",
                value: if a > 0.0 { b } else { a },
            });
        }
        Self::new(a / (a + b), a + b, k)
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn phi(&self) -> f64 {
        self.phi
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn shape_a(&self) -> f64 {
        self.mu * self.phi
    }

    pub fn shape_b(&self) -> f64 {
        (1.0 - self.mu) * self.phi
    }

    /// log p(y) for y in {0, …, K}.
    pub fn log_pf(&self, y: u32) -> Result<f64> {
        if y > self.k {
            return Err(Error::Domain {
                what: "beta-binomial outcome must satisfy 0 <= y <= K",
                value: y as f64,
            });
        }
        let kf = self.k as f64;
        let yf = y as f64;
        let a = self.shape_a();
        let b = self.shape_b();
        let ln_choose = ln_gamma_raw(kf + 1.0) - ln_gamma_raw(yf + 1.0) - ln_gamma_raw(kf - yf + 1.0);
        Ok(ln_choose + ln_gamma_raw(self.phi) - ln_gamma_raw(kf + self.phi)
            + ln_gamma_raw(yf + a)
            + ln_gamma_raw(kf - yf + b)
            - ln_gamma_raw(a)
            - ln_gamma_raw(b))
    }

    pub fn pf(&self, y: u32) -> Result<f64> {
        Ok(self.log_pf(y)?.exp())
    }

    /// Mean μK and variance (μ−μ²)·K·(K+φ)/(1+φ).
    pub fn moments(&self) -> (f64, f64) {
        let kf = self.k as f64;
        let mean = self.mu * kf;
        let variance = (self.mu - self.mu * self.mu) * kf * (kf + self.phi) / (1.0 + self.phi);
        (mean, variance)
    }

    /// Exact draw: p ~ Beta(μφ, (1−μ)φ), then y ~ Binomial(K, p).
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> u32 {
        let p = sample_beta(self.shape_a(), self.shape_b(), rng);
        sample_binomial_inversion(self.k, p, rng)
    }
}

/// Standard normal variate by the Marsaglia polar method.
fn sample_standard_normal<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    loop {
        let u = 2.0 * rng.random::<f64>() - 1.0;
        let v = 2.0 * rng.random::<f64>() - 1.0;
        let s = u * u + v * v;
        if s > 0.0 && s < 1.0 {
            return u * (-2.0 * s.ln() / s).sqrt();
        }
    }
}

/// Gamma(shape, 1) via Marsaglia–Tsang, with the power boost for shape < 1.
fn sample_gamma<R: Rng + ?Sized>(shape: f64, rng: &mut R) -> f64 {
    debug_assert!(shape > 0.0);
    if shape < 1.0 {
        let u: f64 = rng.random();
        return sample_gamma(shape + 1.0, rng) * u.powf(1.0 / shape);
    }
    let d = shape - 1.0 / 3.0;
    let c = 1.0 / (9.0 * d).sqrt();
    loop {
        let x = sample_standard_normal(rng);
        let t = 1.0 + c * x;
        if t <= 0.0 {
            continue;
        }
        let v = t * t * t;
        let u: f64 = rng.random();
        let x2 = x * x;
        if u < 1.0 - 0.0331 * x2 * x2 {
            return d * v;
        }
        if u.ln() < 0.5 * x2 + d * (1.0 - v + v.ln()) {
            return d * v;
        }
    }
}

fn sample_beta<R: Rng + ?Sized>(a: f64, b: f64, rng: &mut R) -> f64 {
    let ga = sample_gamma(a, rng);
    let gb = sample_gamma(b, rng);
    if ga + gb == 0.0 {
        // Both shapes extremely small; the mixture mean is the only sane value.
        return a / (a + b);
    }
    ga / (ga + gb)
}

/// Binomial(K, p) by CDF inversion; K is bounded by 255 in this crate's use.
fn sample_binomial_inversion<R: Rng + ?Sized>(k: u32, p: f64, rng: &mut R) -> u32 {
    if !(p > 0.0) {
        return 0;
    }
    if p >= 1.0 {
        return k;
    }
    // Mirror large p so (1−p)^K cannot underflow.
    if p > 0.5 {
        return k - sample_binomial_inversion(k, 1.0 - p, rng);
    }
    let q = 1.0 - p;
    let ratio = p / q;
    let u: f64 = rng.random();
    let mut pmf = q.powi(k as i32);
    let mut cdf = pmf;
    let mut y = 0u32;
    while cdf < u && y < k {
        pmf *= ratio * (k - y) as f64 / (y + 1) as f64;
        y += 1;
        cdf += pmf;
    }
    y
}
