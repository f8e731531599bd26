//! Link functions g: (0,1) → ℝ with first and second derivatives.
//!
//! The predictor recursion needs g and g⁻¹; the score needs dμ/dη = 1/g′(μ);
//! the information matrix additionally needs g″ through κ = g″/(g′)².

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numkernel;

/// Inverse links are clamped to [MU_EPS, 1 − MU_EPS] so that μφ and (1−μ)φ
/// stay strictly positive whatever the predictor does.
pub const MU_EPS: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LinkKind {
    Logit,
    Probit,
    Cloglog,
}

impl fmt::Display for LinkKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            LinkKind::Logit => "logit",
            LinkKind::Probit => "probit",
            LinkKind::Cloglog => "cloglog",
        };
        f.write_str(name)
    }
}

impl FromStr for LinkKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "logit" => Ok(LinkKind::Logit),
            "probit" => Ok(LinkKind::Probit),
            "cloglog" => Ok(LinkKind::Cloglog),
            other => Err(format!(
                "unknown link '{other}' (expected logit | probit | cloglog)"
            )),
        }
    }
}

fn check_open_unit(mu: f64) -> Result<()> {
    if !(mu > 0.0 && mu < 1.0) {
        return Err(Error::Domain {
            what: "link argument must lie in (0,1)",
            value: mu,
        });
    }
    Ok(())
}

/// η = g(μ).
pub fn link(kind: LinkKind, mu: f64) -> Result<f64> {
    check_open_unit(mu)?;
    Ok(match kind {
        LinkKind::Logit => (mu / (1.0 - mu)).ln(),
        // μ is interior here, so the quantile cannot fail.
        LinkKind::Probit => numkernel::normal_quantile(mu).expect("mu in (0,1)"),
        LinkKind::Cloglog => (-(1.0 - mu).ln()).ln(),
    })
}

/// μ = g⁻¹(η), clamped into [MU_EPS, 1 − MU_EPS]. Saturates instead of erroring.
pub fn link_inv(kind: LinkKind, eta: f64) -> f64 {
    let mu = match kind {
        LinkKind::Logit => {
            // Split by sign to avoid overflow in exp.
            if eta >= 0.0 {
                1.0 / (1.0 + (-eta).exp())
            } else {
                let e = eta.exp();
                e / (1.0 + e)
            }
        }
        LinkKind::Probit => numkernel::normal_cdf(eta),
        LinkKind::Cloglog => 1.0 - (-eta.exp()).exp(),
    };
    mu.clamp(MU_EPS, 1.0 - MU_EPS)
}

/// g′(μ).
pub fn link_d1(kind: LinkKind, mu: f64) -> Result<f64> {
    check_open_unit(mu)?;
    Ok(match kind {
        LinkKind::Logit => 1.0 / (mu * (1.0 - mu)),
        LinkKind::Probit => {
            let eta = numkernel::normal_quantile(mu).expect("mu in (0,1)");
            1.0 / numkernel::normal_pdf(eta)
        }
        LinkKind::Cloglog => {
            let u = -(1.0 - mu).ln();
            1.0 / ((1.0 - mu) * u)
        }
    })
}

/// g″(μ).
pub fn link_d2(kind: LinkKind, mu: f64) -> Result<f64> {
    check_open_unit(mu)?;
    Ok(match kind {
        LinkKind::Logit => {
            let t = mu * (1.0 - mu);
            (2.0 * mu - 1.0) / (t * t)
        }
        LinkKind::Probit => {
            // g″ = η/ϕ(η)², with η = Φ⁻¹(μ).
            let eta = numkernel::normal_quantile(mu).expect("mu in (0,1)");
            let pdf = numkernel::normal_pdf(eta);
            eta / (pdf * pdf)
        }
        LinkKind::Cloglog => {
            let om = 1.0 - mu;
            let u = -om.ln();
            (u - 1.0) / (om * om * u * u)
        }
    })
}

/// dμ/dη evaluated at μ, i.e. 1/g′(μ). The filter's `T` diagonal.
pub(crate) fn dmu_deta(kind: LinkKind, mu: f64) -> f64 {
    match kind {
        LinkKind::Logit => mu * (1.0 - mu),
        LinkKind::Probit => {
            let eta = numkernel::normal_quantile(mu).expect("mu in (0,1)");
            numkernel::normal_pdf(eta)
        }
        LinkKind::Cloglog => {
            let om = 1.0 - mu;
            om * -om.ln()
        }
    }
}

/// κ = g″(μ)/(g′(μ))², the curvature ratio in the information matrix.
pub(crate) fn curvature_ratio(kind: LinkKind, mu: f64) -> f64 {
    match kind {
        LinkKind::Logit => 2.0 * mu - 1.0,
        LinkKind::Probit => numkernel::normal_quantile(mu).expect("mu in (0,1)"),
        LinkKind::Cloglog => -(1.0 - mu).ln() - 1.0,
    }
}

/// Largest possible dμ/dη over μ ∈ (0,1); bounds the MA feedback gain.
pub(crate) fn max_mean_slope(kind: LinkKind) -> f64 {
    match kind {
        LinkKind::Logit => 0.25,
        // ϕ(0) = 1/√(2π)
        LinkKind::Probit => 0.398_942_280_401_432_7,
        // max of (1−μ)(−ln(1−μ)) is 1/e
        LinkKind::Cloglog => (-1.0f64).exp(),
    }
}

pub const ALL_LINKS: [LinkKind; 3] = [LinkKind::Logit, LinkKind::Probit, LinkKind::Cloglog];
