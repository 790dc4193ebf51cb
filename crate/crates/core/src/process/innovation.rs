use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::error::{ensure, Result};
use crate::rng::{self, StreamRng};

/// Law of the i.i.d. innovations. Every kind is mean zero with closed-form L_p norms.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InnovationLaw {
    #[default]
    StandardGaussian,
    ScaledGaussian { sigma: f64 },
    UniformSymmetric { half_width: f64 },
    Rademacher,
}

/// E|Z|^p for Z ~ N(0, 1).
fn gaussian_abs_moment(p: f64) -> f64 {
    (0.5 * p * std::f64::consts::LN_2 + ln_gamma(0.5 * (p + 1.0)) - 0.5 * std::f64::consts::PI.ln()).exp()
}

impl InnovationLaw {
    pub fn validate(&self) -> Result<()> {
        match *self {
            InnovationLaw::ScaledGaussian { sigma } => {
                ensure(sigma > 0.0 && sigma.is_finite(), "innovation.sigma", || format!("must be positive, got {sigma}"))
            }
            InnovationLaw::UniformSymmetric { half_width } => ensure(
                half_width > 0.0 && half_width.is_finite(),
                "innovation.half_width",
                || format!("must be positive, got {half_width}"),
            ),
            _ => Ok(()),
        }
    }

    #[inline]
    pub fn sample(&self, rng: &mut StreamRng) -> f64 {
        match *self {
            InnovationLaw::StandardGaussian => rng::normal(rng),
            InnovationLaw::ScaledGaussian { sigma } => sigma * rng::normal(rng),
            InnovationLaw::UniformSymmetric { half_width } => half_width * (2.0 * rng::uniform(rng) - 1.0),
            InnovationLaw::Rademacher => rng::sign(rng),
        }
    }

    pub fn variance(&self) -> f64 {
        self.lp_norm(2.0).powi(2)
    }

    /// ‖ε‖_{L_p}.
    pub fn lp_norm(&self, p: f64) -> f64 {
        match *self {
            InnovationLaw::StandardGaussian => gaussian_abs_moment(p).powf(1.0 / p),
            InnovationLaw::ScaledGaussian { sigma } => sigma * gaussian_abs_moment(p).powf(1.0 / p),
            InnovationLaw::UniformSymmetric { half_width } => half_width / (p + 1.0).powf(1.0 / p),
            InnovationLaw::Rademacher => 1.0,
        }
    }

    /// ‖ε − ε′‖_{L_p} for an independent copy ε′.
    pub fn coupled_difference_norm(&self, p: f64) -> f64 {
        match *self {
            InnovationLaw::StandardGaussian | InnovationLaw::ScaledGaussian { .. } => {
                std::f64::consts::SQRT_2 * self.lp_norm(p)
            }
            // ε − ε′ is triangular on [−2h, 2h]: E|D|^p = 2^{p+1} h^p / ((p+1)(p+2)).
            InnovationLaw::UniformSymmetric { half_width } => {
                half_width * (2f64.powf(p + 1.0) / ((p + 1.0) * (p + 2.0))).powf(1.0 / p)
            }
            // D ∈ {−2, 0, 2} with P(|D| = 2) = 1/2.
            InnovationLaw::Rademacher => 2f64.powf(1.0 - 1.0 / p),
        }
    }

    /// Almost-sure bound on |ε|, when one exists.
    pub fn sup_norm(&self) -> Option<f64> {
        match *self {
            InnovationLaw::UniformSymmetric { half_width } => Some(half_width),
            InnovationLaw::Rademacher => Some(1.0),
            _ => None,
        }
    }

    pub fn is_gaussian(&self) -> bool {
        matches!(self, InnovationLaw::StandardGaussian | InnovationLaw::ScaledGaussian { .. })
    }
}
