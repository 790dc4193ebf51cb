use serde::{Deserialize, Serialize};

use super::innovation::InnovationLaw;
use crate::error::{ensure, Error, Result};
use crate::rng::StreamRng;
use crate::special::{compensated_sum, hurwitz_zeta};

/// Default truncation targets a discarded tail below this fraction of ‖f‖₂².
pub const DEFAULT_TAIL_FRACTION: f64 = 1e-8;
/// Largest lag the default truncation will choose.
pub const DEFAULT_LAG_CAP: usize = 100_000;

/// Rule generating the moving-average coefficients f_j.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CoefficientRule {
    /// f_j = κ^j.
    Geometric { kappa: f64 },
    /// f_j = K (1 + j)^{−β}.
    Polynomial { k: f64, beta: f64 },
    /// f_0, …, f_{q} listed explicitly; zero afterwards.
    Explicit { values: Vec<f64> },
}

impl CoefficientRule {
    pub fn validate(&self) -> Result<()> {
        match self {
            CoefficientRule::Geometric { kappa } => ensure(kappa.abs() < 1.0, "coefficients.kappa", || {
                format!("geometric coefficients need |kappa| < 1 for a finite l2 norm, got {kappa}")
            }),
            CoefficientRule::Polynomial { k, beta } => {
                ensure(k.is_finite() && *k != 0.0, "coefficients.k", || "must be finite and nonzero".into())?;
                ensure(*beta > 0.5, "coefficients.beta", || {
                    format!("polynomial coefficients need beta > 1/2 for a finite l2 norm, got {beta}")
                })
            }
            CoefficientRule::Explicit { values } => {
                ensure(!values.is_empty(), "coefficients.values", || "must not be empty".into())?;
                ensure(values.iter().all(|v| v.is_finite()), "coefficients.values", || "must be finite".into())
            }
        }
    }

    pub fn coefficient(&self, j: usize) -> f64 {
        match self {
            CoefficientRule::Geometric { kappa } => kappa.powi(j as i32),
            CoefficientRule::Polynomial { k, beta } => k * (1.0 + j as f64).powf(-beta),
            CoefficientRule::Explicit { values } => values.get(j).copied().unwrap_or(0.0),
        }
    }

    /// Σ_{j>lag} f_j² (exact).
    pub fn l2_tail(&self, lag: usize) -> f64 {
        match self {
            CoefficientRule::Geometric { kappa } => {
                let k2 = kappa * kappa;
                k2.powi(lag as i32 + 1) / (1.0 - k2)
            }
            CoefficientRule::Polynomial { k, beta } => k * k * hurwitz_zeta(2.0 * beta, lag as f64 + 2.0),
            CoefficientRule::Explicit { values } => compensated_sum(values.iter().skip(lag + 1).map(|v| v * v)),
        }
    }

    /// ‖f‖₂² of the untruncated sequence.
    pub fn l2_norm_sq(&self) -> f64 {
        match self {
            CoefficientRule::Geometric { kappa } => 1.0 / (1.0 - kappa * kappa),
            CoefficientRule::Polynomial { k, beta } => k * k * hurwitz_zeta(2.0 * beta, 1.0),
            CoefficientRule::Explicit { values } => compensated_sum(values.iter().map(|v| v * v)),
        }
    }

    /// ‖f‖₁ of the untruncated sequence, `None` when infinite.
    pub fn l1_norm(&self) -> Option<f64> {
        match self {
            CoefficientRule::Geometric { kappa } => Some(1.0 / (1.0 - kappa.abs())),
            CoefficientRule::Polynomial { k, beta } => (*beta > 1.0).then(|| k.abs() * hurwitz_zeta(*beta, 1.0)),
            CoefficientRule::Explicit { values } => Some(compensated_sum(values.iter().map(|v| v.abs()))),
        }
    }

    /// Lag after which the coefficients vanish identically.
    pub fn natural_lag(&self) -> Option<usize> {
        match self {
            CoefficientRule::Explicit { values } => Some(values.len() - 1),
            _ => None,
        }
    }

    fn default_lag(&self) -> usize {
        if let Some(q) = self.natural_lag() {
            return q;
        }
        let target = DEFAULT_TAIL_FRACTION * self.l2_norm_sq();
        if let CoefficientRule::Geometric { kappa } = self {
            if *kappa == 0.0 {
                return 0;
            }
            let k2 = kappa * kappa;
            // k2^{L+1}/(1−k2) < target
            let l = ((target * (1.0 - k2)).ln() / k2.ln() - 1.0).ceil().max(0.0) as usize;
            return l.min(DEFAULT_LAG_CAP);
        }
        let (mut lo, mut hi) = (0usize, 1usize);
        while self.l2_tail(hi) >= target {
            if hi >= DEFAULT_LAG_CAP {
                return DEFAULT_LAG_CAP;
            }
            lo = hi;
            hi = (hi * 2).min(DEFAULT_LAG_CAP);
        }
        while hi - lo > 1 {
            let mid = (lo + hi) / 2;
            if self.l2_tail(mid) < target {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        hi
    }
}

/// X_t = Σ_{j=0}^{L} f_j ε_{t−j}, the truncated causal linear process.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearProcessSpec {
    pub coefficients: CoefficientRule,
    #[serde(default)]
    pub innovation: InnovationLaw,
    /// Defaults to the smallest lag with discarded l2 tail below 1e-8·‖f‖₂².
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub truncation_lag: Option<usize>,
}

impl LinearProcessSpec {
    pub fn new(coefficients: CoefficientRule, innovation: InnovationLaw) -> Self {
        Self { coefficients, innovation, truncation_lag: None }
    }

    pub fn with_lag(mut self, lag: usize) -> Self {
        self.truncation_lag = Some(lag);
        self
    }

    pub fn validate(&self) -> Result<()> {
        self.coefficients.validate()?;
        self.innovation.validate()?;
        if let Some(lag) = self.truncation_lag {
            ensure(lag >= 1 || self.coefficients.natural_lag() == Some(0), "truncation_lag", || {
                "must be at least 1".into()
            })?;
        }
        Ok(())
    }

    pub fn lag(&self) -> usize {
        self.truncation_lag.unwrap_or_else(|| self.coefficients.default_lag())
    }

    /// Coefficients f_0..=f_L actually used by the simulator.
    pub fn truncated_coefficients(&self) -> Vec<f64> {
        (0..=self.lag()).map(|j| self.coefficients.coefficient(j)).collect()
    }

    /// Σ_{j>L} f_j², the l2 mass dropped by truncation.
    pub fn discarded_tail(&self) -> f64 {
        self.coefficients.l2_tail(self.lag())
    }

    /// Stationary variance of the simulated (truncated) process.
    pub fn simulated_variance(&self) -> f64 {
        compensated_sum(self.truncated_coefficients().iter().map(|f| f * f)) * self.innovation.variance()
    }

    /// Σ_{j≤L} |f_j|.
    pub fn truncated_l1(&self) -> f64 {
        compensated_sum(self.truncated_coefficients().iter().map(|f| f.abs()))
    }

    pub fn sampler(&self) -> Result<LinearSampler> {
        self.validate()?;
        Ok(LinearSampler { coeffs: self.truncated_coefficients(), law: self.innovation })
    }
}

/// Precomputed coefficients for repeated simulation.
#[derive(Debug, Clone)]
pub struct LinearSampler {
    coeffs: Vec<f64>,
    law: InnovationLaw,
}

impl LinearSampler {
    pub fn lag(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coeffs
    }

    /// Draws the n + L innovations ε_{1−L}, …, ε_n from `rng`.
    pub fn innovations(&self, n: usize, rng: &mut StreamRng) -> Vec<f64> {
        (0..n + self.lag()).map(|_| self.law.sample(rng)).collect()
    }

    /// Applies the filter to an innovation stream of length n + L.
    pub fn filter(&self, eps: &[f64], n: usize) -> Vec<f64> {
        let lag = self.lag();
        (0..n)
            .map(|t| self.coeffs.iter().enumerate().map(|(j, f)| f * eps[t + lag - j]).sum())
            .collect()
    }

    pub fn path(&self, n: usize, rng: &mut StreamRng) -> Vec<f64> {
        let eps = self.innovations(n, rng);
        self.filter(&eps, n)
    }

    /// Weights w_i with S_n = Σ_i w_i ε_i over the n + L innovations.
    pub fn sum_weights(&self, n: usize) -> Vec<f64> {
        let lag = self.lag();
        let mut prefix = vec![0.0; self.coeffs.len() + 1];
        for (j, f) in self.coeffs.iter().enumerate() {
            prefix[j + 1] = prefix[j] + f;
        }
        // Innovation at index i enters X_t (t = 0..n) with coefficient f_{t+L−i}.
        (0..n + lag)
            .map(|i| {
                let j_lo = (lag as isize - i as isize).max(0) as usize;
                let j_hi = ((n - 1 + lag) as isize - i as isize).min(lag as isize);
                if j_hi < j_lo as isize {
                    0.0
                } else {
                    prefix[j_hi as usize + 1] - prefix[j_lo]
                }
            })
            .collect()
    }
}

pub(crate) fn reject_divergent(rule: &CoefficientRule) -> Result<()> {
    rule.validate().map_err(|e| match e {
        Error::Invalid { reason, .. } => Error::Divergent(reason),
        other => other,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;

    #[test]
    fn default_lag_meets_tail_target() {
        let spec = LinearProcessSpec::new(CoefficientRule::Geometric { kappa: 0.5 }, InnovationLaw::StandardGaussian);
        let lag = spec.lag();
        assert!(spec.discarded_tail() < 1e-8 * spec.coefficients.l2_norm_sq());
        assert!(spec.coefficients.l2_tail(lag - 1) >= 1e-8 * spec.coefficients.l2_norm_sq());
    }

    #[test]
    fn polynomial_default_lag_is_capped() {
        let rule = CoefficientRule::Polynomial { k: 1.0, beta: 0.75 };
        assert_eq!(rule.default_lag(), DEFAULT_LAG_CAP);
        let rule = CoefficientRule::Polynomial { k: 1.0, beta: 3.0 };
        let lag = rule.default_lag();
        assert!(rule.l2_tail(lag) < 1e-8 * rule.l2_norm_sq());
        assert!(rule.l2_tail(lag - 1) >= 1e-8 * rule.l2_norm_sq());
    }

    #[test]
    fn divergent_rules_rejected() {
        assert!(CoefficientRule::Polynomial { k: 1.0, beta: 0.5 }.validate().is_err());
        assert!(CoefficientRule::Geometric { kappa: 1.0 }.validate().is_err());
        assert!(matches!(
            reject_divergent(&CoefficientRule::Polynomial { k: 1.0, beta: 0.4 }),
            Err(Error::Divergent(_))
        ));
    }

    #[test]
    fn sum_weights_match_path_sum() {
        let spec = LinearProcessSpec::new(CoefficientRule::Explicit { values: vec![1.0, -0.5, 0.25] }, InnovationLaw::Rademacher);
        let sampler = spec.sampler().unwrap();
        let mut r = rng::stream(3, 0, 0);
        let eps = sampler.innovations(10, &mut r);
        let direct: f64 = sampler.filter(&eps, 10).iter().sum();
        let w = sampler.sum_weights(10);
        let via: f64 = w.iter().zip(&eps).map(|(a, b)| a * b).sum();
        assert!((direct - via).abs() < 1e-12);
    }
}
