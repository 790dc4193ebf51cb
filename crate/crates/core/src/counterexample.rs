//! α-mixing upper bound, β-mixing lower bound and an empirical β-separation
//! witness for high-dimensional Gaussian VAR(1) processes.

use std::f64::consts::PI;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{ensure, Error, Result};
use crate::linalg::{lambda_max, lambda_min};
use crate::mc::{replicate, Moments};
use crate::process::{stationary_covariance, CoefficientRule, ProcessSpec, VarSpec};
use crate::rng::{self, purpose};

pub const MIN_WITNESS_REPS: usize = 1000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlphaBound {
    pub m: u32,
    pub eigen_ratio: f64,
    pub transition_norm: f64,
    pub unclamped: f64,
    /// min(unclamped, 1/4).
    pub value: f64,
}

/// √(λ_max(Σ)/λ_min(Σ))·‖A‖^m with Σ the stationary covariance.
pub fn alpha_upper_bound(spec: &VarSpec, m: u32) -> Result<AlphaBound> {
    spec.validate()?;
    let sigma = stationary_covariance(spec)?;
    let lo = lambda_min(&sigma)?;
    let hi = lambda_max(&sigma)?;
    if lo.is_nan() || lo <= 0.0 || !(hi / lo).is_finite() {
        return Err(Error::invalid("innovation_cov", format!("stationary covariance is singular (λ_min = {lo:e})")));
    }
    let norm = spec.transition_norm()?;
    let eigen_ratio = hi / lo;
    let unclamped = eigen_ratio.sqrt() * norm.powi(m as i32);
    Ok(AlphaBound { m, eigen_ratio, transition_norm: norm, unclamped, value: unclamped.min(0.25) })
}

/// 1 − 2exp(−dκ^{2m}/(18π²)), capped at 1 and never floored.
pub fn beta_lower_bound(d: u64, kappa: f64, m: u32) -> f64 {
    let t = d as f64 * kappa.powi(2 * m as i32) / (18.0 * PI * PI);
    (1.0 - 2.0 * (-t).exp()).min(1.0)
}

/// Record that β of a Markov process at lag m equals β(σ(X₀), σ(X_m)).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarkovLinkage {
    pub markov: bool,
    pub m: u32,
    pub model: String,
    pub statement: String,
}

pub fn markov_collapse_check(spec: &ProcessSpec, m: u32) -> Result<MarkovLinkage> {
    let model = match spec {
        ProcessSpec::Var(v) => {
            v.validate()?;
            format!("VAR(1) of dimension {}", v.dimension)
        }
        ProcessSpec::Linear(l) => match &l.coefficients {
            CoefficientRule::Geometric { kappa } => format!("AR(1) with coefficient {kappa}"),
            CoefficientRule::Explicit { values } if values.len() == 1 => "independent sequence".to_string(),
            _ => {
                return Err(Error::NotApplicable {
                    reason: "linear process is not Markov of order one".into(),
                    threshold: None,
                })
            }
        },
        ProcessSpec::MatrixSeries(_) => {
            return Err(Error::NotApplicable { reason: "matrix series are not checked for the Markov property".into(), threshold: None })
        }
    };
    Ok(MarkovLinkage {
        markov: true,
        m,
        model,
        statement: format!("beta(m) = beta(sigma(X_0), sigma(X_{m})), so the witness lower-bounds the process coefficient"),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeparationWitness {
    pub d: u64,
    pub kappa: f64,
    pub m: u32,
    pub reps: usize,
    pub seed: u64,
    pub sets: String,
    pub theta: f64,
    pub xi: f64,
    pub eta: f64,
    pub threshold: f64,
    pub p_joint: f64,
    pub p_joint_se: f64,
    pub p_product: f64,
    pub p_product_se: f64,
    pub beta_lower_empirical: f64,
    /// SE of the paired difference p_joint − p_product.
    pub se: f64,
    pub beta_lower_theoretical: f64,
    /// 1 − 2exp(−dη²/2).
    pub hoeffding_guarantee: f64,
    pub linkage: MarkovLinkage,
}

/// P(X₀ ≤ 0, X_m ≤ 0) for a standardized Gaussian pair with correlation κ^m.
pub fn orthant_theta(kappa: f64, m: u32) -> f64 {
    0.25 + kappa.powi(m as i32).asin() / (2.0 * PI)
}

/// Advances a standardized AR(1) coordinate m steps.
fn advance(x: f64, kappa: f64, sd: f64, m: u32, rng: &mut rng::StreamRng) -> f64 {
    let mut x = x;
    for _ in 0..m {
        x = kappa * x + sd * rng::normal(rng);
    }
    x
}

pub fn separation_witness(d: u64, kappa: f64, m: u32, reps: usize, seed: u64) -> Result<SeparationWitness> {
    ensure(d >= 1, "d", || "must be at least 1".into())?;
    ensure(kappa > 0.0 && kappa < 1.0, "kappa", || format!("must lie in (0, 1), got {kappa}"))?;
    ensure(m >= 1, "m", || "must be at least 1".into())?;
    ensure(reps >= MIN_WITNESS_REPS, "reps", || format!("must be at least {MIN_WITNESS_REPS}, got {reps}"))?;
    let spec = VarSpec::standardized_diagonal(d as usize, kappa);
    let linkage = markov_collapse_check(&ProcessSpec::Var(spec), m)?;
    let theta = orthant_theta(kappa, m);
    let xi = 0.25;
    let eta = kappa.powi(m as i32) / (3.0 * PI);
    let threshold = theta - eta / 2.0;
    let sd = (1.0 - kappa * kappa).sqrt();
    let outcomes = replicate(reps, |rep| {
        let mut joint_rng = rng::stream(seed, purpose::COUPLED, rep as u64);
        let mut copy_rng = rng::stream(seed, purpose::PRODUCT_COPY, rep as u64);
        let (mut joint, mut product) = (0u64, 0u64);
        for _ in 0..d {
            let x0 = rng::normal(&mut joint_rng);
            let xm = advance(x0, kappa, sd, m, &mut joint_rng);
            let copy0 = rng::normal(&mut copy_rng);
            let copym = advance(copy0, kappa, sd, m, &mut copy_rng);
            let v = x0 <= 0.0;
            joint += (v && xm <= 0.0) as u64;
            product += (v && copym <= 0.0) as u64;
        }
        let df = d as f64;
        let j = (joint as f64 / df >= threshold) as u8 as f64;
        let p = (product as f64 / df >= threshold) as u8 as f64;
        (j, p)
    });
    let joint: Moments = outcomes.iter().map(|o| o.0).collect();
    let product: Moments = outcomes.iter().map(|o| o.1).collect();
    let diff: Moments = outcomes.iter().map(|o| o.0 - o.1).collect();
    Ok(SeparationWitness {
        d,
        kappa,
        m,
        reps,
        seed,
        sets: "G = H = (-inf, 0] in every coordinate".into(),
        theta,
        xi,
        eta,
        threshold,
        p_joint: joint.mean(),
        p_joint_se: joint.se(),
        p_product: product.mean(),
        p_product_se: product.se(),
        beta_lower_empirical: diff.mean(),
        se: diff.se(),
        beta_lower_theoretical: beta_lower_bound(d, kappa, m),
        hoeffding_guarantee: 1.0 - 2.0 * (-(d as f64) * eta * eta / 2.0).exp(),
        linkage,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub d: u64,
    pub beta_lower_theoretical: f64,
    pub beta_lower_empirical: f64,
    pub se: f64,
    pub alpha_upper: f64,
}

/// Witnesses across dimensions; replication seeds do not depend on d.
pub fn dimension_sweep(ds: &[u64], kappa: f64, m: u32, reps: usize, seed: u64) -> Result<Vec<SweepRow>> {
    ds.iter()
        .map(|&d| {
            let w = separation_witness(d, kappa, m, reps, seed)?;
            let alpha = alpha_upper_bound(&VarSpec::standardized_diagonal(d as usize, kappa), m)?;
            Ok(SweepRow {
                d,
                beta_lower_theoretical: w.beta_lower_theoretical,
                beta_lower_empirical: w.beta_lower_empirical,
                se: w.se,
                alpha_upper: alpha.value,
            })
        })
        .collect()
}

pub fn write_sweep_csv<W: Write>(rows: &[SweepRow], w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    for row in rows {
        out.serialize(row)?;
    }
    out.flush()?;
    Ok(())
}
