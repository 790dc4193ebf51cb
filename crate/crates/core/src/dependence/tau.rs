use serde::{Deserialize, Serialize};

use super::fdm::MIN_REPS;
use crate::error::{ensure, Result};
use crate::linalg::spectral_norm;
use crate::mc::{replicate, Moments};
use crate::process::ProcessSpec;
use crate::rng::{self, purpose};

/// Estimate of E‖X_m − Y_m‖ where Y regenerates every innovation up to time 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TauEstimate {
    pub m: usize,
    pub value: f64,
    pub se: f64,
    pub reps: usize,
    /// Norm used on the state space: absolute value, l2, or spectral.
    pub norm: String,
}

/// Upper bound on τ(σ(X_t, t ≤ 0), X_m) via full-past coupling.
pub fn tau_coupling_bound(spec: &ProcessSpec, m: usize, reps: usize, seed: u64) -> Result<TauEstimate> {
    ensure(reps >= MIN_REPS, "reps", || format!("need at least {MIN_REPS} replications, got {reps}"))?;
    spec.validate()?;
    let (values, norm): (Vec<f64>, &str) = match spec {
        ProcessSpec::Linear(lin) => {
            let sampler = lin.sampler()?;
            let coeffs = sampler.coefficients().to_vec();
            let law = lin.innovation;
            let values = replicate(reps, |r| {
                let mut rng = rng::stream(seed, purpose::PAST_COPY, r as u64);
                // Only innovations at times m − j ≤ 0 differ, i.e. j ≥ m.
                let diff: f64 = coeffs
                    .iter()
                    .skip(m)
                    .map(|f| f * (law.sample(&mut rng) - law.sample(&mut rng)))
                    .sum();
                diff.abs()
            });
            (values, "abs")
        }
        ProcessSpec::Var(var) => {
            let sampler = var.sampler()?;
            let a = var.transition_matrix()?;
            let d = var.dimension;
            let values = replicate(reps, |r| {
                let mut rng = rng::stream(seed, purpose::PAST_COPY, r as u64);
                let x0 = sampler.path(1, &mut rng).pop().unwrap_or_default();
                let y0 = sampler.path(1, &mut rng).pop().unwrap_or_default();
                // Shared innovations cancel: X_m − Y_m = A^m (X_0 − Y_0).
                let mut diff: Vec<f64> = x0.iter().zip(&y0).map(|(x, y)| x - y).collect();
                let mut next = vec![0.0; d];
                for _ in 0..m {
                    a.matvec(&diff, &mut next);
                    std::mem::swap(&mut diff, &mut next);
                }
                diff.iter().map(|x| x * x).sum::<f64>().sqrt()
            });
            (values, "l2")
        }
        ProcessSpec::MatrixSeries(ms) => {
            let sampler = ms.sampler()?;
            let values: Vec<Result<f64>> = replicate(reps, |r| {
                let mut past = rng::stream(seed, purpose::PAST_COPY, r as u64);
                let mut shared = rng::stream(seed, purpose::INNOVATIONS, r as u64);
                let x = sampler.coupled_pair(m, &mut past, &mut shared);
                spectral_norm(&x.0.sub(&x.1))
            });
            (values.into_iter().collect::<Result<_>>()?, "spectral")
        }
    };
    let mo: Moments = values.into_iter().collect();
    Ok(TauEstimate { m, value: mo.mean(), se: mo.se(), reps, norm: norm.into() })
}

