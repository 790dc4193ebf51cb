use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use super::fdm::{coefficient_tail, reduce_rows, theta_from_moments, LipschitzFn, MIN_REPS};
use super::profile::{DanValue, DependenceProfile, Provenance, TailCertificate, TailModel};
use crate::error::{ensure, Error, Result};
use crate::mc::replicate;
use crate::process::{LinearProcessSpec, VarSpec};
use crate::rng::{self, purpose};

/// Vector processes whose coordinates are coupled through one innovation stream.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum UniformSource {
    /// Gaussian VAR(1).
    Var { var: VarSpec },
    /// X_{t,j} = h_j(W_t) − E h_j(W_t) with W a scalar linear process.
    LipschitzLinear { linear: LinearProcessSpec, maps: Vec<LipschitzFn> },
}

impl UniformSource {
    pub fn dimension(&self) -> usize {
        match self {
            UniformSource::Var { var } => var.dimension,
            UniformSource::LipschitzLinear { maps, .. } => maps.len(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            UniformSource::Var { var } => var.validate(),
            UniformSource::LipschitzLinear { linear, maps } => {
                linear.validate()?;
                ensure(!maps.is_empty(), "maps", || "need at least one coordinate map".into())?;
                maps.iter().try_for_each(|m| m.validate())
            }
        }
    }

    /// Envelope θ_m ≤ scale · rate^m (or the coefficient rule's shape) valid for δ and every coordinate.
    fn tail_model(&self, q: f64, max_lag: usize) -> Result<TailModel> {
        match self {
            UniformSource::Var { var } => {
                // |A^m D|_∞ ≤ ‖A‖^m |D|_2 and |D|_2² ≤ 2 σ²_max χ²_d.
                let d = var.dimension as f64;
                let s2 = var.innovation_variances().iter().cloned().fold(0.0, f64::max);
                let chi_moment = (0.5 * q * 2f64.ln() + ln_gamma(0.5 * (d + q)) - ln_gamma(0.5 * d)).exp();
                let scale = (2.0 * s2).sqrt() * chi_moment.powf(1.0 / q);
                Ok(TailModel::Geometric { scale, rate: var.transition_norm()? })
            }
            UniformSource::LipschitzLinear { linear, maps } => {
                let lip = maps.iter().map(|m| m.lipschitz()).fold(0.0, f64::max);
                let c = lip * linear.innovation.coupled_difference_norm(q);
                Ok(coefficient_tail(&linear.coefficients, c, max_lag))
            }
        }
    }
}

/// δ_{i,q} profile, per-coordinate profiles and the two dependence-adjusted norms.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UniformFdmProfile {
    pub q: f64,
    pub alpha: f64,
    /// δ_{m,q} = ‖ |X_m − X_m′|_∞ ‖_q with tail sums Ω_{m,q}.
    pub delta: DependenceProfile,
    pub coordinates: Vec<DependenceProfile>,
    /// ‖ |X_·|_∞ ‖_{q,α}.
    pub vector_dan: DanValue,
    /// Ψ_{2,α} = max_j ‖X_{·j}‖_{q,α}.
    pub coordinate_max_dan: DanValue,
    pub coordinate_argmax: usize,
}

/// Monte Carlo uniform functional dependence under single-innovation coupling at time 0.
pub fn uniform_fdm(
    source: &UniformSource,
    q: f64,
    alpha: f64,
    max_lag: usize,
    reps: usize,
    seed: u64,
) -> Result<UniformFdmProfile> {
    ensure(q >= 1.0 && q.is_finite(), "q", || format!("must be a real ≥ 1, got {q}"))?;
    ensure(reps >= MIN_REPS, "reps", || format!("need at least {MIN_REPS} replications, got {reps}"))?;
    source.validate()?;
    let d = source.dimension();
    // Row layout per replication: [δ_0..δ_M, coord 0 lags, coord 1 lags, ...].
    let width = (max_lag + 1) * (d + 1);
    let rows: Vec<Result<Vec<f64>>> = match source {
        UniformSource::Var { var } => {
            let a = var.transition_matrix()?;
            let std: Vec<f64> = var.innovation_variances().iter().map(|v| v.sqrt()).collect();
            replicate(reps, |r| {
                let mut rng = rng::stream(seed, purpose::COUPLED, r as u64);
                // X_m − X_m′ = A^m (E₀ − E₀′).
                let mut diff: Vec<f64> = std.iter().map(|s| s * (rng::normal(&mut rng) - rng::normal(&mut rng))).collect();
                let mut next = vec![0.0; d];
                let mut row = vec![0.0; width];
                for m in 0..=max_lag {
                    if m > 0 {
                        a.matvec(&diff, &mut next);
                        std::mem::swap(&mut diff, &mut next);
                    }
                    fill_row(&mut row, &diff, m, max_lag, q);
                }
                Ok(row)
            })
        }
        UniformSource::LipschitzLinear { linear, maps } => {
            let coeffs = linear.truncated_coefficients();
            let lag = coeffs.len() - 1;
            let law = linear.innovation;
            replicate(reps, |r| {
                let mut rng = rng::stream(seed, purpose::COUPLED, r as u64);
                // Stream covers times −lag ..= max_lag; ε₀ sits at index `lag`.
                let eps: Vec<f64> = (0..lag + 1 + max_lag).map(|_| law.sample(&mut rng)).collect();
                let jump = law.sample(&mut rng) - eps[lag];
                let mut row = vec![0.0; width];
                let mut diff = vec![0.0; d];
                for m in 0..=max_lag {
                    let w: f64 = coeffs.iter().enumerate().map(|(j, f)| f * eps[lag + m - j]).sum();
                    let shift = coeffs.get(m).copied().unwrap_or(0.0) * jump;
                    for (k, h) in maps.iter().enumerate() {
                        diff[k] = h.apply(w) - h.apply(w + shift);
                    }
                    if diff.iter().any(|x| !x.is_finite()) {
                        return Err(Error::NonFinite { replication: r });
                    }
                    fill_row(&mut row, &diff, m, max_lag, q);
                }
                Ok(row)
            })
        }
    };
    let rows: Vec<Vec<f64>> = rows.into_iter().collect::<Result<_>>()?;
    let moments = reduce_rows(&rows, width);
    let tail = TailCertificate { model: source.tail_model(q, max_lag)?, exact: false };
    let profile = |chunk: usize| {
        let range = chunk * (max_lag + 1)..(chunk + 1) * (max_lag + 1);
        let (theta, se) = theta_from_moments(&moments[range], q);
        DependenceProfile::new(q, theta, se, Some(tail.clone()), Provenance::MonteCarlo)
    };
    let delta = profile(0);
    let coordinates: Vec<DependenceProfile> = (1..=d).map(profile).collect();
    let vector_dan = delta.dan(alpha)?;
    let mut coordinate_max_dan = coordinates[0].dan(alpha)?;
    let mut coordinate_argmax = 0;
    for (j, c) in coordinates.iter().enumerate().skip(1) {
        let v = c.dan(alpha)?;
        if v.value > coordinate_max_dan.value {
            coordinate_max_dan = v;
            coordinate_argmax = j;
        }
    }
    Ok(UniformFdmProfile { q, alpha, delta, coordinates, vector_dan, coordinate_max_dan, coordinate_argmax })
}

fn fill_row(row: &mut [f64], diff: &[f64], m: usize, max_lag: usize, q: f64) {
    let stride = max_lag + 1;
    let mut sup = 0.0f64;
    for (j, x) in diff.iter().enumerate() {
        let a = x.abs();
        sup = sup.max(a);
        row[(j + 1) * stride + m] = a.powf(q);
    }
    row[m] = sup.powf(q);
}
