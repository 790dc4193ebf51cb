use serde::{Deserialize, Serialize};

use super::profile::{DependenceProfile, Provenance, TailCertificate, TailModel};
use crate::error::{ensure, Error, Result};
use crate::mc::{replicate, Moments};
use crate::process::{CoefficientRule, InnovationLaw, LinearProcessSpec};
use crate::rng::{self, purpose};

/// Minimum replications accepted by the Monte Carlo estimators.
pub const MIN_REPS: usize = 100;

/// A causal map X = g(ε_{t−w+1}, …, ε_t) of a finite innovation window.
pub trait CausalMap: Sync {
    /// Number of innovations consumed.
    fn window(&self) -> usize;
    /// `eps` holds the window oldest first, so `eps[window − 1]` is ε_t.
    fn eval(&self, eps: &[f64]) -> f64;
}

/// Closure adapter for [`CausalMap`].
pub struct FnMap<F> {
    pub window: usize,
    pub f: F,
}

impl<F: Fn(&[f64]) -> f64 + Sync> CausalMap for FnMap<F> {
    fn window(&self) -> usize {
        self.window
    }

    fn eval(&self, eps: &[f64]) -> f64 {
        (self.f)(eps)
    }
}

/// Scalar Lipschitz transforms with known constants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LipschitzFn {
    Identity,
    /// x ↦ max(−level, min(level, x)).
    Clip { level: f64 },
    /// x ↦ sin(frequency · x).
    Sin { frequency: f64 },
    /// x ↦ tanh(scale · x).
    Tanh { scale: f64 },
}

impl LipschitzFn {
    #[inline]
    pub fn apply(&self, x: f64) -> f64 {
        match *self {
            LipschitzFn::Identity => x,
            LipschitzFn::Clip { level } => x.clamp(-level, level),
            LipschitzFn::Sin { frequency } => (frequency * x).sin(),
            LipschitzFn::Tanh { scale } => (scale * x).tanh(),
        }
    }

    pub fn lipschitz(&self) -> f64 {
        match *self {
            LipschitzFn::Identity | LipschitzFn::Clip { .. } => 1.0,
            LipschitzFn::Sin { frequency } => frequency.abs(),
            LipschitzFn::Tanh { scale } => scale.abs(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            LipschitzFn::Clip { level } => ensure(level > 0.0, "clip.level", || "must be positive".into()),
            LipschitzFn::Sin { frequency: c } | LipschitzFn::Tanh { scale: c } => {
                ensure(c.is_finite(), "scale", || "must be finite".into())
            }
            LipschitzFn::Identity => Ok(()),
        }
    }
}

/// h(Σ_j f_j ε_{t−j}) for a truncated linear filter and a Lipschitz h.
#[derive(Debug, Clone)]
pub struct LinearMap {
    coeffs: Vec<f64>,
    transform: LipschitzFn,
}

impl LinearMap {
    pub fn new(coeffs: Vec<f64>, transform: LipschitzFn) -> Self {
        Self { coeffs, transform }
    }

    pub fn from_spec(spec: &LinearProcessSpec, transform: LipschitzFn) -> Self {
        Self::new(spec.truncated_coefficients(), transform)
    }
}

impl CausalMap for LinearMap {
    fn window(&self) -> usize {
        self.coeffs.len()
    }

    fn eval(&self, eps: &[f64]) -> f64 {
        let last = eps.len() - 1;
        let s: f64 = self.coeffs.iter().enumerate().map(|(j, f)| f * eps[last - j]).sum();
        self.transform.apply(s)
    }
}

/// Tail envelope of |f_m| · c for a coefficient rule, starting after `max_lag`.
pub(crate) fn coefficient_tail(rule: &CoefficientRule, c: f64, max_lag: usize) -> TailModel {
    match rule {
        CoefficientRule::Geometric { kappa } => TailModel::Geometric { scale: c, rate: kappa.abs() },
        CoefficientRule::Polynomial { k, beta } => TailModel::Polynomial { scale: c * k.abs(), exponent: *beta },
        CoefficientRule::Explicit { values } => {
            if max_lag + 1 >= values.len() {
                TailModel::Zero
            } else {
                TailModel::Listed { start: max_lag + 1, values: values[max_lag + 1..].iter().map(|f| c * f.abs()).collect() }
            }
        }
    }
}

/// Exact θ_{m,p} = |f_m| · ‖ε₀ − ε₀′‖_p for the untruncated linear process.
pub fn fdm_analytic_linear(spec: &LinearProcessSpec, p: f64, max_lag: usize) -> Result<DependenceProfile> {
    ensure(p >= 1.0 && p.is_finite(), "p", || format!("must be a real ≥ 1, got {p}"))?;
    spec.coefficients.validate()?;
    spec.innovation.validate()?;
    let c = spec.innovation.coupled_difference_norm(p);
    let theta: Vec<f64> = (0..=max_lag).map(|m| spec.coefficients.coefficient(m).abs() * c).collect();
    let tail = TailCertificate { model: coefficient_tail(&spec.coefficients, c, max_lag), exact: true };
    Ok(DependenceProfile::new(p, theta, vec![0.0; max_lag + 1], Some(tail), Provenance::Analytic))
}

/// Per-lag moments of |X_m − X_m′|^p, turned into θ̂ and delta-method standard errors.
pub(crate) fn theta_from_moments(moments: &[Moments], p: f64) -> (Vec<f64>, Vec<f64>) {
    moments
        .iter()
        .map(|mo| {
            let mean = mo.mean();
            if mean <= 0.0 {
                (0.0, 0.0)
            } else {
                let theta = mean.powf(1.0 / p);
                (theta, theta / (p * mean) * mo.se())
            }
        })
        .unzip()
}

/// Reduces per-replication rows (one value per lag) in replication order.
pub(crate) fn reduce_rows(rows: &[Vec<f64>], width: usize) -> Vec<Moments> {
    let mut out = vec![Moments::new(); width];
    for row in rows {
        for (acc, x) in out.iter_mut().zip(row) {
            acc.push(*x);
        }
    }
    out
}

/// Monte Carlo θ̂_{m,p} under single-innovation coupling at time 0.
///
/// Each replication draws ε over positions 1−w, …, max_lag plus a replacement ε₀′
/// and evaluates X_m, X_m′ on the shared stream. A window-limited map cannot
/// see ε₀ once m ≥ w, so when `max_lag ≥ w − 1` the profile carries an exact
/// zero tail; otherwise it has no tail certificate unless one is attached later
/// with [`with_tail`].
pub fn fdm_monte_carlo(
    g: &dyn CausalMap,
    law: InnovationLaw,
    p: f64,
    max_lag: usize,
    reps: usize,
    seed: u64,
) -> Result<DependenceProfile> {
    ensure(p >= 1.0 && p.is_finite(), "p", || format!("must be a real ≥ 1, got {p}"))?;
    law.validate()?;
    let w = g.window();
    ensure(w >= 1, "window", || "must be at least 1".into())?;
    ensure(reps >= MIN_REPS, "reps", || format!("need at least {MIN_REPS} replications, got {reps}"))?;

    // Position of ε₀ inside the stream covering times 1−w ..= max_lag.
    let zero = w - 1;
    let rows: Vec<Result<Vec<f64>>> = replicate(reps, |r| {
        let mut rng = rng::stream(seed, purpose::COUPLED, r as u64);
        let mut eps: Vec<f64> = (0..w + max_lag).map(|_| law.sample(&mut rng)).collect();
        let replacement = law.sample(&mut rng);
        let base: Vec<f64> = (0..=max_lag).map(|m| g.eval(&eps[m..m + w])).collect();
        eps[zero] = replacement;
        let mut row = Vec::with_capacity(max_lag + 1);
        for (m, x) in base.iter().enumerate() {
            let y = if m + w > zero && m <= zero { g.eval(&eps[m..m + w]) } else { *x };
            if !x.is_finite() || !y.is_finite() {
                return Err(Error::NonFinite { replication: r });
            }
            row.push((x - y).abs().powf(p));
        }
        Ok(row)
    });
    let rows: Vec<Vec<f64>> = rows.into_iter().collect::<Result<_>>()?;
    let (theta, se) = theta_from_moments(&reduce_rows(&rows, max_lag + 1), p);
    let tail = (max_lag + 1 >= w).then_some(TailCertificate { model: TailModel::Zero, exact: true });
    Ok(DependenceProfile::new(p, theta, se, tail, Provenance::MonteCarlo))
}

/// Attaches a caller-supplied tail envelope to a Monte Carlo profile.
pub fn with_tail(profile: DependenceProfile, model: TailModel) -> DependenceProfile {
    DependenceProfile::new(
        profile.p,
        profile.theta,
        profile.theta_se,
        Some(TailCertificate { model, exact: false }),
        profile.provenance,
    )
}

/// Default window for a linear map: the coefficients f_0..=f_L the simulator uses.
pub fn default_window(spec: &LinearProcessSpec) -> usize {
    spec.lag() + 1
}
