use serde::{Deserialize, Serialize};

use super::fdm::MIN_REPS;
use crate::error::{ensure, Error, Result};
use crate::mc::{replicate, Moments};
use crate::process::ProcessSpec;
use crate::rng::{self, purpose, StreamRng};

/// A bounded Lipschitz test function of u consecutive observations.
///
/// Lipschitz constants are taken with respect to the sum of coordinate distances
/// δ(x, y) = Σ_i |x_i − y_i|.
pub trait TestFunction: Sync {
    fn arity(&self) -> usize;
    fn lipschitz(&self) -> f64;
    fn eval(&self, x: &[f64]) -> f64;
}

/// Built-in test functions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BuiltinTest {
    Constant { arity: usize, value: f64 },
    /// clip(x_1 + … + x_u) to [−level, level].
    ClipSum { arity: usize, level: f64 },
    /// clip(x_1 + … + x_u) / level, bounded by one.
    ScaledClipSum { arity: usize, level: f64 },
}

impl TestFunction for BuiltinTest {
    fn arity(&self) -> usize {
        match self {
            BuiltinTest::Constant { arity, .. }
            | BuiltinTest::ClipSum { arity, .. }
            | BuiltinTest::ScaledClipSum { arity, .. } => *arity,
        }
    }

    fn lipschitz(&self) -> f64 {
        match self {
            BuiltinTest::Constant { .. } => 0.0,
            BuiltinTest::ClipSum { .. } => 1.0,
            BuiltinTest::ScaledClipSum { level, .. } => 1.0 / level,
        }
    }

    fn eval(&self, x: &[f64]) -> f64 {
        match self {
            BuiltinTest::Constant { value, .. } => *value,
            BuiltinTest::ClipSum { level, .. } => x.iter().sum::<f64>().clamp(-level, *level),
            BuiltinTest::ScaledClipSum { level, .. } => x.iter().sum::<f64>().clamp(-level, *level) / level,
        }
    }
}

/// ψ(Lip g₁, Lip g₂, u, v) under the four weak-dependence conventions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PsiValues {
    pub theta: f64,
    pub eta: f64,
    pub kappa: f64,
    pub lambda: f64,
}

impl PsiValues {
    pub fn new(lip1: f64, lip2: f64, u: usize, v: usize) -> Self {
        let (u, v) = (u as f64, v as f64);
        let eta = u * lip1 + v * lip2;
        let kappa = u * v * lip1 * lip2;
        Self { theta: v * lip2, eta, kappa, lambda: eta + kappa }
    }

    fn divide(&self, c: f64) -> Self {
        let f = |psi: f64| if psi > 0.0 { c / psi } else if c == 0.0 { 0.0 } else { f64::INFINITY };
        Self { theta: f(self.theta), eta: f(self.eta), kappa: f(self.kappa), lambda: f(self.lambda) }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeakDependenceReport {
    pub covariance: f64,
    pub se: f64,
    pub abs_covariance: f64,
    pub gap: usize,
    pub reps: usize,
    pub psi: PsiValues,
    /// |Ĉov| / ψ under each convention.
    pub zeta: PsiValues,
    pub metric: String,
}

/// Simulates one scalar path of length n (first coordinate for VAR specs).
pub(crate) fn scalar_path(spec: &ProcessSpec, n: usize, rng: &mut StreamRng) -> Result<Vec<f64>> {
    match spec {
        ProcessSpec::Linear(lin) => Ok(lin.sampler()?.path(n, rng)),
        ProcessSpec::Var(var) => Ok(var.sampler()?.path(n, rng).into_iter().map(|x| x[0]).collect()),
        ProcessSpec::MatrixSeries(_) => {
            Err(Error::invalid("spec", "weak-dependence probe needs a scalar or vector process"))
        }
    }
}

/// Empirical Cov{g₁(X_0..X_{u−1}), g₂(X_{u−1+r}..X_{u−2+r+v})} with influence-function SE.
pub fn weak_dependence_probe(
    spec: &ProcessSpec,
    g1: &dyn TestFunction,
    g2: &dyn TestFunction,
    gap: usize,
    reps: usize,
    seed: u64,
) -> Result<WeakDependenceReport> {
    ensure(reps >= MIN_REPS, "reps", || format!("need at least {MIN_REPS} replications, got {reps}"))?;
    ensure(g1.arity() >= 1 && g2.arity() >= 1, "arity", || "test functions need arity ≥ 1".into())?;
    ensure(gap >= 1, "gap", || "must be at least 1".into())?;
    ensure(g1.lipschitz() >= 0.0 && g2.lipschitz() >= 0.0, "lipschitz", || "must be nonnegative".into())?;
    spec.validate()?;
    let (u, v) = (g1.arity(), g2.arity());
    let len = u + gap + v - 1;
    let pairs: Vec<Result<(f64, f64)>> = replicate(reps, |r| {
        let mut rng = rng::stream(seed, purpose::INNOVATIONS, r as u64);
        let path = scalar_path(spec, len, &mut rng)?;
        let start2 = u - 1 + gap;
        let a = g1.eval(&path[..u]);
        let b = g2.eval(&path[start2..start2 + v]);
        if !a.is_finite() || !b.is_finite() {
            return Err(Error::NonFinite { replication: r });
        }
        Ok((a, b))
    });
    let pairs: Vec<(f64, f64)> = pairs.into_iter().collect::<Result<_>>()?;
    let m1: Moments = pairs.iter().map(|p| p.0).collect();
    let m2: Moments = pairs.iter().map(|p| p.1).collect();
    let (mu1, mu2) = (m1.mean(), m2.mean());
    let centered: Moments = pairs.iter().map(|(a, b)| (a - mu1) * (b - mu2)).collect();
    let n = reps as f64;
    let covariance = centered.mean() * n / (n - 1.0);
    let se = centered.se();
    let psi = PsiValues::new(g1.lipschitz(), g2.lipschitz(), u, v);
    let abs_covariance = covariance.abs();
    Ok(WeakDependenceReport {
        covariance,
        se,
        abs_covariance,
        gap,
        reps,
        psi,
        zeta: psi.divide(abs_covariance),
        metric: "sum_of_coordinate_distances".into(),
    })
}
