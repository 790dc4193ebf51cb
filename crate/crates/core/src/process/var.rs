use serde::{Deserialize, Serialize};

use crate::error::{ensure, Error, Result};
use crate::linalg::{spectral_norm, Matrix};
use crate::rng::{self, StreamRng};

/// Burn-in targets ‖A‖^b below this level.
pub const BURN_IN_TOL: f64 = 1e-10;
const COV_REL_TOL: f64 = 1e-14;
const COV_MAX_DOUBLINGS: usize = 64;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Transition {
    /// A = κ·I.
    Diagonal { kappa: f64 },
    /// Row-major d×d matrix.
    Full { matrix: Vec<Vec<f64>> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InnovationCov {
    #[default]
    Identity,
    Diagonal { variances: Vec<f64> },
}

/// X_t = A X_{t−1} + E_t with Gaussian E_t ~ N(0, Σ_E).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VarSpec {
    pub dimension: usize,
    pub transition: Transition,
    #[serde(default)]
    pub innovation_cov: InnovationCov,
}

impl VarSpec {
    pub fn diagonal(dimension: usize, kappa: f64) -> Self {
        Self { dimension, transition: Transition::Diagonal { kappa }, innovation_cov: InnovationCov::Identity }
    }

    pub fn full(matrix: Vec<Vec<f64>>) -> Self {
        Self { dimension: matrix.len(), transition: Transition::Full { matrix }, innovation_cov: InnovationCov::Identity }
    }

    pub fn with_innovation_variances(mut self, variances: Vec<f64>) -> Self {
        self.innovation_cov = InnovationCov::Diagonal { variances };
        self
    }

    /// AR(1) with unit marginal variance in every coordinate.
    pub fn standardized_diagonal(dimension: usize, kappa: f64) -> Self {
        Self::diagonal(dimension, kappa).with_innovation_variances(vec![1.0 - kappa * kappa; dimension])
    }

    pub fn validate(&self) -> Result<()> {
        ensure(self.dimension >= 1, "dimension", || "must be at least 1".into())?;
        match &self.transition {
            Transition::Diagonal { kappa } => {
                ensure(kappa.is_finite(), "transition.kappa", || "must be finite".into())?;
            }
            Transition::Full { matrix } => {
                ensure(matrix.len() == self.dimension, "transition.matrix", || {
                    format!("expected {} rows, got {}", self.dimension, matrix.len())
                })?;
                ensure(matrix.iter().flatten().all(|v| v.is_finite()), "transition.matrix", || "must be finite".into())?;
            }
        }
        if let InnovationCov::Diagonal { variances } = &self.innovation_cov {
            ensure(variances.len() == self.dimension, "innovation_cov.variances", || {
                format!("expected {} entries, got {}", self.dimension, variances.len())
            })?;
            ensure(variances.iter().all(|v| *v > 0.0 && v.is_finite()), "innovation_cov.variances", || {
                "must be positive".into()
            })?;
        }
        let norm = self.transition_norm()?;
        if norm >= 1.0 {
            return Err(Error::NonStationary { norm });
        }
        Ok(())
    }

    pub fn transition_matrix(&self) -> Result<Matrix> {
        match &self.transition {
            Transition::Diagonal { kappa } => Ok(Matrix::identity(self.dimension).scale(*kappa)),
            Transition::Full { matrix } => Matrix::from_rows(matrix),
        }
    }

    /// Spectral norm ‖A‖.
    pub fn transition_norm(&self) -> Result<f64> {
        match &self.transition {
            Transition::Diagonal { kappa } => Ok(kappa.abs()),
            Transition::Full { .. } => spectral_norm(&self.transition_matrix()?),
        }
    }

    pub fn innovation_variances(&self) -> Vec<f64> {
        match &self.innovation_cov {
            InnovationCov::Identity => vec![1.0; self.dimension],
            InnovationCov::Diagonal { variances } => variances.clone(),
        }
    }

    pub fn innovation_matrix(&self) -> Matrix {
        Matrix::diagonal(&self.innovation_variances())
    }

    /// Smallest b with ‖A‖^b < 1e-10.
    pub fn burn_in(&self) -> Result<usize> {
        let norm = self.transition_norm()?;
        if norm == 0.0 {
            return Ok(0);
        }
        let mut b = (BURN_IN_TOL.ln() / norm.ln()).floor().max(0.0) as usize;
        while norm.powi(b as i32) >= BURN_IN_TOL {
            b += 1;
        }
        Ok(b)
    }

    /// The common coefficient κ when the transition is κ·I (either form).
    pub fn scalar_kappa(&self) -> Option<f64> {
        match &self.transition {
            Transition::Diagonal { kappa } => Some(*kappa),
            Transition::Full { matrix } => {
                let k = matrix[0][0];
                let scalar = matrix
                    .iter()
                    .enumerate()
                    .all(|(i, row)| row.iter().enumerate().all(|(j, v)| if i == j { *v == k } else { *v == 0.0 }));
                scalar.then_some(k)
            }
        }
    }

    pub fn sampler(&self) -> Result<VarSampler> {
        self.validate()?;
        let std: Vec<f64> = self.innovation_variances().iter().map(|v| v.sqrt()).collect();
        let transition = match self.scalar_kappa() {
            Some(k) => SamplerTransition::Scalar(k),
            None => SamplerTransition::Full(self.transition_matrix()?),
        };
        Ok(VarSampler { std, transition, burn_in: self.burn_in()? })
    }
}

/// Σ = Σ_{k≥0} A^k Σ_E (Aᵀ)^k, accumulated by repeated squaring with a certified tail.
pub fn stationary_covariance(spec: &VarSpec) -> Result<Matrix> {
    spec.validate()?;
    let a = spec.transition_matrix()?;
    let norm = spec.transition_norm()?;
    let sigma_e = spec.innovation_matrix();
    let e_norm = spec.innovation_variances().iter().cloned().fold(0.0, f64::max);
    if let Some(k) = spec.scalar_kappa() {
        return Ok(sigma_e.scale(1.0 / (1.0 - k * k)));
    }
    let mut s = sigma_e.clone();
    let mut p = a;
    let mut pow = norm * norm; // ‖A‖^{2·2^j}
    for _ in 0..COV_MAX_DOUBLINGS {
        let tail = e_norm * pow / (1.0 - norm * norm);
        if tail <= COV_REL_TOL * s.max_abs().max(1.0) {
            return Ok(symmetrize(s));
        }
        let ps = p.matmul(&s).matmul(&p.transpose());
        s.add_assign(&ps);
        p = p.matmul(&p);
        pow *= pow;
    }
    Err(Error::Convergence(format!(
        "stationary covariance tail bound not met after {COV_MAX_DOUBLINGS} doublings (norm {norm})"
    )))
}

fn symmetrize(s: Matrix) -> Matrix {
    let t = s.transpose();
    s.add(&t).scale(0.5)
}

#[derive(Debug, Clone)]
enum SamplerTransition {
    Scalar(f64),
    Full(Matrix),
}

#[derive(Debug, Clone)]
pub struct VarSampler {
    std: Vec<f64>,
    transition: SamplerTransition,
    burn_in: usize,
}

impl VarSampler {
    pub fn dimension(&self) -> usize {
        self.std.len()
    }

    pub fn burn_in(&self) -> usize {
        self.burn_in
    }

    /// x ← A x + E.
    #[inline]
    pub fn step(&self, x: &mut [f64], scratch: &mut [f64], rng: &mut StreamRng) {
        match &self.transition {
            SamplerTransition::Scalar(k) => {
                for (xi, s) in x.iter_mut().zip(&self.std) {
                    *xi = k * *xi + s * rng::normal(rng);
                }
            }
            SamplerTransition::Full(a) => {
                a.matvec(x, scratch);
                for ((xi, ai), s) in x.iter_mut().zip(scratch.iter()).zip(&self.std) {
                    *xi = ai + s * rng::normal(rng);
                }
            }
        }
    }

    /// Starts from zero, discards the burn-in, records n states.
    pub fn path(&self, n: usize, rng: &mut StreamRng) -> Vec<Vec<f64>> {
        let d = self.dimension();
        let mut x = vec![0.0; d];
        let mut scratch = vec![0.0; d];
        for _ in 0..self.burn_in {
            self.step(&mut x, &mut scratch, rng);
        }
        let mut out = Vec::with_capacity(n);
        for _ in 0..n {
            self.step(&mut x, &mut scratch, rng);
            out.push(x.clone());
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_nonstationary_with_norm() {
        let spec = VarSpec::full(vec![vec![1.2, 0.0], vec![0.0, 0.1]]);
        match spec.validate() {
            Err(Error::NonStationary { norm }) => assert!((norm - 1.2).abs() < 1e-12),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn burn_in_is_minimal() {
        let spec = VarSpec::diagonal(1, 0.9);
        let b = spec.burn_in().unwrap();
        assert!(0.9f64.powi(b as i32) < BURN_IN_TOL);
        assert!(0.9f64.powi(b as i32 - 1) >= BURN_IN_TOL);
        assert_eq!(VarSpec::diagonal(3, 0.0).burn_in().unwrap(), 0);
    }

    #[test]
    fn full_covariance_solves_lyapunov() {
        let spec = VarSpec::full(vec![vec![0.5, 0.1], vec![0.2, 0.25]]);
        let s = stationary_covariance(&spec).unwrap();
        let a = spec.transition_matrix().unwrap();
        let resid = s.sub(&a.matmul(&s).matmul(&a.transpose())).sub(&Matrix::identity(2));
        assert!(resid.max_abs() < 1e-12);
    }
}
