use serde::{Deserialize, Serialize};

use super::var::{stationary_covariance, VarSampler, VarSpec};
use crate::error::{ensure, Error, Result};
use crate::linalg::Matrix;
use crate::rng::StreamRng;
use crate::special::chi2_cdf;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MatrixGenerator {
    /// X_t = v_t v_tᵀ − E[v_t v_tᵀ].
    RankOneFromVar { var: VarSpec },
    /// X_t = diag(v_t).
    DiagonalAr { var: VarSpec },
}

/// Mean-zero symmetric d×d matrices driven by a Gaussian VAR.
///
/// With `bound` set, the driving vector is clipped so that λ_max(X_t) ≤ M holds
/// surely: entrywise to [−M, M] for `diagonal_ar`, radially for `rank_one_from_var`
/// (the latter needs an isotropic stationary covariance so that the clipped
/// second moment stays a multiple of the identity). Without `bound` no clipping
/// is applied and no almost-sure bound exists.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixSeriesSpec {
    pub generator: MatrixGenerator,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bound: Option<f64>,
}

impl MatrixSeriesSpec {
    pub fn diagonal_ar(var: VarSpec, bound: Option<f64>) -> Self {
        Self { generator: MatrixGenerator::DiagonalAr { var }, bound }
    }

    pub fn rank_one(var: VarSpec, bound: Option<f64>) -> Self {
        Self { generator: MatrixGenerator::RankOneFromVar { var }, bound }
    }

    pub fn var(&self) -> &VarSpec {
        match &self.generator {
            MatrixGenerator::RankOneFromVar { var } | MatrixGenerator::DiagonalAr { var } => var,
        }
    }

    pub fn dimension(&self) -> usize {
        self.var().dimension
    }

    pub fn validate(&self) -> Result<()> {
        self.var().validate()?;
        if let Some(m) = self.bound {
            ensure(m > 0.0 && m.is_finite(), "bound", || format!("must be positive, got {m}"))?;
            if let MatrixGenerator::RankOneFromVar { .. } = self.generator {
                self.radial_clip()?;
            }
        }
        Ok(())
    }

    /// Common marginal variance s² when the stationary covariance is s²·I.
    pub fn isotropic_variance(&self) -> Result<Option<f64>> {
        let sigma = stationary_covariance(self.var())?;
        let s2 = sigma[(0, 0)];
        let iso = sigma.sub(&Matrix::identity(sigma.dim()).scale(s2)).max_abs() <= 1e-12 * s2;
        Ok(iso.then_some(s2))
    }

    /// (R, c) for the radial clip: |v| is clipped to R and c·I is the clipped second moment.
    pub fn radial_clip(&self) -> Result<RadialClip> {
        let m = self.bound.ok_or_else(|| Error::invalid("bound", "radial clip needs a bound"))?;
        let s2 = self.isotropic_variance()?.ok_or_else(|| {
            Error::invalid("bound", "clipped rank_one_from_var needs an isotropic stationary covariance (s²·I)")
        })?;
        RadialClip::solve(self.dimension(), s2, m)
    }

    pub fn sampler(&self) -> Result<MatrixSampler> {
        self.validate()?;
        let var = self.var().sampler()?;
        let kind = match (&self.generator, self.bound) {
            (MatrixGenerator::DiagonalAr { .. }, m) => SamplerKind::Diagonal { clip: m },
            (MatrixGenerator::RankOneFromVar { .. }, None) => {
                SamplerKind::RankOne { center: stationary_covariance(self.var())?, radius: None }
            }
            (MatrixGenerator::RankOneFromVar { .. }, Some(_)) => {
                let clip = self.radial_clip()?;
                SamplerKind::RankOne { center: Matrix::identity(self.dimension()).scale(clip.center), radius: Some(clip.radius) }
            }
        };
        Ok(MatrixSampler { var, kind })
    }
}

/// Radial clip level R solving R² − c(R) = M, with c(R)·I = E[v_c v_cᵀ].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadialClip {
    pub radius: f64,
    pub center: f64,
    pub marginal_variance: f64,
}

impl RadialClip {
    /// c(R) = s² [d F_{d+2}(ρ) + ρ(1 − F_d(ρ))] / d, ρ = R²/s².
    pub fn center_at(d: usize, s2: f64, radius: f64) -> f64 {
        let df = d as f64;
        let rho = radius * radius / s2;
        s2 * (df * chi2_cdf(df + 2.0, rho) + rho * (1.0 - chi2_cdf(df, rho))) / df
    }

    pub fn solve(d: usize, s2: f64, m: f64) -> Result<Self> {
        let g = |r: f64| r * r - Self::center_at(d, s2, r) - m;
        // g(0) = −m < 0 and g(√(m + s²)) ≥ 0 because c ≤ s².
        let (mut lo, mut hi) = (0.0, (m + s2).sqrt());
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if g(mid) < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        // g(lo) < 0, so R² − c(R) < M and λ_max(X_t) ≤ M surely.
        let radius = lo;
        let center = Self::center_at(d, s2, radius);
        if center > m {
            return Err(Error::invalid(
                "bound",
                format!("clip level {m} is below the clipped second moment {center}; -λ_min would exceed the bound"),
            ));
        }
        Ok(Self { radius, center, marginal_variance: s2 })
    }

    /// Top eigenvalue of E X² for the clipped rank-one generator: s⁴E[min(Y,ρ)²]/d − c².
    pub fn second_moment_lambda_max(&self, d: usize) -> f64 {
        let df = d as f64;
        let s2 = self.marginal_variance;
        let rho = self.radius * self.radius / s2;
        let e_min_sq = df * (df + 2.0) * chi2_cdf(df + 4.0, rho) + rho * rho * (1.0 - chi2_cdf(df, rho));
        s2 * s2 * e_min_sq / df - self.center * self.center
    }
}

#[derive(Debug, Clone)]
enum SamplerKind {
    Diagonal { clip: Option<f64> },
    RankOne { center: Matrix, radius: Option<f64> },
}

#[derive(Debug, Clone)]
pub struct MatrixSampler {
    var: VarSampler,
    kind: SamplerKind,
}

impl MatrixSampler {
    pub fn dimension(&self) -> usize {
        self.var.dimension()
    }

    pub fn burn_in(&self) -> usize {
        self.var.burn_in()
    }

    pub fn is_diagonal(&self) -> bool {
        matches!(self.kind, SamplerKind::Diagonal { .. })
    }

    /// Maps a VAR state to the emitted matrix's defining vector (clipped).
    fn transform(&self, v: &mut [f64]) {
        match &self.kind {
            SamplerKind::Diagonal { clip: Some(m) } => v.iter_mut().for_each(|x| *x = x.clamp(-m, *m)),
            SamplerKind::RankOne { radius: Some(r), .. } => {
                let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
                if norm > *r {
                    let s = r / norm;
                    v.iter_mut().for_each(|x| *x *= s);
                }
            }
            _ => {}
        }
    }

    fn to_matrix(&self, v: &[f64]) -> Matrix {
        match &self.kind {
            SamplerKind::Diagonal { .. } => Matrix::diagonal(v),
            SamplerKind::RankOne { center, .. } => Matrix::outer(v).sub(center),
        }
    }

    /// Visits the defining vectors of n consecutive matrices.
    pub fn for_each_vector(&self, n: usize, rng: &mut StreamRng, mut f: impl FnMut(&[f64])) {
        let d = self.dimension();
        let mut x = vec![0.0; d];
        let mut scratch = vec![0.0; d];
        let mut v = vec![0.0; d];
        for _ in 0..self.var.burn_in() {
            self.var.step(&mut x, &mut scratch, rng);
        }
        for _ in 0..n {
            self.var.step(&mut x, &mut scratch, rng);
            v.copy_from_slice(&x);
            self.transform(&mut v);
            f(&v);
        }
    }

    /// X_m and Y_m from two independent stationary starts driven by the same innovations 1..=m.
    pub fn coupled_pair(&self, m: usize, past: &mut StreamRng, shared: &mut StreamRng) -> (Matrix, Matrix) {
        let d = self.dimension();
        let mut scratch = vec![0.0; d];
        let mut x = vec![0.0; d];
        let mut y = vec![0.0; d];
        for _ in 0..=self.var.burn_in() {
            self.var.step(&mut x, &mut scratch, past);
        }
        for _ in 0..=self.var.burn_in() {
            self.var.step(&mut y, &mut scratch, past);
        }
        for _ in 0..m {
            let mut common = shared.clone();
            self.var.step(&mut x, &mut scratch, &mut common);
            self.var.step(&mut y, &mut scratch, shared);
        }
        self.transform(&mut x);
        self.transform(&mut y);
        (self.to_matrix(&x), self.to_matrix(&y))
    }

    pub fn path(&self, n: usize, rng: &mut StreamRng) -> Vec<Matrix> {
        let mut out = Vec::with_capacity(n);
        self.for_each_vector(n, rng, |v| out.push(self.to_matrix(v)));
        out
    }

    /// Σ_{t<n} X_t.
    pub fn sum(&self, n: usize, rng: &mut StreamRng) -> Matrix {
        let d = self.dimension();
        match &self.kind {
            SamplerKind::Diagonal { .. } => {
                let mut acc = vec![0.0; d];
                self.for_each_vector(n, rng, |v| acc.iter_mut().zip(v).for_each(|(a, b)| *a += b));
                Matrix::diagonal(&acc)
            }
            SamplerKind::RankOne { center, .. } => {
                let mut acc = Matrix::zeros(d);
                self.for_each_vector(n, rng, |v| {
                    for i in 0..d {
                        for j in 0..d {
                            acc[(i, j)] += v[i] * v[j];
                        }
                    }
                });
                acc.sub(&center.scale(n as f64))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::lambda_max;
    use crate::rng;

    #[test]
    fn clip_center_matches_monte_carlo() {
        let spec = MatrixSeriesSpec::rank_one(VarSpec::diagonal(3, 0.0), Some(2.0));
        let clip = spec.radial_clip().unwrap();
        assert!((clip.radius.powi(2) - clip.center - 2.0).abs() < 1e-9);
        let sampler = spec.sampler().unwrap();
        let mut r = rng::stream(5, 0, 0);
        let n = 200_000;
        let mut acc = 0.0;
        let mut acc_sq = 0.0;
        sampler.for_each_vector(n, &mut r, |v| {
            let q = v.iter().map(|x| x * x).sum::<f64>() / 3.0;
            acc += q;
            acc_sq += q * q;
        });
        let mean = acc / n as f64;
        let se = ((acc_sq / n as f64 - mean * mean) / n as f64).sqrt();
        assert!((mean - clip.center).abs() < 4.0 * se);
    }

    #[test]
    fn clipped_matrices_respect_bound() {
        for spec in [
            MatrixSeriesSpec::rank_one(VarSpec::diagonal(2, 0.5), Some(1.5)),
            MatrixSeriesSpec::diagonal_ar(VarSpec::diagonal(3, 0.7), Some(0.8)),
        ] {
            let sampler = spec.sampler().unwrap();
            let mut r = rng::stream(9, 0, 0);
            for x in sampler.path(500, &mut r) {
                assert!(x.is_symmetric(0.0));
                assert!(lambda_max(&x).unwrap() <= spec.bound.unwrap() + 1e-12);
            }
        }
    }

    #[test]
    fn anisotropic_clip_rejected() {
        let var = VarSpec::diagonal(2, 0.5).with_innovation_variances(vec![1.0, 2.0]);
        assert!(MatrixSeriesSpec::rank_one(var, Some(1.0)).validate().is_err());
    }
}
