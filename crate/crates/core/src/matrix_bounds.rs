//! Matrix Bernstein inequalities and their variance proxies.

use serde::{Deserialize, Serialize};

use crate::bounds::result::{nonnegative, positive};
use crate::bounds::{BoundResult, ConstantPack, ConstantsSource};
use crate::error::{ensure, Error, Result};
use crate::linalg::{symmetric_eigenvalues, Matrix};
use crate::mc::{replicate, Moments};
use crate::process::{stationary_covariance, MatrixGenerator, MatrixSeriesSpec};
use crate::rng::{self, purpose};
use crate::special::{normal_cdf, normal_pdf};

fn check_common(n: u64, x: f64, d: u64, m: f64) -> Result<()> {
    ensure(n >= 2, "n", || format!("must be at least 2, got {n}"))?;
    nonnegative("x", x)?;
    ensure(d >= 1, "d", || "must be at least 1".into())?;
    positive("m", m)
}

/// d · exp(−x² / (2σ² + 2Mx/3)) for independent matrices.
pub fn bernstein_independent(n: u64, x: f64, d: u64, sigma2: f64, m: f64) -> Result<BoundResult> {
    ensure(n >= 1, "n", || "must be at least 1".into())?;
    nonnegative("x", x)?;
    ensure(d >= 1, "d", || "must be at least 1".into())?;
    nonnegative("sigma2", sigma2)?;
    positive("m", m)?;
    let raw = d as f64 * (-x * x / (2.0 * sigma2 + 2.0 * m * x / 3.0)).exp();
    Ok(BoundResult::probability("matrix_bernstein_independent", raw, ConstantsSource::Explicit)
        .echo("n", n)
        .echo("x", x)
        .echo("d", d)
        .echo("sigma2", sigma2)
        .echo("m", m))
}

/// γ̃(γ, n) = (log n / log 2) · max(2, 32 log n / (γ log 2)).
pub fn gamma_tilde(gamma: f64, n: f64) -> f64 {
    let l2 = 2f64.ln();
    n.ln() / l2 * f64::max(2.0, 32.0 * n.ln() / (gamma * l2))
}

/// Matrix Bernstein bound under geometric β-mixing; C is user supplied (default 1).
#[allow(clippy::too_many_arguments)]
pub fn bernstein_beta_mixing(
    n: u64,
    x: f64,
    d: u64,
    nu2: f64,
    m: f64,
    gamma: f64,
    consts: &ConstantPack,
) -> Result<BoundResult> {
    check_common(n, x, d, m)?;
    nonnegative("nu2", nu2)?;
    positive("gamma", gamma)?;
    let c = consts.resolve(&["C"])?;
    let nf = n as f64;
    let gt = gamma_tilde(gamma, nf);
    let raw = d as f64 * (-c.get("C") * x * x / (nu2 * nf + m * m / gamma + x * m * gt)).exp();
    Ok(BoundResult::probability("matrix_bernstein_beta", raw, ConstantsSource::UserSupplied)
        .echo("n", n)
        .echo("x", x)
        .echo("d", d)
        .echo("nu2", nu2)
        .echo("m", m)
        .echo("gamma", gamma)
        .echo_constants(&c)
        .extra("gamma_tilde", gt))
}

/// ψ̃ = (log n / log 2) · max{1, 8 log(ψ̃₁ n⁶ d) / ψ₂} with ψ̃₁ = max(1/d, ψ₁).
pub fn psi_tilde(psi1: f64, psi2: f64, n: f64, d: f64) -> (f64, f64) {
    let psi1_t = psi1.max(1.0 / d);
    let pt = n.ln() / 2f64.ln() * f64::max(1.0, 8.0 * (psi1_t * n.powi(6) * d).ln() / psi2);
    (psi1_t, pt)
}

/// Matrix Bernstein bound under geometric τ-mixing; all constants explicit.
#[allow(clippy::too_many_arguments)]
pub fn bernstein_tau_mixing(n: u64, x: f64, d: u64, nu2: f64, m: f64, psi1: f64, psi2: f64) -> Result<BoundResult> {
    check_common(n, x, d, m)?;
    nonnegative("nu2", nu2)?;
    positive("psi1", psi1)?;
    positive("psi2", psi2)?;
    let nf = n as f64;
    let (psi1_t, pt) = psi_tilde(psi1, psi2, nf, d as f64);
    let denom = 8.0 * (15.0 * 15.0 * nf * nu2 + 60.0 * 60.0 * m * m / psi2) + 2.0 * x * m * pt;
    let raw = d as f64 * (-x * x / denom).exp();
    Ok(BoundResult::probability("matrix_bernstein_tau", raw, ConstantsSource::Explicit)
        .echo("n", n)
        .echo("x", x)
        .echo("d", d)
        .echo("nu2", nu2)
        .echo("m", m)
        .echo("psi1", psi1)
        .echo("psi2", psi2)
        .extra("psi1_tilde", psi1_t)
        .extra("psi_tilde", pt))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProxyMethod {
    ExactIid,
    WindowMonteCarlo,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindowEstimate {
    pub window: usize,
    pub value: f64,
    pub se: f64,
}

/// Estimate of ν² = sup_K λ_max{E(Σ_{i∈K} X_i)²} / |K|.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixVarianceProxy {
    pub value: f64,
    pub method: ProxyMethod,
    pub windows_used: Vec<usize>,
    pub reps: usize,
    pub se: f64,
    /// Contiguous windows only, so the value may fall short of the supremum over all subsets.
    pub lower_estimate: bool,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub per_window: Vec<WindowEstimate>,
}

/// λ_max(E X²) for a single matrix of a series with independent terms (κ = 0 generators).
pub fn second_moment_lambda_max(spec: &MatrixSeriesSpec) -> Result<f64> {
    spec.validate()?;
    let sigma = stationary_covariance(spec.var())?;
    match (&spec.generator, spec.bound) {
        (MatrixGenerator::DiagonalAr { .. }, m) => {
            Ok(sigma.diag().iter().map(|s2| clipped_gaussian_second_moment(*s2, m)).fold(0.0, f64::max))
        }
        (MatrixGenerator::RankOneFromVar { .. }, Some(_)) => {
            Ok(spec.radial_clip()?.second_moment_lambda_max(spec.dimension()))
        }
        (MatrixGenerator::RankOneFromVar { .. }, None) => {
            // E(vvᵀ − Σ)² = Σ² + tr(Σ)Σ for Gaussian v.
            let s2 = sigma.matmul(&sigma).add(&sigma.scale(sigma.diag().iter().sum()));
            crate::linalg::lambda_max(&s2)
        }
    }
}

/// E[clip_M(Z)²] for Z ~ N(0, s²); E Z² when unclipped.
pub fn clipped_gaussian_second_moment(s2: f64, m: Option<f64>) -> f64 {
    match m {
        None => s2,
        Some(m) => {
            let s = s2.sqrt();
            let c = m / s;
            s2 * ((2.0 * normal_cdf(c) - 1.0) - 2.0 * c * normal_pdf(c)) + 2.0 * m * m * (1.0 - normal_cdf(c))
        }
    }
}

/// Exact ν² for series with independent terms: λ_max(E X²).
pub fn variance_proxy_exact_iid(spec: &MatrixSeriesSpec) -> Result<MatrixVarianceProxy> {
    let kappa_zero = spec.var().transition_norm()? == 0.0;
    ensure(kappa_zero, "spec", || "exact ν² needs independent terms (zero transition)".into())?;
    Ok(MatrixVarianceProxy {
        value: second_moment_lambda_max(spec)?,
        method: ProxyMethod::ExactIid,
        windows_used: vec![],
        reps: 0,
        se: 0.0,
        lower_estimate: false,
        per_window: vec![],
    })
}

/// Monte Carlo ν² over contiguous windows of the given sizes.
pub fn variance_proxy(
    spec: &MatrixSeriesSpec,
    n: usize,
    window_sizes: &[usize],
    reps: usize,
    seed: u64,
) -> Result<MatrixVarianceProxy> {
    ensure(!window_sizes.is_empty(), "window_sizes", || "need at least one window".into())?;
    for w in window_sizes {
        ensure(*w >= 1 && *w <= n, "window_sizes", || format!("window {w} is outside [1, {n}]"))?;
    }
    ensure(reps >= 2, "reps", || "need at least 2 replications".into())?;
    let sampler = spec.sampler()?;
    let d = sampler.dimension();
    let longest = *window_sizes.iter().max().expect("nonempty");
    // Each replication returns Σ_{i<w} X_i for every requested w.
    let sums: Vec<Vec<Matrix>> = replicate(reps, |r| {
        let mut rng = rng::stream(seed, purpose::INNOVATIONS, r as u64);
        let path = sampler.path(longest, &mut rng);
        let mut acc = Matrix::zeros(d);
        let mut out = Vec::with_capacity(window_sizes.len());
        let mut sorted: Vec<(usize, usize)> = window_sizes.iter().copied().enumerate().map(|(i, w)| (w, i)).collect();
        sorted.sort_unstable();
        let mut slots = vec![Matrix::zeros(d); window_sizes.len()];
        let mut next = 0;
        for (t, x) in path.iter().enumerate() {
            acc.add_assign(x);
            while next < sorted.len() && sorted[next].0 == t + 1 {
                slots[sorted[next].1] = acc.clone();
                next += 1;
            }
        }
        out.extend(slots);
        out
    });
    let mut per_window = Vec::with_capacity(window_sizes.len());
    for (k, &w) in window_sizes.iter().enumerate() {
        let mut mean = Matrix::zeros(d);
        let squares: Vec<Matrix> = sums.iter().map(|s| s[k].matmul(&s[k])).collect();
        for sq in &squares {
            mean.add_assign(sq);
        }
        let mean = mean.scale(1.0 / reps as f64);
        let (lambda, u) = top_eigenpair(&mean)?;
        // Delta method: λ̂ ≈ uᵀ Ŝ u, so its SE is that of the per-replication |S_w u|².
        let mo: Moments = sums
            .iter()
            .map(|s| {
                let mut su = vec![0.0; d];
                s[k].matvec(&u, &mut su);
                su.iter().map(|v| v * v).sum::<f64>()
            })
            .collect();
        per_window.push(WindowEstimate { window: w, value: lambda / w as f64, se: mo.se() / w as f64 });
    }
    let best = per_window
        .iter()
        .cloned()
        .fold(None::<WindowEstimate>, |b, e| match b {
            Some(b) if b.value >= e.value => Some(b),
            _ => Some(e),
        })
        .ok_or_else(|| Error::invalid("window_sizes", "empty"))?;
    Ok(MatrixVarianceProxy {
        value: best.value,
        method: ProxyMethod::WindowMonteCarlo,
        windows_used: window_sizes.to_vec(),
        reps,
        se: best.se,
        lower_estimate: true,
        per_window,
    })
}

/// Largest eigenvalue and a unit eigenvector by inverse iteration on the Jacobi eigenvalue.
fn top_eigenpair(m: &Matrix) -> Result<(f64, Vec<f64>)> {
    let d = m.dim();
    if m.is_diagonal() {
        let diag = m.diag();
        let (j, v) = diag.iter().enumerate().fold((0, f64::NEG_INFINITY), |b, (j, v)| if *v > b.1 { (j, *v) } else { b });
        let mut u = vec![0.0; d];
        u[j] = 1.0;
        return Ok((v, u));
    }
    let eig = symmetric_eigenvalues(m)?;
    let lambda = *eig.last().expect("nonempty");
    // Power iteration on (M − λ_min I) converges to the top eigenvector.
    let shift = eig[0];
    let mut u = vec![1.0 / (d as f64).sqrt(); d];
    let mut next = vec![0.0; d];
    for _ in 0..2000 {
        m.matvec(&u, &mut next);
        for (nv, uv) in next.iter_mut().zip(&u) {
            *nv -= shift * uv;
        }
        let norm = next.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm == 0.0 {
            break;
        }
        next.iter_mut().for_each(|v| *v /= norm);
        let diff: f64 = next.iter().zip(&u).map(|(a, b)| (a - b).abs()).sum();
        std::mem::swap(&mut u, &mut next);
        if diff < 1e-13 {
            break;
        }
    }
    Ok((lambda, u))
}

/// Hypothesis certificate for a clipped diagonal or independent matrix series.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixCertificate {
    /// Almost-sure bound on λ_max(X_i) and ‖X_i‖.
    pub m: f64,
    /// Certified upper bound on ν².
    pub nu2_upper: f64,
    /// λ_max(E X²) when the terms are independent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub iid_second_moment: Option<f64>,
    /// (ψ₁, ψ₂) with τ(m) ≤ M ψ₁ e^{−ψ₂(m−1)}.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tau: Option<(f64, f64)>,
    pub independent: bool,
}

/// ψ₂ used for independent series, where every τ(m ≥ 1) vanishes.
pub const INDEPENDENT_PSI2: f64 = 50.0;

/// Certifies the Bernstein hypotheses for clipped specs.
///
/// `diagonal_ar` with clip M and scalar transition κ: ‖X‖ ≤ M; Var(clip(v)) times
/// (1 + |κ|)/(1 − |κ|) bounds ν² because correlations of odd functions of a
/// Gaussian pair never exceed the Gaussian correlation; full-past coupling gives
/// τ(m) ≤ |κ|^m E max_i |v_i − w_i| ≤ |κ|^m √2 s √(2 log 2d). Independent
/// clipped rank-one series are also certified.
pub fn matrix_certificate(spec: &MatrixSeriesSpec) -> Result<MatrixCertificate> {
    spec.validate()?;
    let m = spec.bound.ok_or_else(|| Error::invalid("bound", "certificates need a clip level"))?;
    let var = spec.var();
    let norm = var.transition_norm()?;
    let independent = norm == 0.0;
    let d = spec.dimension() as f64;
    match spec.generator {
        MatrixGenerator::DiagonalAr { .. } => {
            let kappa = var.scalar_kappa().ok_or_else(|| {
                Error::invalid("transition", "diagonal_ar certificates need a scalar transition κ·I")
            })?;
            let sigma = stationary_covariance(var)?;
            let s2_max = sigma.diag().iter().cloned().fold(0.0, f64::max);
            let var_clip = clipped_gaussian_second_moment(s2_max, Some(m));
            let k = kappa.abs();
            let nu2_upper = var_clip * (1.0 + k) / (1.0 - k);
            let tau = if independent {
                (1.0 / d, INDEPENDENT_PSI2)
            } else {
                let c0 = 2f64.sqrt() * s2_max.sqrt() * (2.0 * (2.0 * d).ln()).sqrt();
                (c0 * k / m, -k.ln())
            };
            Ok(MatrixCertificate {
                m,
                nu2_upper,
                iid_second_moment: independent.then_some(var_clip),
                tau: Some(tau),
                independent,
            })
        }
        MatrixGenerator::RankOneFromVar { .. } => {
            ensure(independent, "spec", || "rank_one_from_var certificates need a zero transition".into())?;
            let second = spec.radial_clip()?.second_moment_lambda_max(spec.dimension());
            Ok(MatrixCertificate {
                m,
                nu2_upper: second,
                iid_second_moment: Some(second),
                tau: Some((1.0 / d, INDEPENDENT_PSI2)),
                independent,
            })
        }
    }
}
