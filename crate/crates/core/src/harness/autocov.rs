//! Largest eigenvalue of the sample autocovariance matrix versus the periodogram maximum.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::bounds::result::{nonnegative, positive, reject_boundary};
use crate::bounds::{BoundResult, ConstantPack, ConstantsSource};
use crate::dependence::fdm_analytic_linear;
use crate::error::{ensure, Result};
use crate::linalg::lanczos_lambda_max;
use crate::mc::replicate;
use crate::process::{CoefficientRule, LinearProcessSpec};
use crate::rng::{self, purpose};
use crate::special::golden_section_min;

use super::compare::Verdict;
use super::tail::{TailEstimate, MIN_TAIL_REPS};

pub const MAX_AUTOCOV_N: usize = 2048;
/// Relative slack allowed in λ_max ≤ max|S_n(θ)|²/n.
pub const SLACK: f64 = 1e-8;
/// Grid points per observation for the frequency search.
pub const GRID_FACTOR: usize = 8;
/// Grid maxima refined by golden-section search.
const REFINED_PEAKS: usize = 4;

/// γ̂_k = n⁻¹ Σ_{l>k} W_l W_{l−k}, k = 0..n−1.
pub fn sample_autocovariances(w: &[f64]) -> Vec<f64> {
    let n = w.len();
    (0..n).map(|k| w[k..].iter().zip(w).map(|(a, b)| a * b).sum::<f64>() / n as f64).collect()
}

/// Toeplitz matrix–vector products through a circulant embedding of size 2n.
pub struct ToeplitzOperator {
    n: usize,
    spectrum: Vec<Complex<f64>>,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl ToeplitzOperator {
    pub fn new(gamma: &[f64], planner: &mut FftPlanner<f64>) -> Self {
        let size = 2 * gamma.len();
        Self::from_plans(gamma, planner.plan_fft_forward(size), planner.plan_fft_inverse(size))
    }

    /// Uses plans of length 2·gamma.len().
    pub fn from_plans(gamma: &[f64], forward: Arc<dyn Fft<f64>>, inverse: Arc<dyn Fft<f64>>) -> Self {
        let n = gamma.len();
        let size = 2 * n;
        let mut col = vec![Complex::new(0.0, 0.0); size];
        for k in 0..n {
            col[k].re = gamma[k];
            if k > 0 {
                col[size - k].re = gamma[k];
            }
        }
        forward.process(&mut col);
        Self { n, spectrum: col, forward, inverse }
    }

    pub fn apply(&self, x: &[f64], out: &mut [f64], buf: &mut Vec<Complex<f64>>) {
        let size = 2 * self.n;
        buf.clear();
        buf.extend(x.iter().map(|&v| Complex::new(v, 0.0)));
        buf.resize(size, Complex::new(0.0, 0.0));
        self.forward.process(buf);
        buf.iter_mut().zip(&self.spectrum).for_each(|(b, s)| *b *= s);
        self.inverse.process(buf);
        for (o, b) in out.iter_mut().zip(buf.iter()) {
            *o = b.re / size as f64;
        }
    }
}

/// |Σ_t W_t e^{itθ}|² / n by direct summation.
pub fn periodogram_at(w: &[f64], theta: f64) -> f64 {
    let (mut re, mut im) = (0.0, 0.0);
    for (t, x) in w.iter().enumerate() {
        let a = (t + 1) as f64 * theta;
        re += x * a.cos();
        im += x * a.sin();
    }
    (re * re + im * im) / w.len() as f64
}

/// max_θ |S_n(θ)|²/n from an FFT grid of `grid` points refined around the top peaks.
pub fn fourier_max(w: &[f64], grid: usize, fft: &dyn Fft<f64>) -> f64 {
    let n = w.len();
    if n == 0 {
        return 0.0;
    }
    let mut buf: Vec<Complex<f64>> = w.iter().map(|&v| Complex::new(v, 0.0)).collect();
    buf.resize(grid, Complex::new(0.0, 0.0));
    fft.process(&mut buf);
    // |S_n(θ_j)| does not depend on the time origin, so the FFT's 0-based index is fine.
    let values: Vec<f64> = buf.iter().map(|c| c.norm_sqr() / n as f64).collect();
    let mut peaks: Vec<usize> = (0..grid)
        .filter(|&j| {
            let (prev, next) = (values[(j + grid - 1) % grid], values[(j + 1) % grid]);
            values[j] >= prev && values[j] >= next
        })
        .collect();
    peaks.sort_by(|&a, &b| values[b].total_cmp(&values[a]).then(a.cmp(&b)));
    let step = 2.0 * PI / grid as f64;
    let mut best = values.iter().cloned().fold(0.0, f64::max);
    for &j in peaks.iter().take(REFINED_PEAKS) {
        let centre = j as f64 * step;
        let (_, v) = golden_section_min(|t| -periodogram_at(w, t), centre - step, centre + step, 1e-12);
        best = best.max(-v);
    }
    best
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AutocovTailRow {
    pub u: f64,
    pub bound: BoundResult,
    pub estimate: TailEstimate,
    pub verdict: Verdict,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AutocovReport {
    pub n: usize,
    pub reps: usize,
    pub seed: u64,
    pub grid_size: usize,
    pub holds: usize,
    pub all_hold: bool,
    /// max over replications of λ_max / (max|S_n|²/n).
    pub max_ratio: f64,
    pub lambda_max: Vec<f64>,
    pub fourier_max: Vec<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub tail: Vec<AutocovTailRow>,
}

/// Tail settings for the λ_max bound.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AutocovTailRequest {
    pub q: f64,
    pub alpha: f64,
    pub u_grid: Vec<f64>,
    #[serde(default)]
    pub consts: ConstantPack,
}

/// C n (log n)^{q/2} DAN_q^q / (nu)^{q/2} + C exp(−C u / DAN_2²), valid for u ≥ C DAN_2² log n.
pub fn autocov_tail_bound(n: u64, u: f64, q: f64, alpha: f64, dan_q: f64, dan_2: f64, consts: &ConstantPack) -> Result<BoundResult> {
    ensure(n >= 2, "n", || format!("must be at least 2, got {n}"))?;
    ensure(q > 2.0 && q.is_finite(), "q", || format!("must exceed 2, got {q}"))?;
    positive("u", u)?;
    positive("alpha", alpha)?;
    ensure(alpha > 0.5 - 1.0 / q, "alpha", || format!("must exceed 1/2 − 1/q = {}", 0.5 - 1.0 / q))?;
    reject_boundary(alpha, q)?;
    nonnegative("dan_q", dan_q)?;
    positive("dan_2", dan_2)?;
    let c = consts.resolve(&["C"])?;
    let cq = c.get("C");
    let nf = n as f64;
    let threshold = cq * dan_2 * dan_2 * nf.ln();
    if u < threshold {
        return Err(crate::Error::NotApplicable {
            reason: format!("u = {u} is below the admissibility threshold {threshold}"),
            threshold: Some(threshold),
        });
    }
    let t1 = cq * nf * nf.ln().powf(q / 2.0) * dan_q.powf(q) / (nf * u).powf(q / 2.0);
    let t2 = cq * (-cq * u / (dan_2 * dan_2)).exp();
    Ok(BoundResult::probability("autocov_lambda_max", t1 + t2, ConstantsSource::UserSupplied)
        .echo("n", n)
        .echo("u", u)
        .echo("q", q)
        .echo("alpha", alpha)
        .echo("dan_q", dan_q)
        .echo("dan_2", dan_2)
        .echo_constants(&c)
        .extra("threshold", threshold))
}

/// Checks λ_max(Σ̂_n) ≤ max_θ|S_n(θ)|²/n in every replication.
pub fn autocov_eigen_check(
    spec: &LinearProcessSpec,
    n: usize,
    reps: usize,
    seed: u64,
    tail: Option<&AutocovTailRequest>,
) -> Result<AutocovReport> {
    spec.validate()?;
    ensure((2..=MAX_AUTOCOV_N).contains(&n), "n", || format!("must lie in 2..={MAX_AUTOCOV_N}, got {n}"))?;
    ensure(reps >= 1, "reps", || "must be at least 1".into())?;
    if tail.is_some() {
        ensure(reps >= MIN_TAIL_REPS, "reps", || format!("tail estimates need at least {MIN_TAIL_REPS}"))?;
    }
    let sampler = spec.sampler()?;
    let grid = (GRID_FACTOR * n).next_power_of_two();
    let mut planner = FftPlanner::new();
    let grid_fft = planner.plan_fft_forward(grid);
    let (toep_fwd, toep_inv) = (planner.plan_fft_forward(2 * n), planner.plan_fft_inverse(2 * n));
    let pairs: Vec<Result<(f64, f64)>> = replicate(reps, |rep| {
        let mut rng = rng::stream(seed, purpose::INNOVATIONS, rep as u64);
        let w = sampler.path(n, &mut rng);
        let f = fourier_max(&w, grid, grid_fft.as_ref());
        let gamma = sample_autocovariances(&w);
        if gamma[0] == 0.0 {
            return Ok((0.0, f));
        }
        let op = ToeplitzOperator::from_plans(&gamma, toep_fwd.clone(), toep_inv.clone());
        let mut buf = Vec::with_capacity(2 * n);
        let mut lrng = rng::stream(seed, purpose::LANCZOS, rep as u64);
        let res = lanczos_lambda_max(n, |x, out| op.apply(x, out, &mut buf), &mut lrng)?;
        // Ritz value plus residual is an upper estimate of λ_max.
        Ok((res.lambda_max + res.residual, f))
    });
    let mut lambda_max = Vec::with_capacity(reps);
    let mut fourier = Vec::with_capacity(reps);
    for pair in pairs {
        let (l, f) = pair?;
        lambda_max.push(l);
        fourier.push(f);
    }
    let holds = lambda_max.iter().zip(&fourier).filter(|(l, f)| **l <= **f * (1.0 + SLACK) + f64::MIN_POSITIVE).count();
    let max_ratio = lambda_max
        .iter()
        .zip(&fourier)
        .map(|(l, f)| if *f > 0.0 { l / f } else { 0.0 })
        .fold(0.0, f64::max);
    let tail_rows = match tail {
        None => Vec::new(),
        Some(req) => {
            let dan = |p: f64| -> Result<f64> {
                let sim = LinearProcessSpec::new(CoefficientRule::Explicit { values: spec.truncated_coefficients() }, spec.innovation);
                Ok(fdm_analytic_linear(&sim, p, 200)?.dan(req.alpha)?.value)
            };
            let (dan_q, dan_2) = (dan(req.q)?, dan(2.0)?);
            let mut rows = Vec::new();
            for &u in &req.u_grid {
                let bound = autocov_tail_bound(n as u64, u, req.q, req.alpha, dan_q, dan_2, &req.consts)?;
                let hits = lambda_max.iter().filter(|&&l| l >= u).count() as u64;
                let estimate = TailEstimate::from_hits(n, u, hits, reps, seed);
                let verdict = super::compare::verdict(&bound, &estimate);
                rows.push(AutocovTailRow { u, bound, estimate, verdict });
            }
            rows
        }
    };
    Ok(AutocovReport {
        n,
        reps,
        seed,
        grid_size: grid,
        holds,
        all_hold: holds == reps,
        max_ratio,
        lambda_max,
        fourier_max: fourier,
        tail: tail_rows,
    })
}
