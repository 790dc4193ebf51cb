use serde::{Deserialize, Serialize};

use crate::error::{ensure, Error, Result};
use crate::linalg::lambda_max;
use crate::mc::replicate;
use crate::process::ProcessSpec;
use crate::rng::{self, purpose};
use crate::special::clopper_pearson;
use crate::ustat::{u_statistic, BuiltinKernel, DEFAULT_BUDGET};

pub const MIN_TAIL_REPS: usize = 1000;
pub const CONFIDENCE: f64 = 0.99;

/// Quantity whose tail is estimated.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Statistic {
    /// S_n, for one-sided bounds.
    Sum,
    /// |S_n|.
    AbsSum,
    /// |S_n|_∞ over coordinates.
    MaxAbsSumCoord,
    /// λ_max(Σ X_i) for matrix series.
    MatrixLambdaMax,
    /// |U_n(h)| of the scalar path.
    UStatistic { kernel: BuiltinKernel },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailEstimate {
    pub n: usize,
    pub x: f64,
    pub hits: u64,
    pub p_hat: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub reps: usize,
    pub seed: u64,
}

impl TailEstimate {
    pub fn from_hits(n: usize, x: f64, hits: u64, reps: usize, seed: u64) -> Self {
        let (ci_low, ci_high) = clopper_pearson(hits, reps as u64, CONFIDENCE);
        Self { n, x, hits, p_hat: hits as f64 / reps as f64, ci_low, ci_high, reps, seed }
    }
}

/// One draw of the statistic per replication, in replication order.
pub fn sample_statistic(spec: &ProcessSpec, statistic: &Statistic, n: usize, reps: usize, seed: u64) -> Result<Vec<f64>> {
    spec.validate()?;
    ensure(n >= 1, "n", || "must be at least 1".into())?;
    let draws: Vec<Result<f64>> = match (spec, statistic) {
        (ProcessSpec::Linear(lin), Statistic::Sum | Statistic::AbsSum | Statistic::MaxAbsSumCoord) => {
            let sampler = lin.sampler()?;
            let weights = sampler.sum_weights(n);
            let law = lin.innovation;
            let abs = !matches!(statistic, Statistic::Sum);
            replicate(reps, |rep| {
                let mut rng = rng::stream(seed, purpose::INNOVATIONS, rep as u64);
                let s: f64 = weights.iter().map(|w| w * law.sample(&mut rng)).sum();
                Ok(if abs { s.abs() } else { s })
            })
        }
        (ProcessSpec::Linear(lin), Statistic::UStatistic { kernel }) => {
            kernel.validate()?;
            let sampler = lin.sampler()?;
            replicate(reps, |rep| {
                let mut rng = rng::stream(seed, purpose::INNOVATIONS, rep as u64);
                let rows: Vec<Vec<f64>> = sampler.path(n, &mut rng).into_iter().map(|x| vec![x]).collect();
                Ok(u_statistic(&rows, kernel, DEFAULT_BUDGET)?.abs())
            })
        }
        (ProcessSpec::Var(var), Statistic::Sum | Statistic::AbsSum | Statistic::MaxAbsSumCoord) => {
            let scalar = var.dimension == 1;
            ensure(scalar || matches!(statistic, Statistic::MaxAbsSumCoord), "statistic", || {
                "sum and abs_sum need a scalar series; use max_abs_sum_coord".into()
            })?;
            let sampler = var.sampler()?;
            replicate(reps, |rep| {
                let mut rng = rng::stream(seed, purpose::INNOVATIONS, rep as u64);
                let mut sums = vec![0.0; var.dimension];
                for row in sampler.path(n, &mut rng) {
                    sums.iter_mut().zip(&row).for_each(|(s, x)| *s += x);
                }
                Ok(match statistic {
                    Statistic::Sum => sums[0],
                    _ => sums.iter().fold(0.0f64, |m, s| m.max(s.abs())),
                })
            })
        }
        (ProcessSpec::MatrixSeries(ms), Statistic::MatrixLambdaMax) => {
            let sampler = ms.sampler()?;
            replicate(reps, |rep| {
                let mut rng = rng::stream(seed, purpose::INNOVATIONS, rep as u64);
                let sum = sampler.sum(n, &mut rng);
                if sampler.is_diagonal() {
                    Ok(sum.diag().into_iter().fold(f64::NEG_INFINITY, f64::max))
                } else {
                    lambda_max(&sum)
                }
            })
        }
        _ => {
            return Err(Error::invalid(
                "statistic",
                format!("{statistic:?} is not defined for this process kind"),
            ))
        }
    };
    let mut out = Vec::with_capacity(reps);
    for (replication, d) in draws.into_iter().enumerate() {
        let v = d?;
        if !v.is_finite() {
            return Err(Error::NonFinite { replication });
        }
        out.push(v);
    }
    Ok(out)
}

/// Counts exceedances of every grid point from one simulation pass.
pub fn tail_from_draws(draws: &[f64], n: usize, x_grid: &[f64], seed: u64) -> Vec<TailEstimate> {
    x_grid
        .iter()
        .map(|&x| {
            let hits = draws.iter().filter(|&&s| s >= x).count() as u64;
            TailEstimate::from_hits(n, x, hits, draws.len(), seed)
        })
        .collect()
}

/// Monte Carlo P(statistic ≥ x) for each x with 99% Clopper–Pearson intervals.
pub fn estimate_tail(
    spec: &ProcessSpec,
    statistic: &Statistic,
    n: usize,
    x_grid: &[f64],
    reps: usize,
    seed: u64,
) -> Result<Vec<TailEstimate>> {
    ensure(reps >= MIN_TAIL_REPS, "reps", || format!("must be at least {MIN_TAIL_REPS}, got {reps}"))?;
    ensure(x_grid.iter().all(|x| x.is_finite()), "x_grid", || "entries must be finite".into())?;
    let draws = sample_statistic(spec, statistic, n, reps, seed)?;
    Ok(tail_from_draws(&draws, n, x_grid, seed))
}
