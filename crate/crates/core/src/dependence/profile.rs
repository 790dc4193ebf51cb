use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::special::{hurwitz_zeta, CompensatedSum};

/// How far beyond the computed lags the DAN scan may walk before settling for the envelope.
const DAN_SCAN_LIMIT: usize = 100_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    Analytic,
    MonteCarlo,
}

/// Envelope for θ_k at lags beyond the computed range.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TailModel {
    /// θ_k = 0.
    Zero,
    /// θ_k ≤ scale · rate^k.
    Geometric { scale: f64, rate: f64 },
    /// θ_k ≤ scale · (1 + k)^{−exponent}.
    Polynomial { scale: f64, exponent: f64 },
    /// θ_k ≤ values[k − start] for start ≤ k < start + len, zero afterwards.
    Listed { start: usize, values: Vec<f64> },
}

impl TailModel {
    /// Upper bound on θ_k.
    pub fn theta(&self, k: usize) -> f64 {
        match self {
            TailModel::Zero => 0.0,
            TailModel::Geometric { scale, rate } => scale * rate.powi(k as i32),
            TailModel::Polynomial { scale, exponent } => scale * (1.0 + k as f64).powf(-exponent),
            TailModel::Listed { start, values } => {
                if k < *start {
                    f64::NAN
                } else {
                    values.get(k - start).copied().unwrap_or(0.0)
                }
            }
        }
    }

    /// Upper bound on Σ_{k≥m} θ_k (infinite when the envelope is not summable).
    pub fn tail_sum(&self, m: usize) -> f64 {
        match self {
            TailModel::Zero => 0.0,
            TailModel::Geometric { scale, rate } => {
                if *rate == 0.0 {
                    if m == 0 {
                        *scale
                    } else {
                        0.0
                    }
                } else {
                    scale * rate.powi(m as i32) / (1.0 - rate)
                }
            }
            TailModel::Polynomial { scale, exponent } => {
                if *exponent <= 1.0 {
                    f64::INFINITY
                } else {
                    scale * hurwitz_zeta(*exponent, m as f64 + 1.0)
                }
            }
            TailModel::Listed { start, values } => {
                let skip = m.saturating_sub(*start);
                let mut acc = CompensatedSum::new();
                values.iter().skip(skip).for_each(|v| acc.add(*v));
                acc.value()
            }
        }
    }

    /// Upper bound on sup_{m ≥ m0} (m+1)^α Σ_{k≥m} θ_k, when one is available in closed form.
    fn weighted_tail_sup(&self, m0: usize, alpha: f64) -> Option<f64> {
        match self {
            TailModel::Zero => Some(0.0),
            TailModel::Geometric { scale, rate } => {
                if *rate == 0.0 {
                    return Some(if m0 == 0 { *scale } else { 0.0 });
                }
                // (m+1)^α r^m decreases once m + 1 ≥ α / (−ln r).
                let turn = alpha / -rate.ln();
                ((m0 + 1) as f64 >= turn).then(|| (m0 as f64 + 1.0).powf(alpha) * self.tail_sum(m0))
            }
            TailModel::Polynomial { scale, exponent } => {
                if *exponent <= 1.0 || alpha > exponent - 1.0 {
                    return None;
                }
                // ζ(e, a) ≤ a^{−e} + a^{1−e}/(e−1), and a^α times this is nonincreasing for α ≤ e − 1.
                let a = m0 as f64 + 1.0;
                Some(scale * (a.powf(alpha - exponent) + a.powf(alpha + 1.0 - exponent) / (exponent - 1.0)))
            }
            TailModel::Listed { start, values } => {
                let end = start + values.len();
                if m0 >= end {
                    return Some(0.0);
                }
                let mut best = 0.0f64;
                for m in m0.max(*start)..end {
                    best = best.max((m as f64 + 1.0).powf(alpha) * self.tail_sum(m));
                }
                Some(best)
            }
        }
    }

    fn divergent_for(&self, alpha: f64) -> bool {
        match self {
            TailModel::Polynomial { exponent, .. } => *exponent <= 1.0 || alpha > exponent - 1.0,
            _ => false,
        }
    }
}

/// Tail envelope plus whether it is the exact value (analytic) or only a bound.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailCertificate {
    pub model: TailModel,
    pub exact: bool,
}

/// θ_{0,p}, …, θ_{M,p} with tail sums and provenance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DependenceProfile {
    pub p: f64,
    pub theta: Vec<f64>,
    pub theta_se: Vec<f64>,
    /// Θ_{m,p} for m ≤ M, including the certified tail beyond M when present.
    pub tail_sums: Vec<f64>,
    /// Certified bound on Σ_{k>M} θ_{k,p}; `None` when nothing is known beyond M.
    pub tail_beyond: Option<f64>,
    pub tail: Option<TailCertificate>,
    pub provenance: Provenance,
}

/// sup_m (m+1)^α Θ_{m,p}.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DanValue {
    pub p: f64,
    pub alpha: f64,
    pub value: f64,
    pub argmax_m: usize,
    /// True when the returned value is an envelope bound beyond the computed lags rather than an attained term.
    pub from_tail_bound: bool,
}

impl DependenceProfile {
    pub fn new(
        p: f64,
        theta: Vec<f64>,
        theta_se: Vec<f64>,
        tail: Option<TailCertificate>,
        provenance: Provenance,
    ) -> Self {
        let max_lag = theta.len() - 1;
        let tail_beyond = tail.as_ref().map(|t| t.model.tail_sum(max_lag + 1));
        let mut tail_sums = vec![0.0; theta.len()];
        let mut acc = CompensatedSum::new();
        acc.add(tail_beyond.unwrap_or(0.0));
        for m in (0..theta.len()).rev() {
            acc.add(theta[m]);
            tail_sums[m] = acc.value();
        }
        Self { p, theta, theta_se, tail_sums, tail_beyond, tail, provenance }
    }

    pub fn max_lag(&self) -> usize {
        self.theta.len() - 1
    }

    /// θ_{m,p}, falling back to the tail envelope beyond M.
    pub fn theta_at(&self, m: usize) -> Option<f64> {
        if m <= self.max_lag() {
            Some(self.theta[m])
        } else {
            self.tail.as_ref().map(|t| t.model.theta(m))
        }
    }

    /// Θ_{m,p} for any m, using the tail envelope beyond M.
    pub fn tail_sum_at(&self, m: usize) -> Result<f64> {
        if m <= self.max_lag() {
            if self.tail_beyond.is_none() {
                return Err(Error::Uncertified(
                    "profile has no tail certificate; tail sums cover computed lags only".into(),
                ));
            }
            Ok(self.tail_sums[m])
        } else {
            self.tail
                .as_ref()
                .map(|t| t.model.tail_sum(m))
                .ok_or_else(|| Error::Uncertified(format!("lag {m} is beyond the profile and no tail is certified")))
        }
    }

    /// True when every θ beyond the computed lags is known to vanish.
    pub fn is_finite_range(&self) -> bool {
        matches!(self.tail.as_ref().map(|t| &t.model), Some(TailModel::Zero))
    }

    /// Dependence-adjusted norm sup_{m≥0} (m+1)^α Θ_{m,p}.
    pub fn dan(&self, alpha: f64) -> Result<DanValue> {
        let tail = self.tail.as_ref().ok_or_else(|| {
            Error::Uncertified("dependence-adjusted norm needs a certified tail beyond the computed lags".into())
        })?;
        if !alpha.is_finite() || alpha < 0.0 {
            return Err(Error::invalid("alpha", format!("must be a nonnegative real, got {alpha}")));
        }
        if tail.model.divergent_for(alpha) {
            let msg = format!("tail envelope {:?} makes sup (m+1)^{alpha} Θ_m infinite", tail.model);
            return Err(if tail.exact { Error::Divergent(msg) } else { Error::Uncertified(msg) });
        }
        let weight = |m: usize| (m as f64 + 1.0).powf(alpha);
        let mut best = f64::NEG_INFINITY;
        let mut argmax = 0;
        for (m, big) in self.tail_sums.iter().enumerate() {
            let v = weight(m) * big;
            if v > best {
                best = v;
                argmax = m;
            }
        }
        let mut from_tail = false;
        let mut m = self.max_lag() + 1;
        let limit = m + DAN_SCAN_LIMIT;
        while m < limit {
            if let Some(b) = tail.model.weighted_tail_sup(m, alpha) {
                if b <= best {
                    return Ok(DanValue { p: self.p, alpha, value: best, argmax_m: argmax, from_tail_bound: from_tail });
                }
            }
            let v = weight(m) * tail.model.tail_sum(m);
            if v > best {
                best = v;
                argmax = m;
                from_tail = !tail.exact;
            }
            m += 1;
        }
        match tail.model.weighted_tail_sup(m, alpha) {
            Some(b) => {
                if b > best {
                    best = b;
                    argmax = m;
                    from_tail = true;
                }
                Ok(DanValue { p: self.p, alpha, value: best, argmax_m: argmax, from_tail_bound: from_tail })
            }
            None => Err(Error::Uncertified(format!(
                "tail envelope not yet decreasing after scanning to lag {m}"
            ))),
        }
    }

    /// CSV with columns m, theta, se, Theta and one (m+1)^α Θ_m column per requested α.
    pub fn write_csv<W: Write>(&self, w: W, alphas: &[f64]) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(w);
        let mut header = vec!["m".to_string(), "theta".into(), "se".into(), "Theta".into()];
        header.extend(alphas.iter().map(|a| format!("dan_alpha_{a}")));
        wtr.write_record(&header)?;
        for m in 0..self.theta.len() {
            let big = if self.tail_beyond.is_some() { self.tail_sums[m] } else { f64::NAN };
            let mut row = vec![m.to_string(), self.theta[m].to_string(), self.theta_se[m].to_string(), big.to_string()];
            row.extend(alphas.iter().map(|a| ((m as f64 + 1.0).powf(*a) * big).to_string()));
            wtr.write_record(&row)?;
        }
        wtr.flush()?;
        Ok(())
    }
}
