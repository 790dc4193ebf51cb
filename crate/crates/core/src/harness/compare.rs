use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::bounds::doukhan::doukhan_louhichi_bound;
use crate::bounds::nagaev::{nagaev_dan, nagaev_fdm, nagaev_linear_long, nagaev_linear_short, FdmVariant};
use crate::bounds::{BoundResult, ConstantPack, ConstantsSource};
use crate::dependence::fdm_analytic_linear;
use crate::error::{ensure, Error, Result};
use crate::matrix_bounds::{
    bernstein_beta_mixing, bernstein_independent, bernstein_tau_mixing, matrix_certificate, INDEPENDENT_PSI2,
};
use crate::process::{CoefficientRule, LinearProcessSpec, ProcessSpec};
use crate::ustat::{ustat_exponential_bound, BuiltinKernel};

use super::tail::{sample_statistic, tail_from_draws, Statistic, TailEstimate, MIN_TAIL_REPS};

/// Bound ids accepted by [`compare`].
pub const COMPARABLE: &[&str] = &[
    "nagaev_linear_short",
    "nagaev_linear_long",
    "doukhan_louhichi",
    "nagaev_fdm",
    "nagaev_dan",
    "matrix_bernstein_independent",
    "matrix_bernstein_beta",
    "matrix_bernstein_tau",
    "ustat_exponential",
];

/// Lags of the analytic profile used for FDM-based bounds.
const PROFILE_LAGS: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Dominated,
    VacuousBound,
    ViolationFlag,
}

/// Optional knobs; anything not given is derived from the spec.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CompareParams {
    #[serde(default)]
    pub p: Option<f64>,
    #[serde(default)]
    pub alpha: Option<f64>,
    /// "i", "ii" or "iii" for nagaev_fdm.
    #[serde(default)]
    pub variant: Option<String>,
    #[serde(default)]
    pub consts: ConstantPack,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub n: usize,
    pub x: f64,
    /// Level the statistic is compared with (differs from x for the U-statistic bound).
    pub event_threshold: f64,
    pub bound: BoundResult,
    pub estimate: TailEstimate,
    pub verdict: Verdict,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub bound_id: String,
    pub spec: ProcessSpec,
    pub params: CompareParams,
    pub statistic: Option<Statistic>,
    pub constants_source: Option<ConstantsSource>,
    pub applicable: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub inapplicable_reason: Option<String>,
    pub reps: usize,
    pub seed: u64,
    pub rows: Vec<ComparisonRow>,
}

impl ComparisonReport {
    pub fn violations(&self) -> usize {
        self.rows.iter().filter(|r| r.verdict == Verdict::ViolationFlag).count()
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["bound_id", "n", "x", "bound_raw", "bound_clamped", "p_hat", "ci_low", "ci_high", "verdict"])?;
        for r in &self.rows {
            out.write_record([
                self.bound_id.clone(),
                r.n.to_string(),
                r.x.to_string(),
                r.bound.raw_value.to_string(),
                r.bound.clamped.to_string(),
                r.estimate.p_hat.to_string(),
                r.estimate.ci_low.to_string(),
                r.estimate.ci_high.to_string(),
                serde_json::to_value(r.verdict)?.as_str().unwrap_or_default().to_string(),
            ])?;
        }
        out.flush()?;
        Ok(())
    }
}

pub fn verdict(bound: &BoundResult, estimate: &TailEstimate) -> Verdict {
    if bound.vacuous {
        Verdict::VacuousBound
    } else if estimate.ci_low > bound.clamped {
        Verdict::ViolationFlag
    } else {
        Verdict::Dominated
    }
}

type BoundFn = Box<dyn Fn(f64) -> Result<BoundResult>>;

struct Plan {
    statistic: Statistic,
    bound: BoundFn,
}

fn linear(spec: &ProcessSpec) -> Result<&LinearProcessSpec> {
    match spec {
        ProcessSpec::Linear(l) => Ok(l),
        _ => Err(Error::NotApplicable { reason: "bound needs a scalar linear process".into(), threshold: None }),
    }
}

/// The finite linear process actually simulated.
fn as_simulated(l: &LinearProcessSpec) -> LinearProcessSpec {
    LinearProcessSpec::new(CoefficientRule::Explicit { values: l.truncated_coefficients() }, l.innovation)
}

fn bounded_innovation(l: &LinearProcessSpec) -> Result<f64> {
    l.innovation.sup_norm().ok_or_else(|| Error::NotApplicable {
        reason: "bound needs almost surely bounded innovations".into(),
        threshold: None,
    })
}

fn default_alpha(l: &LinearProcessSpec) -> f64 {
    match l.coefficients {
        CoefficientRule::Polynomial { beta, .. } => beta - 1.0,
        _ => 1.0,
    }
}

fn plan(bound_id: &str, spec: &ProcessSpec, n: u64, params: &CompareParams) -> Result<Plan> {
    let p = params.p.unwrap_or(4.0);
    let consts = params.consts.clone();
    match bound_id {
        "nagaev_linear_short" => {
            let l = linear(spec)?;
            let (f_l1, lp, l2) = (l.truncated_l1(), l.innovation.lp_norm(p), l.innovation.lp_norm(2.0));
            Ok(Plan {
                statistic: Statistic::AbsSum,
                bound: Box::new(move |x| nagaev_linear_short(n, x, p, f_l1, lp, l2)),
            })
        }
        "nagaev_linear_long" => {
            let l = linear(spec)?;
            let CoefficientRule::Polynomial { k, beta } = l.coefficients else {
                return Err(Error::NotApplicable { reason: "needs polynomial coefficients".into(), threshold: None });
            };
            let (lp, l2) = (l.innovation.lp_norm(p), l.innovation.lp_norm(2.0));
            Ok(Plan {
                statistic: Statistic::AbsSum,
                bound: Box::new(move |x| nagaev_linear_long(n, x, p, beta, k.abs(), lp, l2, &consts)),
            })
        }
        "doukhan_louhichi" => {
            // Finite MA(q) with bounded innovations: a = b = 0, K = √2, M = ‖f‖₁ ‖ε‖_∞, L₁ = L₂ = q + 1.
            let l = linear(spec)?;
            let sup = bounded_innovation(l)?;
            let m = l.truncated_l1() * sup;
            let span = l.truncated_coefficients().len() as f64;
            Ok(Plan {
                statistic: Statistic::Sum,
                bound: Box::new(move |x| doukhan_louhichi_bound(n, x, 0.0, 0.0, 2f64.sqrt(), m, span, span)),
            })
        }
        "nagaev_fdm" => {
            let l = linear(spec)?;
            let sim = as_simulated(l);
            let alpha = params.alpha.unwrap_or_else(|| default_alpha(l));
            let profile_p = fdm_analytic_linear(&sim, p, PROFILE_LAGS)?;
            let variant = match params.variant.as_deref().unwrap_or("ii") {
                "i" => {
                    ensure(l.innovation.is_gaussian(), "variant", || {
                        "variant i needs Gaussian innovations for the exact ‖X₀‖_p".into()
                    })?;
                    let f_l2 = sim.coefficients.l2_norm_sq().sqrt();
                    FdmVariant::I {
                        profile_2: fdm_analytic_linear(&sim, 2.0, PROFILE_LAGS)?,
                        profile_p,
                        x0_lp: f_l2 * l.innovation.lp_norm(p),
                        x0_l2: f_l2 * l.innovation.lp_norm(2.0),
                    }
                }
                "ii" => FdmVariant::Ii { big_theta_0: profile_p.tail_sum_at(0)?, alpha },
                "iii" => FdmVariant::Iii { big_theta_0: profile_p.tail_sum_at(0)?, alpha },
                other => return Err(Error::invalid("variant", format!("expected i, ii or iii, got {other}"))),
            };
            Ok(Plan { statistic: Statistic::AbsSum, bound: Box::new(move |x| nagaev_fdm(n, x, p, &variant, &consts)) })
        }
        "nagaev_dan" => {
            let l = linear(spec)?;
            let sim = as_simulated(l);
            let alpha = params.alpha.unwrap_or_else(|| default_alpha(l));
            let dan_p = fdm_analytic_linear(&sim, p, PROFILE_LAGS)?.dan(alpha)?.value;
            let dan_2 = fdm_analytic_linear(&sim, 2.0, PROFILE_LAGS)?.dan(alpha)?.value;
            Ok(Plan {
                statistic: Statistic::AbsSum,
                bound: Box::new(move |x| nagaev_dan(n, x, p, alpha, dan_p, dan_2, &consts)),
            })
        }
        "matrix_bernstein_independent" | "matrix_bernstein_beta" | "matrix_bernstein_tau" => {
            let ProcessSpec::MatrixSeries(ms) = spec else {
                return Err(Error::NotApplicable { reason: "bound needs a matrix series".into(), threshold: None });
            };
            let cert = matrix_certificate(ms)?;
            let d = ms.dimension() as u64;
            let m = cert.m;
            let bound: BoundFn = match bound_id {
                "matrix_bernstein_independent" => {
                    let second = cert.iid_second_moment.filter(|_| cert.independent).ok_or_else(|| {
                        Error::NotApplicable { reason: "terms are not independent".into(), threshold: None }
                    })?;
                    let sigma2 = n as f64 * second;
                    Box::new(move |x| bernstein_independent(n, x, d, sigma2, m))
                }
                "matrix_bernstein_beta" => {
                    // Certified only for independent terms, where β(k) = 0 for every k ≥ 1.
                    ensure(cert.independent, "spec", || "β-mixing rate is certified only for independent terms".into())?;
                    let nu2 = cert.nu2_upper;
                    Box::new(move |x| bernstein_beta_mixing(n, x, d, nu2, m, INDEPENDENT_PSI2, &consts))
                }
                _ => {
                    let (psi1, psi2) = cert.tau.ok_or_else(|| Error::NotApplicable {
                        reason: "no τ-mixing certificate".into(),
                        threshold: None,
                    })?;
                    let nu2 = cert.nu2_upper;
                    Box::new(move |x| bernstein_tau_mixing(n, x, d, nu2, m, psi1, psi2))
                }
            };
            Ok(Plan { statistic: Statistic::MatrixLambdaMax, bound })
        }
        "ustat_exponential" => {
            // Independent bounded data with the degenerate product kernel.
            let l = linear(spec)?;
            let sup = bounded_innovation(l)?;
            let coeffs = l.truncated_coefficients();
            ensure(coeffs.len() == 1, "spec", || "U-statistic comparison needs an independent sequence".into())?;
            let m = (coeffs[0] * sup).powi(2);
            Ok(Plan {
                statistic: Statistic::UStatistic { kernel: BuiltinKernel::Product { arity: 2 } },
                bound: Box::new(move |x| ustat_exponential_bound(n, x, m, &consts)),
            })
        }
        other => Err(Error::invalid("bound_id", format!("{other} cannot be compared; choose one of {COMPARABLE:?}"))),
    }
}

/// Pairs bound values with Monte Carlo tail estimates on a grid of x values.
pub fn compare(
    bound_id: &str,
    spec: &ProcessSpec,
    params: &CompareParams,
    n: usize,
    x_grid: &[f64],
    reps: usize,
    seed: u64,
) -> Result<ComparisonReport> {
    ensure(reps >= MIN_TAIL_REPS, "reps", || format!("must be at least {MIN_TAIL_REPS}, got {reps}"))?;
    ensure(n >= 2, "n", || format!("must be at least 2, got {n}"))?;
    ensure(x_grid.iter().all(|x| *x > 0.0 && x.is_finite()), "x_grid", || "entries must be positive and finite".into())?;
    ensure(COMPARABLE.contains(&bound_id), "bound_id", || {
        format!("{bound_id} cannot be compared; choose one of {COMPARABLE:?}")
    })?;
    spec.validate()?;
    let mut report = ComparisonReport {
        bound_id: bound_id.to_string(),
        spec: spec.clone(),
        params: params.clone(),
        statistic: None,
        constants_source: None,
        applicable: false,
        inapplicable_reason: None,
        reps,
        seed,
        rows: Vec::new(),
    };
    let plan = match plan(bound_id, spec, n as u64, params) {
        Ok(plan) => plan,
        Err(e) if e.is_validation() => {
            report.inapplicable_reason = Some(e.to_string());
            return Ok(report);
        }
        Err(e) => return Err(e),
    };
    let bounds: Vec<BoundResult> = x_grid.iter().map(|&x| (plan.bound)(x)).collect::<Result<_>>()?;
    let thresholds: Vec<f64> = bounds
        .iter()
        .zip(x_grid)
        .map(|(b, &x)| b.extras.get("event_threshold").copied().unwrap_or(x))
        .collect();
    let draws = sample_statistic(spec, &plan.statistic, n, reps, seed)?;
    let estimates = tail_from_draws(&draws, n, &thresholds, seed);
    report.constants_source = bounds.first().map(|b| b.constants_source);
    report.statistic = Some(plan.statistic);
    report.applicable = true;
    report.rows = bounds
        .into_iter()
        .zip(estimates)
        .zip(x_grid)
        .map(|((bound, estimate), &x)| ComparisonRow {
            n,
            x,
            event_threshold: estimate.x,
            verdict: verdict(&bound, &estimate),
            bound,
            estimate,
        })
        .collect();
    Ok(report)
}
