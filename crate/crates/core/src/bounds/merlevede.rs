//! Bernstein-type bound for geometrically α- or τ-mixing bounded sequences.

use super::result::{nonnegative, positive, BoundResult, ConstantPack, ConstantsSource};
use crate::error::{ensure, Result};
use crate::special::golden_section_min;

const CHERNOFF_REL_TOL: f64 = 1e-10;
const GRID_POINTS: usize = 1000;

struct Mgf {
    a: f64,
    b: f64,
}

impl Mgf {
    /// a = C₂(nσ² + B²), b = C₁B(log n)².
    fn new(n: u64, sigma2: f64, big_b: f64, c: &ConstantPack) -> Self {
        let ln = (n as f64).ln();
        Self { a: c.get("C2") * (n as f64 * sigma2 + big_b * big_b), b: c.get("C1") * big_b * ln * ln }
    }

    fn log_bound(&self, t: f64) -> f64 {
        self.a * t * t / (1.0 - self.b * t)
    }
}

fn validate(n: u64, sigma2: f64, big_b: f64) -> Result<()> {
    ensure(n >= 2, "n", || format!("must be at least 2, got {n}"))?;
    nonnegative("sigma2", sigma2)?;
    positive("b", big_b)
}

/// Upper bound on log E exp(t S_n), valid for 0 < t < 1/(C₁B(log n)²).
pub fn merlevede_mgf(n: u64, t: f64, sigma2: f64, big_b: f64, consts: &ConstantPack) -> Result<f64> {
    validate(n, sigma2, big_b)?;
    let c = consts.resolve(&["C1", "C2"])?;
    let mgf = Mgf::new(n, sigma2, big_b, &c);
    let t_max = 1.0 / mgf.b;
    ensure(t > 0.0 && t < t_max, "t", || format!("must lie in (0, {t_max}), got {t}"))?;
    Ok(mgf.log_bound(t))
}

/// Chernoff bound exp(inf_t {−tx + log-MGF bound}) on P(S_n ≥ x).
pub fn merlevede_chernoff(n: u64, x: f64, sigma2: f64, big_b: f64, consts: &ConstantPack) -> Result<BoundResult> {
    validate(n, sigma2, big_b)?;
    nonnegative("x", x)?;
    let c = consts.resolve(&["C1", "C2"])?;
    let mgf = Mgf::new(n, sigma2, big_b, &c);
    let (t, exponent) = if x == 0.0 {
        (0.0, 0.0)
    } else {
        // With s = 1 − bt ∈ (0, 1) the objective is convex: −x(1−s)/b + a(1−s)²/(b² s).
        let objective = |s: f64| {
            let t = (1.0 - s) / mgf.b;
            -t * x + mgf.log_bound(t)
        };
        let (mut s, mut v) = golden_section_min(objective, 0.0, 1.0, CHERNOFF_REL_TOL);
        // Guard against a non-unimodal objective from extreme inputs: refine around the best grid point.
        let (grid_s, grid_v) = (1..GRID_POINTS)
            .map(|i| i as f64 / GRID_POINTS as f64)
            .map(|s| (s, objective(s)))
            .fold((f64::NAN, f64::INFINITY), |best, cur| if cur.1 < best.1 { cur } else { best });
        if grid_v < v {
            let step = 1.0 / GRID_POINTS as f64;
            let refined = golden_section_min(objective, (grid_s - step).max(0.0), (grid_s + step).min(1.0), CHERNOFF_REL_TOL);
            (s, v) = if refined.1 < grid_v { refined } else { (grid_s, grid_v) };
        }
        ((1.0 - s) / mgf.b, v.min(0.0))
    };
    Ok(BoundResult::probability("merlevede", exponent.exp(), ConstantsSource::UserSupplied)
        .echo("n", n)
        .echo("x", x)
        .echo("sigma2", sigma2)
        .echo("b", big_b)
        .echo_constants(&c)
        .extra("t", t)
        .extra("log_bound", exponent)
        .extra("t_max", 1.0 / mgf.b))
}

/// σ² = Var X₁ + 2Σ_{i>1}|Cov(X₁, X_i)| for a stationary AR(1) with innovation variance σ_ε².
pub fn ar1_long_run_sigma2(kappa: f64, innovation_variance: f64) -> f64 {
    let k = kappa.abs();
    let var = innovation_variance / (1.0 - kappa * kappa);
    var * (1.0 + 2.0 * k / (1.0 - k))
}
