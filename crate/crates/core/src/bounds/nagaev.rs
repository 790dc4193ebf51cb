//! Nagaev-type tail bounds: polynomial term plus sub-Gaussian term.

use serde::{Deserialize, Serialize};

use super::gq::g_q;
use super::result::{
    nonnegative, positive, reject_boundary, require_p_above_two, BoundResult, ConstantPack, ConstantsSource,
};
use crate::dependence::{DependenceProfile, TailModel};
use crate::error::{ensure, Error, Result};
use crate::special::{compensated_sum, hurwitz_zeta, upper_gamma_bound, CompensatedSum};

const GQ_REL_TOL: f64 = 1e-12;
/// Terms of the exponential series summed before the certified tail must take over.
const SERIES_LIMIT: usize = 10_000_000;

fn n_positive(n: u64) -> Result<f64> {
    ensure(n >= 1, "n", || "must be at least 1".into())?;
    Ok(n as f64)
}

/// c_p = 2 e^{−p} (p + 2)^{−2}.
pub fn linear_c_p(p: f64) -> f64 {
    2.0 * (-p).exp() / ((p + 2.0) * (p + 2.0))
}

/// Short-range linear-process Nagaev bound on P(|S_n| ≥ x).
pub fn nagaev_linear_short(n: u64, x: f64, p: f64, f_l1: f64, eps_lp: f64, eps_l2: f64) -> Result<BoundResult> {
    let nf = n_positive(n)?;
    require_p_above_two(p)?;
    positive("x", x)?;
    positive("f_l1", f_l1)?;
    positive("eps_lp", eps_lp)?;
    positive("eps_l2", eps_l2)?;
    let c_p = linear_c_p(p);
    let t1 = (1.0 + 2.0 / p).powf(p) * nf * (f_l1 * eps_lp / x).powf(p);
    let t2 = 2.0 * (-c_p * x * x / (nf * f_l1 * f_l1 * eps_l2 * eps_l2)).exp();
    Ok(BoundResult::probability("nagaev_linear_short", t1 + t2, ConstantsSource::Explicit)
        .echo("n", n)
        .echo("x", x)
        .echo("p", p)
        .echo("f_l1", f_l1)
        .echo("eps_lp", eps_lp)
        .echo("eps_l2", eps_l2)
        .extra("c_p", c_p)
        .extra("polynomial_term", t1)
        .extra("exponential_term", t2))
}

/// Long-range linear-process Nagaev bound with user constants C1, C2.
#[allow(clippy::too_many_arguments)]
pub fn nagaev_linear_long(
    n: u64,
    x: f64,
    p: f64,
    beta: f64,
    k: f64,
    eps_lp: f64,
    eps_l2: f64,
    consts: &ConstantPack,
) -> Result<BoundResult> {
    let nf = n_positive(n)?;
    require_p_above_two(p)?;
    positive("x", x)?;
    ensure(beta > 0.5 && beta < 1.0, "beta", || format!("must lie in (1/2, 1), got {beta}"))?;
    positive("k", k)?;
    positive("eps_lp", eps_lp)?;
    positive("eps_l2", eps_l2)?;
    let c = consts.resolve(&["C1", "C2"])?;
    let t1 = c.get("C1") * nf.powf(1.0 + p * (1.0 - beta)) * (k * eps_lp / x).powf(p);
    let t2 = 2.0 * (-c.get("C2") * x * x / (nf.powf(3.0 - 2.0 * beta) * eps_l2 * eps_l2 * k * k)).exp();
    Ok(BoundResult::probability("nagaev_linear_long", t1 + t2, ConstantsSource::UserSupplied)
        .echo("n", n)
        .echo("x", x)
        .echo("p", p)
        .echo("beta", beta)
        .echo("k", k)
        .echo("eps_lp", eps_lp)
        .echo("eps_l2", eps_l2)
        .echo_constants(&c)
        .extra("polynomial_term", t1)
        .extra("exponential_term", t2))
}

/// Inputs of the three functional-dependence Nagaev variants.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "variant", rename_all = "snake_case")]
pub enum FdmVariant {
    /// Uses the full θ_{·,p} and θ_{·,2} profiles.
    I {
        profile_p: DependenceProfile,
        profile_2: DependenceProfile,
        x0_lp: f64,
        x0_l2: f64,
    },
    /// Θ_{m,p} = O(m^{−α}) with α > 1/2 − 1/p.
    Ii { big_theta_0: f64, alpha: f64 },
    /// Θ_{m,p} = O(m^{−α}) with α < 1/2 − 1/p.
    Iii { big_theta_0: f64, alpha: f64 },
}

/// ν = Σ_{j≥1} μ_j with μ_j = (j^{p/2−1} θ_{j,p}^p)^{1/(p+1)}, plus the bound on the part beyond the profile.
pub fn nu_sum(profile: &DependenceProfile, p: f64) -> Result<(f64, Vec<f64>, f64)> {
    let mu = |j: usize, theta: f64| ((j as f64).powf(0.5 * p - 1.0) * theta.powf(p)).powf(1.0 / (p + 1.0));
    let max_lag = profile.max_lag();
    let mus: Vec<f64> = (1..=max_lag).map(|j| mu(j, profile.theta[j])).collect();
    let tail = profile.tail.as_ref().ok_or_else(|| {
        Error::Uncertified("variant (i) needs a certified tail for θ_{j,p} to sum ν".into())
    })?;
    let start = max_lag + 1;
    let a = (0.5 * p - 1.0) / (p + 1.0);
    let beyond = match &tail.model {
        TailModel::Zero => 0.0,
        TailModel::Listed { start: s, values } => {
            compensated_sum((start.max(*s)..s + values.len()).map(|j| mu(j, tail.model.theta(j))))
        }
        TailModel::Geometric { rate, .. } => {
            if *rate == 0.0 {
                0.0
            } else {
                // μ_j ≤ s^{p/(p+1)} j^a ρ^j, ρ = r^{p/(p+1)}; successive ratios are at most ((J+1)/J)^a ρ.
                let rho = rate.powf(p / (p + 1.0));
                let mut j = start.max(1);
                loop {
                    let ratio = ((j as f64 + 1.0) / j as f64).powf(a) * rho;
                    if ratio < 1.0 {
                        break;
                    }
                    j *= 2;
                }
                let mut acc = CompensatedSum::new();
                for k in start.max(1)..j {
                    acc.add(mu(k, tail.model.theta(k)));
                }
                let ratio = ((j as f64 + 1.0) / j as f64).powf(a) * rho;
                acc.add(mu(j, tail.model.theta(j)) / (1.0 - ratio));
                acc.value()
            }
        }
        TailModel::Polynomial { scale, exponent } => {
            // μ_j ≤ s^{p/(p+1)} (1+j)^{a − e p/(p+1)}.
            let b = exponent * p / (p + 1.0) - a;
            if b <= 1.0 {
                return Err(Error::Divergent(format!(
                    "ν = Σ μ_j is not certifiably finite: envelope exponent {b} ≤ 1"
                )));
            }
            scale.powf(p / (p + 1.0)) * hurwitz_zeta(b, start as f64 + 1.0)
        }
    };
    let nu = compensated_sum(mus.iter().copied()) + beyond;
    Ok((nu, mus, beyond))
}

/// 4 Σ_j exp(−c μ_j² x² / (n ν² θ_{j,2}²)) with a certified tail beyond the profile.
#[allow(clippy::too_many_arguments)]
fn exponential_series(
    profile_p: &DependenceProfile,
    profile_2: &DependenceProfile,
    mus: &[f64],
    nu: f64,
    p: f64,
    c_p: f64,
    x: f64,
    nf: f64,
) -> Result<f64> {
    let base = c_p * x * x / (nf * nu * nu);
    let mut acc = CompensatedSum::new();
    for (idx, mu) in mus.iter().enumerate() {
        let j = idx + 1;
        // θ_{j,2} ≤ θ_{j,p}, so falling back to the p-profile only enlarges the term.
        let t2 = profile_2.theta_at(j).unwrap_or(profile_p.theta[j]);
        if t2 > 0.0 {
            acc.add((-base * mu * mu / (t2 * t2)).exp());
        }
    }
    // Beyond the profile: μ_j²/θ_{j,2}² ≥ j^s θ_{j,p}^{−2/(p+1)} ≥ j^s θ̄_J^{−2/(p+1)} with s = (p−2)/(p+1),
    // so Σ_{j≥J} ≤ e^{−A J^s} + Γ(1/s, A J^s)/(s A^{1/s}).
    let tail = profile_p.tail.as_ref().expect("checked by nu_sum");
    let s = (p - 2.0) / (p + 1.0);
    let start = profile_p.max_lag() + 1;
    let mut j = start;
    while j < SERIES_LIMIT {
        let envelope = tail.model.theta(j);
        if envelope == 0.0 {
            return Ok(acc.value());
        }
        let a_coef = base * envelope.powf(-2.0 / (p + 1.0));
        let z = a_coef * (j as f64).powf(s);
        if let Some(g) = upper_gamma_bound(1.0 / s, z) {
            let bound = (-z).exp() + g / (s * a_coef.powf(1.0 / s));
            if bound <= 1e-15 * acc.value().max(1e-300) || bound < 1e-300 {
                acc.add(bound);
                return Ok(acc.value());
            }
        }
        acc.add((-z).exp());
        j += 1;
    }
    Err(Error::Uncertified(format!(
        "exponential series tail not certified within {SERIES_LIMIT} terms"
    )))
}

/// Functional-dependence Nagaev bounds on P(|S_n| ≥ x), variants (i)–(iii).
pub fn nagaev_fdm(n: u64, x: f64, p: f64, variant: &FdmVariant, consts: &ConstantPack) -> Result<BoundResult> {
    let nf = n_positive(n)?;
    require_p_above_two(p)?;
    positive("x", x)?;
    match variant {
        FdmVariant::I { profile_p, profile_2, x0_lp, x0_l2 } => {
            positive("x0_lp", *x0_lp)?;
            positive("x0_l2", *x0_l2)?;
            ensure(profile_p.p == p, "profile_p", || format!("profile has p = {}, expected {p}", profile_p.p))?;
            ensure(profile_2.p == 2.0, "profile_2", || format!("profile has p = {}, expected 2", profile_2.p))?;
            let c = consts.resolve(&["c_p"])?;
            let c_p = c.get("c_p");
            let (nu, mus, beyond) = nu_sum(profile_p, p)?;
            let t1 = c_p * nf / x.powf(p) * (nu.powf(p + 1.0) + x0_lp.powf(p));
            let t2 = if nu > 0.0 {
                4.0 * exponential_series(profile_p, profile_2, &mus, nu, p, c_p, x, nf)?
            } else {
                0.0
            };
            let t3 = 2.0 * (-c_p * x * x / (nf * x0_l2 * x0_l2)).exp();
            Ok(BoundResult::probability("nagaev_fdm_i", t1 + t2 + t3, ConstantsSource::UserSupplied)
                .echo("n", n)
                .echo("x", x)
                .echo("p", p)
                .echo("x0_lp", *x0_lp)
                .echo("x0_l2", *x0_l2)
                .echo("profile_max_lag", profile_p.max_lag())
                .echo_constants(&c)
                .extra("nu", nu)
                .extra("nu_tail", beyond)
                .extra("polynomial_term", t1)
                .extra("series_term", t2)
                .extra("exponential_term", t3))
        }
        FdmVariant::Ii { big_theta_0, alpha } | FdmVariant::Iii { big_theta_0, alpha } => {
            positive("big_theta_0", *big_theta_0)?;
            nonnegative("alpha", *alpha)?;
            reject_boundary(*alpha, p)?;
            let boundary = 0.5 - 1.0 / p;
            let second = matches!(variant, FdmVariant::Ii { .. });
            if second && *alpha < boundary || !second && *alpha > boundary {
                return Err(Error::invalid(
                    "alpha",
                    format!(
                        "variant ({}) needs alpha {} 1/2 − 1/p = {boundary}, got {alpha}",
                        if second { "ii" } else { "iii" },
                        if second { ">" } else { "<" }
                    ),
                ));
            }
            let c = consts.resolve(&["C1", "C2"])?;
            let (id, n_pow, q, y_scale) = if second {
                ("nagaev_fdm_ii", nf, 1.0 - 2.0 / p, nf.sqrt())
            } else {
                (
                    "nagaev_fdm_iii",
                    nf.powf(p * (0.5 - alpha)),
                    (p - 2.0) / (p + 1.0),
                    nf.powf((2.0 * p - 1.0 - 2.0 * alpha * p) / (2.0 + 2.0 * p)),
                )
            };
            let t1 = c.get("C1") * big_theta_0.powf(p) * n_pow / x.powf(p);
            let y = c.get("C2") * x / (y_scale * big_theta_0);
            let g = g_q(q, y, GQ_REL_TOL)?;
            let t2 = 4.0 * g;
            Ok(BoundResult::probability(id, t1 + t2, ConstantsSource::UserSupplied)
                .echo("n", n)
                .echo("x", x)
                .echo("p", p)
                .echo("big_theta_0", *big_theta_0)
                .echo("alpha", *alpha)
                .echo_constants(&c)
                .extra("g_q_order", q)
                .extra("g_q_argument", y)
                .extra("polynomial_term", t1)
                .extra("g_q_term", t2))
        }
    }
}

/// a_n = 1 if α > 1/2 − 1/p, else n^{p/2 − 1 − αp}.
pub fn dan_a_n(n: f64, p: f64, alpha: f64) -> f64 {
    if alpha > 0.5 - 1.0 / p {
        1.0
    } else {
        n.powf(0.5 * p - 1.0 - alpha * p)
    }
}

/// Dependence-adjusted-norm Nagaev bound on P(|S_n| ≥ x).
#[allow(clippy::too_many_arguments)]
pub fn nagaev_dan(
    n: u64,
    x: f64,
    p: f64,
    alpha: f64,
    dan_p: f64,
    dan_2: f64,
    consts: &ConstantPack,
) -> Result<BoundResult> {
    let nf = n_positive(n)?;
    require_p_above_two(p)?;
    positive("x", x)?;
    positive("alpha", alpha)?;
    reject_boundary(alpha, p)?;
    nonnegative("dan_p", dan_p)?;
    positive("dan_2", dan_2)?;
    let c = consts.resolve(&["C1", "C2", "C3"])?;
    let a_n = dan_a_n(nf, p, alpha);
    let t1 = c.get("C1") * a_n * nf * (dan_p / x).powf(p);
    let t2 = c.get("C2") * (-c.get("C3") * x * x / (nf * dan_2 * dan_2)).exp();
    Ok(BoundResult::probability("nagaev_dan", t1 + t2, ConstantsSource::UserSupplied)
        .echo("n", n)
        .echo("x", x)
        .echo("p", p)
        .echo("alpha", alpha)
        .echo("dan_p", dan_p)
        .echo("dan_2", dan_2)
        .echo_constants(&c)
        .extra("a_n", a_n)
        .extra("polynomial_term", t1)
        .extra("exponential_term", t2))
}

/// ℓ_n = max(1, ln d).
pub fn ell(d: u64) -> f64 {
    (d as f64).ln().max(1.0)
}

/// Admissibility threshold on x for the max-norm bound.
pub fn vector_max_threshold(n: f64, q: f64, alpha: f64, d: u64, psi: f64, dan_inf: f64, c: f64) -> f64 {
    let l = ell(d);
    let growth = if alpha > 0.5 - 1.0 / q { n.powf(1.0 / q) } else { n.powf(0.5 - alpha) };
    c * ((n * l).sqrt() * psi + growth * l.powf(1.5) * dan_inf)
}

/// Max-norm Nagaev bound on P(|S_n|_∞ ≥ x) for d-dimensional series.
#[allow(clippy::too_many_arguments)]
pub fn nagaev_vector_max(
    n: u64,
    x: f64,
    q: f64,
    alpha: f64,
    d: u64,
    psi_2alpha: f64,
    dan_inf: f64,
    consts: &ConstantPack,
) -> Result<BoundResult> {
    let nf = n_positive(n)?;
    ensure(q > 2.0 && q.is_finite(), "q", || format!("must exceed 2, got {q}"))?;
    positive("x", x)?;
    positive("alpha", alpha)?;
    reject_boundary(alpha, q)?;
    ensure(d >= 1, "d", || "must be at least 1".into())?;
    positive("psi_2alpha", psi_2alpha)?;
    nonnegative("dan_inf", dan_inf)?;
    let consts = consts.resolve(&["C"])?;
    let c = consts.get("C");
    let threshold = vector_max_threshold(nf, q, alpha, d, psi_2alpha, dan_inf, c);
    if x < threshold {
        return Err(Error::NotApplicable {
            reason: format!("x = {x} is below the admissibility threshold {threshold}"),
            threshold: Some(threshold),
        });
    }
    let l = ell(d);
    let n_pow = if alpha > 0.5 - 1.0 / q { nf } else { nf.powf(0.5 * q - alpha * q) };
    let t1 = c * n_pow * l.powf(0.5 * q) * (dan_inf / x).powf(q);
    let t2 = c * (-c * x * x / (nf * psi_2alpha * psi_2alpha)).exp();
    Ok(BoundResult::probability("nagaev_vector_max", t1 + t2, ConstantsSource::UserSupplied)
        .echo("n", n)
        .echo("x", x)
        .echo("q", q)
        .echo("alpha", alpha)
        .echo("d", d)
        .echo("psi_2alpha", psi_2alpha)
        .echo("dan_inf", dan_inf)
        .echo_constants(&consts)
        .extra("ell", l)
        .extra("threshold", threshold)
        .extra("polynomial_term", t1)
        .extra("exponential_term", t2))
}
