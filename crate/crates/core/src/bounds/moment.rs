//! Moment inequalities for sums of dependent variables.

use super::result::{positive, require_p_above_two, BoundResult, ConstantsSource};
use crate::dependence::DependenceProfile;
use crate::error::{ensure, Error, Result};
use crate::special::CompensatedSum;

/// (8 C² p Σ_{i<n} (n − i) φ(i))^{p/2}, bounding E|S_n|^p for φ-mixing sequences with |X| ≤ C.
pub fn phi_moment_bound(n: u64, p: u32, c: f64, phi: &[f64]) -> Result<BoundResult> {
    ensure(n >= 1, "n", || "must be at least 1".into())?;
    ensure(p >= 2, "p", || format!("must be an integer ≥ 2, got {p}"))?;
    positive("c", c)?;
    let n_us = n as usize;
    ensure(phi.len() >= n_us, "phi", || format!("need φ(0..{}) ({} values), got {}", n - 1, n, phi.len()))?;
    ensure(phi.iter().all(|v| *v >= 0.0 && v.is_finite()), "phi", || "entries must be nonnegative".into())?;
    ensure(phi[0] <= 1.0, "phi", || format!("φ(0) must be at most 1, got {}", phi[0]))?;
    if let Some(i) = phi.windows(2).position(|w| w[1] > w[0]) {
        return Err(Error::invalid("phi", format!("must be nonincreasing; φ({}) < φ({})", i, i + 1)));
    }
    let mut acc = CompensatedSum::new();
    for (i, f) in phi.iter().take(n_us).enumerate() {
        acc.add((n_us - i) as f64 * f);
    }
    let weighted = acc.value();
    let raw = (8.0 * c * c * p as f64 * weighted).powf(0.5 * p as f64);
    Ok(BoundResult::moment("phi_moment", raw, ConstantsSource::Explicit)
        .echo("n", n)
        .echo("p", p)
        .echo("c", c)
        .echo("phi", phi[..n_us].to_vec())
        .extra("weighted_phi_sum", weighted))
}

/// Rosenthal-type bound on ‖S_n‖_p from functional dependence measures.
pub fn rosenthal_liu_xiao_wu(
    n: u64,
    p: f64,
    profile_2: &DependenceProfile,
    profile_p: &DependenceProfile,
    x0_l2: f64,
    x0_lp: f64,
) -> Result<BoundResult> {
    ensure(n >= 1, "n", || "must be at least 1".into())?;
    require_p_above_two(p)?;
    positive("x0_l2", x0_l2)?;
    positive("x0_lp", x0_lp)?;
    ensure(profile_2.p == 2.0, "profile_2", || format!("profile has p = {}, expected 2", profile_2.p))?;
    ensure(profile_p.p == p, "profile_p", || format!("profile has p = {}, expected {p}", profile_p.p))?;
    for (name, prof) in [("profile_2", profile_2), ("profile_p", profile_p)] {
        if prof.tail.is_none() {
            return Err(Error::Uncertified(format!("{name} has no certified tail beyond lag {}", prof.max_lag())));
        }
    }
    let nf = n as f64;
    let lp = p.ln();
    let theta_at = |prof: &DependenceProfile, j: usize| prof.theta_at(j).expect("tail checked above");
    let mut sum2 = CompensatedSum::new();
    let mut sum_weighted = CompensatedSum::new();
    for j in 1..=n as usize {
        sum2.add(theta_at(profile_2, j));
        sum_weighted.add((j as f64).powf(0.5 - 1.0 / p) * theta_at(profile_p, j));
    }
    let tail_p = profile_p.tail_sum_at(n as usize + 1)?;
    let first = nf.sqrt()
        * (87.0 * p / lp * sum2.value() + 3.0 * (p - 1.0).sqrt() * tail_p + 29.0 * p / lp * x0_l2);
    let second =
        nf.powf(1.0 / p) * (87.0 * p * (p - 1.0).sqrt() / lp * sum_weighted.value() + 29.0 * p / lp * x0_lp);
    Ok(BoundResult::moment("rosenthal", first + second, ConstantsSource::Explicit)
        .echo("n", n)
        .echo("p", p)
        .echo("x0_l2", x0_l2)
        .echo("x0_lp", x0_lp)
        .echo("profile_max_lag", profile_p.max_lag())
        .extra("sum_theta_2", sum2.value())
        .extra("tail_theta_p", tail_p)
        .extra("weighted_sum_theta_p", sum_weighted.value())
        .extra("sqrt_n_term", first)
        .extra("n_pow_term", second))
}
