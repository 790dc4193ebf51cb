//! Exponential inequality under covariance-type weak dependence.

use super::result::{nonnegative, positive, BoundResult, ConstantsSource};
use crate::error::Result;

/// C₁ = 2^{a+b+3} K² M² L₁ (K² ∨ 2) and C₂ = 2 {M L₂ (K² ∨ 2)}^{1/(a+b+2)}.
pub fn doukhan_constants(a: f64, b: f64, k: f64, m: f64, l1: f64, l2: f64) -> (f64, f64) {
    let k2v = (k * k).max(2.0);
    let c1 = 2f64.powf(a + b + 3.0) * k * k * m * m * l1 * k2v;
    let c2 = 2.0 * (m * l2 * k2v).powf(1.0 / (a + b + 2.0));
    (c1, c2)
}

/// One-sided bound on P(S_n ≥ x).
#[allow(clippy::too_many_arguments)]
pub fn doukhan_louhichi_bound(
    n: u64,
    x: f64,
    a: f64,
    b: f64,
    k: f64,
    m: f64,
    l1: f64,
    l2: f64,
) -> Result<BoundResult> {
    nonnegative("x", x)?;
    nonnegative("a", a)?;
    nonnegative("b", b)?;
    for (name, v) in [("k", k), ("m", m), ("l1", l1), ("l2", l2)] {
        positive(name, v)?;
    }
    let (c1, c2) = doukhan_constants(a, b, k, m, l1, l2);
    let power = (2.0 * a + 2.0 * b + 3.0) / (a + b + 2.0);
    let raw = (-x * x / (c1 * n as f64 + c2 * x.powf(power))).exp();
    Ok(BoundResult::probability("doukhan_louhichi", raw, ConstantsSource::Explicit)
        .echo("n", n)
        .echo("x", x)
        .echo("a", a)
        .echo("b", b)
        .echo("k", k)
        .echo("m", m)
        .echo("l1", l1)
        .echo("l2", l2)
        .extra("c1", c1)
        .extra("c2", c2)
        .extra("x_power", power))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_constants() {
        let (c1, c2) = doukhan_constants(0.0, 0.0, 1.0, 1.0, 1.0, 1.0);
        assert_eq!(c1, 16.0);
        assert!((c2 - 2.0 * 2f64.sqrt()).abs() < 1e-15);
    }
}
