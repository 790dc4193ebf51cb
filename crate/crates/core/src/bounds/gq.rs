use statrs::function::gamma::{gamma_ur, ln_gamma};

use crate::error::{ensure, Result};
use crate::special::{upper_gamma_bound, CompensatedSum};

/// Terms summed directly before switching to an Euler–Maclaurin tail.
const DIRECT_TERMS: usize = 1_000_000;

/// ∫_J^∞ exp(−y² t^q) dt = Γ(1/q, y² J^q) / (q y^{2/q}).
fn tail_integral(q: f64, y: f64, from: f64) -> f64 {
    let s = 1.0 / q;
    let z = y * y * from.powf(q);
    (ln_gamma(s) + gamma_ur(s, z).ln() - q.ln() - 2.0 * s * y.ln()).exp()
}

/// Certified upper bound on ∫_J^∞ exp(−y² t^q) dt, if available.
fn tail_integral_bound(q: f64, y: f64, from: f64) -> Option<f64> {
    let s = 1.0 / q;
    upper_gamma_bound(s, y * y * from.powf(q)).map(|g| g / (q * y.powf(2.0 * s)))
}

/// Details of a G_q evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GqEvaluation {
    pub value: f64,
    pub terms: usize,
    /// Certified bound on the neglected tail (`None` when the Euler–Maclaurin fallback was used).
    pub tail_bound: Option<f64>,
}

/// G_q(y) = Σ_{j≥1} exp(−j^q y²).
pub fn g_q(q: f64, y: f64, rel_tol: f64) -> Result<f64> {
    g_q_detailed(q, y, rel_tol).map(|e| e.value)
}

pub fn g_q_detailed(q: f64, y: f64, rel_tol: f64) -> Result<GqEvaluation> {
    ensure(q > 0.0 && q.is_finite(), "q", || format!("must be positive, got {q}"))?;
    ensure(y > 0.0 && y.is_finite(), "y", || format!("G_q diverges at y = {y}; need y > 0"))?;
    ensure(rel_tol > 0.0, "rel_tol", || "must be positive".into())?;
    let y2 = y * y;
    let f = |t: f64| (-y2 * t.powf(q)).exp();
    let mut acc = CompensatedSum::new();
    let mut j = 0usize;
    while j < DIRECT_TERMS {
        j += 1;
        acc.add(f(j as f64));
        let partial = acc.value();
        // f is decreasing, so Σ_{k>j} f(k) ≤ ∫_j^∞ f.
        if let Some(bound) = tail_integral_bound(q, y, j as f64) {
            if bound < rel_tol * partial || partial == 0.0 && bound == 0.0 {
                // Midpoint estimate of the neglected tail; its error is far below the bound.
                let a = j as f64 + 1.0;
                let est = (tail_integral(q, y, a) + 0.5 * f(a)).min(bound);
                acc.add(if est.is_finite() { est } else { 0.0 });
                return Ok(GqEvaluation { value: acc.value(), terms: j, tail_bound: Some(bound) });
            }
        }
    }
    // Euler–Maclaurin: Σ_{k≥a} f(k) ≈ ∫_a^∞ f + f(a)/2 − f′(a)/12.
    let a = j as f64 + 1.0;
    let fa = f(a);
    let fprime = -y2 * q * a.powf(q - 1.0) * fa;
    acc.add(tail_integral(q, y, a) + 0.5 * fa - fprime / 12.0);
    Ok(GqEvaluation { value: acc.value(), terms: j, tail_bound: None })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn q_one_is_geometric() {
        for y in [0.5f64, 1.0, 2.0] {
            let r = (-y * y).exp();
            let exact = r / (1.0 - r);
            let got = g_q(1.0, y, 1e-12).unwrap();
            assert!(((got - exact) / exact).abs() < 1e-13, "y={y}: {got} vs {exact}");
        }
    }

    #[test]
    fn small_y_uses_fallback() {
        let e = g_q_detailed(0.5, 1e-3, 1e-12).unwrap();
        assert!(e.tail_bound.is_none());
        // G_q(y) ≈ Γ(1 + 1/q) / y^{2/q} − 1/2 for small y.
        let approx = 2.0 / 1e-3f64.powi(4) - 0.5;
        assert!(((e.value - approx) / approx).abs() < 1e-6);
    }

    #[test]
    fn zero_y_rejected() {
        assert!(g_q(1.0, 0.0, 1e-12).is_err());
    }
}
