//! Special functions and small numerical helpers shared across modules.

use statrs::function::beta::beta_reg;
use statrs::function::erf::erfc;
use statrs::function::gamma::gamma_lr;

/// Neumaier-compensated running sum.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

pub fn compensated_sum<I: IntoIterator<Item = f64>>(xs: I) -> f64 {
    let mut acc = CompensatedSum::new();
    for x in xs {
        acc.add(x);
    }
    acc.value()
}

/// Sample mean and standard error of the mean.
pub fn mean_and_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    if xs.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let mean = compensated_sum(xs.iter().copied()) / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = compensated_sum(xs.iter().map(|x| (x - mean) * (x - mean))) / (n - 1.0);
    (mean, (var / n).sqrt())
}

pub fn normal_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / std::f64::consts::SQRT_2)
}

pub fn normal_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

/// P(χ²_k ≤ x).
pub fn chi2_cdf(k: f64, x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        gamma_lr(0.5 * k, 0.5 * x)
    }
}

const BERNOULLI_2J: [f64; 8] = [
    1.0 / 6.0,
    -1.0 / 30.0,
    1.0 / 42.0,
    -1.0 / 30.0,
    5.0 / 66.0,
    -691.0 / 2730.0,
    7.0 / 6.0,
    -3617.0 / 510.0,
];

/// Hurwitz zeta ζ(s, a) = Σ_{k≥0} (k + a)^{-s} for s > 1, a > 0, by Euler–Maclaurin.
pub fn hurwitz_zeta(s: f64, a: f64) -> f64 {
    debug_assert!(s > 1.0 && a > 0.0);
    let shift = if a < 25.0 { (25.0 - a).ceil() as usize } else { 0 };
    let mut acc = CompensatedSum::new();
    for k in 0..shift {
        acc.add((k as f64 + a).powf(-s));
    }
    let x = shift as f64 + a;
    acc.add(x.powf(1.0 - s) / (s - 1.0));
    acc.add(0.5 * x.powf(-s));
    // B_{2j}/(2j)! · s(s+1)…(s+2j−2) · x^{−s−2j+1}
    let mut rising = s; // s(s+1)…(s+2j−2) for j = 1
    let mut fact = 2.0; // (2j)!
    let mut xpow = x.powf(-s - 1.0);
    for (j, b) in BERNOULLI_2J.iter().enumerate() {
        let term = b / fact * rising * xpow;
        acc.add(term);
        if term.abs() < 1e-18 * acc.value().abs() {
            break;
        }
        let j2 = 2.0 * (j as f64 + 1.0);
        rising *= (s + j2 - 1.0) * (s + j2);
        fact *= (j2 + 1.0) * (j2 + 2.0);
        xpow /= x * x;
    }
    acc.value()
}

/// Certified upper bound on the upper incomplete gamma function Γ(a, z).
///
/// Uses t^{a−1} ≤ z^{a−1} for a ≤ 1 and t^{a−1} ≤ z^{a−1} e^{(a−1)(t−z)/z} for a > 1,
/// the latter needing z > a − 1. Returns `None` when neither applies.
pub fn upper_gamma_bound(a: f64, z: f64) -> Option<f64> {
    if z <= 0.0 {
        return None;
    }
    let base = (a - 1.0) * z.ln() - z;
    if a <= 1.0 {
        Some(base.exp())
    } else if z > a - 1.0 {
        Some(base.exp() / (1.0 - (a - 1.0) / z))
    } else {
        None
    }
}

/// Exact (Clopper–Pearson) two-sided confidence interval for a binomial proportion.
pub fn clopper_pearson(successes: u64, trials: u64, confidence: f64) -> (f64, f64) {
    assert!(trials > 0 && successes <= trials);
    let alpha = 1.0 - confidence;
    let k = successes as f64;
    let n = trials as f64;
    let lo = if successes == 0 {
        0.0
    } else {
        beta_quantile(0.5 * alpha, k, n - k + 1.0)
    };
    let hi = if successes == trials {
        1.0
    } else {
        beta_quantile(1.0 - 0.5 * alpha, k + 1.0, n - k)
    };
    (lo, hi)
}

/// Quantile of Beta(a, b) by bisection on the regularized incomplete beta function.
pub fn beta_quantile(prob: f64, a: f64, b: f64) -> f64 {
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if beta_reg(a, b, mid) < prob {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Minimizes a unimodal function on `[lo, hi]` by golden-section search.
pub fn golden_section_min<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64, rel_tol: f64) -> (f64, f64) {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = hi - inv_phi * (hi - lo);
    let mut d = lo + inv_phi * (hi - lo);
    let mut fc = f(c);
    let mut fd = f(d);
    for _ in 0..400 {
        if (hi - lo).abs() <= rel_tol * (lo.abs() + hi.abs()).max(f64::MIN_POSITIVE) {
            break;
        }
        if fc <= fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - inv_phi * (hi - lo);
            fc = f(c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + inv_phi * (hi - lo);
            fd = f(d);
        }
    }
    if fc <= fd {
        (c, fc)
    } else {
        (d, fd)
    }
}
