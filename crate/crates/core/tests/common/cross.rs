//! Randomised comparison of every bound calculator with its reference formula.

use depbound_core::bounds::{self, ConstantPack, FdmVariant};
use depbound_core::dependence::{DependenceProfile, Provenance, TailCertificate, TailModel};
use depbound_core::harness::autocov::autocov_tail_bound;
use depbound_core::{matrix_bounds, ustat};

use super::{oracle, rel_err, Draw, R};

pub struct CrossCheck {
    pub id: &'static str,
    pub cases: usize,
    pub worst: f64,
    /// First error returned by the library on an admissible input, if any.
    pub error: Option<String>,
}

impl CrossCheck {
    pub fn passes(&self, tol: f64) -> bool {
        self.error.is_none() && self.worst <= tol
    }
}

fn finite_profile(p: f64, theta: Vec<f64>) -> DependenceProfile {
    let se = vec![0.0; theta.len()];
    DependenceProfile::new(p, theta, se, Some(TailCertificate { model: TailModel::Zero, exact: true }), Provenance::Analytic)
}

fn consts(pairs: &[(&str, f64)]) -> ConstantPack {
    pairs.iter().fold(ConstantPack::new(), |c, (k, v)| c.with(k, *v))
}

fn check<F>(id: &'static str, cases: usize, draw: &mut Draw, mut case: F) -> CrossCheck
where
    F: FnMut(&mut Draw) -> depbound_core::Result<(f64, R)>,
{
    let mut worst = 0.0f64;
    for _ in 0..cases {
        match case(draw) {
            Ok((got, want)) => worst = worst.max(rel_err(got, want.f64())),
            Err(e) => return CrossCheck { id, cases, worst: f64::INFINITY, error: Some(e.to_string()) },
        }
    }
    CrossCheck { id, cases, worst, error: None }
}

/// Runs `cases` random admissible inputs through each calculator.
pub fn run_all(cases: usize, seed: u64) -> Vec<CrossCheck> {
    let mut d = Draw::new(seed);
    let mut out = Vec::new();

    out.push(check("nagaev_linear_short", cases, &mut d, |d| {
        let (n, p) = (d.int(1, 5000), d.range(2.05, 8.0));
        let (f, lp, l2) = (d.range(0.5, 5.0), d.range(0.5, 3.0), d.range(0.3, 2.0));
        let x = d.range(0.2, 40.0) * (n as f64).sqrt() * f * l2;
        let b = bounds::nagaev_linear_short(n, x, p, f, lp, l2)?;
        Ok((b.raw_value, oracle::linear_short(n, x, p, f, lp, l2)))
    }));

    out.push(check("nagaev_linear_long", cases, &mut d, |d| {
        let (n, p, beta) = (d.int(1, 5000), d.range(2.05, 8.0), d.range(0.51, 0.99));
        let (k, lp, l2) = (d.range(0.2, 3.0), d.range(0.5, 3.0), d.range(0.3, 2.0));
        let (c1, c2) = (d.log_range(0.1, 10.0), d.log_range(0.1, 10.0));
        let x = d.range(0.2, 5.0) * (n as f64).powf(1.5 - beta) * l2 * k / c2.sqrt();
        let b = bounds::nagaev_linear_long(n, x, p, beta, k, lp, l2, &consts(&[("C1", c1), ("C2", c2)]))?;
        Ok((b.raw_value, oracle::linear_long(n, x, p, beta, k, lp, l2, c1, c2)))
    }));

    out.push(check("nagaev_fdm_i", cases, &mut d, |d| {
        let (n, p) = (d.int(1, 2000), d.range(2.2, 6.0));
        let lags = d.int(1, 12) as usize;
        let theta_2: Vec<f64> = (0..=lags).map(|_| d.range(0.0, 1.5)).collect();
        // θ_{j,2} ≤ θ_{j,p} for p > 2.
        let theta_p: Vec<f64> = theta_2.iter().map(|t| t * d.range(1.0, 1.5)).collect();
        let (x0_lp, x0_l2, c) = (d.range(1.0, 3.0), d.range(0.5, 1.0), d.log_range(1e-3, 1.0));
        let x = d.range(0.3, 6.0) * (n as f64).sqrt() * x0_l2 / c.sqrt();
        let variant = FdmVariant::I {
            profile_p: finite_profile(p, theta_p.clone()),
            profile_2: finite_profile(2.0, theta_2.clone()),
            x0_lp,
            x0_l2,
        };
        let b = bounds::nagaev_fdm(n, x, p, &variant, &consts(&[("c_p", c)]))?;
        Ok((b.raw_value, oracle::fdm_i(n, x, p, &theta_p, &theta_2, x0_lp, x0_l2, c)))
    }));

    out.push(check("nagaev_fdm_ii", cases, &mut d, |d| {
        let (n, p) = (d.int(1, 5000), d.range(3.0, 8.0));
        let alpha = d.range(0.5 - 1.0 / p + 0.01, 2.0);
        let (theta0, c1, c2) = (d.range(0.3, 3.0), d.log_range(0.1, 10.0), d.log_range(0.1, 10.0));
        let x = d.range(4.0, 8.0) * (n as f64).sqrt() * theta0 / c2;
        let b = bounds::nagaev_fdm(n, x, p, &FdmVariant::Ii { big_theta_0: theta0, alpha }, &consts(&[("C1", c1), ("C2", c2)]))?;
        Ok((b.raw_value, oracle::fdm_ii(n, x, p, theta0, c1, c2)))
    }));

    out.push(check("nagaev_fdm_iii", cases, &mut d, |d| {
        let (n, p) = (d.int(1, 5000), d.range(3.0, 8.0));
        let alpha = d.range(0.0, 0.5 - 1.0 / p - 0.01);
        let (theta0, c1, c2) = (d.range(0.3, 3.0), d.log_range(0.1, 10.0), d.log_range(0.1, 10.0));
        let scale = (n as f64).powf((2.0 * p - 1.0 - 2.0 * alpha * p) / (2.0 + 2.0 * p));
        let x = d.range(4.0, 8.0) * scale * theta0 / c2;
        let b = bounds::nagaev_fdm(n, x, p, &FdmVariant::Iii { big_theta_0: theta0, alpha }, &consts(&[("C1", c1), ("C2", c2)]))?;
        Ok((b.raw_value, oracle::fdm_iii(n, x, p, theta0, alpha, c1, c2)))
    }));

    out.push(check("nagaev_dan", cases, &mut d, |d| {
        let (n, p) = (d.int(1, 5000), d.range(2.2, 8.0));
        let boundary = 0.5 - 1.0 / p;
        let alpha = if d.unit() < 0.5 { d.range(boundary + 0.01, 2.0) } else { d.range(0.01, boundary - 0.01) };
        let (dp, d2) = (d.range(0.2, 3.0), d.range(0.2, 3.0));
        let c = [d.log_range(0.1, 10.0), d.log_range(0.1, 10.0), d.log_range(0.1, 10.0)];
        let x = d.range(0.2, 6.0) * (n as f64).sqrt() * d2 / c[2].sqrt();
        let b = bounds::nagaev_dan(n, x, p, alpha, dp, d2, &consts(&[("C1", c[0]), ("C2", c[1]), ("C3", c[2])]))?;
        Ok((b.raw_value, oracle::dan(n, x, p, alpha, dp, d2, c)))
    }));

    out.push(check("nagaev_vector_max", cases, &mut d, |d| {
        let (n, q, dim) = (d.int(1, 5000), d.range(2.2, 8.0), d.int(1, 100_000));
        let boundary = 0.5 - 1.0 / q;
        let alpha = if d.unit() < 0.5 { d.range(boundary + 0.01, 2.0) } else { d.range(0.01, boundary - 0.01) };
        let (psi, dan_inf, c) = (d.range(0.2, 3.0), d.range(0.2, 3.0), d.log_range(0.05, 2.0));
        let th = bounds::vector_max_threshold(n as f64, q, alpha, dim, psi, dan_inf, c);
        let x = th * d.range(1.0, 3.0);
        let b = bounds::nagaev_vector_max(n, x, q, alpha, dim, psi, dan_inf, &consts(&[("C", c)]))?;
        Ok((b.raw_value, oracle::vector_max(n, x, q, alpha, dim, psi, dan_inf, c)))
    }));

    out.push(check("phi_moment", cases, &mut d, |d| {
        let (n, p, c) = (d.int(1, 300), d.int(2, 6) as u32, d.range(0.1, 3.0));
        let mut phi = vec![d.unit()];
        for _ in 1..n {
            let last = *phi.last().unwrap();
            phi.push(last * d.unit());
        }
        let b = bounds::phi_moment_bound(n, p, c, &phi)?;
        Ok((b.raw_value, oracle::phi_moment(p, c, &phi)))
    }));

    out.push(check("rosenthal", cases, &mut d, |d| {
        let (n, p) = (d.int(1, 30), d.range(2.2, 8.0));
        let lags = d.int(1, 40) as usize;
        let theta_2: Vec<f64> = (0..=lags).map(|_| d.range(0.0, 1.5)).collect();
        let theta_p: Vec<f64> = theta_2.iter().map(|t| t * d.range(1.0, 1.5)).collect();
        let (x0_l2, x0_lp) = (d.range(0.5, 2.0), d.range(0.5, 3.0));
        let b = bounds::rosenthal_liu_xiao_wu(
            n,
            p,
            &finite_profile(2.0, theta_2.clone()),
            &finite_profile(p, theta_p.clone()),
            x0_l2,
            x0_lp,
        )?;
        Ok((b.raw_value, oracle::rosenthal(n, p, &theta_2, &theta_p, x0_l2, x0_lp)))
    }));

    out.push(check("merlevede", cases, &mut d, |d| {
        let (n, s2, bb) = (d.int(2, 10_000), d.range(0.1, 5.0), d.range(0.2, 5.0));
        let (c1, c2) = (d.log_range(0.1, 10.0), d.log_range(0.1, 10.0));
        let x = d.range(0.1, 8.0) * (c2 * n as f64 * s2).sqrt();
        let b = bounds::merlevede_chernoff(n, x, s2, bb, &consts(&[("C1", c1), ("C2", c2)]))?;
        Ok((b.raw_value, oracle::merlevede(n, x, s2, bb, c1, c2)))
    }));

    out.push(check("doukhan_louhichi", cases, &mut d, |d| {
        let n = d.int(1, 5000);
        let (a, b) = (d.range(0.0, 2.0), d.range(0.0, 2.0));
        let (k, m, l1, l2) = (d.range(0.2, 3.0), d.range(0.2, 3.0), d.range(0.5, 10.0), d.range(0.5, 10.0));
        let (c1, _) = bounds::doukhan_constants(a, b, k, m, l1, l2);
        let x = d.range(0.1, 6.0) * (c1 * n as f64).sqrt();
        let r = bounds::doukhan_louhichi_bound(n, x, a, b, k, m, l1, l2)?;
        Ok((r.raw_value, oracle::doukhan(n, x, a, b, k, m, l1, l2)))
    }));

    out.push(check("matrix_bernstein_independent", cases, &mut d, |d| {
        let (n, dim) = (d.int(1, 5000), d.int(1, 1000));
        let (s2, m) = (d.range(0.1, 5.0) * n as f64, d.range(0.2, 5.0));
        let x = d.range(0.1, 7.0) * s2.sqrt();
        let b = matrix_bounds::bernstein_independent(n, x, dim, s2, m)?;
        Ok((b.raw_value, oracle::bernstein_independent(x, dim, s2, m)))
    }));

    out.push(check("matrix_bernstein_beta", cases, &mut d, |d| {
        let (n, dim) = (d.int(2, 5000), d.int(1, 1000));
        let (nu2, m, gamma, c) = (d.range(0.1, 5.0), d.range(0.2, 5.0), d.log_range(0.01, 100.0), d.log_range(0.1, 10.0));
        let x = d.range(0.1, 7.0) * (nu2 * n as f64 / c).sqrt();
        let b = matrix_bounds::bernstein_beta_mixing(n, x, dim, nu2, m, gamma, &consts(&[("C", c)]))?;
        Ok((b.raw_value, oracle::bernstein_beta(n, x, dim, nu2, m, gamma, c)))
    }));

    out.push(check("matrix_bernstein_tau", cases, &mut d, |d| {
        let (n, dim) = (d.int(2, 5000), d.int(1, 1000));
        let (nu2, m, psi1, psi2) = (d.range(0.1, 5.0), d.range(0.2, 5.0), d.log_range(1e-3, 10.0), d.log_range(0.05, 100.0));
        let x = d.range(0.1, 7.0) * (1800.0 * nu2 * n as f64).sqrt();
        let b = matrix_bounds::bernstein_tau_mixing(n, x, dim, nu2, m, psi1, psi2)?;
        Ok((b.raw_value, oracle::bernstein_tau(n, x, dim, nu2, m, psi1, psi2)))
    }));

    out.push(check("ustat_exponential", cases, &mut d, |d| {
        let (n, m, c) = (d.int(4, 10_000), d.range(0.1, 5.0), d.log_range(0.1, 10.0));
        let x = d.range(0.1, 6.0) * m / (c * n as f64).sqrt();
        let b = ustat::ustat_exponential_bound(n, x, m, &consts(&[("c_prime", 1.0), ("C_prime", c)]))?;
        Ok((b.raw_value, oracle::ustat_exponential(n, x, m, c)))
    }));

    out.push(check("vstat_fourier", cases, &mut d, |d| {
        let n = d.int(2, 100_000);
        let r = d.int(1, 4) as u32;
        let p = d.int(1, r as u64) as u32;
        let (f, c, c_mix, cp) = (d.range(0.1, 3.0), d.log_range(0.1, 10.0), d.log_range(0.1, 10.0), d.log_range(0.1, 10.0));
        let (a, m) = ustat::vstat_constants(n as f64, p, r, f, c, c_mix);
        // Solve C′n y² = e (A^{1/p} + y M^{1/p}) for y = x^{1/p} with exponent e.
        let pf = p as f64;
        let e = d.range(0.05, 40.0);
        let (ap, mp, k) = (a.powf(1.0 / pf), m.powf(1.0 / pf), cp * n as f64);
        let y = (e * mp + (e * e * mp * mp + 4.0 * k * e * ap).sqrt()) / (2.0 * k);
        let x = y.powf(pf);
        let b = ustat::vstat_fourier_bound(n, x, p, r, Some(f), c, c_mix, &consts(&[("C_prime", cp)]))?;
        Ok((b.raw_value, oracle::vstat_fourier(n, x, p, r, f, c, c_mix, cp)))
    }));

    out.push(check("autocov_lambda_max", cases, &mut d, |d| {
        let (n, q) = (d.int(2, 5000), d.range(2.2, 8.0));
        let alpha = d.range(0.5 - 1.0 / q + 0.01, 2.0);
        let (dq, d2, c) = (d.range(0.2, 3.0), d.range(0.2, 3.0), d.log_range(0.1, 2.0));
        let th = c * d2 * d2 * (n as f64).ln();
        let u = th.max(1e-3) * d.range(1.0, 4.0);
        let b = autocov_tail_bound(n, u, q, alpha, dq, d2, &consts(&[("C", c)]))?;
        Ok((b.raw_value, oracle::autocov(n, u, q, dq, d2, c)))
    }));

    out
}
