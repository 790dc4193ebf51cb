//! Arbitrary-precision reference formulas shared by the integration tests.
#![allow(dead_code)]

pub mod cross;
pub mod hoeffding;

use std::cell::RefCell;
use std::ops::{Add, Div, Mul, Neg, Sub};

use astro_float::{BigFloat, Consts, RoundingMode};
use depbound_core::rng::{self, StreamRng};

const PREC: usize = 256;
const RM: RoundingMode = RoundingMode::ToEven;

thread_local! {
    static CONSTS: RefCell<Consts> = RefCell::new(Consts::new().expect("astro-float constants"));
}

/// A 256-bit float with just enough arithmetic for the reference formulas.
#[derive(Clone, Debug)]
pub struct R(BigFloat);

pub fn r(x: f64) -> R {
    R(BigFloat::from_f64(x, PREC))
}

pub fn ri(x: u64) -> R {
    R(BigFloat::from_u64(x, PREC))
}

impl R {
    pub fn f64(&self) -> f64 {
        format!("{}", self.0).parse().expect("decimal rendering of a finite BigFloat")
    }

    pub fn exp(&self) -> R {
        CONSTS.with(|c| R(self.0.exp(PREC, RM, &mut c.borrow_mut())))
    }

    pub fn ln(&self) -> R {
        CONSTS.with(|c| R(self.0.ln(PREC, RM, &mut c.borrow_mut())))
    }

    /// Positive bases only. The library pow can stall on some integral exponents.
    pub fn pow(&self, e: &R) -> R {
        if self.is_zero() {
            return r(0.0);
        }
        (e.clone() * self.ln()).exp()
    }

    pub fn powf(&self, e: f64) -> R {
        self.pow(&r(e))
    }

    pub fn powi(&self, n: usize) -> R {
        (0..n).fold(r(1.0), |acc, _| acc * self)
    }

    pub fn sqrt(&self) -> R {
        R(self.0.sqrt(PREC, RM))
    }

    pub fn cbrt(&self) -> R {
        self.pow(&(r(1.0) / r(3.0)))
    }

    pub fn abs(&self) -> R {
        R(self.0.abs())
    }

    pub fn max(self, other: R) -> R {
        if self.0 >= other.0 {
            self
        } else {
            other
        }
    }

    pub fn gt(&self, other: &R) -> bool {
        self.0 > other.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }
}

pub fn pi() -> R {
    CONSTS.with(|c| R(c.borrow_mut().pi(PREC, RM)))
}

macro_rules! binop {
    ($tr:ident, $m:ident, $op:ident) => {
        impl $tr for R {
            type Output = R;
            fn $m(self, o: R) -> R {
                R(self.0.$op(&o.0, PREC, RM))
            }
        }
        impl $tr<&R> for R {
            type Output = R;
            fn $m(self, o: &R) -> R {
                R(self.0.$op(&o.0, PREC, RM))
            }
        }
        impl $tr<&R> for &R {
            type Output = R;
            fn $m(self, o: &R) -> R {
                R(self.0.$op(&o.0, PREC, RM))
            }
        }
        impl $tr<f64> for R {
            type Output = R;
            fn $m(self, o: f64) -> R {
                R(self.0.$op(&r(o).0, PREC, RM))
            }
        }
    };
}

binop!(Add, add, add);
binop!(Sub, sub, sub);
binop!(Mul, mul, mul);
binop!(Div, div, div);

impl Neg for R {
    type Output = R;
    fn neg(self) -> R {
        R(self.0.neg())
    }
}

pub fn sum<I: IntoIterator<Item = R>>(xs: I) -> R {
    xs.into_iter().fold(r(0.0), |a, b| a + b)
}

/// |a − b| / |b|, with an absolute comparison when the reference is zero.
pub fn rel_err(got: f64, want: f64) -> f64 {
    if want == 0.0 {
        got.abs()
    } else {
        ((got - want) / want).abs()
    }
}

/// Uniform draws for generating test inputs.
pub struct Draw(StreamRng);

impl Draw {
    pub fn new(seed: u64) -> Self {
        Draw(rng::stream(seed, 0xD0D0, 0))
    }

    pub fn unit(&mut self) -> f64 {
        rng::uniform(&mut self.0)
    }

    pub fn range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.unit()
    }

    pub fn log_range(&mut self, lo: f64, hi: f64) -> f64 {
        (lo.ln() + (hi.ln() - lo.ln()) * self.unit()).exp()
    }

    pub fn int(&mut self, lo: u64, hi: u64) -> u64 {
        lo + ((hi - lo + 1) as f64 * self.unit()) as u64
    }
}

pub mod oracle {
    use super::*;

    pub fn c_p(p: f64) -> R {
        let pp = r(p) + 2.0;
        r(2.0) * (-r(p)).exp() / (&pp * &pp)
    }

    pub fn linear_short(n: u64, x: f64, p: f64, f_l1: f64, eps_lp: f64, eps_l2: f64) -> R {
        let n = ri(n);
        let (x, p) = (r(x), r(p));
        let t1 = (r(1.0) + r(2.0) / p.clone()).pow(&p) * n.clone() * (r(f_l1) * eps_lp / x.clone()).pow(&p);
        let s = r(f_l1) * eps_l2;
        let t2 = r(2.0) * (-(c_p(p.f64()) * &x * &x / (n * &s * &s))).exp();
        t1 + t2
    }

    #[allow(clippy::too_many_arguments)]
    pub fn linear_long(n: u64, x: f64, p: f64, beta: f64, k: f64, eps_lp: f64, eps_l2: f64, c1: f64, c2: f64) -> R {
        let (n, x, p, b) = (ri(n), r(x), r(p), r(beta));
        let t1 = r(c1) * n.pow(&(r(1.0) + &p * &(r(1.0) - b.clone()))) * (r(k) * eps_lp / x.clone()).pow(&p);
        let s = r(eps_l2) * k;
        let t2 = r(2.0) * (-(r(c2) * &x * &x / (n.pow(&(r(3.0) - b * 2.0)) * &s * &s))).exp();
        t1 + t2
    }

    /// Σ_{j≥1} exp(−j^q y²), summed until terms fall below 1e-30 of the total.
    pub fn g_q(q: f64, y: f64) -> R {
        let (q, y2) = (r(q), r(y) * r(y));
        let mut acc = r(0.0);
        let mut j = 1u64;
        loop {
            let t = (-(ri(j).pow(&q) * &y2)).exp();
            acc = acc + t.clone();
            if (t / acc.clone()).f64() < 1e-30 {
                return acc;
            }
            j += 1;
        }
    }

    pub fn fdm_ii(n: u64, x: f64, p: f64, theta0: f64, c1: f64, c2: f64) -> R {
        let (nr, xr, pr) = (ri(n), r(x), r(p));
        let t1 = r(c1) * r(theta0).pow(&pr) * nr.clone() / xr.pow(&pr);
        let y = r(c2) * xr / (nr.sqrt() * theta0);
        t1 + r(4.0) * g_q(1.0 - 2.0 / p, y.f64())
    }

    pub fn fdm_iii(n: u64, x: f64, p: f64, theta0: f64, alpha: f64, c1: f64, c2: f64) -> R {
        let (nr, xr, pr, a) = (ri(n), r(x), r(p), r(alpha));
        let n_pow = nr.pow(&(pr.clone() * (r(0.5) - a.clone())));
        let t1 = r(c1) * r(theta0).pow(&pr) * n_pow / xr.pow(&pr);
        let e = (pr.clone() * 2.0 - 1.0 - r(2.0) * a * pr.clone()) / (r(2.0) + pr.clone() * 2.0);
        let y = r(c2) * xr / (nr.pow(&e) * theta0);
        t1 + r(4.0) * g_q((p - 2.0) / (p + 1.0), y.f64())
    }

    /// Variant (i) for profiles that vanish beyond their last lag.
    #[allow(clippy::too_many_arguments)]
    pub fn fdm_i(n: u64, x: f64, p: f64, theta_p: &[f64], theta_2: &[f64], x0_lp: f64, x0_l2: f64, c: f64) -> R {
        let (nr, xr, pr) = (ri(n), r(x), r(p));
        let mus: Vec<R> = (1..theta_p.len())
            .map(|j| (ri(j as u64).pow(&(pr.clone() * 0.5 - 1.0)) * r(theta_p[j]).pow(&pr)).pow(&(r(1.0) / (pr.clone() + 1.0))))
            .collect();
        let nu = sum(mus.iter().cloned());
        let t1 = r(c) * nr.clone() / xr.pow(&pr) * (nu.pow(&(pr.clone() + 1.0)) + r(x0_lp).pow(&pr));
        let base = r(c) * &xr * &xr / (nr.clone() * &nu * &nu);
        let t2 = if nu.is_zero() {
            r(0.0)
        } else {
            r(4.0)
                * sum(mus.iter().enumerate().filter(|(i, _)| theta_2[i + 1] > 0.0).map(|(i, mu)| {
                    let t = r(theta_2[i + 1]);
                    (-(base.clone() * mu * mu / (&t * &t))).exp()
                }))
        };
        let t3 = r(2.0) * (-(r(c) * &xr * &xr / (nr * r(x0_l2) * r(x0_l2)))).exp();
        t1 + t2 + t3
    }

    #[allow(clippy::too_many_arguments)]
    pub fn dan(n: u64, x: f64, p: f64, alpha: f64, dan_p: f64, dan_2: f64, c: [f64; 3]) -> R {
        let (nr, xr, pr) = (ri(n), r(x), r(p));
        let a_n = if alpha > 0.5 - 1.0 / p { r(1.0) } else { nr.pow(&(pr.clone() * 0.5 - 1.0 - r(alpha) * pr.clone())) };
        let t1 = r(c[0]) * a_n * nr.clone() * (r(dan_p) / xr.clone()).pow(&pr);
        let t2 = r(c[1]) * (-(r(c[2]) * &xr * &xr / (nr * r(dan_2) * r(dan_2)))).exp();
        t1 + t2
    }

    #[allow(clippy::too_many_arguments)]
    pub fn vector_max(n: u64, x: f64, q: f64, alpha: f64, d: u64, psi: f64, dan_inf: f64, c: f64) -> R {
        let (nr, xr, qr) = (ri(n), r(x), r(q));
        let l = ri(d).ln().max(r(1.0));
        let n_pow = if alpha > 0.5 - 1.0 / q { nr.clone() } else { nr.pow(&(qr.clone() * 0.5 - r(alpha) * qr.clone())) };
        let t1 = r(c) * n_pow * l.pow(&(qr.clone() * 0.5)) * (r(dan_inf) / xr.clone()).pow(&qr);
        let t2 = r(c) * (-(r(c) * &xr * &xr / (nr * r(psi) * r(psi)))).exp();
        t1 + t2
    }

    pub fn phi_moment(p: u32, c: f64, phi: &[f64]) -> R {
        let n = phi.len();
        let w = sum(phi.iter().enumerate().map(|(i, f)| ri((n - i) as u64) * *f));
        (r(8.0) * r(c) * r(c) * ri(p as u64) * w).powf(0.5 * p as f64)
    }

    /// Rosenthal bound for profiles that vanish beyond their last lag.
    pub fn rosenthal(n: u64, p: f64, theta_2: &[f64], theta_p: &[f64], x0_l2: f64, x0_lp: f64) -> R {
        let (nr, pr) = (ri(n), r(p));
        let at = |t: &[f64], j: usize| r(t.get(j).copied().unwrap_or(0.0));
        let lp = pr.ln();
        let s2 = sum((1..=n as usize).map(|j| at(theta_2, j)));
        let sw = sum((1..=n as usize).map(|j| ri(j as u64).pow(&(r(0.5) - r(1.0) / pr.clone())) * at(theta_p, j)));
        let tail = sum((n as usize + 1..theta_p.len()).map(|j| at(theta_p, j)));
        let sqp1 = (pr.clone() - 1.0).sqrt();
        let first = nr.sqrt()
            * (r(87.0) * &pr / &lp * s2 + r(3.0) * sqp1.clone() * tail + r(29.0) * &pr / &lp * r(x0_l2));
        let second = nr.pow(&(r(1.0) / pr.clone()))
            * (r(87.0) * &pr * &sqp1 / lp.clone() * sw + r(29.0) * &pr / &lp * r(x0_lp));
        first + second
    }

    /// inf_{0<t<1/b} {−tx + a t²/(1 − bt)} in closed form, returned as exp of the minimum.
    pub fn merlevede(n: u64, x: f64, sigma2: f64, big_b: f64, c1: f64, c2: f64) -> R {
        let ln = ri(n).ln();
        let a = r(c2) * (ri(n) * sigma2 + r(big_b) * r(big_b));
        let b = r(c1) * r(big_b) * &ln * &ln;
        let u = (a.clone() / (a.clone() + r(x) * b.clone())).sqrt();
        let t = (r(1.0) - u) / b.clone();
        let v = -(t.clone() * x) + a * &t * &t / (r(1.0) - b * t);
        v.exp()
    }

    #[allow(clippy::too_many_arguments)]
    pub fn doukhan(n: u64, x: f64, a: f64, b: f64, k: f64, m: f64, l1: f64, l2: f64) -> R {
        let k2v = (r(k) * r(k)).max(r(2.0));
        let c1 = r(2.0).powf(a + b + 3.0) * r(k) * r(k) * r(m) * r(m) * r(l1) * k2v.clone();
        let c2 = r(2.0) * (r(m) * r(l2) * k2v).pow(&(r(1.0) / (r(a + b) + 2.0)));
        let power = (r(2.0 * a + 2.0 * b) + 3.0) / (r(a + b) + 2.0);
        let xr = r(x);
        (-(&xr * &xr / (c1 * ri(n) + c2 * xr.pow(&power)))).exp()
    }

    pub fn bernstein_independent(x: f64, d: u64, sigma2: f64, m: f64) -> R {
        let xr = r(x);
        ri(d) * (-(&xr * &xr / (r(2.0) * sigma2 + r(2.0) * m * &xr / r(3.0)))).exp()
    }

    pub fn bernstein_beta(n: u64, x: f64, d: u64, nu2: f64, m: f64, gamma: f64, c: f64) -> R {
        let (nr, xr) = (ri(n), r(x));
        let l2 = r(2.0).ln();
        let gt = nr.ln() / l2.clone() * r(2.0).max(r(32.0) * nr.ln() / (r(gamma) * l2));
        ri(d) * (-(r(c) * &xr * &xr / (r(nu2) * nr + r(m) * r(m) / r(gamma) + xr * m * gt))).exp()
    }

    pub fn bernstein_tau(n: u64, x: f64, d: u64, nu2: f64, m: f64, psi1: f64, psi2: f64) -> R {
        let (nr, xr, dr) = (ri(n), r(x), ri(d));
        let psi1_t = r(psi1).max(r(1.0) / dr.clone());
        let pt = nr.ln() / r(2.0).ln() * r(1.0).max(r(8.0) * (psi1_t * nr.powi(6) * dr.clone()).ln() / r(psi2));
        let denom = r(8.0) * (r(225.0) * nr * nu2 + r(3600.0) * r(m) * r(m) / r(psi2)) + r(2.0) * &xr * &(pt * m);
        dr * (-(&xr * &xr / denom)).exp()
    }

    pub fn ustat_exponential(n: u64, x: f64, m: f64, c: f64) -> R {
        let (nr, xr) = (ri(n), r(x));
        let logs = nr.ln() * (nr.clone() * 4.0).ln().ln();
        r(2.0) * (-(r(c) * &xr * &xr * nr / (r(m) * r(m) + r(m) * xr * logs))).exp()
    }

    #[allow(clippy::too_many_arguments)]
    pub fn vstat_fourier(n: u64, x: f64, p: u32, rr: u32, f: f64, c: f64, c_mix: f64, cp: f64) -> R {
        let nr = ri(n);
        let ln = nr.ln();
        let inner = r(64.0) * r(c).cbrt() / (r(1.0) - (-(r(c_mix) / r(3.0))).exp()) + ln.powi(4) / nr.clone();
        let a = r(4.0).powi(rr as usize) * r(f) * r(f) * inner.powi(p as usize);
        let m = r(2.0).powi(rr as usize) * r(f) * ln.powi(2 * p as usize);
        let inv = r(1.0) / ri(p as u64);
        let xr = r(x);
        let denom = a.pow(&inv) + xr.pow(&inv) * m.pow(&inv);
        r(6.0) * (-(r(cp) * nr * xr.pow(&(inv.clone() * 2.0)) / denom)).exp()
    }

    #[allow(clippy::too_many_arguments)]
    pub fn autocov(n: u64, u: f64, q: f64, dan_q: f64, dan_2: f64, c: f64) -> R {
        let (nr, ur, qr) = (ri(n), r(u), r(q));
        let t1 = r(c) * &nr * &nr.ln().pow(&(qr.clone() * 0.5)) * r(dan_q).pow(&qr) / (nr * ur.clone()).pow(&(qr * 0.5));
        let t2 = r(c) * (-(r(c) * ur / (r(dan_2) * r(dan_2)))).exp();
        t1 + t2
    }
}
