//! Exact U- and V-statistics, Hoeffding decompositions on finite-support laws,
//! and the dependent U/V-statistic tail bounds.

use serde::{Deserialize, Serialize};

use crate::bounds::result::{nonnegative, positive};
use crate::bounds::{BoundResult, ConstantPack, ConstantsSource};
use crate::error::{ensure, Error, Result};
use crate::process::SeriesFragment;
use crate::rng::{self, purpose};
use crate::special::{compensated_sum, CompensatedSum};
use rayon::prelude::*;

/// Default cap on kernel evaluations for one statistic or decomposition.
pub const DEFAULT_BUDGET: u128 = 4_000_000;
pub const MAX_ARITY: usize = 4;

/// A symmetric kernel on r points of R^d.
pub trait Kernel: Sync {
    fn arity(&self) -> usize;
    fn eval(&self, points: &[&[f64]]) -> f64;
}

/// Built-in kernels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BuiltinKernel {
    /// Sum of every coordinate of every point.
    Sum { arity: usize },
    /// Product over points of each point's coordinate sum.
    Product { arity: usize },
    /// Euclidean distance between two points.
    Distance,
    /// exp(−|x − y|² / (2 bandwidth²)).
    GaussianRbf { bandwidth: f64 },
}

impl BuiltinKernel {
    pub fn validate(&self) -> Result<()> {
        match self {
            BuiltinKernel::Sum { arity } | BuiltinKernel::Product { arity } => {
                ensure((1..=MAX_ARITY).contains(arity), "arity", || format!("must lie in 1..={MAX_ARITY}, got {arity}"))
            }
            BuiltinKernel::GaussianRbf { bandwidth } => positive("bandwidth", *bandwidth),
            BuiltinKernel::Distance => Ok(()),
        }
    }

    /// Sup-norm of the kernel on points with every coordinate in [−b, b] (d coordinates).
    pub fn sup_norm_on_box(&self, b: f64, d: usize) -> f64 {
        let df = d as f64;
        match self {
            BuiltinKernel::Sum { arity } => *arity as f64 * df * b,
            BuiltinKernel::Product { arity } => (df * b).powi(*arity as i32),
            BuiltinKernel::Distance => 2.0 * b * df.sqrt(),
            BuiltinKernel::GaussianRbf { .. } => 1.0,
        }
    }
}

impl Kernel for BuiltinKernel {
    fn arity(&self) -> usize {
        match self {
            BuiltinKernel::Sum { arity } | BuiltinKernel::Product { arity } => *arity,
            BuiltinKernel::Distance | BuiltinKernel::GaussianRbf { .. } => 2,
        }
    }

    fn eval(&self, points: &[&[f64]]) -> f64 {
        match self {
            BuiltinKernel::Sum { .. } => points.iter().map(|p| p.iter().sum::<f64>()).sum(),
            BuiltinKernel::Product { .. } => points.iter().map(|p| p.iter().sum::<f64>()).product(),
            BuiltinKernel::Distance => sq_dist(points[0], points[1]).sqrt(),
            BuiltinKernel::GaussianRbf { bandwidth } => {
                (-sq_dist(points[0], points[1]) / (2.0 * bandwidth * bandwidth)).exp()
            }
        }
    }
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Closure adapter for [`Kernel`].
pub struct FnKernel<F> {
    pub arity: usize,
    pub f: F,
}

impl<F: Fn(&[&[f64]]) -> f64 + Sync> Kernel for FnKernel<F> {
    fn arity(&self) -> usize {
        self.arity
    }

    fn eval(&self, points: &[&[f64]]) -> f64 {
        (self.f)(points)
    }
}

/// A kernel plus its optionally declared ‖ĥ‖_{L₁}.
pub struct KernelSpec<'a> {
    pub kernel: &'a dyn Kernel,
    pub fourier_l1: Option<f64>,
}

/// Spot-checks symmetry on random permutations of random Gaussian inputs.
pub fn check_symmetry(kernel: &dyn Kernel, dim: usize, trials: usize, seed: u64) -> Result<()> {
    let r = kernel.arity();
    ensure((1..=MAX_ARITY).contains(&r), "arity", || format!("must lie in 1..={MAX_ARITY}, got {r}"))?;
    let mut rng = rng::stream(seed, purpose::KERNEL_CHECK, 0);
    for _ in 0..trials {
        let pts: Vec<Vec<f64>> = (0..r).map(|_| (0..dim).map(|_| rng::normal(&mut rng)).collect()).collect();
        let refs: Vec<&[f64]> = pts.iter().map(|p| p.as_slice()).collect();
        let base = kernel.eval(&refs);
        let mut perm: Vec<usize> = (0..r).collect();
        // Fisher–Yates with the stream's uniforms.
        for i in (1..r).rev() {
            let j = ((rng::uniform(&mut rng) * (i + 1) as f64) as usize).min(i);
            perm.swap(i, j);
        }
        let permuted: Vec<&[f64]> = perm.iter().map(|&i| refs[i]).collect();
        let other = kernel.eval(&permuted);
        if (base - other).abs() > 1e-12 * base.abs().max(1.0) {
            return Err(Error::invalid("kernel", format!("not symmetric: {base} vs {other} under permutation {perm:?}")));
        }
    }
    Ok(())
}

fn binomial(n: u128, k: u128) -> u128 {
    let mut acc = 1u128;
    for i in 0..k {
        acc = acc.saturating_mul(n - i) / (i + 1);
    }
    acc
}

fn check_budget(needed: u128, budget: u128) -> Result<()> {
    if needed > budget {
        Err(Error::Budget { needed, budget })
    } else {
        Ok(())
    }
}

/// Sums h over index tuples starting at `first`, strictly increasing (U) or unrestricted (V).
fn sum_from(kernel: &dyn Kernel, data: &[Vec<f64>], first: usize, strict: bool) -> f64 {
    fn rec<'d>(
        pos: usize,
        last: usize,
        pts: &mut Vec<&'d [f64]>,
        kernel: &dyn Kernel,
        data: &'d [Vec<f64>],
        strict: bool,
        acc: &mut CompensatedSum,
    ) {
        if pos == kernel.arity() {
            acc.add(kernel.eval(pts));
            return;
        }
        let start = if strict { last + 1 } else { 0 };
        for (i, row) in data.iter().enumerate().skip(start) {
            pts.push(row);
            rec(pos + 1, i, pts, kernel, data, strict, acc);
            pts.pop();
        }
    }
    let mut acc = CompensatedSum::new();
    let mut pts: Vec<&[f64]> = Vec::with_capacity(kernel.arity());
    pts.push(&data[first]);
    rec(1, first, &mut pts, kernel, data, strict, &mut acc);
    acc.value()
}

/// U_n(h) by exact enumeration over increasing index tuples.
pub fn u_statistic(data: &[Vec<f64>], kernel: &dyn Kernel, budget: u128) -> Result<f64> {
    let r = kernel.arity();
    let n = data.len();
    ensure((1..=MAX_ARITY).contains(&r), "arity", || format!("must lie in 1..={MAX_ARITY}, got {r}"))?;
    ensure(n >= r, "n", || format!("need at least r = {r} observations, got {n}"))?;
    let count = binomial(n as u128, r as u128);
    check_budget(count, budget)?;
    let partials: Vec<f64> = (0..n).into_par_iter().map(|i| sum_from(kernel, data, i, true)).collect();
    Ok(compensated_sum(partials) / count as f64)
}

/// V_n(h) by exact enumeration over all n^r index tuples.
pub fn v_statistic(data: &[Vec<f64>], kernel: &dyn Kernel, budget: u128) -> Result<f64> {
    let r = kernel.arity();
    let n = data.len();
    ensure((1..=MAX_ARITY).contains(&r), "arity", || format!("must lie in 1..={MAX_ARITY}, got {r}"))?;
    ensure(n >= 1, "n", || "need at least one observation".into())?;
    let count = (n as u128).saturating_pow(r as u32);
    check_budget(count, budget)?;
    let partials: Vec<f64> = (0..n).into_par_iter().map(|i| sum_from(kernel, data, i, false)).collect();
    Ok(compensated_sum(partials) / count as f64)
}

pub fn u_statistic_fragment(fragment: &SeriesFragment, kernel: &dyn Kernel, budget: u128) -> Result<f64> {
    u_statistic(&fragment.values, kernel, budget)
}

pub fn v_statistic_fragment(fragment: &SeriesFragment, kernel: &dyn Kernel, budget: u128) -> Result<f64> {
    v_statistic(&fragment.values, kernel, budget)
}

/// Deterministic bound |V_n − U_n| ≤ r(r − 1)‖h‖_∞ / n.
pub fn uv_gap_bound(n: usize, r: usize, sup_norm: f64) -> f64 {
    (r * r.saturating_sub(1)) as f64 * sup_norm / n as f64
}

/// A law with finitely many atoms.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FiniteSupportLaw {
    pub atoms: Vec<Vec<f64>>,
    pub probabilities: Vec<f64>,
}

impl FiniteSupportLaw {
    pub fn new(atoms: Vec<Vec<f64>>, probabilities: Vec<f64>) -> Result<Self> {
        let law = Self { atoms, probabilities };
        law.validate()?;
        Ok(law)
    }

    pub fn validate(&self) -> Result<()> {
        ensure(!self.atoms.is_empty(), "atoms", || "need at least one atom".into())?;
        ensure(self.atoms.len() == self.probabilities.len(), "probabilities", || {
            "must have one entry per atom".into()
        })?;
        ensure(self.probabilities.iter().all(|p| *p > 0.0), "probabilities", || "must be positive".into())?;
        let total = compensated_sum(self.probabilities.iter().copied());
        ensure((total - 1.0).abs() <= 1e-12, "probabilities", || format!("must sum to 1, got {total}"))?;
        for i in 0..self.atoms.len() {
            for j in 0..i {
                ensure(self.atoms[i] != self.atoms[j], "atoms", || format!("atoms {j} and {i} coincide"))?;
            }
        }
        Ok(())
    }

    pub fn size(&self) -> usize {
        self.atoms.len()
    }
}

/// Tabulated Hoeffding components h_1..h_r on the support (flat mixed-radix tables).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HoeffdingDecomposition {
    pub theta: f64,
    pub support_size: usize,
    /// components[p − 1] has support_size^p entries; index Σ_k i_k s^{p−1−k}.
    pub components: Vec<Vec<f64>>,
    /// g_p tables in the same layout.
    pub projections: Vec<Vec<f64>>,
}

fn flat_index(idx: &[usize], s: usize) -> usize {
    idx.iter().fold(0, |acc, &i| acc * s + i)
}

fn unflatten(mut k: usize, p: usize, s: usize) -> Vec<usize> {
    let mut idx = vec![0; p];
    for slot in idx.iter_mut().rev() {
        *slot = k % s;
        k /= s;
    }
    idx
}

/// All increasing index subsets of 0..p of size q.
fn subsets(p: usize, q: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(q);
    fn rec(start: usize, p: usize, q: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == q {
            out.push(cur.clone());
            return;
        }
        for i in start..p {
            cur.push(i);
            rec(i + 1, p, q, cur, out);
            cur.pop();
        }
    }
    rec(0, p, q, &mut cur, &mut out);
    out
}

impl HoeffdingDecomposition {
    pub fn arity(&self) -> usize {
        self.components.len()
    }

    /// h_p at support indices `idx` (length p).
    pub fn component(&self, idx: &[usize]) -> f64 {
        self.components[idx.len() - 1][flat_index(idx, self.support_size)]
    }

    /// Σ_p Σ_{subsets} h_p(x_subset) at a full r-tuple of support indices.
    pub fn reconstruct(&self, idx: &[usize]) -> f64 {
        let r = idx.len();
        let mut acc = CompensatedSum::new();
        for p in 1..=r {
            for sub in subsets(r, p) {
                let picked: Vec<usize> = sub.iter().map(|&k| idx[k]).collect();
                acc.add(self.component(&picked));
            }
        }
        acc.value()
    }

    /// max over p and prefixes of |E h_p(x_1..x_{p−1}, X̃)|.
    pub fn degeneracy_residual(&self, law: &FiniteSupportLaw) -> f64 {
        let s = self.support_size;
        let mut worst = 0.0f64;
        for p in 1..=self.arity() {
            for prefix in 0..s.pow(p as u32 - 1) {
                let head = unflatten(prefix, p - 1, s);
                let mut idx = head.clone();
                idx.push(0);
                let mut acc = CompensatedSum::new();
                for (last, prob) in law.probabilities.iter().enumerate() {
                    idx[p - 1] = last;
                    acc.add(prob * self.component(&idx));
                }
                worst = worst.max(acc.value().abs());
            }
        }
        worst
    }
}

/// Exact Hoeffding decomposition of a symmetric kernel under a finite-support law.
pub fn hoeffding_decompose(kernel: &dyn Kernel, law: &FiniteSupportLaw, budget: u128) -> Result<HoeffdingDecomposition> {
    law.validate()?;
    let r = kernel.arity();
    ensure((1..=MAX_ARITY).contains(&r), "arity", || format!("must lie in 1..={MAX_ARITY}, got {r}"))?;
    let s = law.size();
    let cells = (s as u128).saturating_pow(r as u32);
    check_budget(cells, budget)?;
    let cells = cells as usize;
    let table: Vec<f64> = (0..cells)
        .into_par_iter()
        .map(|k| {
            let idx = unflatten(k, r, s);
            let pts: Vec<&[f64]> = idx.iter().map(|&i| law.atoms[i].as_slice()).collect();
            kernel.eval(&pts)
        })
        .collect();
    let weight = |k: usize, p: usize| unflatten(k, p, s).iter().map(|&i| law.probabilities[i]).product::<f64>();
    let theta = compensated_sum((0..cells).map(|k| weight(k, r) * table[k]));
    // g_r = h − θ; g_p contracts the trailing coordinate of g_{p+1} against the law.
    let mut projections = vec![Vec::new(); r];
    projections[r - 1] = table.iter().map(|v| v - theta).collect();
    for p in (1..r).rev() {
        let next = &projections[p];
        let g: Vec<f64> = (0..s.pow(p as u32))
            .map(|k| compensated_sum((0..s).map(|last| law.probabilities[last] * next[k * s + last])))
            .collect();
        projections[p - 1] = g;
    }
    let mut components: Vec<Vec<f64>> = Vec::with_capacity(r);
    for p in 1..=r {
        let size = s.pow(p as u32);
        let mut h = Vec::with_capacity(size);
        for k in 0..size {
            let idx = unflatten(k, p, s);
            let mut acc = CompensatedSum::new();
            acc.add(projections[p - 1][k]);
            for q in 1..p {
                for sub in subsets(p, q) {
                    let picked: Vec<usize> = sub.iter().map(|&j| idx[j]).collect();
                    acc.add(-components[q - 1][flat_index(&picked, s)]);
                }
            }
            h.push(acc.value());
        }
        components.push(h);
    }
    Ok(HoeffdingDecomposition { theta, support_size: s, components, projections })
}

/// Exponential bound on P(|U_n| ≥ c′M/√n + x) under geometric φ-mixing.
pub fn ustat_exponential_bound(n: u64, x: f64, m: f64, consts: &ConstantPack) -> Result<BoundResult> {
    ensure(n >= 4, "n", || format!("must be at least 4, got {n}"))?;
    nonnegative("x", x)?;
    positive("m", m)?;
    let c = consts.resolve(&["c_prime", "C_prime"])?;
    let nf = n as f64;
    let logs = nf.ln() * (4.0 * nf).ln().ln();
    let raw = 2.0 * (-c.get("C_prime") * x * x * nf / (m * m + m * x * logs)).exp();
    let threshold = c.get("c_prime") * m / nf.sqrt() + x;
    Ok(BoundResult::probability("ustat_exponential", raw, ConstantsSource::UserSupplied)
        .echo("n", n)
        .echo("x", x)
        .echo("m", m)
        .echo_constants(&c)
        .extra("event_threshold", threshold))
}

/// A_{p,n} and M_{p,n} of the V-statistic Fourier bound.
pub fn vstat_constants(n: f64, p: u32, r: u32, fourier_l1: f64, c: f64, c_mix: f64) -> (f64, f64) {
    let ln = n.ln();
    let inner = 64.0 * c.cbrt() / (1.0 - (-c_mix / 3.0).exp()) + ln.powi(4) / n;
    let a = 4f64.powi(r as i32) * fourier_l1 * fourier_l1 * inner.powi(p as i32);
    let m = 2f64.powi(r as i32) * fourier_l1 * ln.powi(2 * p as i32);
    (a, m)
}

/// Bound on P(|V_n(h_p)| ≥ x) for α-mixing data and Fourier-integrable kernels.
#[allow(clippy::too_many_arguments)]
pub fn vstat_fourier_bound(
    n: u64,
    x: f64,
    p: u32,
    r: u32,
    fourier_l1: Option<f64>,
    c: f64,
    c_mix: f64,
    consts: &ConstantPack,
) -> Result<BoundResult> {
    ensure(n >= 2, "n", || format!("must be at least 2, got {n}"))?;
    ensure(p >= 1 && p <= r, "p", || format!("must lie in 1..={r}, got {p}"))?;
    nonnegative("x", x)?;
    let f = fourier_l1.ok_or_else(|| Error::invalid("fourier_l1", "‖ĥ‖_L1 must be declared for this bound"))?;
    nonnegative("fourier_l1", f)?;
    positive("c", c)?;
    positive("c_mix", c_mix)?;
    let k = consts.resolve(&["C_prime"])?;
    let nf = n as f64;
    let (a, m) = vstat_constants(nf, p, r, f, c, c_mix);
    let pf = p as f64;
    let raw = 6.0 * (-k.get("C_prime") * nf * x.powf(2.0 / pf) / (a.powf(1.0 / pf) + x.powf(1.0 / pf) * m.powf(1.0 / pf))).exp();
    Ok(BoundResult::probability("vstat_fourier", raw, ConstantsSource::UserSupplied)
        .echo("n", n)
        .echo("x", x)
        .echo("p", p)
        .echo("r", r)
        .echo("fourier_l1", f)
        .echo("c", c)
        .echo("c_mix", c_mix)
        .echo("fourier_moment_attested", true)
        .echo_constants(&k)
        .extra("a_pn", a)
        .extra("m_pn", m))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scalars(xs: &[f64]) -> Vec<Vec<f64>> {
        xs.iter().map(|x| vec![*x]).collect()
    }

    #[test]
    fn sum_kernel_is_twice_mean() {
        let data = scalars(&[1.0, 2.0, 4.0, -3.0, 0.5]);
        let u = u_statistic(&data, &BuiltinKernel::Sum { arity: 2 }, DEFAULT_BUDGET).unwrap();
        assert!((u - 2.0 * 4.5 / 5.0).abs() < 1e-14);
    }

    #[test]
    fn pairs_by_hand() {
        let xs = [1.0, 2.0, 4.0, -3.0, 0.5];
        let data = scalars(&xs);
        let mut total = 0.0;
        for i in 0..5 {
            for j in i + 1..5 {
                total += xs[i] * xs[j];
            }
        }
        let u = u_statistic(&data, &BuiltinKernel::Product { arity: 2 }, DEFAULT_BUDGET).unwrap();
        assert!((u - total / 10.0).abs() < 1e-14);
    }

    #[test]
    fn budget_enforced() {
        let data = scalars(&vec![0.0; 3000]);
        assert!(matches!(
            v_statistic(&data, &BuiltinKernel::Product { arity: 2 }, DEFAULT_BUDGET),
            Err(Error::Budget { .. })
        ));
    }

    #[test]
    fn product_kernel_mean_zero_is_degenerate() {
        let law = FiniteSupportLaw::new(vec![vec![-1.0], vec![0.0], vec![2.0]], vec![0.5, 0.25, 0.25]).unwrap();
        let dec = hoeffding_decompose(&BuiltinKernel::Product { arity: 2 }, &law, DEFAULT_BUDGET).unwrap();
        assert!(dec.theta.abs() < 1e-15);
        assert!(dec.components[0].iter().all(|v| v.abs() < 1e-15));
        assert!(dec.degeneracy_residual(&law) < 1e-14);
        for i in 0..3 {
            for j in 0..3 {
                let h = law.atoms[i][0] * law.atoms[j][0];
                assert!((dec.component(&[i, j]) - h).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn asymmetric_kernel_detected() {
        let k = FnKernel { arity: 2, f: |p: &[&[f64]]| p[0][0] - p[1][0] };
        assert!(check_symmetry(&k, 1, 50, 1).is_err());
        assert!(check_symmetry(&BuiltinKernel::GaussianRbf { bandwidth: 1.0 }, 3, 50, 1).is_ok());
    }
}
