//! Dense square matrices and symmetric eigenvalue routines.
//!
//! Small problems go through cyclic Jacobi. Large symmetric operators that are
//! only available as a matrix–vector product (the Toeplitz autocovariance
//! matrices of the harness) use Lanczos with full reorthogonalization.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{self, StreamRng};

/// Convergence tolerance relative to the matrix norm.
pub const EIGEN_REL_TOL: f64 = 1e-12;
/// Cap on Jacobi sweeps.
pub const EIGEN_MAX_SWEEPS: usize = 10_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Matrix {
    n: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(n: usize) -> Self {
        Self { n, data: vec![0.0; n * n] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn diagonal(diag: &[f64]) -> Self {
        let mut m = Self::zeros(diag.len());
        for (i, &v) in diag.iter().enumerate() {
            m[(i, i)] = v;
        }
        m
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::invalid("matrix", "rows must form a square matrix"));
        }
        Ok(Self { n, data: rows.iter().flatten().copied().collect() })
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.data.chunks(self.n.max(1)).map(|r| r.to_vec()).collect()
    }

    /// Outer product v vᵀ.
    pub fn outer(v: &[f64]) -> Self {
        let n = v.len();
        let mut m = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                m.data[i * n + j] = v[i] * v[j];
            }
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.n);
        for i in 0..self.n {
            for j in 0..self.n {
                t.data[j * self.n + i] = self.data[i * self.n + j];
            }
        }
        t
    }

    pub fn matmul(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.n, other.n);
        let n = self.n;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self.data[i * n + k];
                if a == 0.0 {
                    continue;
                }
                for j in 0..n {
                    out.data[i * n + j] += a * other.data[k * n + j];
                }
            }
        }
        out
    }

    pub fn matvec(&self, v: &[f64], out: &mut [f64]) {
        let n = self.n;
        for i in 0..n {
            out[i] = self.data[i * n..(i + 1) * n].iter().zip(v).map(|(a, b)| a * b).sum();
        }
    }

    pub fn add(&self, other: &Matrix) -> Matrix {
        Matrix { n: self.n, data: self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect() }
    }

    pub fn sub(&self, other: &Matrix) -> Matrix {
        Matrix { n: self.n, data: self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect() }
    }

    pub fn scale(&self, s: f64) -> Matrix {
        Matrix { n: self.n, data: self.data.iter().map(|a| a * s).collect() }
    }

    pub fn add_assign(&mut self, other: &Matrix) {
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += b;
        }
    }

    pub fn frobenius(&self) -> f64 {
        self.data.iter().map(|a| a * a).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, a| m.max(a.abs()))
    }

    pub fn is_diagonal(&self) -> bool {
        (0..self.n).all(|i| (0..self.n).all(|j| i == j || self.data[i * self.n + j] == 0.0))
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        let scale = self.max_abs().max(1.0);
        (0..self.n).all(|i| (0..i).all(|j| (self[(i, j)] - self[(j, i)]).abs() <= tol * scale))
    }

    pub fn diag(&self) -> Vec<f64> {
        (0..self.n).map(|i| self[(i, i)]).collect()
    }
}

impl std::ops::Index<(usize, usize)> for Matrix {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.n + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.n + j]
    }
}

/// Eigenvalues of a symmetric matrix in ascending order (cyclic Jacobi).
pub fn symmetric_eigenvalues(m: &Matrix) -> Result<Vec<f64>> {
    let n = m.dim();
    if n == 0 {
        return Ok(Vec::new());
    }
    if m.is_diagonal() {
        let mut d = m.diag();
        d.sort_by(f64::total_cmp);
        return Ok(d);
    }
    let mut a = m.clone();
    let tol = EIGEN_REL_TOL * m.frobenius();
    for _ in 0..EIGEN_MAX_SWEEPS {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[(i, j)] * a[(i, j)])
            .sum::<f64>()
            .sqrt();
        if off <= tol {
            let mut d = a.diag();
            d.sort_by(f64::total_cmp);
            return Ok(d);
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = c * akp - s * akq;
                    a[(k, q)] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = c * apk - s * aqk;
                    a[(q, k)] = s * apk + c * aqk;
                }
            }
        }
    }
    Err(Error::Convergence(format!("Jacobi eigen solver exceeded {EIGEN_MAX_SWEEPS} sweeps")))
}

pub fn lambda_max(m: &Matrix) -> Result<f64> {
    Ok(*symmetric_eigenvalues(m)?.last().unwrap_or(&0.0))
}

pub fn lambda_min(m: &Matrix) -> Result<f64> {
    Ok(*symmetric_eigenvalues(m)?.first().unwrap_or(&0.0))
}

/// Spectral norm ‖A‖ = sqrt(λ_max(AᵀA)).
pub fn spectral_norm(m: &Matrix) -> Result<f64> {
    if m.is_diagonal() {
        return Ok(m.diag().iter().fold(0.0, |acc, v| acc.max(v.abs())));
    }
    let ata = m.transpose().matmul(m);
    Ok(lambda_max(&ata)?.max(0.0).sqrt())
}

/// Number of eigenvalues of the symmetric tridiagonal (diag, off) strictly below `x`.
fn sturm_count(diag: &[f64], off: &[f64], x: f64) -> usize {
    let mut count = 0;
    let mut q = 1.0f64;
    for i in 0..diag.len() {
        let b2 = if i == 0 { 0.0 } else { off[i - 1] * off[i - 1] };
        q = diag[i] - x - if i == 0 { 0.0 } else { b2 / q };
        if q == 0.0 {
            q = -f64::EPSILON * (x.abs() + 1.0);
        }
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

/// Largest eigenvalue of a symmetric tridiagonal matrix by Sturm bisection.
pub fn tridiagonal_lambda_max(diag: &[f64], off: &[f64]) -> f64 {
    let k = diag.len();
    let mut radius: f64 = 0.0;
    for i in 0..k {
        let left = if i > 0 { off[i - 1].abs() } else { 0.0 };
        let right = if i + 1 < k { off[i].abs() } else { 0.0 };
        radius = radius.max(diag[i].abs() + left + right);
    }
    let (mut lo, mut hi) = (-radius - 1.0, radius + 1.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if sturm_count(diag, off, mid) < k {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    hi
}

/// Eigenvector of the tridiagonal matrix for eigenvalue `lambda` by inverse iteration.
fn tridiagonal_eigvec(diag: &[f64], off: &[f64], lambda: f64) -> Vec<f64> {
    let k = diag.len();
    let shift = lambda + 1e-13 * (lambda.abs() + 1.0);
    let mut v = vec![1.0; k];
    for _ in 0..3 {
        // Thomas algorithm on (T − shift I) y = v.
        let mut c = vec![0.0; k];
        let mut d = vec![0.0; k];
        let mut denom = diag[0] - shift;
        if denom == 0.0 {
            denom = 1e-300;
        }
        if k > 1 {
            c[0] = off[0] / denom;
        }
        d[0] = v[0] / denom;
        for i in 1..k {
            let mut den = diag[i] - shift - off[i - 1] * c[i - 1];
            if den == 0.0 {
                den = 1e-300;
            }
            if i + 1 < k {
                c[i] = off[i] / den;
            }
            d[i] = (v[i] - off[i - 1] * d[i - 1]) / den;
        }
        let mut y = vec![0.0; k];
        y[k - 1] = d[k - 1];
        for i in (0..k - 1).rev() {
            y[i] = d[i] - c[i] * y[i + 1];
        }
        let norm = y.iter().map(|a| a * a).sum::<f64>().sqrt();
        if !norm.is_finite() || norm == 0.0 {
            break;
        }
        v = y.into_iter().map(|a| a / norm).collect();
    }
    v
}

/// Outcome of a Lanczos run.
#[derive(Debug, Clone, Copy)]
pub struct LanczosResult {
    pub lambda_max: f64,
    pub residual: f64,
    pub iterations: usize,
}

/// Largest eigenvalue of a symmetric operator of size `n` given by `apply(x, out)`.
///
/// Full reorthogonalization; stops once the Ritz residual is below
/// `EIGEN_REL_TOL · |λ|` or the Krylov space is exhausted.
pub fn lanczos_lambda_max<F>(n: usize, mut apply: F, rng: &mut StreamRng) -> Result<LanczosResult>
where
    F: FnMut(&[f64], &mut [f64]),
{
    if n == 0 {
        return Ok(LanczosResult { lambda_max: 0.0, residual: 0.0, iterations: 0 });
    }
    let mut q: Vec<f64> = (0..n).map(|_| rng::normal(rng)).collect();
    let norm = q.iter().map(|a| a * a).sum::<f64>().sqrt();
    q.iter_mut().for_each(|a| *a /= norm);

    let mut basis: Vec<Vec<f64>> = Vec::new();
    let mut alphas = Vec::new();
    let mut betas: Vec<f64> = Vec::new();
    let mut w = vec![0.0; n];
    let max_iter = n.min(EIGEN_MAX_SWEEPS);
    let mut last = LanczosResult { lambda_max: 0.0, residual: f64::INFINITY, iterations: 0 };

    for it in 0..max_iter {
        apply(&q, &mut w);
        let alpha: f64 = w.iter().zip(&q).map(|(a, b)| a * b).sum();
        for (wi, qi) in w.iter_mut().zip(&q) {
            *wi -= alpha * qi;
        }
        if let (Some(prev), Some(&beta)) = (basis.last(), betas.last()) {
            for (wi, pi) in w.iter_mut().zip(prev.iter()) {
                *wi -= beta * pi;
            }
        }
        basis.push(q.clone());
        alphas.push(alpha);
        // Two passes of classical Gram–Schmidt against the whole basis.
        for _ in 0..2 {
            for b in &basis {
                let proj: f64 = w.iter().zip(b).map(|(a, c)| a * c).sum();
                for (wi, bi) in w.iter_mut().zip(b) {
                    *wi -= proj * bi;
                }
            }
        }
        let beta = w.iter().map(|a| a * a).sum::<f64>().sqrt();

        let theta = tridiagonal_lambda_max(&alphas, &betas);
        let y = tridiagonal_eigvec(&alphas, &betas, theta);
        let residual = (beta * y[y.len() - 1]).abs();
        last = LanczosResult { lambda_max: theta, residual, iterations: it + 1 };
        let scale = theta.abs().max(alphas.iter().fold(0.0f64, |m, a| m.max(a.abs())));
        if residual <= EIGEN_REL_TOL * scale || beta <= EIGEN_REL_TOL * scale.max(f64::MIN_POSITIVE) {
            return Ok(last);
        }
        betas.push(beta);
        q = w.iter().map(|a| a / beta).collect();
    }
    if basis.len() == n {
        // Krylov space is the whole space; the tridiagonal spectrum is exact.
        return Ok(last);
    }
    Err(Error::Convergence(format!(
        "Lanczos residual {} after {} iterations",
        last.residual, last.iterations
    )))
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Real roots of the characteristic polynomial of a symmetric 3×3 (trigonometric form).
    fn cubic_eigs(a: &Matrix) -> Vec<f64> {
        let p1 = a[(0, 1)].powi(2) + a[(0, 2)].powi(2) + a[(1, 2)].powi(2);
        let q = (a[(0, 0)] + a[(1, 1)] + a[(2, 2)]) / 3.0;
        let p2 = (a[(0, 0)] - q).powi(2) + (a[(1, 1)] - q).powi(2) + (a[(2, 2)] - q).powi(2) + 2.0 * p1;
        let p = (p2 / 6.0).sqrt();
        let b = a.sub(&Matrix::identity(3).scale(q)).scale(1.0 / p);
        let detb = b[(0, 0)] * (b[(1, 1)] * b[(2, 2)] - b[(1, 2)] * b[(2, 1)])
            - b[(0, 1)] * (b[(1, 0)] * b[(2, 2)] - b[(1, 2)] * b[(2, 0)])
            + b[(0, 2)] * (b[(1, 0)] * b[(2, 1)] - b[(1, 1)] * b[(2, 0)]);
        let r = (detb / 2.0).clamp(-1.0, 1.0);
        let phi = r.acos() / 3.0;
        let e1 = q + 2.0 * p * phi.cos();
        let e3 = q + 2.0 * p * (phi + 2.0 * std::f64::consts::PI / 3.0).cos();
        let mut v = vec![e1, 3.0 * q - e1 - e3, e3];
        v.sort_by(f64::total_cmp);
        v
    }

    #[test]
    fn jacobi_matches_characteristic_polynomial() {
        let mut rng = rng::stream(11, 0, 0);
        for _ in 0..50 {
            let mut m = Matrix::zeros(3);
            for i in 0..3 {
                for j in 0..=i {
                    let v = rng::normal(&mut rng);
                    m[(i, j)] = v;
                    m[(j, i)] = v;
                }
            }
            let ev = symmetric_eigenvalues(&m).unwrap();
            let oracle = cubic_eigs(&m);
            for (a, b) in ev.iter().zip(&oracle) {
                assert!((a - b).abs() < 1e-10, "{ev:?} vs {oracle:?}");
            }
        }
        // 2×2: closed form
        let m = Matrix::from_rows(&[vec![2.0, 1.0], vec![1.0, -1.0]]).unwrap();
        let ev = symmetric_eigenvalues(&m).unwrap();
        let disc = (9.0f64 / 4.0 + 1.0).sqrt();
        assert!((ev[1] - (0.5 + disc)).abs() < 1e-12);
        assert!((ev[0] - (0.5 - disc)).abs() < 1e-12);
    }

    #[test]
    fn spectral_norm_of_non_normal_transition() {
        let a = Matrix::from_rows(&[vec![0.5, 0.1], vec![0.2, 0.25]]).unwrap();
        let norm = spectral_norm(&a).unwrap();
        // Largest singular value via the 2×2 closed form of AᵀA.
        let ata = a.transpose().matmul(&a);
        let tr = ata[(0, 0)] + ata[(1, 1)];
        let det = ata[(0, 0)] * ata[(1, 1)] - ata[(0, 1)] * ata[(1, 0)];
        let expected = ((tr + (tr * tr - 4.0 * det).sqrt()) / 2.0).sqrt();
        assert!((norm - expected).abs() < 1e-12);
        assert!(norm < 1.0);
    }

    #[test]
    fn lanczos_agrees_with_jacobi() {
        let mut rng = rng::stream(5, 0, 0);
        let n = 40;
        let mut m = Matrix::zeros(n);
        for i in 0..n {
            for j in 0..=i {
                let v = rng::normal(&mut rng);
                m[(i, j)] = v;
                m[(j, i)] = v;
            }
        }
        let exact = lambda_max(&m).unwrap();
        let mut lrng = rng::stream(5, rng::purpose::LANCZOS, 0);
        let res = lanczos_lambda_max(n, |x, out| m.matvec(x, out), &mut lrng).unwrap();
        assert!((res.lambda_max - exact).abs() < 1e-9 * exact.abs(), "{} vs {exact}", res.lambda_max);
    }

    #[test]
    fn tridiagonal_bisection() {
        // [[2,1],[1,2]] has eigenvalues 1 and 3.
        assert!((tridiagonal_lambda_max(&[2.0, 2.0], &[1.0]) - 3.0).abs() < 1e-14);
    }
}
