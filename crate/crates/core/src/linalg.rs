//! Small dense Hermitian positive-definite algebra.
//!
//! Matrices here are at most a few hundred rows (K x K Gram matrices and
//! M x M covariances), so a plain row-major Cholesky is enough.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Condition numbers above this are treated as singular.
pub const CONDITION_LIMIT: f64 = 1e12;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Square complex matrix, row-major. Callers are responsible for Hermitian symmetry.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianMatrix {
    n: usize,
    data: Vec<Complex64>,
}

impl HermitianMatrix {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![ZERO; n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.data[i * n + i] = Complex64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut data = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                data.push(f(i, j));
            }
        }
        Self { n, data }
    }

    /// Gram matrix `V^H V` of the given columns.
    pub fn gram(columns: &[&[Complex64]]) -> Self {
        let n = columns.len();
        let mut g = Self::zeros(n);
        for i in 0..n {
            for j in i..n {
                let v: Complex64 = columns[i].iter().zip(columns[j]).map(|(a, b)| a.conj() * b).sum();
                g.data[i * n + j] = v;
                g.data[j * n + i] = v.conj();
            }
        }
        g
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.data[i * self.n + j]
    }

    /// `self += weight * v v^H`.
    pub fn add_outer(&mut self, weight: f64, v: &[Complex64]) {
        let n = self.n;
        for (i, vi) in v.iter().enumerate() {
            let vi = vi * weight;
            for (j, vj) in v.iter().enumerate() {
                self.data[i * n + j] += vi * vj.conj();
            }
        }
    }

    pub fn mul_vec(&self, x: &[Complex64]) -> Vec<Complex64> {
        (0..self.n)
            .map(|i| self.data[i * self.n..(i + 1) * self.n].iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// Lower-triangular Cholesky factor. Fails on a non-positive pivot.
    pub fn cholesky(&self) -> Result<Cholesky> {
        let n = self.n;
        let mut l = vec![ZERO; n * n];
        for j in 0..n {
            let mut d = self.data[j * n + j].re;
            for k in 0..j {
                d -= l[j * n + k].norm_sqr();
            }
            if !(d > 0.0) || !d.is_finite() {
                return Err(Error::SingularMatrix {
                    condition: f64::INFINITY,
                });
            }
            let djj = d.sqrt();
            l[j * n + j] = Complex64::new(djj, 0.0);
            for i in j + 1..n {
                let mut s = self.data[i * n + j];
                for k in 0..j {
                    s -= l[i * n + k] * l[j * n + k].conj();
                }
                l[i * n + j] = s / djj;
            }
        }
        Ok(Cholesky { n, l })
    }
}

/// `A = L L^H`.
#[derive(Debug, Clone)]
pub struct Cholesky {
    n: usize,
    l: Vec<Complex64>,
}

impl Cholesky {
    pub fn solve(&self, b: &[Complex64]) -> Vec<Complex64> {
        let n = self.n;
        let l = &self.l;
        let mut y = b.to_vec();
        for i in 0..n {
            let mut s = y[i];
            for k in 0..i {
                s -= l[i * n + k] * y[k];
            }
            y[i] = s / l[i * n + i].re;
        }
        for i in (0..n).rev() {
            let mut s = y[i];
            for k in i + 1..n {
                s -= l[k * n + i].conj() * y[k];
            }
            y[i] = s / l[i * n + i].re;
        }
        y
    }

    /// `b^H A^{-1} b`, computed as `||L^{-1} b||^2`.
    pub fn quad_inverse(&self, b: &[Complex64]) -> f64 {
        let n = self.n;
        let l = &self.l;
        let mut y = b.to_vec();
        let mut acc = 0.0;
        for i in 0..n {
            let mut s = y[i];
            for k in 0..i {
                s -= l[i * n + k] * y[k];
            }
            y[i] = s / l[i * n + i].re;
            acc += y[i].norm_sqr();
        }
        acc
    }

    fn mul(&self, x: &[Complex64]) -> Vec<Complex64> {
        // A x = L (L^H x)
        let n = self.n;
        let l = &self.l;
        let w: Vec<Complex64> = (0..n)
            .map(|i| (i..n).map(|k| l[k * n + i].conj() * x[k]).sum())
            .collect();
        (0..n).map(|i| (0..=i).map(|k| l[i * n + k] * w[k]).sum()).collect()
    }

    /// Spectral condition estimate `lambda_max / lambda_min` by power and inverse iteration.
    pub fn condition_estimate(&self) -> f64 {
        if self.n == 0 {
            return 1.0;
        }
        let lmax = dominant_eigenvalue(self.n, |x| self.mul(x));
        let inv_lmin = dominant_eigenvalue(self.n, |x| self.solve(x));
        lmax * inv_lmin
    }
}

fn dominant_eigenvalue(n: usize, apply: impl Fn(&[Complex64]) -> Vec<Complex64>) -> f64 {
    let mut v: Vec<Complex64> = (0..n)
        .map(|i| Complex64::from_polar(1.0 + i as f64 / n as f64, 0.7 * i as f64))
        .collect();
    normalize(&mut v);
    let mut lambda = 0.0;
    for _ in 0..200 {
        let mut w = apply(&v);
        let next: f64 = v.iter().zip(&w).map(|(a, b)| (a.conj() * b).re).sum();
        if !normalize(&mut w) {
            return 0.0;
        }
        v = w;
        let converged = (next - lambda).abs() <= 1e-10 * next.abs();
        lambda = next;
        if converged {
            break;
        }
    }
    lambda
}

fn normalize(v: &mut [Complex64]) -> bool {
    let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if !(norm > 0.0) || !norm.is_finite() {
        return false;
    }
    v.iter_mut().for_each(|z| *z /= norm);
    true
}

/// Solve `A x = b` for Hermitian positive-definite `A`.
///
/// Fails with the condition estimate when `A` is singular or its condition
/// number exceeds [`CONDITION_LIMIT`].
pub fn hermitian_solve(a: &HermitianMatrix, b: &[Complex64]) -> Result<Vec<Complex64>> {
    if b.len() != a.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            actual: b.len(),
        });
    }
    let chol = a.cholesky()?;
    let condition = chol.condition_estimate();
    if !(condition <= CONDITION_LIMIT) {
        return Err(Error::SingularMatrix { condition });
    }
    Ok(chol.solve(b))
}
