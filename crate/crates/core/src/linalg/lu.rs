use num_complex::Complex;

use super::matrix::ComplexMatrix;
use crate::{Error, Real, Result};

/// Pivots at or below this magnitude count as exact zeros.
pub const PIVOT_UNDERFLOW: f64 = 1e-300;

/// LU factorization with partial pivoting, `P A = L U`.
pub struct Lu<T> {
    n: usize,
    lu: Vec<Complex<T>>,
    perm: Vec<usize>,
}

fn underflow<T: Real>() -> T {
    T::lit(PIVOT_UNDERFLOW).max(T::min_positive_value())
}

impl<T: Real> Lu<T> {
    pub fn factor(a: &ComplexMatrix<T>) -> Result<Self> {
        if !a.is_square() {
            return Err(Error::validation("LU needs a square matrix"));
        }
        let n = a.rows();
        let mut lu = a.as_slice().to_vec();
        let mut perm: Vec<usize> = (0..n).collect();
        for k in 0..n {
            let mut p = k;
            let mut best = lu[k * n + k].norm();
            for i in k + 1..n {
                let v = lu[i * n + k].norm();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            if p != k {
                for j in 0..n {
                    lu.swap(k * n + j, p * n + j);
                }
                perm.swap(k, p);
            }
            let pivot = lu[k * n + k];
            if pivot.norm() <= underflow::<T>() {
                continue;
            }
            for i in k + 1..n {
                let f = lu[i * n + k] / pivot;
                lu[i * n + k] = f;
                if f.re == T::zero() && f.im == T::zero() {
                    continue;
                }
                for j in k + 1..n {
                    let u = lu[k * n + j];
                    lu[i * n + j] -= f * u;
                }
            }
        }
        Ok(Lu { n, lu, perm })
    }

    pub fn pivots(&self) -> impl Iterator<Item = Complex<T>> + '_ {
        (0..self.n).map(move |k| self.lu[k * self.n + k])
    }

    /// `log|det A|`, or `-∞` if a pivot underflows.
    pub fn log_abs_det(&self) -> T {
        let mut acc = T::zero();
        for p in self.pivots() {
            let m = p.norm();
            if m <= underflow::<T>() {
                return T::neg_infinity();
            }
            acc += m.ln();
        }
        acc
    }

    fn is_singular(&self) -> bool {
        self.pivots().any(|p| p.norm() <= underflow::<T>())
    }

    /// Solves `A x = b`.
    pub fn solve(&self, b: &[Complex<T>]) -> Result<Vec<Complex<T>>> {
        let n = self.n;
        if b.len() != n {
            return Err(Error::validation("right-hand side has the wrong length"));
        }
        if self.is_singular() {
            return Err(Error::NearSingular("zero pivot in LU".into()));
        }
        let mut x: Vec<Complex<T>> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            let mut s = x[i];
            for j in 0..i {
                s -= self.lu[i * n + j] * x[j];
            }
            x[i] = s;
        }
        for i in (0..n).rev() {
            let mut s = x[i];
            for j in i + 1..n {
                s -= self.lu[i * n + j] * x[j];
            }
            x[i] = s / self.lu[i * n + i];
        }
        Ok(x)
    }

    pub fn inverse(&self) -> Result<ComplexMatrix<T>> {
        let n = self.n;
        let mut inv = ComplexMatrix::zeros(n, n);
        let mut e = vec![Complex::new(T::zero(), T::zero()); n];
        for j in 0..n {
            e.iter_mut().for_each(|z| *z = Complex::new(T::zero(), T::zero()));
            e[j] = Complex::new(T::one(), T::zero());
            let col = self.solve(&e)?;
            for (i, z) in col.into_iter().enumerate() {
                inv[(i, j)] = z;
            }
        }
        Ok(inv)
    }
}
