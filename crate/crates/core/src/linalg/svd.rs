//! Singular values and Hermitian eigenvalues.
//!
//! Both routes end in the same symmetric tridiagonal QL solver. Hermitian
//! matrices are tridiagonalized by Householder similarity; general matrices are
//! bidiagonalized by two-sided Householder transforms, and the bidiagonal's
//! singular values are read off the Golub–Kahan tridiagonal matrix, whose
//! eigenvalues are `±s_k`. That avoids squaring the condition number.

use num_complex::Complex;

use super::householder::{reflector, tridiagonal_ql};
use super::matrix::{dot, ComplexMatrix};
use super::{SpectrumKind, SpectrumResult};
use crate::{Error, Real, Result};

const QL_ITERATIONS_PER_VALUE: usize = 60;

/// Eigenvalues of a Hermitian matrix, ascending. Only the lower triangle is read.
pub fn hermitian_eigenvalues<T: Real>(h: &ComplexMatrix<T>) -> Result<Vec<T>> {
    if !h.is_square() {
        return Err(Error::validation("hermitian_eigenvalues needs a square matrix"));
    }
    let n = h.rows();
    if n == 0 {
        return Ok(Vec::new());
    }
    // Work on a full Hermitian copy built from the lower triangle.
    let mut a: Vec<Complex<T>> = vec![Complex::new(T::zero(), T::zero()); n * n];
    for i in 0..n {
        for j in 0..=i {
            let z = h[(i, j)];
            a[i * n + j] = z;
            a[j * n + i] = z.conj();
        }
        a[i * n + i].im = T::zero();
    }

    let two = T::lit(2.0);
    for k in 0..n.saturating_sub(2) {
        let x: Vec<Complex<T>> = (k + 1..n).map(|i| a[i * n + k]).collect();
        let Some(refl) = reflector(&x) else { continue };
        let v = &refl.v;
        let m = n - k - 1;
        let off = k + 1;
        // p = S v on the trailing block S, K = v†p, w = p - K v
        let mut p = vec![Complex::new(T::zero(), T::zero()); m];
        for (i, pi) in p.iter_mut().enumerate() {
            let row = &a[(off + i) * n + off..(off + i) * n + n];
            *pi = row
                .iter()
                .zip(v)
                .fold(Complex::new(T::zero(), T::zero()), |acc, (&s, &vj)| acc + s * vj);
        }
        let kk = dot(v, &p).re;
        let w: Vec<Complex<T>> = p.iter().zip(v).map(|(&pi, &vi)| pi - vi * kk).collect();
        // S ← S - 2(v w† + w v†)
        for i in 0..m {
            let (vi, wi) = (v[i], w[i]);
            let row = &mut a[(off + i) * n + off..(off + i) * n + n];
            for j in 0..m {
                row[j] -= (vi * w[j].conj() + wi * v[j].conj()) * two;
            }
        }
        a[(k + 1) * n + k] = refl.alpha;
        a[k * n + k + 1] = refl.alpha.conj();
        for i in k + 2..n {
            a[i * n + k] = Complex::new(T::zero(), T::zero());
            a[k * n + i] = Complex::new(T::zero(), T::zero());
        }
    }

    let diag: Vec<T> = (0..n).map(|i| a[i * n + i].re).collect();
    // A unitary diagonal similarity makes the off-diagonal real and nonnegative.
    let off: Vec<T> = (0..n - 1).map(|i| a[(i + 1) * n + i].norm()).collect();
    let (mut vals, _) = tridiagonal_ql(&diag, &off, QL_ITERATIONS_PER_VALUE).map_err(|(idx, it)| {
        Error::NonConvergence {
            solver: "tridiagonal QL",
            iterations: it,
            detail: format!("{idx} of {n} eigenvalues converged"),
        }
    })?;
    vals.sort_by(|x, y| x.partial_cmp(y).expect("finite eigenvalues"));
    Ok(vals)
}

/// Reduces `a` (rows ≥ cols) to upper bidiagonal form; returns the moduli of
/// the diagonal and superdiagonal.
fn bidiagonal_moduli<T: Real>(a: &ComplexMatrix<T>) -> (Vec<T>, Vec<T>) {
    let (m, n) = (a.rows(), a.cols());
    debug_assert!(m >= n);
    let mut w = a.as_slice().to_vec();
    let two = T::lit(2.0);
    let zero = Complex::new(T::zero(), T::zero());
    let mut d = Vec::with_capacity(n);
    let mut e = Vec::with_capacity(n.saturating_sub(1));

    for k in 0..n {
        // Left reflector: zero column k below the diagonal.
        let x: Vec<Complex<T>> = (k..m).map(|i| w[i * n + k]).collect();
        match reflector(&x) {
            Some(refl) => {
                let v = &refl.v;
                for j in k + 1..n {
                    let mut s = zero;
                    for (t, vi) in v.iter().enumerate() {
                        s += vi.conj() * w[(k + t) * n + j];
                    }
                    s = s * two;
                    for (t, vi) in v.iter().enumerate() {
                        w[(k + t) * n + j] -= *vi * s;
                    }
                }
                d.push(refl.alpha.norm());
            }
            None => d.push(w[k * n + k].norm()),
        }
        if k + 1 >= n {
            break;
        }
        // Right reflector on row k, columns k+1.. (built from the conjugated row).
        let y: Vec<Complex<T>> = (k + 1..n).map(|j| w[k * n + j].conj()).collect();
        match reflector(&y) {
            Some(refl) => {
                let v = &refl.v;
                for i in k + 1..m {
                    let row = &mut w[i * n + k + 1..i * n + n];
                    let mut s = zero;
                    for (rj, vj) in row.iter().zip(v) {
                        s += *rj * *vj;
                    }
                    s = s * two;
                    for (rj, vj) in row.iter_mut().zip(v) {
                        *rj -= s * vj.conj();
                    }
                }
                e.push(refl.alpha.norm());
            }
            None => e.push(w[k * n + k + 1].norm()),
        }
    }
    (d, e)
}

/// Singular values `s₁ ≥ … ≥ sₙ` (n = number of columns).
pub fn singular_values<T: Real>(a: &ComplexMatrix<T>) -> Result<SpectrumResult<T>> {
    if !a.is_finite() {
        return Err(Error::validation("matrix has non-finite entries"));
    }
    let n = a.cols();
    if n == 0 || a.rows() == 0 {
        return Ok(SpectrumResult {
            kind: SpectrumKind::Singular,
            values: vec![Complex::new(T::zero(), T::zero()); n],
            residual_tol: T::zero(),
            iterations: 0,
        });
    }
    let tall = if a.rows() >= a.cols() { a.clone() } else { a.adjoint() };
    let k = tall.cols();
    let (d, e) = bidiagonal_moduli(&tall);

    // Golub–Kahan tridiagonal: zero diagonal, off-diagonal d0, e0, d1, e1, …, d_{k-1}.
    let mut off = Vec::with_capacity(2 * k - 1);
    for i in 0..k {
        off.push(d[i]);
        if i + 1 < k {
            off.push(e[i]);
        }
    }
    let diag = vec![T::zero(); 2 * k];
    let (mut vals, iterations) =
        tridiagonal_ql(&diag, &off, QL_ITERATIONS_PER_VALUE).map_err(|(idx, it)| {
            Error::NonConvergence {
                solver: "Golub-Kahan QL",
                iterations: it,
                detail: format!("{idx} of {} values converged", 2 * k),
            }
        })?;
    vals.sort_by(|x, y| y.partial_cmp(x).expect("finite singular values"));
    vals.truncate(k);
    let mut values: Vec<Complex<T>> = vals
        .into_iter()
        .map(|s| Complex::new(s.max(T::zero()), T::zero()))
        .collect();
    values.resize(n, Complex::new(T::zero(), T::zero()));
    let s1 = values[0].re;
    Ok(SpectrumResult {
        kind: SpectrumKind::Singular,
        values,
        residual_tol: T::epsilon() * s1 * T::lit(4.0 * k as f64),
        iterations,
    })
}
