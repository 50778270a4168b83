//! General complex eigenvalues: Householder reduction to upper Hessenberg
//! form, then single-shift complex QR with Wilkinson shifts.

use num_complex::Complex;

use super::householder::reflector;
use super::matrix::ComplexMatrix;
use super::{SpectrumKind, SpectrumResult};
use crate::{Error, Real, Result};

/// Deflation threshold factor on `|h_{k,k}| + |h_{k+1,k+1}|`.
pub const DEFLATION_TOL: f64 = 1e-13;
/// Total QR sweeps allowed, per unit of dimension.
pub const ITERATIONS_PER_DIM: usize = 100;

/// Reduces a square matrix to upper Hessenberg form by unitary similarity.
pub fn hessenberg<T: Real>(a: &ComplexMatrix<T>) -> ComplexMatrix<T> {
    let n = a.rows();
    let mut h = a.clone();
    let two = T::lit(2.0);
    for k in 0..n.saturating_sub(2) {
        let x: Vec<Complex<T>> = (k + 1..n).map(|i| h[(i, k)]).collect();
        let Some(refl) = reflector(&x) else { continue };
        let v = &refl.v;
        // Left: rows k+1.., columns k..
        for j in k..n {
            let mut s = Complex::new(T::zero(), T::zero());
            for (t, vi) in v.iter().enumerate() {
                s += vi.conj() * h[(k + 1 + t, j)];
            }
            s = s * two;
            for (t, vi) in v.iter().enumerate() {
                h[(k + 1 + t, j)] -= *vi * s;
            }
        }
        // Right: all rows, columns k+1..
        for i in 0..n {
            let mut s = Complex::new(T::zero(), T::zero());
            for (t, vj) in v.iter().enumerate() {
                s += h[(i, k + 1 + t)] * *vj;
            }
            s = s * two;
            for (t, vj) in v.iter().enumerate() {
                h[(i, k + 1 + t)] -= s * vj.conj();
            }
        }
        h[(k + 1, k)] = refl.alpha;
        for i in k + 2..n {
            h[(i, k)] = Complex::new(T::zero(), T::zero());
        }
    }
    h
}

/// Givens pair `(c, s)` with `[c s; -s̄ c]·[x; y] = [r; 0]`.
fn givens<T: Real>(x: Complex<T>, y: Complex<T>) -> (T, Complex<T>) {
    let ax = x.norm();
    let ay = y.norm();
    if ay == T::zero() {
        return (T::one(), Complex::new(T::zero(), T::zero()));
    }
    if ax == T::zero() {
        return (T::zero(), Complex::new(T::one(), T::zero()));
    }
    let r = ax.hypot(ay);
    let c = ax / r;
    let s = (x / ax) * y.conj() / r;
    (c, s)
}

/// Eigenvalue of the 2×2 block `[a b; c d]` closest to `d`.
fn wilkinson_shift<T: Real>(a: Complex<T>, b: Complex<T>, c: Complex<T>, d: Complex<T>) -> Complex<T> {
    let half = T::lit(0.5);
    let m = (a + d) * half;
    let h = (a - d) * half;
    let disc = (h * h + b * c).sqrt();
    let l1 = m + disc;
    let l2 = m - disc;
    if (l1 - d).norm() <= (l2 - d).norm() {
        l1
    } else {
        l2
    }
}

/// Eigenvalues of a square complex matrix, in deflation order.
pub fn eigenvalues<T: Real>(a: &ComplexMatrix<T>) -> Result<SpectrumResult<T>> {
    if !a.is_square() {
        return Err(Error::validation("eigenvalues need a square matrix"));
    }
    if !a.is_finite() {
        return Err(Error::validation("matrix has non-finite entries"));
    }
    let n = a.rows();
    let zero = Complex::new(T::zero(), T::zero());
    let mut h = hessenberg(a);
    let tol = T::lit(DEFLATION_TOL);
    let cap = ITERATIONS_PER_DIM * n.max(1);
    let mut values = vec![zero; n];
    let mut iterations = 0usize;
    let mut since_deflation = 0usize;
    let mut hi = n;

    while hi > 0 {
        let top = hi - 1;
        // Find the start of the active unreduced block.
        let mut lo = top;
        while lo > 0 {
            let sub = h[(lo, lo - 1)].norm();
            let scale = h[(lo, lo)].norm() + h[(lo - 1, lo - 1)].norm();
            let small = if scale == T::zero() {
                sub <= T::min_positive_value()
            } else {
                sub <= tol * scale
            };
            if small {
                h[(lo, lo - 1)] = zero;
                break;
            }
            lo -= 1;
        }
        if lo == top {
            values[top] = h[(top, top)];
            hi -= 1;
            since_deflation = 0;
            continue;
        }
        if iterations >= cap {
            return Err(Error::NonConvergence {
                solver: "Hessenberg QR",
                iterations,
                detail: format!("{} of {n} eigenvalues deflated", n - hi),
            });
        }
        iterations += 1;
        since_deflation += 1;

        let mut mu = wilkinson_shift(
            h[(top - 1, top - 1)],
            h[(top - 1, top)],
            h[(top, top - 1)],
            h[(top, top)],
        );
        if since_deflation % 11 == 0 {
            // Exceptional shift to break cycles.
            let mut bump = h[(top, top - 1)].norm();
            if top >= lo + 2 {
                bump += h[(top - 1, top - 2)].norm();
            }
            mu = h[(top, top)] + Complex::new(bump * T::lit(0.75), bump * T::lit(-0.4375));
        }

        // Implicit single-shift sweep over rows/columns lo..=top.
        let mut x = h[(lo, lo)] - mu;
        let mut y = h[(lo + 1, lo)];
        for k in lo..top {
            let (c, s) = givens(x, y);
            let cc = Complex::new(c, T::zero());
            let col_start = if k > lo { k - 1 } else { lo };
            for j in col_start..=top {
                let p = h[(k, j)];
                let q = h[(k + 1, j)];
                h[(k, j)] = cc * p + s * q;
                h[(k + 1, j)] = cc * q - s.conj() * p;
            }
            let row_end = (k + 2).min(top);
            for i in lo..=row_end {
                let p = h[(i, k)];
                let q = h[(i, k + 1)];
                h[(i, k)] = p * cc + q * s.conj();
                h[(i, k + 1)] = q * cc - p * s;
            }
            if k + 1 < top {
                x = h[(k + 1, k)];
                y = h[(k + 2, k)];
            }
        }
    }

    Ok(SpectrumResult {
        kind: SpectrumKind::Eigen,
        values,
        residual_tol: tol,
        iterations,
    })
}
