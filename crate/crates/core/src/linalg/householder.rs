use num_complex::Complex;

use super::matrix::norm2;
use crate::Real;

/// Reflector `P = I - 2 v v†` with unit `v`, mapping `x` onto `alpha·e₁`.
pub(crate) struct Reflector<T> {
    pub v: Vec<Complex<T>>,
    pub alpha: Complex<T>,
}

/// Builds the reflector for `x`, or `None` when `x` already has the form `alpha·e₁`.
///
/// `alpha = -phase(x₀)·‖x‖`, which avoids cancellation in `v = x - alpha·e₁`.
pub(crate) fn reflector<T: Real>(x: &[Complex<T>]) -> Option<Reflector<T>> {
    let tail = norm2(&x[1..]);
    if tail == T::zero() {
        return None;
    }
    let xnorm = norm2(x);
    let x0 = x[0];
    let a0 = x0.norm();
    let phase = if a0 == T::zero() {
        Complex::new(T::one(), T::zero())
    } else {
        x0 / a0
    };
    let alpha = -phase * xnorm;
    let mut v = x.to_vec();
    v[0] -= alpha;
    let vnorm = norm2(&v);
    for z in &mut v {
        *z = *z / vnorm;
    }
    Some(Reflector { v, alpha })
}

/// Symmetric tridiagonal eigenvalues by implicit-shift QL.
///
/// `diag` has length n, `off[i]` couples entries i and i+1 (length n-1).
/// Returns the eigenvalues in no particular order and the iteration count.
pub(crate) fn tridiagonal_ql<T: Real>(
    diag: &[T],
    off: &[T],
    max_iter_per_value: usize,
) -> Result<(Vec<T>, usize), (usize, usize)> {
    let n = diag.len();
    let mut d = diag.to_vec();
    let mut e = off.to_vec();
    e.push(T::zero());
    let eps = T::epsilon();
    let two = T::lit(2.0);
    let mut total = 0usize;
    // Absolute floor so blocks of exact zeros still deflate.
    let anorm = d.iter().chain(e.iter()).fold(T::zero(), |acc, x| acc.max(x.abs()));
    let floor = eps * eps * anorm;

    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= eps * dd || e[m].abs() <= floor {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            if iter == max_iter_per_value {
                // (index of the stuck eigenvalue, iterations spent)
                return Err((l, total));
            }
            iter += 1;
            total += 1;

            let mut g = (d[l + 1] - d[l]) / (two * e[l]);
            let mut r = g.hypot(T::one());
            let signed = if g >= T::zero() { r.abs() } else { -r.abs() };
            g = d[m] - d[l] + e[l] / (g + signed);
            let (mut s, mut c, mut p) = (T::one(), T::one(), T::zero());
            let mut deflated_early = false;
            let mut i = m;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == T::zero() {
                    d[i + 1] -= p;
                    e[m] = T::zero();
                    deflated_early = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + two * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
            }
            if deflated_early {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = T::zero();
        }
    }
    Ok((d, total))
}
