//! Dense complex linear algebra, written from scratch.
//!
//! Everything here returns spectra or distances only; no eigenvectors.

mod eigen;
mod householder;
mod lu;
mod matrix;
mod subspace;
mod svd;

use num_complex::Complex;
use serde::{Deserialize, Serialize};

pub use eigen::{eigenvalues, hessenberg, DEFLATION_TOL, ITERATIONS_PER_DIM};
pub use lu::{Lu, PIVOT_UNDERFLOW};
pub use matrix::{dot, norm2, ComplexMatrix};
pub use subspace::{OrthonormalBasis, DEPENDENCE_TOL};
pub use svd::{hermitian_eigenvalues, singular_values};

use crate::{Error, Real, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpectrumKind {
    Singular,
    Eigen,
}

/// Singular values (real, nonnegative, nonincreasing) or an eigenvalue multiset.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumResult<T> {
    pub kind: SpectrumKind,
    pub values: Vec<Complex<T>>,
    pub residual_tol: T,
    pub iterations: usize,
}

impl<T: Real> SpectrumResult<T> {
    /// Real parts; for singular spectra these are the singular values.
    pub fn reals(&self) -> Vec<T> {
        self.values.iter().map(|z| z.re).collect()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// `sₙ(A)`: the last singular value.
pub fn smallest_singular_value<T: Real>(a: &ComplexMatrix<T>) -> Result<T> {
    let s = singular_values(a)?;
    Ok(s.values.last().map_or(T::zero(), |z| z.re))
}

/// `(s₁, ‖A‖_HS)`.
pub fn operator_and_hs_norms<T: Real>(a: &ComplexMatrix<T>) -> Result<(T, T)> {
    let s = singular_values(a)?;
    Ok((s.values.first().map_or(T::zero(), |z| z.re), a.hs_norm()))
}

/// Euclidean distance from `x` to the span of `span`.
pub fn dist_to_subspace<T: Real>(x: &[Complex<T>], span: &[Vec<Complex<T>>]) -> Result<T> {
    let mut basis = OrthonormalBasis::new(x.len());
    for v in span {
        if v.len() != x.len() {
            return Err(Error::validation(format!(
                "span vector has dimension {}, expected {}",
                v.len(),
                x.len()
            )));
        }
        basis.push(v);
    }
    Ok(basis.distance(x))
}

/// `log|det A|` from partially pivoted elimination; `-∞` when a pivot underflows.
pub fn log_abs_det<T: Real>(a: &ComplexMatrix<T>) -> Result<T> {
    Ok(Lu::factor(a)?.log_abs_det())
}

/// Distances from each column of a square `A` to the span of the other
/// columns, via `dist(Aⱼ, Hⱼ) = 1/‖row j of A⁻¹‖`.
pub fn column_complement_distances<T: Real>(a: &ComplexMatrix<T>) -> Result<Vec<T>> {
    let inv = Lu::factor(a)?.inverse()?;
    Ok((0..a.rows())
        .map(|j| {
            let r = norm2(inv.row(j));
            if r.is_finite() {
                T::one() / r
            } else {
                T::zero()
            }
        })
        .collect())
}

/// Both sides of `Σ sⱼ⁻² = Σ dist(rowⱼ, span of the other rows)⁻²`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NegativeMomentCheck<T> {
    pub lhs: T,
    pub rhs: T,
    pub rel_err: T,
}

/// Near-singularity cut-off for the negative second moment identity, relative to `s₁`.
pub const IDENTITY_CONDITION_LIMIT: f64 = 1e-10;

pub fn negative_second_moment_check<T: Real>(a: &ComplexMatrix<T>) -> Result<NegativeMomentCheck<T>> {
    if !a.is_square() {
        return Err(Error::validation("identity check needs a square matrix"));
    }
    let s = singular_values(a)?.reals();
    let n = s.len();
    let (s1, sn) = (s[0], s[n - 1]);
    if !(sn > T::lit(IDENTITY_CONDITION_LIMIT) * s1) {
        return Err(Error::NearSingular(format!(
            "s_n/s_1 = {:e} is at or below {IDENTITY_CONDITION_LIMIT:e}",
            (sn / s1).to_f64_lossy()
        )));
    }
    let lhs: T = s.iter().map(|&x| T::one() / (x * x)).sum();

    let rows: Vec<Vec<Complex<T>>> = (0..n).map(|i| a.row(i).to_vec()).collect();
    let mut rhs = T::zero();
    for j in 0..n {
        let others: Vec<Vec<Complex<T>>> = rows
            .iter()
            .enumerate()
            .filter(|&(i, _)| i != j)
            .map(|(_, r)| r.clone())
            .collect();
        let d = dist_to_subspace(&rows[j], &others)?;
        rhs += T::one() / (d * d);
    }
    Ok(NegativeMomentCheck {
        lhs,
        rhs,
        rel_err: (lhs - rhs).abs() / lhs,
    })
}
