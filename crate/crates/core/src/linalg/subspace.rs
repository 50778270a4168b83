use num_complex::Complex;

use super::matrix::{dot, norm2};
use crate::Real;

/// Vectors whose norm after orthogonalization falls below this fraction of
/// their original norm are treated as dependent and dropped.
pub const DEPENDENCE_TOL: f64 = 1e-12;

/// Orthonormal basis grown one vector at a time by modified Gram–Schmidt with
/// one reorthogonalization pass.
#[derive(Clone, Debug)]
pub struct OrthonormalBasis<T> {
    dim: usize,
    vectors: Vec<Vec<Complex<T>>>,
}

impl<T: Real> OrthonormalBasis<T> {
    pub fn new(dim: usize) -> Self {
        OrthonormalBasis {
            dim,
            vectors: Vec::new(),
        }
    }

    pub fn rank(&self) -> usize {
        self.vectors.len()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    fn project_out(&self, r: &mut [Complex<T>]) {
        for _pass in 0..2 {
            for q in &self.vectors {
                let c = dot(q, r);
                for (ri, qi) in r.iter_mut().zip(q) {
                    *ri -= *qi * c;
                }
            }
        }
    }

    /// Component of `x` orthogonal to the span.
    pub fn residual(&self, x: &[Complex<T>]) -> Vec<Complex<T>> {
        assert_eq!(x.len(), self.dim, "vector dimension mismatch");
        let mut r = x.to_vec();
        self.project_out(&mut r);
        r
    }

    /// Distance from `x` to the span, clamped to `[0, ‖x‖]`.
    pub fn distance(&self, x: &[Complex<T>]) -> T {
        norm2(&self.residual(x)).min(norm2(x))
    }

    /// Adds `x` to the span; returns false if it was numerically dependent.
    pub fn push(&mut self, x: &[Complex<T>]) -> bool {
        let original = norm2(x);
        if original == T::zero() || self.vectors.len() == self.dim {
            return false;
        }
        let mut r = self.residual(x);
        let rn = norm2(&r);
        if rn <= T::lit(DEPENDENCE_TOL) * original {
            return false;
        }
        r.iter_mut().for_each(|z| *z = *z / rn);
        self.vectors.push(r);
        true
    }
}
