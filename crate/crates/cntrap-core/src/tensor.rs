//! Minimal 3×3 complex tensor type with a coordinate-basis tag.
//!
//! Just enough algebra for dyadic Green tensor bookkeeping; this is not a
//! linear-algebra library.

use num_complex::Complex64;
use thiserror::Error;

/// Coordinate basis the tensor components refer to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Basis {
    /// Cylindrical components (r, φ, z).
    Cylindrical,
    /// Cartesian components (x, y, z).
    Cartesian,
}

/// Row-major 3×3 complex tensor tagged with its component basis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Complex3x3 {
    pub basis: Basis,
    pub m: [[Complex64; 3]; 3],
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum TensorError {
    #[error("basis mismatch: {0:?} vs {1:?}")]
    BasisMismatch(Basis, Basis),
}

impl Complex3x3 {
    pub fn zero(basis: Basis) -> Self {
        Self {
            basis,
            m: [[Complex64::new(0.0, 0.0); 3]; 3],
        }
    }

    pub fn identity(basis: Basis) -> Self {
        let mut t = Self::zero(basis);
        for i in 0..3 {
            t.m[i][i] = Complex64::new(1.0, 0.0);
        }
        t
    }

    pub fn from_diag(basis: Basis, d: [Complex64; 3]) -> Self {
        let mut t = Self::zero(basis);
        #[allow(clippy::needless_range_loop)]
        for i in 0..3 {
            t.m[i][i] = d[i];
        }
        t
    }

    /// Sum of diagonal entries.
    pub fn trace(&self) -> Complex64 {
        self.m[0][0] + self.m[1][1] + self.m[2][2]
    }

    /// Largest |t_ij − t_ji| over all entry pairs (plain transpose, no
    /// conjugation); zero for a reciprocity-symmetric tensor.
    pub fn hermitian_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                worst = worst.max((self.m[i][j] - self.m[j][i]).norm());
            }
        }
        worst
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zero(self.basis);
        for i in 0..3 {
            for j in 0..3 {
                t.m[i][j] = self.m[j][i];
            }
        }
        t
    }

    /// Frobenius norm.
    pub fn norm(&self) -> f64 {
        self.m
            .iter()
            .flatten()
            .map(|z| z.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    pub fn scale(&self, s: Complex64) -> Self {
        let mut t = *self;
        for row in t.m.iter_mut() {
            for z in row.iter_mut() {
                *z *= s;
            }
        }
        t
    }

    /// Entrywise sum; fails on mismatched bases.
    pub fn add(&self, other: &Self) -> Result<Self, TensorError> {
        if self.basis != other.basis {
            return Err(TensorError::BasisMismatch(self.basis, other.basis));
        }
        let mut t = *self;
        for i in 0..3 {
            for j in 0..3 {
                t.m[i][j] += other.m[i][j];
            }
        }
        Ok(t)
    }

    /// Entrywise difference; fails on mismatched bases.
    pub fn sub(&self, other: &Self) -> Result<Self, TensorError> {
        self.add(&other.scale(Complex64::new(-1.0, 0.0)))
    }

    /// Largest entrywise |Im|/|Re| over entries with non-negligible modulus;
    /// diagnostic for imaginary-axis evaluations that must be real.
    pub fn relative_imag(&self) -> f64 {
        let scale = self.norm();
        if scale == 0.0 {
            return 0.0;
        }
        let mut worst: f64 = 0.0;
        for row in &self.m {
            for z in row {
                if z.norm() > 1e-14 * scale {
                    worst = worst.max(z.im.abs() / z.norm());
                }
            }
        }
        worst
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn trace_of_identity_is_three() {
        assert_eq!(Complex3x3::identity(Basis::Cartesian).trace(), c(3.0, 0.0));
    }

    #[test]
    fn trace_of_zero_is_zero() {
        assert_eq!(Complex3x3::zero(Basis::Cylindrical).trace(), c(0.0, 0.0));
    }

    #[test]
    fn trace_of_imaginary_diag() {
        let t = Complex3x3::from_diag(Basis::Cartesian, [c(0.0, 1.0), c(0.0, 2.0), c(0.0, 3.0)]);
        assert_eq!(t.trace(), c(0.0, 6.0));
    }

    #[test]
    fn hermitian_defect_symmetric_zero() {
        let mut t = Complex3x3::identity(Basis::Cartesian);
        t.m[0][1] = c(2.0, -1.0);
        t.m[1][0] = c(2.0, -1.0);
        assert_eq!(t.hermitian_defect(), 0.0);
    }

    #[test]
    fn hermitian_defect_single_offdiag() {
        let mut t = Complex3x3::zero(Basis::Cartesian);
        t.m[0][1] = c(1.0, 0.0);
        assert_eq!(t.hermitian_defect(), 1.0);
    }

    #[test]
    fn hermitian_defect_antisymmetric_imag() {
        let mut t = Complex3x3::zero(Basis::Cartesian);
        t.m[0][2] = c(0.0, 2.0);
        t.m[2][0] = c(0.0, -2.0);
        assert_eq!(t.hermitian_defect(), 4.0);
    }

    #[test]
    fn basis_mismatch_rejected() {
        let a = Complex3x3::identity(Basis::Cartesian);
        let b = Complex3x3::identity(Basis::Cylindrical);
        assert!(a.add(&b).is_err());
    }
}
