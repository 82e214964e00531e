//! 2x2 tensors and the deviatoric operator.

use std::ops::{Add, Mul, Neg, Sub};

use crate::scalar::{Point, Real};

#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct Matrix2<T> {
    /// Row-major entries: `m[i][j]` is row `i`, column `j`.
    pub m: [[T; 2]; 2],
}

impl<T: Real> Matrix2<T> {
    pub fn new(a11: T, a12: T, a21: T, a22: T) -> Self {
        Self { m: [[a11, a12], [a21, a22]] }
    }

    pub fn from_rows(r0: Point<T>, r1: Point<T>) -> Self {
        Self { m: [r0, r1] }
    }

    pub fn zero() -> Self {
        Self::new(T::zero(), T::zero(), T::zero(), T::zero())
    }

    pub fn identity() -> Self {
        Self::new(T::one(), T::zero(), T::zero(), T::one())
    }

    pub fn row(&self, i: usize) -> Point<T> {
        self.m[i]
    }

    pub fn trace(&self) -> T {
        self.m[0][0] + self.m[1][1]
    }

    pub fn transpose(&self) -> Self {
        Self::new(self.m[0][0], self.m[1][0], self.m[0][1], self.m[1][1])
    }

    /// Frobenius inner product.
    pub fn inner(&self, other: &Self) -> T {
        self.m[0][0] * other.m[0][0] + self.m[0][1] * other.m[0][1] + self.m[1][0] * other.m[1][0] + self.m[1][1] * other.m[1][1]
    }

    pub fn norm_sq(&self) -> T {
        self.inner(self)
    }

    pub fn mul_vec(&self, v: Point<T>) -> Point<T> {
        [self.m[0][0] * v[0] + self.m[0][1] * v[1], self.m[1][0] * v[0] + self.m[1][1] * v[1]]
    }

    /// Symmetric part `(m + m^T) / 2`.
    pub fn symmetric(&self) -> Self {
        (*self + self.transpose()) * T::lit(0.5)
    }
}

/// Deviatoric part `m - tr(m)/2 * I`.
pub fn apply_deviatoric<T: Real>(m: Matrix2<T>) -> Matrix2<T> {
    let half_tr = m.trace() * T::lit(0.5);
    Matrix2::new(m.m[0][0] - half_tr, m.m[0][1], m.m[1][0], m.m[1][1] - half_tr)
}

impl<T: Real> Add for Matrix2<T> {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self::new(self.m[0][0] + o.m[0][0], self.m[0][1] + o.m[0][1], self.m[1][0] + o.m[1][0], self.m[1][1] + o.m[1][1])
    }
}

impl<T: Real> Sub for Matrix2<T> {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Self::new(self.m[0][0] - o.m[0][0], self.m[0][1] - o.m[0][1], self.m[1][0] - o.m[1][0], self.m[1][1] - o.m[1][1])
    }
}

impl<T: Real> Mul<T> for Matrix2<T> {
    type Output = Self;
    fn mul(self, s: T) -> Self {
        Self::new(self.m[0][0] * s, self.m[0][1] * s, self.m[1][0] * s, self.m[1][1] * s)
    }
}

impl<T: Real> Neg for Matrix2<T> {
    type Output = Self;
    fn neg(self) -> Self {
        self * -T::one()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn identity_has_zero_deviator() {
        assert_eq!(apply_deviatoric(Matrix2::<f64>::identity()), Matrix2::zero());
    }

    #[test]
    fn deviator_of_e11() {
        let d = apply_deviatoric(Matrix2::new(1.0, 0.0, 0.0, 0.0));
        assert_eq!(d, Matrix2::new(0.5, 0.0, 0.0, -0.5));
    }

    #[test]
    fn antisymmetric_part_is_removed_by_symmetrization() {
        assert_eq!(Matrix2::new(0.0, 1.0, -1.0, 0.0).symmetric(), Matrix2::zero());
    }

    fn mat() -> impl Strategy<Value = Matrix2<f64>> {
        prop::array::uniform4(-10.0f64..10.0).prop_map(|a| Matrix2::new(a[0], a[1], a[2], a[3]))
    }

    proptest! {
        #[test]
        fn deviator_is_traceless_idempotent_and_self_adjoint(a in mat(), b in mat()) {
            let da = apply_deviatoric(a);
            prop_assert!(da.trace().abs() <= 1e-14 * (1.0 + a.norm_sq().sqrt()));
            let dda = apply_deviatoric(da);
            prop_assert!((dda - da).norm_sq().sqrt() <= 1e-14 * (1.0 + a.norm_sq().sqrt()));
            let lhs = da.inner(&b);
            let rhs = a.inner(&apply_deviatoric(b));
            prop_assert!((lhs - rhs).abs() <= 1e-14 * (1.0 + a.norm_sq() + b.norm_sq()));
        }
    }
}
