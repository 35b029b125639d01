//! Small dense complex linear algebra for the four-dimensional two-spin Hilbert space.
//!
//! Basis order everywhere is |↑↑⟩, |↑↓⟩, |↓↑⟩, |↓↓⟩ with spin 1 as the left
//! Kronecker factor, so index `i = 2*b1 + b2` where `b = 0` is spin-up.

use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use nalgebra::{Matrix2, Matrix4, SymmetricEigen, Vector4};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

pub const DIM: usize = 4;

#[inline]
pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

#[inline]
pub fn re(x: f64) -> C64 {
    C64::new(x, 0.0)
}

/// A 4×4 complex matrix (operator on the two-spin space).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComplexMatrix4(pub(crate) Matrix4<C64>);

impl ComplexMatrix4 {
    pub fn zeros() -> Self {
        Self(Matrix4::zeros())
    }

    pub fn identity() -> Self {
        Self(Matrix4::identity())
    }

    pub fn from_fn(f: impl FnMut(usize, usize) -> C64) -> Self {
        Self(Matrix4::from_fn(f))
    }

    /// Row-major construction.
    pub fn from_rows(rows: [[C64; 4]; 4]) -> Self {
        Self::from_fn(|r, c| rows[r][c])
    }

    pub fn diagonal(d: [f64; 4]) -> Self {
        Self::from_fn(|r, c| if r == c { re(d[r]) } else { C64::new(0.0, 0.0) })
    }

    /// Kronecker product `a ⊗ b` of two single-spin operators.
    pub fn kron(a: &Matrix2<C64>, b: &Matrix2<C64>) -> Self {
        Self::from_fn(|r, c| a[(r / 2, c / 2)] * b[(r % 2, c % 2)])
    }

    pub fn outer(ket: &PureState, bra: &PureState) -> Self {
        Self(ket.0 * bra.0.adjoint())
    }

    pub fn inner(&self) -> &Matrix4<C64> {
        &self.0
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> C64 {
        self.0[(r, c)]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: C64) {
        self.0[(r, c)] = v;
    }

    pub fn adjoint(&self) -> Self {
        Self(self.0.adjoint())
    }

    pub fn trace(&self) -> C64 {
        self.0.trace()
    }

    pub fn scale(&self, s: f64) -> Self {
        Self(self.0 * re(s))
    }

    pub fn scale_c(&self, s: C64) -> Self {
        Self(self.0 * s)
    }

    /// Tr(self · other).
    pub fn trace_product(&self, other: &Self) -> C64 {
        let mut acc = C64::new(0.0, 0.0);
        for i in 0..DIM {
            for k in 0..DIM {
                acc += self.0[(i, k)] * other.0[(k, i)];
            }
        }
        acc
    }

    /// `self · other − other · self`.
    pub fn commutator(&self, other: &Self) -> Self {
        Self(self.0 * other.0 - other.0 * self.0)
    }

    /// `U · self · U†`.
    pub fn conjugate_by(&self, u: &Self) -> Self {
        Self(u.0 * self.0 * u.0.adjoint())
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.0
            .iter()
            .zip(other.0.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.0.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// max |A − A†|
    pub fn hermiticity_deviation(&self) -> f64 {
        self.max_abs_diff(&self.adjoint())
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_deviation() <= tol
    }

    /// (A + A†)/2
    pub fn hermitian_part(&self) -> Self {
        Self((self.0 + self.0.adjoint()) * re(0.5))
    }

    pub fn determinant(&self) -> C64 {
        self.0.determinant()
    }

    /// Eigen-decomposition of a Hermitian matrix: ascending eigenvalues and the
    /// unitary whose columns are the matching eigenvectors.
    pub fn eigh(&self) -> ([f64; 4], ComplexMatrix4) {
        let eig = SymmetricEigen::new(self.hermitian_part().0);
        let mut order = [0usize, 1, 2, 3];
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let values = order.map(|i| eig.eigenvalues[i]);
        let vectors = Self::from_fn(|r, c| eig.eigenvectors[(r, order[c])]);
        (values, vectors)
    }

    pub fn eigenvalues_hermitian(&self) -> [f64; 4] {
        self.eigh().0
    }

    /// Hermitian check used by operations that exponentiate or diagonalize.
    pub(crate) fn require_hermitian(&self, tol: f64) -> Result<()> {
        let scale = self.max_abs().max(1.0);
        let dev = self.hermiticity_deviation();
        if dev > tol * scale {
            return Err(Error::NotHermitian { deviation: dev });
        }
        Ok(())
    }

    /// Row-major real and imaginary parts.
    pub fn to_re_im(&self) -> (Vec<f64>, Vec<f64>) {
        let mut re_part = Vec::with_capacity(16);
        let mut im_part = Vec::with_capacity(16);
        for r in 0..DIM {
            for c in 0..DIM {
                let z = self.0[(r, c)];
                re_part.push(z.re);
                im_part.push(z.im);
            }
        }
        (re_part, im_part)
    }

    pub fn from_re_im(re_part: &[f64], im_part: &[f64]) -> Result<Self> {
        if re_part.len() != 16 || im_part.len() != 16 {
            return Err(Error::param("matrix", "expected 16 real and 16 imaginary entries"));
        }
        Ok(Self::from_fn(|r, c| {
            C64::new(re_part[r * DIM + c], im_part[r * DIM + c])
        }))
    }
}

impl Add for ComplexMatrix4 {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        Self(self.0 + rhs.0)
    }
}

impl AddAssign for ComplexMatrix4 {
    fn add_assign(&mut self, rhs: Self) {
        self.0 += rhs.0;
    }
}

impl Sub for ComplexMatrix4 {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        Self(self.0 - rhs.0)
    }
}

impl Mul for ComplexMatrix4 {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        Self(self.0 * rhs.0)
    }
}

impl Mul<&ComplexMatrix4> for &ComplexMatrix4 {
    type Output = ComplexMatrix4;
    fn mul(self, rhs: &ComplexMatrix4) -> ComplexMatrix4 {
        ComplexMatrix4(self.0 * rhs.0)
    }
}

impl Mul<f64> for ComplexMatrix4 {
    type Output = Self;
    fn mul(self, rhs: f64) -> Self {
        self.scale(rhs)
    }
}

impl Neg for ComplexMatrix4 {
    type Output = Self;
    fn neg(self) -> Self {
        Self(-self.0)
    }
}

/// Normalized state vector of the spin pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PureState(pub(crate) Vector4<C64>);

impl PureState {
    /// Normalizes the given amplitudes; rejects the zero vector.
    pub fn new(amplitudes: [C64; 4]) -> Result<Self> {
        let v = Vector4::from(amplitudes);
        let n = v.norm();
        if !(n > 0.0) || !n.is_finite() {
            return Err(Error::param("amplitudes", "state vector has zero or non-finite norm"));
        }
        Ok(Self(v / re(n)))
    }

    pub fn amplitudes(&self) -> [C64; 4] {
        [self.0[0], self.0[1], self.0[2], self.0[3]]
    }

    pub fn norm(&self) -> f64 {
        self.0.norm()
    }

    /// ⟨self|other⟩
    pub fn overlap(&self, other: &PureState) -> C64 {
        self.0.dotc(&other.0)
    }

    /// |self⟩⟨self|
    pub fn projector(&self) -> ComplexMatrix4 {
        ComplexMatrix4::outer(self, self)
    }

    /// ⟨self|A|self⟩
    pub fn expectation(&self, a: &ComplexMatrix4) -> C64 {
        self.0.dotc(&(a.0 * self.0))
    }

    pub fn apply(&self, u: &ComplexMatrix4) -> PureState {
        PureState(u.0 * self.0)
    }

    /// Kronecker product of two single-spin kets.
    pub fn product(a: [C64; 2], b: [C64; 2]) -> Result<Self> {
        Self::new([a[0] * b[0], a[0] * b[1], a[1] * b[0], a[1] * b[1]])
    }
}
