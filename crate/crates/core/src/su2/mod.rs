//! The PU(2) group compactification `CP^3 = P(gl(2, C))`.
//!
//! Points of `CP^3` are represented by nonzero 2×2 complex matrices up to
//! complex scale; the invertible ones form the open orbit
//! `PGL(2, C) = G^c` and the rank-one ones the closed orbit. The compact
//! group acts by right multiplication with SU(2) (the ±1 kernel of
//! SU(2) → PU(2) is invisible to every quantity computed here).

pub mod haar;
pub mod lassalle;
pub mod orbit;

use nalgebra::{Complex, Matrix2};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type C64 = Complex<f64>;
pub type Mat2 = Matrix2<C64>;

pub(crate) fn c(re: f64, im: f64) -> C64 {
    Complex::new(re, im)
}

/// Pauli matrices σ₁, σ₂, σ₃.
pub fn pauli() -> [Mat2; 3] {
    let (o, z, i) = (c(1.0, 0.0), c(0.0, 0.0), c(0.0, 1.0));
    [
        Mat2::new(z, o, o, z),
        Mat2::new(z, -i, i, z),
        Mat2::new(o, z, z, -o),
    ]
}

/// Orthogonal basis `Xₖ = iσₖ/2` of su(2).
///
/// With this sign convention `[X₁, X₂] = −X₃` (cyclically).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Su2LieBasis {
    pub x: [Mat2; 3],
}

impl Default for Su2LieBasis {
    fn default() -> Self {
        let half_i = c(0.0, 0.5);
        let s = pauli();
        Self { x: [s[0] * half_i, s[1] * half_i, s[2] * half_i] }
    }
}

impl Su2LieBasis {
    /// `Σ aₖ Xₖ`.
    pub fn combine(&self, coeffs: [f64; 3]) -> Mat2 {
        self.x[0] * c(coeffs[0], 0.0) + self.x[1] * c(coeffs[1], 0.0) + self.x[2] * c(coeffs[2], 0.0)
    }
}

pub fn commutator(a: &Mat2, b: &Mat2) -> Mat2 {
    a * b - b * a
}

/// Frobenius inner product `⟨a, b⟩ = Σ aᵢⱼ conj(bᵢⱼ)`, linear in `a`.
pub fn inner(a: &Mat2, b: &Mat2) -> C64 {
    a.iter().zip(b.iter()).map(|(x, y)| x * y.conj()).sum()
}

pub fn frobenius_sq(a: &Mat2) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum()
}

/// Matrix exponential of a 2×2 complex matrix.
///
/// Splits `A = (tr A/2)·I + A₀`; since `A₀² = δ²·I` with `δ² = −det A₀`,
/// `exp(A₀) = cosh δ·I + (sinh δ/δ)·A₀`.
pub fn expm(a: &Mat2) -> Mat2 {
    let half_trace = (a[(0, 0)] + a[(1, 1)]) * 0.5;
    let a0 = a - Mat2::identity() * half_trace;
    let delta_sq = -a0.determinant();
    let delta = delta_sq.sqrt();
    let (cosh, sinhc) = if delta.norm() < 1e-4 {
        // series; error below 1e-20
        let d2 = delta_sq;
        (
            c(1.0, 0.0) + d2 * 0.5 + d2 * d2 / 24.0,
            c(1.0, 0.0) + d2 / 6.0 + d2 * d2 / 120.0,
        )
    } else {
        (delta.cosh(), delta.sinh() / delta)
    };
    (Mat2::identity() * cosh + a0 * sinhc) * half_trace.exp()
}

pub fn is_skew_hermitian(a: &Mat2, tol: f64) -> bool {
    (a + a.adjoint()).iter().all(|z| z.norm() <= tol)
}

/// Unit quaternion `(q₀, q₁, q₂, q₃)` ↦ `q₀·I + q₁·iσ₁ + q₂·iσ₂ + q₃·iσ₃ ∈ SU(2)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Su2Element {
    q: [f64; 4],
}

impl Su2Element {
    pub fn identity() -> Self {
        Self { q: [1.0, 0.0, 0.0, 0.0] }
    }

    /// Normalizes `q`; fails on a zero or non-finite quaternion.
    pub fn new(q: [f64; 4]) -> Result<Self> {
        let norm = q.iter().map(|v| v * v).sum::<f64>().sqrt();
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(Error::invalid("quaternion must be nonzero and finite"));
        }
        Ok(Self { q: q.map(|v| v / norm) })
    }

    /// ZYZ Euler angles: `Rz(φ)·Ry(θ)·Rz(ψ)` with `Rz(α) = exp(−iασ₃/2)`,
    /// `Ry(θ) = exp(−iθσ₂/2)`; `ψ ∈ [0, 4π)` covers SU(2) once.
    pub fn from_euler(phi: f64, theta: f64, psi: f64) -> Self {
        let (ct, st) = ((0.5 * theta).cos(), (0.5 * theta).sin());
        let sum = 0.5 * (phi + psi);
        let diff = 0.5 * (phi - psi);
        // a = e^{-i(φ+ψ)/2} cos(θ/2), b = −e^{-i(φ−ψ)/2} sin(θ/2)
        let a = c(sum.cos() * ct, -sum.sin() * ct);
        let b = c(-diff.cos() * st, diff.sin() * st);
        Self { q: [a.re, b.im, b.re, a.im] }
    }

    /// Inverse of [`Su2Element::matrix`]; `m` must be special unitary.
    pub fn from_matrix(m: &Mat2) -> Result<Self> {
        let unitary = (m * m.adjoint() - Mat2::identity()).iter().all(|z| z.norm() < 1e-10);
        let det_one = (m.determinant() - c(1.0, 0.0)).norm() < 1e-10;
        if !(unitary && det_one) {
            return Err(Error::invalid("matrix is not in SU(2)"));
        }
        let (a, b) = (m[(0, 0)], m[(0, 1)]);
        Self::new([a.re, b.im, b.re, a.im])
    }

    pub fn quaternion(&self) -> [f64; 4] {
        self.q
    }

    pub fn matrix(&self) -> Mat2 {
        let [q0, q1, q2, q3] = self.q;
        Mat2::new(c(q0, q3), c(q2, q1), c(-q2, q1), c(q0, -q3))
    }

    pub fn mul(&self, other: &Su2Element) -> Su2Element {
        let m = self.matrix() * other.matrix();
        Su2Element::from_matrix(&m).expect("SU(2) is closed under products")
    }

    pub fn inverse(&self) -> Su2Element {
        let [q0, q1, q2, q3] = self.q;
        Su2Element { q: [q0, -q1, -q2, -q3] }
    }
}

/// Nonzero homogeneous representative of a point of `CP^3`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProjectivePoint {
    m: Mat2,
}

impl ProjectivePoint {
    pub fn new(m: Mat2) -> Result<Self> {
        let norm = frobenius_sq(&m);
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(Error::ZeroPoint);
        }
        Ok(Self { m })
    }

    pub fn diag(a: f64, b: f64) -> Result<Self> {
        Self::new(Mat2::new(c(a, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(b, 0.0)))
    }

    pub fn matrix(&self) -> &Mat2 {
        &self.m
    }

    /// Homogeneous coordinates in `C^4` (row-major).
    pub fn coords(&self) -> [C64; 4] {
        [self.m[(0, 0)], self.m[(0, 1)], self.m[(1, 0)], self.m[(1, 1)]]
    }

    /// Right action `p ↦ p·g`.
    pub fn right_mul(&self, g: &Su2Element) -> ProjectivePoint {
        ProjectivePoint { m: self.m * g.matrix() }
    }

    pub fn left_mul(&self, g: &Mat2) -> Result<ProjectivePoint> {
        ProjectivePoint::new(g * self.m)
    }

    pub fn scaled(&self, s: C64) -> Result<ProjectivePoint> {
        ProjectivePoint::new(self.m * s)
    }
}
