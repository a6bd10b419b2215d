//! Exact 2x2 Hermitian algebra in the Pauli representation.
//!
//! Every traceless Hermitian 2x2 operator is written as `X σx + Y σy + Z σz`
//! and handled through its Cartesian triple. Units: ħ = 1, energies and
//! frequencies in rad/μs, times in μs.

use std::f64::consts::{PI, TAU};
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Cartesian components of a traceless Hermitian operator.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct CartesianTriple {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl CartesianTriple {
    pub const ZERO: CartesianTriple = CartesianTriple { x: 0.0, y: 0.0, z: 0.0 };

    pub fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    /// Components of `H₀ = (1/2)[[-Δ, Ω_R], [Ω_R, Δ]]`.
    pub fn from_controls(omega_r: f64, delta: f64) -> Self {
        Self::new(0.5 * omega_r, 0.0, -0.5 * delta)
    }

    pub fn norm(&self) -> f64 {
        (self.x * self.x + self.y * self.y + self.z * self.z).sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        (self.x - other.x)
            .abs()
            .max((self.y - other.y).abs())
            .max((self.z - other.z).abs())
    }
}

impl Add for CartesianTriple {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl Sub for CartesianTriple {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Self::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl Mul<f64> for CartesianTriple {
    type Output = Self;
    fn mul(self, s: f64) -> Self {
        Self::new(self.x * s, self.y * s, self.z * s)
    }
}

impl Neg for CartesianTriple {
    type Output = Self;
    fn neg(self) -> Self {
        Self::new(-self.x, -self.y, -self.z)
    }
}

/// Polar angle, azimuth and radius of a Cartesian triple.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SphericalTriple {
    pub theta: f64,
    pub phi: f64,
    pub r: f64,
    /// Set when `sqrt(x²+y²) = 0`, i.e. the azimuth is undefined and was
    /// filled in by convention.
    pub gauge_degenerate: bool,
}

impl SphericalTriple {
    pub fn new(theta: f64, phi: f64, r: f64) -> Self {
        Self { theta, phi, r, gauge_degenerate: false }
    }

    pub fn to_cartesian(&self) -> CartesianTriple {
        let (st, ct) = self.theta.sin_cos();
        let (sp, cp) = self.phi.sin_cos();
        CartesianTriple::new(self.r * st * cp, self.r * st * sp, self.r * ct)
    }
}

/// Wraps an angle into `[0, 2π)`.
pub fn wrap_angle(a: f64) -> f64 {
    let w = a.rem_euclid(TAU);
    if w >= TAU {
        0.0
    } else {
        w
    }
}

/// Converts to spherical coordinates.
///
/// If the transverse part vanishes the azimuth is undefined; `prev_phi`
/// (the azimuth of the previous grid sample, or 0) is carried forward and the
/// result is flagged. A zero vector maps to `θ = π`.
pub fn to_spherical_with(c: &CartesianTriple, prev_phi: f64) -> SphericalTriple {
    let p = c.x.hypot(c.y);
    let r = p.hypot(c.z);
    if r == 0.0 {
        return SphericalTriple { theta: PI, phi: prev_phi, r: 0.0, gauge_degenerate: true };
    }
    let theta = p.atan2(c.z);
    if p == 0.0 {
        return SphericalTriple { theta, phi: prev_phi, r, gauge_degenerate: true };
    }
    SphericalTriple { theta, phi: wrap_angle(c.y.atan2(c.x)), r, gauge_degenerate: false }
}

pub fn to_spherical(c: &CartesianTriple) -> SphericalTriple {
    to_spherical_with(c, 0.0)
}

/// Two complex amplitudes in the bare basis {|1⟩, |2⟩}.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Spinor {
    pub c1: Complex64,
    pub c2: Complex64,
}

impl Spinor {
    pub fn new(c1: Complex64, c2: Complex64) -> Self {
        Self { c1, c2 }
    }

    /// |1⟩
    pub fn ground() -> Self {
        Self::new(ONE, ZERO)
    }

    /// |2⟩
    pub fn excited() -> Self {
        Self::new(ZERO, ONE)
    }

    pub fn norm_sqr(&self) -> f64 {
        self.c1.norm_sqr() + self.c2.norm_sqr()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    /// ⟨self|other⟩
    pub fn inner(&self, other: &Spinor) -> Complex64 {
        self.c1.conj() * other.c1 + self.c2.conj() * other.c2
    }

    pub fn scale(&self, s: Complex64) -> Spinor {
        Spinor::new(self.c1 * s, self.c2 * s)
    }

    pub fn distance(&self, other: &Spinor) -> f64 {
        ((self.c1 - other.c1).norm_sqr() + (self.c2 - other.c2).norm_sqr()).sqrt()
    }
}

impl Add for Spinor {
    type Output = Spinor;
    fn add(self, o: Spinor) -> Spinor {
        Spinor::new(self.c1 + o.c1, self.c2 + o.c2)
    }
}

/// Dense complex 2x2 matrix, row major.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Matrix2 {
    pub m: [[Complex64; 2]; 2],
}

impl Matrix2 {
    pub fn new(m00: Complex64, m01: Complex64, m10: Complex64, m11: Complex64) -> Self {
        Self { m: [[m00, m01], [m10, m11]] }
    }

    pub fn identity() -> Self {
        Self::new(ONE, ZERO, ZERO, ONE)
    }

    pub fn zero() -> Self {
        Self::new(ZERO, ZERO, ZERO, ZERO)
    }

    pub fn sigma_x() -> Self {
        Self::new(ZERO, ONE, ONE, ZERO)
    }

    pub fn sigma_y() -> Self {
        Self::new(ZERO, -Complex64::i(), Complex64::i(), ZERO)
    }

    pub fn sigma_z() -> Self {
        Self::new(ONE, ZERO, ZERO, -ONE)
    }

    pub fn from_columns(a: &Spinor, b: &Spinor) -> Self {
        Self::new(a.c1, b.c1, a.c2, b.c2)
    }

    pub fn column(&self, k: usize) -> Spinor {
        Spinor::new(self.m[0][k], self.m[1][k])
    }

    pub fn adjoint(&self) -> Self {
        let m = &self.m;
        Self::new(m[0][0].conj(), m[1][0].conj(), m[0][1].conj(), m[1][1].conj())
    }

    pub fn apply(&self, s: &Spinor) -> Spinor {
        Spinor::new(
            self.m[0][0] * s.c1 + self.m[0][1] * s.c2,
            self.m[1][0] * s.c1 + self.m[1][1] * s.c2,
        )
    }

    pub fn scale(&self, s: Complex64) -> Self {
        let m = &self.m;
        Self::new(m[0][0] * s, m[0][1] * s, m[1][0] * s, m[1][1] * s)
    }

    pub fn trace(&self) -> Complex64 {
        self.m[0][0] + self.m[1][1]
    }

    /// Frobenius norm.
    pub fn frobenius(&self) -> f64 {
        self.m.iter().flatten().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Spectral (operator) norm, the largest singular value.
    pub fn op_norm(&self) -> f64 {
        let g = self.adjoint() * *self;
        let a = g.m[0][0].re;
        let d = g.m[1][1].re;
        let b = g.m[0][1].norm();
        let half_tr = 0.5 * (a + d);
        let disc = (0.25 * (a - d) * (a - d) + b * b).sqrt();
        (half_tr + disc).max(0.0).sqrt()
    }

    pub fn commutator(&self, other: &Self) -> Self {
        *self * *other - *other * *self
    }

    /// Deviation `‖M M† − I‖_F`.
    pub fn unitarity_defect(&self) -> f64 {
        (*self * self.adjoint() - Self::identity()).frobenius()
    }

    pub fn hermiticity_defect(&self) -> f64 {
        (*self - self.adjoint()).frobenius()
    }

    /// Projects onto `X σx + Y σy + Z σz`, discarding any trace part.
    pub fn to_cartesian(&self) -> CartesianTriple {
        let m = &self.m;
        CartesianTriple::new(
            0.5 * (m[0][1].re + m[1][0].re),
            0.5 * (m[1][0].im - m[0][1].im),
            0.5 * (m[0][0].re - m[1][1].re),
        )
    }
}

impl Add for Matrix2 {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        let (a, b) = (&self.m, &o.m);
        Self::new(a[0][0] + b[0][0], a[0][1] + b[0][1], a[1][0] + b[1][0], a[1][1] + b[1][1])
    }
}

impl Sub for Matrix2 {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        let (a, b) = (&self.m, &o.m);
        Self::new(a[0][0] - b[0][0], a[0][1] - b[0][1], a[1][0] - b[1][0], a[1][1] - b[1][1])
    }
}

impl Mul for Matrix2 {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        let (a, b) = (&self.m, &o.m);
        Self::new(
            a[0][0] * b[0][0] + a[0][1] * b[1][0],
            a[0][0] * b[0][1] + a[0][1] * b[1][1],
            a[1][0] * b[0][0] + a[1][1] * b[1][0],
            a[1][0] * b[0][1] + a[1][1] * b[1][1],
        )
    }
}

/// `[[Z, X − iY], [X + iY, −Z]]`
pub fn compose(c: &CartesianTriple) -> Matrix2 {
    Matrix2::new(
        Complex64::new(c.z, 0.0),
        Complex64::new(c.x, -c.y),
        Complex64::new(c.x, c.y),
        Complex64::new(-c.z, 0.0),
    )
}

/// Instantaneous eigenvectors with gauge phase `eps`.
///
/// Returns `(|1̃⟩, |2̃⟩, E1, E2)` with `E1 = −r`, `E2 = +r`.
pub fn eigensystem(s: &SphericalTriple, eps: f64) -> (Spinor, Spinor, f64, f64) {
    let (sh, ch) = (0.5 * s.theta).sin_cos();
    let half_phi = 0.5 * s.phi;
    let e_minus = Complex64::from_polar(1.0, eps - half_phi);
    let e_plus = Complex64::from_polar(1.0, eps + half_phi);
    let f_minus = Complex64::from_polar(1.0, -eps - half_phi);
    let f_plus = Complex64::from_polar(1.0, -eps + half_phi);
    let one = Spinor::new(e_minus * sh, -e_plus * ch);
    let two = Spinor::new(f_minus * ch, f_plus * sh);
    (one, two, -s.r, s.r)
}

/// Unitary whose columns are the eigenvectors `|1̃⟩, |2̃⟩` in the bare basis.
pub fn frame_rotation(s: &SphericalTriple, eps: f64) -> Matrix2 {
    let (one, two, _, _) = eigensystem(s, eps);
    Matrix2::from_columns(&one, &two)
}
