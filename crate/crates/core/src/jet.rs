//! Truncated Taylor series ("jets") for exact derivatives of analytic
//! protocols.
//!
//! A jet stores `c_k = f^(k)(t₀)/k!` for `k < len`. Arithmetic truncates to
//! the shorter operand, so derivative information degrades gracefully down
//! the iteration chain instead of being amplified by finite differences.

use std::ops::{Add, Mul, Neg, Sub};

pub const JET_CAPACITY: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jet {
    c: [f64; JET_CAPACITY],
    len: usize,
}

impl Jet {
    pub fn constant(value: f64, len: usize) -> Self {
        let mut j = Self::zeros(len);
        j.c[0] = value;
        j
    }

    pub fn zeros(len: usize) -> Self {
        assert!((1..=JET_CAPACITY).contains(&len), "jet length {len} out of range");
        Self { c: [0.0; JET_CAPACITY], len }
    }

    /// Jet of `value + slope·τ`.
    pub fn linear(value: f64, slope: f64, len: usize) -> Self {
        let mut j = Self::constant(value, len);
        if len > 1 {
            j.c[1] = slope;
        }
        j
    }

    pub fn from_coeffs(coeffs: &[f64]) -> Self {
        let mut j = Self::zeros(coeffs.len());
        j.c[..coeffs.len()].copy_from_slice(coeffs);
        j
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn value(&self) -> f64 {
        self.c[0]
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.c[..self.len]
    }

    pub fn coeff(&self, k: usize) -> f64 {
        if k < self.len {
            self.c[k]
        } else {
            0.0
        }
    }

    /// `k`-th derivative at the expansion point.
    pub fn derivative_value(&self, k: usize) -> f64 {
        let fact: f64 = (1..=k).map(|i| i as f64).product();
        self.coeff(k) * fact
    }

    /// True when every stored coefficient is exactly zero.
    pub fn is_identically_zero(&self) -> bool {
        self.coeffs().iter().all(|&v| v == 0.0)
    }

    pub fn truncate(&self, len: usize) -> Self {
        let mut j = *self;
        j.len = len.min(self.len).max(1);
        j.c[j.len..].iter_mut().for_each(|v| *v = 0.0);
        j
    }

    pub fn scale(&self, s: f64) -> Self {
        let mut j = *self;
        j.c[..j.len].iter_mut().for_each(|v| *v *= s);
        j
    }

    /// d/dτ; one coefficient shorter.
    pub fn derivative(&self) -> Self {
        if self.len == 1 {
            return Self::zeros(1);
        }
        let mut j = Self::zeros(self.len - 1);
        for k in 0..j.len {
            j.c[k] = (k + 1) as f64 * self.c[k + 1];
        }
        j
    }

    /// Antiderivative with the given value at τ = 0; one coefficient longer
    /// (capped at capacity).
    pub fn integrate(&self, value: f64) -> Self {
        let len = (self.len + 1).min(JET_CAPACITY);
        let mut j = Self::zeros(len);
        j.c[0] = value;
        for k in 1..len {
            j.c[k] = self.c[k - 1] / k as f64;
        }
        j
    }

    pub fn recip(&self) -> Self {
        Self::constant(1.0, self.len).div(self)
    }

    pub fn div(&self, d: &Jet) -> Self {
        let len = self.len.min(d.len);
        let mut q = Self::zeros(len);
        for k in 0..len {
            let mut acc = self.c[k];
            for i in 1..=k {
                acc -= d.c[i] * q.c[k - i];
            }
            q.c[k] = acc / d.c[0];
        }
        q
    }

    pub fn sqrt(&self) -> Self {
        let mut s = Self::zeros(self.len);
        s.c[0] = self.c[0].sqrt();
        for k in 1..self.len {
            let mut acc = self.c[k];
            for i in 1..k {
                acc -= s.c[i] * s.c[k - i];
            }
            s.c[k] = acc / (2.0 * s.c[0]);
        }
        s
    }

    /// `(sin f, cos f)`
    pub fn sin_cos(&self) -> (Self, Self) {
        let mut s = Self::zeros(self.len);
        let mut c = Self::zeros(self.len);
        (s.c[0], c.c[0]) = self.c[0].sin_cos();
        for k in 1..self.len {
            let (mut ds, mut dc) = (0.0, 0.0);
            for i in 1..=k {
                let w = i as f64 * self.c[i];
                ds += w * c.c[k - i];
                dc -= w * s.c[k - i];
            }
            s.c[k] = ds / k as f64;
            c.c[k] = dc / k as f64;
        }
        (s, c)
    }

    /// `atan2(y, x)` with the given branch value at τ = 0.
    pub fn atan2_with_value(y: &Jet, x: &Jet, value: f64) -> Self {
        let len = y.len.min(x.len);
        if len == 1 {
            return Self::constant(value, 1);
        }
        let num = *x * y.derivative() - *y * x.derivative();
        let rate = if num.is_identically_zero() {
            Self::zeros(len - 1)
        } else {
            num.div(&(*x * *x + *y * *y))
        };
        rate.integrate(value).truncate(len)
    }

    /// Leading-order cancellation of `num/den` where both vanish at τ = 0.
    ///
    /// Drops the leading coefficients whose magnitude is below `tol` in both
    /// series and returns the value of the quotient (L'Hôpital on the series).
    pub fn limit_ratio(num: &Jet, den: &Jet, tol: f64) -> Option<f64> {
        let len = num.len.min(den.len);
        for k in 0..len {
            if den.c[k].abs() > tol {
                return Some(num.c[k] / den.c[k]);
            }
            if num.c[k].abs() > tol {
                return None;
            }
        }
        None
    }
}

impl Add for Jet {
    type Output = Jet;
    fn add(self, o: Jet) -> Jet {
        let len = self.len.min(o.len);
        let mut j = Jet::zeros(len);
        for k in 0..len {
            j.c[k] = self.c[k] + o.c[k];
        }
        j
    }
}

impl Sub for Jet {
    type Output = Jet;
    fn sub(self, o: Jet) -> Jet {
        let len = self.len.min(o.len);
        let mut j = Jet::zeros(len);
        for k in 0..len {
            j.c[k] = self.c[k] - o.c[k];
        }
        j
    }
}

impl Neg for Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.scale(-1.0)
    }
}

impl Mul for Jet {
    type Output = Jet;
    fn mul(self, o: Jet) -> Jet {
        let len = self.len.min(o.len);
        let mut j = Jet::zeros(len);
        for k in 0..len {
            let mut acc = 0.0;
            for i in 0..=k {
                acc += self.c[i] * o.c[k - i];
            }
            j.c[k] = acc;
        }
        j
    }
}

impl Mul<f64> for Jet {
    type Output = Jet;
    fn mul(self, s: f64) -> Jet {
        self.scale(s)
    }
}
