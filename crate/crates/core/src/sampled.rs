//! Uniform time grids, finite differences and quadrature.

use crate::error::{Error, Result};

/// Uniform grid on `[0, tf]` with `n` samples.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    tf: f64,
    n: usize,
}

impl TimeGrid {
    pub fn new(tf: f64, n: usize) -> Result<Self> {
        if !(tf.is_finite() && tf > 0.0) {
            return Err(Error::InvalidParameter(format!("tf must be positive, got {tf}")));
        }
        if n < 3 {
            return Err(Error::TooFewSamples { needed: 3, got: n });
        }
        Ok(Self { tf, n })
    }

    pub fn tf(&self) -> f64 {
        self.tf
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn dt(&self) -> f64 {
        self.tf / (self.n - 1) as f64
    }

    pub fn t(&self, i: usize) -> f64 {
        if i + 1 == self.n {
            self.tf
        } else {
            self.tf * i as f64 / (self.n - 1) as f64
        }
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n).map(|i| self.t(i))
    }

    pub fn ensure_same(&self, other: &TimeGrid) -> Result<()> {
        if self.n != other.n || self.tf != other.tf {
            return Err(Error::GridMismatch(format!(
                "({}, {}) vs ({}, {})",
                self.tf, self.n, other.tf, other.n
            )));
        }
        Ok(())
    }
}

/// Real function sampled on a [`TimeGrid`].
#[derive(Debug, Clone, PartialEq)]
pub struct SampledFunction {
    pub grid: TimeGrid,
    pub values: Vec<f64>,
}

impl SampledFunction {
    pub fn new(grid: TimeGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::GridMismatch(format!(
                "{} values on a {}-sample grid",
                values.len(),
                grid.len()
            )));
        }
        Ok(Self { grid, values })
    }

    pub fn from_fn(grid: TimeGrid, f: impl Fn(f64) -> f64) -> Self {
        Self { grid, values: grid.times().map(f).collect() }
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// Fourth-order finite-difference derivative.
pub fn derivative(f: &SampledFunction) -> Result<SampledFunction> {
    if f.values.len() < 5 {
        return Err(Error::TooFewSamples { needed: 5, got: f.values.len() });
    }
    let values = derivative_segmented(&f.values, f.grid.dt(), &[]);
    SampledFunction::new(f.grid, values)
}

/// Finite-difference derivative on independent segments.
///
/// `breaks` holds indices `b` such that samples `b` and `b + 1` lie on
/// different sides of a discontinuity; no stencil straddles a break. Each
/// segment uses central 4th-order stencils inside and one-sided 4th-order
/// stencils at its ends, degrading to lower order for very short segments.
pub fn derivative_segmented(values: &[f64], dt: f64, breaks: &[usize]) -> Vec<f64> {
    let mut out = vec![0.0; values.len()];
    for (lo, hi) in segments(values.len(), breaks) {
        derivative_segment(&values[lo..hi], dt, &mut out[lo..hi]);
    }
    out
}

/// Half-open index ranges between breaks.
pub(crate) fn segments(n: usize, breaks: &[usize]) -> Vec<(usize, usize)> {
    let mut out = Vec::with_capacity(breaks.len() + 1);
    let mut lo = 0;
    for &b in breaks {
        if b + 1 > lo && b + 1 < n {
            out.push((lo, b + 1));
            lo = b + 1;
        }
    }
    out.push((lo, n));
    out
}

fn derivative_segment(f: &[f64], h: f64, out: &mut [f64]) {
    let n = f.len();
    // differences against a reference sample keep constants exactly flat
    let d = |i: usize, r: usize| f[i] - f[r];
    match n {
        0 => {}
        1 => out[0] = 0.0,
        2 => {
            let v = d(1, 0) / h;
            out[0] = v;
            out[1] = v;
        }
        3 | 4 => {
            out[0] = (4.0 * d(1, 0) - d(2, 0)) / (2.0 * h);
            for i in 1..n - 1 {
                out[i] = d(i + 1, i - 1) / (2.0 * h);
            }
            let l = n - 1;
            out[l] = (d(l - 2, l) - 4.0 * d(l - 1, l)) / (2.0 * h);
        }
        _ => {
            let h12 = 12.0 * h;
            out[0] = (48.0 * d(1, 0) - 36.0 * d(2, 0) + 16.0 * d(3, 0) - 3.0 * d(4, 0)) / h12;
            out[1] = (-3.0 * d(0, 1) + 18.0 * d(2, 1) - 6.0 * d(3, 1) + d(4, 1)) / h12;
            for i in 2..n - 2 {
                out[i] = (d(i - 2, i) - 8.0 * d(i - 1, i) + 8.0 * d(i + 1, i) - d(i + 2, i)) / h12;
            }
            let l = n - 1;
            out[l] = -(48.0 * d(l - 1, l) - 36.0 * d(l - 2, l) + 16.0 * d(l - 3, l)
                - 3.0 * d(l - 4, l))
                / h12;
            let m = n - 2;
            out[m] = -(-3.0 * d(m + 1, m) + 18.0 * d(m - 1, m) - 6.0 * d(m - 2, m) + d(m - 3, m))
                / h12;
        }
    }
}

/// Running integral `∫₀^{t_i} f` by composite Simpson.
///
/// Even-indexed values are plain composite Simpson; odd-indexed values add
/// the three-point partial-interval rule. A trailing odd interval uses the
/// backward partial rule.
pub fn cumulative_simpson(f: &[f64], h: f64) -> Vec<f64> {
    let n = f.len();
    let mut out = vec![0.0; n];
    if n < 2 {
        return out;
    }
    if n == 2 {
        out[1] = 0.5 * h * (f[0] + f[1]);
        return out;
    }
    let mut i = 0;
    while i + 2 < n {
        out[i + 1] = out[i] + h / 12.0 * (5.0 * f[i] + 8.0 * f[i + 1] - f[i + 2]);
        out[i + 2] = out[i] + h / 3.0 * (f[i] + 4.0 * f[i + 1] + f[i + 2]);
        i += 2;
    }
    if i + 1 < n {
        out[i + 1] = out[i] + h / 12.0 * (-f[i - 1] + 8.0 * f[i] + 5.0 * f[i + 1]);
    }
    out
}

/// Composite Simpson integral over the whole grid.
pub fn simpson(f: &SampledFunction) -> Result<f64> {
    let n = f.values.len();
    if n.is_multiple_of(2) {
        return Err(Error::EvenSampleCount(n));
    }
    Ok(*cumulative_simpson(&f.values, f.grid.dt()).last().unwrap_or(&0.0))
}

/// Cubic (four-point Lagrange) value halfway between samples `i` and `i + 1`.
pub fn cubic_midpoint(f: &[f64], i: usize) -> f64 {
    let n = f.len();
    debug_assert!(i + 1 < n);
    if n < 4 {
        return 0.5 * (f[i] + f[i + 1]);
    }
    if i == 0 {
        (5.0 * f[0] + 15.0 * f[1] - 5.0 * f[2] + f[3]) / 16.0
    } else if i + 2 >= n {
        (f[n - 4] - 5.0 * f[n - 3] + 15.0 * f[n - 2] + 5.0 * f[n - 1]) / 16.0
    } else {
        (-f[i - 1] + 9.0 * f[i] + 9.0 * f[i + 1] - f[i + 2]) / 16.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_basics() {
        let g = TimeGrid::new(0.2, 5).unwrap();
        assert_eq!(g.dt(), 0.05);
        assert_eq!(g.t(4), 0.2);
        assert!(TimeGrid::new(0.0, 5).is_err());
        assert!(TimeGrid::new(1.0, 2).is_err());
    }

    #[test]
    fn derivative_of_constant_is_zero() {
        let g = TimeGrid::new(1.0, 101).unwrap();
        let f = SampledFunction::from_fn(g, |_| std::f64::consts::PI);
        let d = derivative(&f).unwrap();
        assert!(d.max_abs() < 1e-12);
        assert!(d.values.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn derivative_exact_on_quadratic() {
        let g = TimeGrid::new(1.0, 101).unwrap();
        let f = SampledFunction::from_fn(g, |t| t * t);
        let d = derivative(&f).unwrap();
        for (t, v) in g.times().zip(&d.values) {
            assert!((v - 2.0 * t).abs() < 1e-10, "t={t}: {v}");
        }
    }

    #[test]
    fn derivative_of_sine_against_analytic() {
        let g = TimeGrid::new(1.0, 2001).unwrap();
        let f = SampledFunction::from_fn(g, |t| (5.0 * t).sin());
        let d = derivative(&f).unwrap();
        let err = g
            .times()
            .zip(&d.values)
            .map(|(t, v)| (v - 5.0 * (5.0 * t).cos()).abs())
            .fold(0.0, f64::max);
        assert!(err < 1e-8, "max error {err}");
    }

    #[test]
    fn derivative_needs_five_samples() {
        let g = TimeGrid::new(1.0, 4).unwrap();
        let f = SampledFunction::from_fn(g, |t| t);
        assert_eq!(derivative(&f), Err(Error::TooFewSamples { needed: 5, got: 4 }));
    }

    #[test]
    fn segmented_derivative_ignores_jump() {
        let g = TimeGrid::new(1.0, 201).unwrap();
        let vals: Vec<f64> = g.times().map(|t| if t <= 0.5 { t } else { 3.0 + t }).collect();
        let d = derivative_segmented(&vals, g.dt(), &[100]);
        assert!(d.iter().all(|v| (v - 1.0).abs() < 1e-9));
    }

    #[test]
    fn short_segments_fall_back() {
        let vals = [0.0, 1.0, 2.0, 10.0, 11.0, 50.0];
        let d = derivative_segmented(&vals, 1.0, &[2, 4]);
        for v in &d[..5] {
            assert!((v - 1.0).abs() < 1e-14);
        }
        assert_eq!(d[5], 0.0);
    }

    #[test]
    fn cumulative_simpson_exactness() {
        let g = TimeGrid::new(2.0, 11).unwrap();
        // cubic: exact at even indices
        let f: Vec<f64> = g.times().map(|t| t * t * t - t).collect();
        let i = cumulative_simpson(&f, g.dt());
        for (k, (t, v)) in g.times().zip(&i).enumerate().step_by(2) {
            let exact = t.powi(4) / 4.0 - t * t / 2.0;
            assert!((v - exact).abs() < 1e-12, "k={k}");
        }
        // quadratic: exact everywhere, including a trailing odd interval
        let q: Vec<f64> = g.times().map(|t| 3.0 * t * t - t + 1.0).collect();
        let exact = |t: f64| t.powi(3) - t * t / 2.0 + t;
        for n in [10, 11] {
            let i = cumulative_simpson(&q[..n], g.dt());
            for (t, v) in g.times().zip(&i) {
                assert!((v - exact(t)).abs() < 1e-12, "n={n} t={t}");
            }
        }
    }

    #[test]
    fn cubic_midpoint_exact_on_cubics() {
        let f: Vec<f64> = (0..8).map(|i| (i as f64).powi(3) - 2.0 * i as f64).collect();
        for i in 0..7 {
            let x = i as f64 + 0.5;
            assert!((cubic_midpoint(&f, i) - (x.powi(3) - 2.0 * x)).abs() < 1e-12);
        }
    }
}
