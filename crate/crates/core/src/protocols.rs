//! Concrete control protocols and their diagnostics: the linear
//! Landau–Zener sweep, the invariant-based inverse-engineered pulse, the
//! adiabaticity margin and the shortcut boundary-condition check.

use std::f64::consts::{FRAC_PI_2, PI};
use std::sync::Arc;

use nalgebra::{Matrix4, Matrix5, Vector4, Vector5};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::engine::{coupling, IterationStack};
use crate::error::{Error, Result};
use crate::jet::Jet;
use crate::pauli::{compose, CartesianTriple, Matrix2};
use crate::protocol::{AnalyticControls, ControlProtocol};
use crate::sampled::{derivative, TimeGrid};

/// Factor by which "≫" must hold in the feasibility and region rules.
pub const FEASIBILITY_MARGIN: f64 = 10.0;

/// Default threshold on `Z²/(X²+Y²)` for the boundary-condition check.
pub const DEFAULT_RATIO_THRESHOLD: f64 = 10.0;

/// Smallest `|sin β|` accepted by [`invariant_to_controls`].
pub const MIN_ABS_SIN_AZIMUTH: f64 = 0.1;

const BOUNDARY_REL_TOL: f64 = 1e-12;

fn at_least(value: f64, bound: f64) -> bool {
    value >= bound * (1.0 - BOUNDARY_REL_TOL)
}

// Landau–Zener

/// Linear sweep `Δ(t) = chirp·(t − tf/2)` at constant Rabi frequency.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LZParams {
    /// rad/μs²
    pub chirp: f64,
    /// rad/μs
    pub rabi: f64,
    /// μs
    pub duration: f64,
}

impl LZParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.rabi.is_finite() && self.rabi > 0.0) {
            return Err(Error::InvalidParameter(format!("Rabi frequency must be positive, got {}", self.rabi)));
        }
        if !(self.duration.is_finite() && self.duration > 0.0) {
            return Err(Error::InvalidParameter(format!("duration must be positive, got {}", self.duration)));
        }
        if !self.chirp.is_finite() {
            return Err(Error::InvalidParameter("chirp must be finite".into()));
        }
        Ok(())
    }
}

impl AnalyticControls for LZParams {
    fn jets(&self, t: f64, len: usize) -> (Jet, Jet) {
        (
            Jet::constant(self.rabi, len),
            Jet::linear(self.chirp * (t - 0.5 * self.duration), self.chirp, len),
        )
    }
}

pub fn landau_zener(p: LZParams, samples: usize) -> Result<ControlProtocol> {
    p.validate()?;
    let grid = TimeGrid::new(p.duration, samples)?;
    Ok(ControlProtocol::from_analytic(grid, Arc::new(p)))
}

/// `max_t |Ω_a|/(2Ω)` with `Ω_a = (Ω_R Δ̇ − Ω̇_R Δ)/Ω²`, `Ω = √(Δ² + Ω_R²)`.
pub fn adiabaticity_margin(protocol: &ControlProtocol) -> Result<f64> {
    let (omega_dot, delta_dot) = match protocol.analytic() {
        Some(a) => protocol
            .grid
            .times()
            .map(|t| {
                let (o, d) = a.jets(t, 2);
                (o.derivative_value(1), d.derivative_value(1))
            })
            .unzip(),
        None => (derivative(&protocol.omega_r_fn())?.values, derivative(&protocol.delta_fn())?.values),
    };
    let mut worst: f64 = 0.0;
    for i in 0..protocol.grid.len() {
        let (o, d) = (protocol.omega_r[i], protocol.delta[i]);
        let gap2 = o * o + d * d;
        if gap2 == 0.0 {
            return Err(Error::LevelCrossing(protocol.grid.t(i)));
        }
        let mixing = (o * delta_dot[i] - omega_dot[i] * d) / gap2;
        worst = worst.max(mixing.abs() / (2.0 * gap2.sqrt()));
    }
    Ok(worst)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Feasibility {
    /// `2Ω₀/tf`: the chirp must dominate this for the edge conditions.
    pub lower: f64,
    /// `2Ω₀²`: the chirp must stay below this for adiabaticity.
    pub upper: f64,
    pub boundary_side: bool,
    pub adiabatic_side: bool,
    pub feasible: bool,
}

/// Both sides of `FEASIBILITY_MARGIN·2Ω₀/tf ≤ |α| < 2Ω₀²/FEASIBILITY_MARGIN`.
///
/// The boundary side is inclusive (up to rounding) so that a sweep exactly
/// at the margin, such as `tf = 20·|Ω₀/α|`, counts as satisfying it.
pub fn lz_feasibility(p: &LZParams) -> Feasibility {
    let lower = 2.0 * p.rabi / p.duration;
    let upper = 2.0 * p.rabi * p.rabi;
    let a = p.chirp.abs();
    let boundary_side = at_least(a, FEASIBILITY_MARGIN * lower);
    let adiabatic_side = a < upper / FEASIBILITY_MARGIN;
    Feasibility { lower, upper, boundary_side, adiabatic_side, feasible: boundary_side && adiabatic_side }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegionPoint {
    pub rabi: f64,
    /// `20Ω₀/tf`
    pub min_chirp: f64,
    /// `0.2Ω₀²`
    pub max_chirp: f64,
    pub nonempty: bool,
}

/// Feasible-chirp band for each Rabi frequency of a scan.
pub fn region_scan(duration: f64, rabi: &[f64]) -> Vec<RegionPoint> {
    rabi.iter()
        .map(|&r| {
            let min_chirp = FEASIBILITY_MARGIN * 2.0 * r / duration;
            let max_chirp = 2.0 * r * r / FEASIBILITY_MARGIN;
            RegionPoint { rabi: r, min_chirp, max_chirp, nonempty: min_chirp < max_chirp }
        })
        .collect()
}

/// First scanned Rabi frequency with a nonempty feasible band.
pub fn region_onset(points: &[RegionPoint]) -> Option<f64> {
    points.iter().find(|p| p.nonempty).map(|p| p.rabi)
}

// Boundary conditions

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundaryEntry {
    pub frame: usize,
    pub t: f64,
    /// `Z²/(X²+Y²)`
    pub ratio: f64,
    /// `|Z/X|` for frame 0, `|Z/Y|` above
    pub component_ratio: f64,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrameMapping {
    pub frame: usize,
    /// `"identity"` when `|1̃⟩` lies mostly along `|1⟩`, otherwise `"swap"`
    pub start: String,
    pub end: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub order: usize,
    pub ratio_threshold: f64,
    pub entries: Vec<BoundaryEntry>,
    /// `max_t |K_j|/(2R_j)` for each checked frame
    pub adiabaticity_margins: Vec<f64>,
    pub mappings: Vec<FrameMapping>,
    pub passed: bool,
}

fn ratio_of(c: &CartesianTriple) -> f64 {
    let p2 = c.x * c.x + c.y * c.y;
    if p2 == 0.0 {
        f64::INFINITY
    } else {
        c.z * c.z / p2
    }
}

fn mapping_label(b: &Matrix2) -> String {
    if b.m[0][0].norm_sqr() >= 0.5 { "identity" } else { "swap" }.to_string()
}

fn frame_margin(stack: &IterationStack, frame: usize) -> f64 {
    let f = &stack.frames[frame];
    coupling(f)
        .iter()
        .zip(&f.spherical)
        .map(|(k, s)| if s.r > 0.0 { k.norm() / (2.0 * s.r) } else { f64::INFINITY })
        .fold(0.0, f64::max)
}

/// Checks that frames `0..j` start and end with their eigenvectors aligned
/// to the bare basis, which makes `H₀^(j)` a shortcut to adiabaticity.
///
/// Each frame passes at a time when `Z²/(X²+Y²) ≥ ratio_threshold`; order 1
/// needs no condition.
pub fn shortcut_bc_check(stack: &IterationStack, j: usize, ratio_threshold: f64) -> Result<AnalysisReport> {
    let available = stack.j_max() + 1;
    if j > available {
        return Err(Error::OrderOutOfRange { requested: j, available });
    }
    if !(ratio_threshold.is_finite() && ratio_threshold > 0.0) {
        return Err(Error::InvalidParameter(format!("ratio threshold must be positive, got {ratio_threshold}")));
    }
    let frames = if j <= 1 { 0..0 } else { 0..j };
    let last = stack.grid.len() - 1;
    let mut entries = Vec::new();
    for frame in frames.clone() {
        for i in [0, last] {
            let c = stack.frames[frame].cartesian[i];
            let ratio = ratio_of(&c);
            let side = if frame == 0 { c.x } else { c.y };
            entries.push(BoundaryEntry {
                frame,
                t: stack.grid.t(i),
                ratio,
                component_ratio: (c.z / side).abs(),
                holds: at_least(ratio, ratio_threshold),
            });
        }
    }
    let adiabaticity_margins = frames.clone().map(|f| frame_margin(stack, f)).collect();
    let mappings = frames
        .map(|frame| {
            let b = &stack.frame_products[frame + 1];
            let u = stack.basis;
            FrameMapping {
                frame,
                start: mapping_label(&(u * b[0])),
                end: mapping_label(&(u * b[last])),
            }
        })
        .collect();
    let passed = entries.iter().all(|e| e.holds);
    Ok(AnalysisReport { order: j, ratio_threshold, entries, adiabaticity_margins, mappings, passed })
}

// Invariant-based inverse engineering

/// Polynomial angles of the dynamical invariant: a cubic polar angle
/// running from π to 0 with vanishing end rates, and a quartic azimuth
/// pinned at −π/2 at both ends and at mid-time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InvariantAnsatz {
    pub duration: f64,
    /// polar angle `Σ a_k t^k`
    pub polar: [f64; 4],
    /// azimuth `Σ b_k t^k`
    pub azimuth: [f64; 5],
    /// eigenvalue scale of the invariant
    pub scale: f64,
}

fn value_row<const N: usize>(t: f64) -> [f64; N] {
    let mut row = [0.0; N];
    let mut p = 1.0;
    for v in row.iter_mut() {
        *v = p;
        p *= t;
    }
    row
}

fn rate_row<const N: usize>(t: f64) -> [f64; N] {
    let mut row = [0.0; N];
    let mut p = 1.0;
    for (k, v) in row.iter_mut().enumerate().skip(1) {
        *v = k as f64 * p;
        p *= t;
    }
    row
}

/// Taylor jet of `Σ coeffs[m] t^m` around `t`.
fn poly_jet(coeffs: &[f64], t: f64, len: usize) -> Jet {
    let mut out = vec![0.0; len];
    for (k, slot) in out.iter_mut().enumerate() {
        let mut binom = 1.0;
        let mut acc = 0.0;
        let mut tp = 1.0;
        for m in k..coeffs.len() {
            acc += coeffs[m] * binom * tp;
            binom = binom * (m + 1) as f64 / (m + 1 - k) as f64;
            tp *= t;
        }
        *slot = acc;
    }
    Jet::from_coeffs(&out)
}

impl InvariantAnsatz {
    pub fn new(duration: f64) -> Result<Self> {
        if !(duration.is_finite() && duration > 0.0) {
            return Err(Error::InvalidParameter(format!("duration must be positive, got {duration}")));
        }
        let tf = duration;
        let rows4 = [value_row::<4>(0.0), value_row::<4>(tf), rate_row::<4>(0.0), rate_row::<4>(tf)];
        let m4 = Matrix4::from_fn(|r, c| rows4[r][c]);
        let polar = m4.lu().solve(&Vector4::new(PI, 0.0, 0.0, 0.0)).ok_or(Error::Singular)?;

        let rows5 = [
            value_row::<5>(0.0),
            value_row::<5>(0.5 * tf),
            value_row::<5>(tf),
            rate_row::<5>(0.0),
            rate_row::<5>(tf),
        ];
        let m5 = Matrix5::from_fn(|r, c| rows5[r][c]);
        let rhs = Vector5::new(-FRAC_PI_2, -FRAC_PI_2, -FRAC_PI_2, PI / (2.0 * tf), -PI / (2.0 * tf));
        let azimuth = m5.lu().solve(&rhs).ok_or(Error::Singular)?;

        Ok(Self {
            duration,
            polar: [polar[0], polar[1], polar[2], polar[3]],
            azimuth: [azimuth[0], azimuth[1], azimuth[2], azimuth[3], azimuth[4]],
            scale: 1.0,
        })
    }

    pub fn polar_jet(&self, t: f64, len: usize) -> Jet {
        poly_jet(&self.polar, t, len)
    }

    pub fn azimuth_jet(&self, t: f64, len: usize) -> Jet {
        poly_jet(&self.azimuth, t, len)
    }

    pub fn polar_angle(&self, t: f64) -> f64 {
        self.polar_jet(t, 1).value()
    }

    pub fn azimuth_angle(&self, t: f64) -> f64 {
        self.azimuth_jet(t, 1).value()
    }

    /// The invariant `I(t)` and its time derivative.
    pub fn invariant_with_rate(&self, t: f64) -> (Matrix2, Matrix2) {
        let (g, b) = (self.polar_jet(t, 2), self.azimuth_jet(t, 2));
        let (sg, cg) = g.sin_cos();
        let (sb, cb) = b.sin_cos();
        let x = sg * cb;
        let y = -(sg * sb);
        let z = cg;
        let h = 0.5 * self.scale;
        let value = CartesianTriple::new(x.value(), y.value(), z.value()) * h;
        let rate =
            CartesianTriple::new(x.derivative_value(1), y.derivative_value(1), z.derivative_value(1)) * h;
        (compose(&value), compose(&rate))
    }
}

/// Drops leading coefficients that vanish in both series, then divides.
///
/// A coefficient `c_k` counts as zero when `|c_k|·τ^k` is negligible next to
/// the largest such term, with `τ` the time scale of the series.
fn div_cancelling(num: &Jet, den: &Jet, time_scale: f64) -> Option<Jet> {
    let len = num.len().min(den.len());
    let weighted = |j: &Jet, k: usize| j.coeff(k).abs() * time_scale.powi(k as i32);
    let scale = (0..len).map(|k| weighted(num, k).max(weighted(den, k))).fold(0.0, f64::max);
    let negligible = |j: &Jet, k: usize| weighted(j, k) <= 1e-12 * scale;
    let shift = (0..len).take_while(|&k| negligible(den, k)).count();
    if shift == len || (0..shift).any(|k| !negligible(num, k)) {
        return None;
    }
    let n = Jet::from_coeffs(&num.coeffs()[shift..len]);
    let d = Jet::from_coeffs(&den.coeffs()[shift..len]);
    Some(n.div(&d))
}

// one order for the rate, two for the cancellation at the ends
const ENDPOINT_SERIES_EXTRA: usize = 3;

impl AnalyticControls for InvariantAnsatz {
    /// `Ω_R = γ̇/sin β`, `Δ = β̇ − γ̇ cos β cos γ/(sin β sin γ)`; where `sin γ`
    /// vanishes the quotient is taken as the limit of its series.
    fn jets(&self, t: f64, len: usize) -> (Jet, Jet) {
        let work = (len + ENDPOINT_SERIES_EXTRA).min(crate::jet::JET_CAPACITY);
        let g = self.polar_jet(t, work);
        let b = self.azimuth_jet(t, work);
        let (sg, cg) = g.sin_cos();
        let (sb, cb) = b.sin_cos();
        let g_rate = g.derivative();
        let b_rate = b.derivative();
        let omega_r = g_rate.div(&sb.truncate(g_rate.len()));
        let num = g_rate * cb * cg;
        let den = sb * sg;
        let ratio = div_cancelling(&num, &den, self.duration)
            .unwrap_or_else(|| Jet::constant(f64::NAN, num.len()));
        let delta = b_rate - ratio;
        (omega_r.truncate(len), delta.truncate(len))
    }
}

/// Samples the controls of the ansatz, refusing azimuths too close to the
/// poles of `1/sin β`.
pub fn invariant_to_controls(ansatz: &InvariantAnsatz, samples: usize) -> Result<ControlProtocol> {
    let grid = TimeGrid::new(ansatz.duration, samples)?;
    if let Some(t) = grid.times().find(|&t| ansatz.azimuth_angle(t).sin().abs() < MIN_ABS_SIN_AZIMUTH) {
        return Err(Error::AnsatzInvalid(format!("|sin β| < {MIN_ABS_SIN_AZIMUTH} at t = {t}")));
    }
    let protocol = ControlProtocol::from_analytic(grid, Arc::new(*ansatz));
    if protocol.omega_r.iter().chain(&protocol.delta).any(|v| !v.is_finite()) {
        return Err(Error::AnsatzInvalid("controls diverge".into()));
    }
    Ok(protocol)
}

/// `(ν/2)[[cos γ, sin γ e^{iβ}], [sin γ e^{−iβ}, −cos γ]]`
pub fn invariant_matrix(polar: f64, azimuth: f64, scale: f64) -> Matrix2 {
    let h = 0.5 * scale;
    let off = Complex64::from_polar(polar.sin(), azimuth);
    Matrix2::new(
        Complex64::new(h * polar.cos(), 0.0),
        off * h,
        off.conj() * h,
        Complex64::new(-h * polar.cos(), 0.0),
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InvarianceReport {
    /// `max_t ‖∂_t I − i[I, H]‖`
    pub residual: f64,
    /// `‖[I(0), H(0)]‖`
    pub start_commutator: f64,
    /// `‖[I(tf), H(tf)]‖`
    pub end_commutator: f64,
}

/// Checks that the ansatz invariant satisfies `dI/dt = ∂_t I + i[H, I] = 0`
/// along the sampled protocol.
pub fn invariance_check(ansatz: &InvariantAnsatz, protocol: &ControlProtocol) -> InvarianceReport {
    let h = protocol.hamiltonian();
    let grid = protocol.grid;
    let mut residual: f64 = 0.0;
    for (i, t) in grid.times().enumerate() {
        let (inv, rate) = ansatz.invariant_with_rate(t);
        let hm = compose(&h[i]);
        let r = rate - inv.commutator(&hm).scale(Complex64::i());
        residual = residual.max(r.op_norm());
    }
    let comm = |i: usize| {
        let (inv, _) = ansatz.invariant_with_rate(grid.t(i));
        inv.commutator(&compose(&h[i])).op_norm()
    };
    InvarianceReport { residual, start_commutator: comm(0), end_commutator: comm(grid.len() - 1) }
}
