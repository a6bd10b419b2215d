//! Superadiabatic iteration in a constant (bare) reference basis.
//!
//! Frame `j` is the Cartesian trajectory of the `j`-th interaction-picture
//! Hamiltonian `H̃_j = X_j σx + Y_j σy + Z_j σz`. Each frame is diagonalized
//! with parallel-transported eigenvectors, its coupling `K̃_j = i dÃ_j/dt Ã_j†`
//! is evaluated in closed form, and the next frame follows from
//! `H̃_{j+1} = Ã_j† (H̃_j − K̃_j) Ã_j`. The Schrödinger-picture
//! counterdiabatic terms are `H_cd^(j) = B̃_j K̃_j B̃_j†` with
//! `B̃_j = Ã_0 ⋯ Ã_{j−1}`.
//!
//! Derivatives of the angles come from Taylor jets when the protocol has a
//! closed form, and from 4th-order finite differences otherwise.

use std::f64::consts::{FRAC_PI_2, PI, TAU};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::jet::Jet;
use crate::pauli::{
    compose, frame_rotation, to_spherical_with, wrap_angle, CartesianTriple, Matrix2,
    SphericalTriple,
};
use crate::protocol::ControlProtocol;
use crate::sampled::{cumulative_simpson, derivative_segmented, segments, SampledFunction, TimeGrid};

/// Largest supported iteration order.
pub const MAX_ORDER: usize = 8;

/// Smallest grid accepted by [`iterate`].
pub const MIN_ITERATE_SAMPLES: usize = 1001;

/// How the angle derivatives `Θ̇_j`, `Φ̇_j` are obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DerivativeMode {
    /// Exact derivatives propagated through truncated Taylor series.
    Taylor,
    /// Fourth-order finite differences on the grid.
    FiniteDifference,
}

#[derive(Debug, Clone, Copy)]
struct SphericalJets {
    theta: Jet,
    phi: Jet,
    r: Jet,
    eps: Jet,
}

/// Sampled trajectory of one interaction-picture Hamiltonian.
#[derive(Debug, Clone)]
pub struct FrameTrajectory {
    pub order: usize,
    pub grid: TimeGrid,
    pub cartesian: Vec<CartesianTriple>,
    /// `Θ_j`, `Φ_j ∈ [0, 2π)`, `R_j` and the degeneracy flag per sample.
    pub spherical: Vec<SphericalTriple>,
    /// Parallel-transport phase `ε_j`, with `ε_j(0) = 0`.
    pub eps: Vec<f64>,
    pub theta_dot: Vec<f64>,
    pub phi_dot: Vec<f64>,
    /// Indices `i` where the trajectory passes through a pole between
    /// samples `i` and `i + 1` (the azimuth jumps by ±π).
    pub pole_passages: Vec<usize>,
    jets: Option<Vec<SphericalJets>>,
}

impl FrameTrajectory {
    pub fn len(&self) -> usize {
        self.cartesian.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cartesian.is_empty()
    }

    pub fn theta(&self) -> SampledFunction {
        self.sampled(|s| s.theta)
    }

    pub fn phi(&self) -> SampledFunction {
        self.sampled(|s| s.phi)
    }

    pub fn radius(&self) -> SampledFunction {
        self.sampled(|s| s.r)
    }

    fn sampled(&self, f: impl Fn(&SphericalTriple) -> f64) -> SampledFunction {
        SampledFunction { grid: self.grid, values: self.spherical.iter().map(f).collect() }
    }

    /// `Ã_j(t_i)`: columns are `|1̃_j⟩, |2̃_j⟩` in the bare basis.
    pub fn rotation(&self, i: usize) -> Matrix2 {
        frame_rotation(&self.spherical[i], self.eps[i])
    }

    pub fn derivative_mode(&self) -> DerivativeMode {
        if self.jets.is_some() {
            DerivativeMode::Taylor
        } else {
            DerivativeMode::FiniteDifference
        }
    }

    /// Jet length carried by this frame (1 when derivatives are numerical).
    pub fn jet_len(&self) -> usize {
        self.jets.as_ref().map_or(1, |j| j[0].theta.len())
    }
}

/// Frames, couplings and counterdiabatic terms up to order `j_max`.
///
/// `frames`, `couplings` and `frame_products` are expressed in the
/// coordinates of the reference basis `basis` (the bare basis unless
/// [`IterateOptions::basis`] was set). `h0` and `counterdiabatic` are always
/// in the bare basis.
#[derive(Debug, Clone)]
pub struct IterationStack {
    pub grid: TimeGrid,
    pub h0: Vec<CartesianTriple>,
    pub frames: Vec<FrameTrajectory>,
    /// `K̃_j` per sample, `j = 0..=j_max`.
    pub couplings: Vec<Vec<CartesianTriple>>,
    /// `H_cd^(j)` per sample, `j = 0..=j_max`.
    pub counterdiabatic: Vec<Vec<CartesianTriple>>,
    /// `B̃_j = Ã_0 ⋯ Ã_{j−1}` per sample, `j = 0..=j_max + 1`.
    pub frame_products: Vec<Vec<Matrix2>>,
    pub basis: Matrix2,
    pub mode: DerivativeMode,
}

impl IterationStack {
    pub fn j_max(&self) -> usize {
        self.frames.len() - 1
    }

    /// `H₀^(j) = H₀ + H_cd^(j−1)`, with `H₀^(0) = H₀`. Valid for `j ≤ j_max + 1`.
    pub fn modified_hamiltonian(&self, j: usize) -> Result<Vec<CartesianTriple>> {
        if j == 0 {
            return Ok(self.h0.clone());
        }
        let cd = self.counterdiabatic.get(j - 1).ok_or(Error::OrderOutOfRange {
            requested: j,
            available: self.j_max() + 1,
        })?;
        Ok(self.h0.iter().zip(cd).map(|(h, c)| *h + *c).collect())
    }

    /// `B̃_j(t) B̃_j(0)†`, the product of the original-framework frame
    /// operators `A_0 ⋯ A_{j−1}`, which is the identity at `t = 0`.
    pub fn normalized_frame_product(&self, j: usize) -> Result<Vec<Matrix2>> {
        let b = self.frame_products.get(j).ok_or(Error::OrderOutOfRange {
            requested: j,
            available: self.frame_products.len() - 1,
        })?;
        let b0_dag = b[0].adjoint();
        Ok(b.iter().map(|m| *m * b0_dag).collect())
    }
}

/// `ε(t) = −½ ∫₀ᵗ Φ̇ cos Θ dt′` for sampled angles.
///
/// The azimuth may be given wrapped or unwrapped; its derivative is taken by
/// finite differences on the continuous pieces between pole passages.
pub fn parallel_phase(theta: &SampledFunction, phi: &SampledFunction) -> Result<SampledFunction> {
    theta.grid.ensure_same(&phi.grid)?;
    let (phi_u, breaks) = unwrap_azimuth(&phi.values);
    let phi_dot = derivative_segmented(&phi_u, phi.grid.dt(), &breaks);
    let eps = parallel_phase_from_rates(&theta.values, &phi.values, &phi_dot, phi.grid.dt());
    SampledFunction::new(theta.grid, eps)
}

/// Removes `2π` wraps and returns the unwrapped azimuth together with the
/// pole passages (remaining jumps larger than π/2).
pub(crate) fn unwrap_azimuth(phi: &[f64]) -> (Vec<f64>, Vec<usize>) {
    let mut out = Vec::with_capacity(phi.len());
    let mut breaks = Vec::new();
    let Some(&first) = phi.first() else {
        return (out, breaks);
    };
    out.push(first);
    for i in 1..phi.len() {
        let d = wrapped_step(phi[i] - phi[i - 1]);
        if d.abs() > FRAC_PI_2 {
            breaks.push(i - 1);
        }
        out.push(out[i - 1] + d);
    }
    (out, breaks)
}

fn wrapped_step(d: f64) -> f64 {
    d - TAU * (d / TAU).round()
}

/// Quadrature of the parallel-transport phase given `Φ̇`.
///
/// Inside each continuous piece the running integral uses composite Simpson.
/// At a pole passage the azimuth jumps by ±π while the eigenvectors stay
/// continuous; the phase picks up `−½ ΔΦ cos Θ*` with `cos Θ* = ±1` at the
/// pole. The returned phase matches the wrapped azimuth `phi`, i.e. it absorbs
/// `π` for every `2π` removed by wrapping, so that `Ã(Θ, Φ_wrapped, ε)` is
/// continuous in time.
pub(crate) fn parallel_phase_from_rates(
    theta: &[f64],
    phi: &[f64],
    phi_dot: &[f64],
    dt: f64,
) -> Vec<f64> {
    let n = theta.len();
    let integrand: Vec<f64> =
        (0..n).map(|i| -0.5 * phi_dot[i] * theta[i].cos()).collect();
    let (phi_u, breaks) = unwrap_azimuth(phi);
    let mut eps = vec![0.0; n];
    let mut offset = 0.0;
    for (lo, hi) in segments(n, &breaks) {
        if lo > 0 {
            let b = lo - 1;
            let jump = PI.copysign(wrapped_step(phi[lo] - phi[b]));
            let pole = if theta[b].cos() + theta[lo].cos() < 0.0 { -1.0 } else { 1.0 };
            offset = eps[b] + 0.5 * dt * (integrand[b] + integrand[lo]) - 0.5 * jump * pole;
        }
        let part = cumulative_simpson(&integrand[lo..hi], dt);
        for (k, v) in part.into_iter().enumerate() {
            eps[lo + k] = offset + v;
        }
    }
    // eps above is continuous with the unwrapped azimuth; shift by π per 2π of wrap
    for i in 0..n {
        let m = ((phi_u[i] - phi[i]) / TAU).round();
        if m != 0.0 {
            eps[i] -= PI * m;
        }
    }
    eps
}

/// `(sin x, cos x)` after removing whole multiples of π, so that multiples of
/// π/2 in the phase give exact zeros.
fn sin_cos_reduced(x: f64) -> (f64, f64) {
    let k = (x / PI).round();
    let (s, c) = (x - k * PI).sin_cos();
    if k.rem_euclid(2.0) == 1.0 {
        (-s, -c)
    } else {
        (s, c)
    }
}

fn sin_cos_reduced_jet(x: &Jet) -> (Jet, Jet) {
    let k = (x.value() / PI).round();
    let shifted = *x - Jet::constant(k * PI, x.len());
    let (s, c) = shifted.sin_cos();
    if k.rem_euclid(2.0) == 1.0 {
        (-s, -c)
    } else {
        (s, c)
    }
}

/// Closed-form coupling `K̃_j` from the angles and their rates.
pub fn coupling_triple(theta: f64, phi: f64, theta_dot: f64, phi_dot: f64) -> CartesianTriple {
    let (sp, cp) = phi.sin_cos();
    let s2t = (2.0 * theta).sin();
    let st = theta.sin();
    CartesianTriple::new(
        0.5 * (-theta_dot * sp - 0.5 * phi_dot * cp * s2t),
        0.5 * (theta_dot * cp - 0.5 * phi_dot * sp * s2t),
        0.5 * phi_dot * st * st,
    )
}

/// `K̃_j` at every sample of the frame.
pub fn coupling(frame: &FrameTrajectory) -> Vec<CartesianTriple> {
    (0..frame.len())
        .map(|i| {
            let s = &frame.spherical[i];
            coupling_triple(s.theta, s.phi, frame.theta_dot[i], frame.phi_dot[i])
        })
        .collect()
}

/// Cartesian components of the next interaction-picture Hamiltonian.
fn lifted_triple(theta: f64, r: f64, eps: f64, theta_dot: f64, phi_dot: f64) -> CartesianTriple {
    let (s2e, c2e) = sin_cos_reduced(2.0 * eps);
    let st = theta.sin();
    CartesianTriple::new(
        0.5 * (theta_dot * s2e - phi_dot * st * c2e),
        0.5 * (-theta_dot * c2e - phi_dot * st * s2e),
        -r,
    )
}

fn lifted_jets(s: &SphericalJets) -> [Jet; 3] {
    let theta_dot = s.theta.derivative();
    let phi_dot = s.phi.derivative();
    let (s2e, c2e) = sin_cos_reduced_jet(&s.eps.scale(2.0));
    let (st, _) = s.theta.sin_cos();
    let x = (theta_dot * s2e - phi_dot * st * c2e).scale(0.5);
    let y = (-(theta_dot * c2e) - phi_dot * st * s2e).scale(0.5);
    let len = theta_dot.len();
    [x, y, (-s.r).truncate(len)]
}

/// Builds frame `order + 1` from frame `order` (exact lifting formulas).
pub fn lift_frame(frame: &FrameTrajectory) -> Result<FrameTrajectory> {
    let cartesian: Vec<CartesianTriple> = (0..frame.len())
        .map(|i| {
            let s = &frame.spherical[i];
            lifted_triple(s.theta, s.r, frame.eps[i], frame.theta_dot[i], frame.phi_dot[i])
        })
        .collect();
    let jets = match &frame.jets {
        Some(j) if j[0].theta.len() >= 3 => Some(j.iter().map(lifted_jets).collect()),
        _ => None,
    };
    build_frame(frame.order + 1, frame.grid, cartesian, jets)
}

/// Relative distance from a line below which a transverse path counts as
/// lying on it.
const AXIS_TOLERANCE: f64 = 1e-10;

/// Unit direction `(cos, sin)` of a fixed transverse axis, if the transverse
/// part `(X, Y)` of every sample lies on one line through the origin.
///
/// Such frames have a piecewise-constant azimuth that flips by π where the
/// signed transverse component changes sign (a pole passage). Treating them
/// through the signed component keeps `Φ̇ ≡ 0` exact and avoids the
/// square-root kink of `sqrt(X² + Y²)` at the pole.
fn fixed_transverse_axis(cartesian: &[CartesianTriple]) -> Option<(f64, f64)> {
    let scale = cartesian.iter().map(|c| c.norm()).fold(0.0, f64::max);
    let widest = cartesian.iter().max_by(|a, b| a.x.hypot(a.y).total_cmp(&b.x.hypot(b.y)))?;
    let p = widest.x.hypot(widest.y);
    if p == 0.0 {
        return Some((1.0, 0.0));
    }
    let (c, s) = (widest.x / p, widest.y / p);
    let tol = AXIS_TOLERANCE * scale;
    cartesian.iter().all(|v| (v.y * c - v.x * s).abs() <= tol).then_some((c, s))
}

/// Spherical coordinates of a sample on a fixed transverse axis.
fn to_spherical_on_axis(v: &CartesianTriple, (c, s): (f64, f64), prev_phi: f64) -> SphericalTriple {
    let p = v.x * c + v.y * s;
    let r = p.hypot(v.z);
    if r == 0.0 {
        return SphericalTriple { theta: PI, phi: prev_phi, r, gauge_degenerate: true };
    }
    let theta = p.abs().atan2(v.z);
    if p == 0.0 {
        return SphericalTriple { theta, phi: prev_phi, r, gauge_degenerate: true };
    }
    let phi = if p > 0.0 { s.atan2(c) } else { (-s).atan2(-c) };
    SphericalTriple { theta, phi: wrap_angle(phi), r, gauge_degenerate: false }
}

fn spherical_jets(c: &[Jet; 3], s: &SphericalTriple, axis: Option<(f64, f64)>) -> SphericalJets {
    let [x, y, z] = c;
    let p = match axis {
        Some((ca, sa)) => {
            // on the axis the sign of the signed component fixes the side
            let signed = x.scale(ca) + y.scale(sa);
            let positive = (s.phi - sa.atan2(ca)).cos() > 0.0;
            if positive { signed } else { -signed }
        }
        None => {
            let p2 = *x * *x + *y * *y;
            if p2.value() > 0.0 {
                p2.sqrt()
            } else {
                Jet::zeros(p2.len())
            }
        }
    };
    let r2 = p * p + *z * *z;
    let r = if r2.value() > 0.0 { r2.sqrt() } else { Jet::zeros(r2.len()) };
    let theta = if r2.value() > 0.0 {
        Jet::atan2_with_value(&p, z, s.theta)
    } else {
        Jet::constant(s.theta, r2.len())
    };
    let phi = if axis.is_none() && p.value() != 0.0 {
        Jet::atan2_with_value(y, x, s.phi)
    } else {
        Jet::constant(s.phi, p.len())
    };
    SphericalJets { theta, phi, r, eps: Jet::zeros(1) }
}

fn build_frame(
    order: usize,
    grid: TimeGrid,
    cartesian: Vec<CartesianTriple>,
    cart_jets: Option<Vec<[Jet; 3]>>,
) -> Result<FrameTrajectory> {
    let n = cartesian.len();
    if n != grid.len() {
        return Err(Error::GridMismatch(format!("{n} samples on a {}-sample grid", grid.len())));
    }
    if let Some(i) = cartesian.iter().position(|c| !c.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "non-finite Hamiltonian component in frame {order} at t = {}",
            grid.t(i)
        )));
    }
    let axis = fixed_transverse_axis(&cartesian);
    let mut spherical = Vec::with_capacity(n);
    let mut prev_phi = 0.0;
    for c in &cartesian {
        let s = match axis {
            Some(a) => to_spherical_on_axis(c, a, prev_phi),
            None => to_spherical_with(c, prev_phi),
        };
        prev_phi = s.phi;
        spherical.push(s);
    }
    let theta: Vec<f64> = spherical.iter().map(|s| s.theta).collect();
    let phi: Vec<f64> = spherical.iter().map(|s| s.phi).collect();
    let (phi_u, pole_passages) = unwrap_azimuth(&phi);
    let dt = grid.dt();

    let mut jets: Option<Vec<SphericalJets>> = cart_jets
        .map(|cj| cj.iter().zip(&spherical).map(|(c, s)| spherical_jets(c, s, axis)).collect());

    let (theta_dot, phi_dot) = match &jets {
        Some(js) => (
            js.iter().map(|j| j.theta.derivative_value(1)).collect(),
            js.iter().map(|j| j.phi.derivative_value(1)).collect(),
        ),
        None => (
            derivative_segmented(&theta, dt, &pole_passages),
            derivative_segmented(&phi_u, dt, &pole_passages),
        ),
    };
    let eps = parallel_phase_from_rates(&theta, &phi, &phi_dot, dt);

    if let Some(js) = jets.as_mut() {
        for (j, &e) in js.iter_mut().zip(&eps) {
            let (_, cos_theta) = j.theta.sin_cos();
            let rate = (j.phi.derivative() * cos_theta).scale(-0.5);
            j.eps = rate.integrate(e).truncate(j.theta.len());
        }
    }

    Ok(FrameTrajectory {
        order,
        grid,
        cartesian,
        spherical,
        eps,
        theta_dot,
        phi_dot,
        pole_passages,
        jets,
    })
}

/// Frame 0 from the protocol: `X₀ = Ω_R/2`, `Y₀ = 0`, `Z₀ = −Δ/2`.
pub fn base_frame(protocol: &ControlProtocol, jet_len: Option<usize>) -> Result<FrameTrajectory> {
    let h0 = protocol.hamiltonian();
    let jets = jet_len.and_then(|len| protocol.hamiltonian_jets(len));
    build_frame(0, protocol.grid, h0, jets)
}

#[derive(Debug, Clone)]
pub struct IterateOptions {
    /// Forces a derivative mode; by default Taylor jets are used whenever the
    /// protocol has a closed form.
    pub mode: Option<DerivativeMode>,
    /// Constant unitary `u` whose columns define the reference basis
    /// `{u|1⟩, u|2⟩}`. Results are always reported in the bare basis.
    pub basis: Matrix2,
}

impl Default for IterateOptions {
    fn default() -> Self {
        Self { mode: None, basis: Matrix2::identity() }
    }
}

/// Runs the superadiabatic iteration up to order `j_max`.
pub fn iterate(protocol: &ControlProtocol, j_max: usize) -> Result<IterationStack> {
    iterate_with(protocol, j_max, &IterateOptions::default())
}

pub fn iterate_with(
    protocol: &ControlProtocol,
    j_max: usize,
    options: &IterateOptions,
) -> Result<IterationStack> {
    if j_max > MAX_ORDER {
        return Err(Error::InvalidParameter(format!("j_max = {j_max} exceeds {MAX_ORDER}")));
    }
    if protocol.grid.len() < MIN_ITERATE_SAMPLES {
        return Err(Error::TooFewSamples { needed: MIN_ITERATE_SAMPLES, got: protocol.grid.len() });
    }
    let u = options.basis;
    let defect = u.unitarity_defect();
    if defect > 1e-10 {
        return Err(Error::NotUnitary(defect));
    }
    let mode = match options.mode {
        Some(m) => m,
        None if protocol.analytic().is_some() => DerivativeMode::Taylor,
        None => DerivativeMode::FiniteDifference,
    };
    if mode == DerivativeMode::Taylor && protocol.analytic().is_none() {
        return Err(Error::InvalidParameter(
            "Taylor derivatives need a closed-form protocol".into(),
        ));
    }

    let grid = protocol.grid;
    let h0 = protocol.hamiltonian();
    let rot = BasisRotation::new(&u);
    let to_ref = |c: &CartesianTriple| rot.to_reference(c);

    // frame 0 needs j_max + 1 derivatives for K̃_{j_max}
    let frame0 = match mode {
        DerivativeMode::Taylor => {
            let jets = protocol.hamiltonian_jets(j_max + 2).expect("analytic protocol");
            let jets = jets.iter().map(|c| rot.to_reference_jets(c)).collect();
            build_frame(0, grid, h0.iter().map(to_ref).collect(), Some(jets))?
        }
        DerivativeMode::FiniteDifference => {
            build_frame(0, grid, h0.iter().map(to_ref).collect(), None)?
        }
    };

    let mut frames = vec![frame0];
    for _ in 0..j_max {
        let next = lift_frame(frames.last().unwrap())?;
        frames.push(next);
    }

    let n = grid.len();
    let mut frame_products = vec![vec![Matrix2::identity(); n]];
    for f in &frames {
        let prev = frame_products.last().unwrap();
        let next = (0..n).map(|i| prev[i] * f.rotation(i)).collect();
        frame_products.push(next);
    }

    let couplings: Vec<Vec<CartesianTriple>> = frames.iter().map(coupling).collect();
    let counterdiabatic = couplings
        .iter()
        .zip(&frame_products)
        .map(|(k, b)| {
            k.iter()
                .zip(b)
                .map(|(k, b)| rot.to_bare(&(*b * compose(k) * b.adjoint()).to_cartesian()))
                .collect()
        })
        .collect();

    Ok(IterationStack {
        grid,
        h0,
        frames,
        couplings,
        counterdiabatic,
        frame_products,
        basis: u,
        mode,
    })
}

/// Conjugation by a constant unitary, acting on Cartesian triples.
struct BasisRotation {
    u: Matrix2,
    /// `to_ref[a][b]`: component `a` of `u† σ_b u`.
    to_ref: [[f64; 3]; 3],
    trivial: bool,
}

impl BasisRotation {
    fn new(u: &Matrix2) -> Self {
        let trivial = (*u - Matrix2::identity()).frobenius() == 0.0;
        let mut to_ref = [[0.0; 3]; 3];
        for (b, sigma) in [Matrix2::sigma_x(), Matrix2::sigma_y(), Matrix2::sigma_z()]
            .iter()
            .enumerate()
        {
            let c = (u.adjoint() * *sigma * *u).to_cartesian();
            to_ref[0][b] = c.x;
            to_ref[1][b] = c.y;
            to_ref[2][b] = c.z;
        }
        Self { u: *u, to_ref, trivial }
    }

    fn to_reference(&self, c: &CartesianTriple) -> CartesianTriple {
        if self.trivial {
            return *c;
        }
        let v = [c.x, c.y, c.z];
        let row = |a: usize| (0..3).map(|b| self.to_ref[a][b] * v[b]).sum::<f64>();
        CartesianTriple::new(row(0), row(1), row(2))
    }

    fn to_reference_jets(&self, c: &[Jet; 3]) -> [Jet; 3] {
        if self.trivial {
            return *c;
        }
        let row = |a: usize| {
            c[1..]
                .iter()
                .enumerate()
                .fold(c[0].scale(self.to_ref[a][0]), |acc, (k, v)| acc + v.scale(self.to_ref[a][k + 1]))
        };
        [row(0), row(1), row(2)]
    }

    fn to_bare(&self, c: &CartesianTriple) -> CartesianTriple {
        if self.trivial {
            return *c;
        }
        (self.u * compose(c) * self.u.adjoint()).to_cartesian()
    }
}

/// Largest operator-norm difference of `H_cd^(j)` between the bare reference
/// basis and the reference basis `{u|1⟩, u|2⟩}`.
pub fn basis_equivalence_check(protocol: &ControlProtocol, j: usize, u: &Matrix2) -> Result<f64> {
    let defect = u.unitarity_defect();
    if defect > 1e-10 {
        return Err(Error::NotUnitary(defect));
    }
    let reference = iterate(protocol, j)?;
    let rebased =
        iterate_with(protocol, j, &IterateOptions { mode: None, basis: *u })?;
    Ok(reference.counterdiabatic[j]
        .iter()
        .zip(&rebased.counterdiabatic[j])
        .map(|(a, b)| (*a - *b).norm())
        .fold(0.0, f64::max))
}

/// Random-looking but reproducible SU(2) element from Euler angles.
pub fn unitary_from_angles(alpha: f64, beta: f64, gamma: f64) -> Matrix2 {
    let rz = |a: f64| {
        Matrix2::new(
            Complex64::from_polar(1.0, -0.5 * a),
            Complex64::new(0.0, 0.0),
            Complex64::new(0.0, 0.0),
            Complex64::from_polar(1.0, 0.5 * a),
        )
    };
    let (s, c) = (0.5 * beta).sin_cos();
    let ry = Matrix2::new(
        Complex64::new(c, 0.0),
        Complex64::new(-s, 0.0),
        Complex64::new(s, 0.0),
        Complex64::new(c, 0.0),
    );
    rz(alpha) * ry * rz(gamma)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::protocols::{landau_zener, LZParams};

    fn table_protocol() -> ControlProtocol {
        landau_zener(LZParams { chirp: -20.0, rabi: 0.2, duration: 0.2 }, 2001).unwrap()
    }

    #[test]
    fn parallel_phase_examples() {
        let g = TimeGrid::new(1.0, 1001).unwrap();
        let constant = SampledFunction::from_fn(g, |_| 1.3);
        let smooth = SampledFunction::from_fn(g, |t| 0.4 + t * t);
        // Φ constant
        let eps = parallel_phase(&smooth, &constant).unwrap();
        assert!(eps.values.iter().all(|&e| e == 0.0));
        // Θ ≡ π/2
        let equator = SampledFunction::from_fn(g, |_| FRAC_PI_2);
        let eps = parallel_phase(&equator, &smooth).unwrap();
        assert!(eps.max_abs() < 1e-15);
        // Θ ≡ 0, Φ = ωt, including wraps past 2π
        let omega = 9.0;
        let north = SampledFunction::from_fn(g, |_| 0.0);
        let phi = SampledFunction::from_fn(g, |t| wrap_angle(omega * t));
        let eps = parallel_phase(&north, &phi).unwrap();
        for (i, t) in g.times().enumerate() {
            // the phase absorbs −π per 2π removed from the azimuth
            let wraps = ((omega * t) / TAU).floor();
            let expected = -0.5 * omega * t - PI * wraps;
            assert!((eps.values[i] - expected).abs() < 1e-10, "t={t}: {} vs {expected}", eps.values[i]);
        }
    }

    #[test]
    fn reduced_sin_cos_is_exact_at_half_turns() {
        for k in -6..=6 {
            let (s, c) = sin_cos_reduced(k as f64 * PI);
            assert_eq!(s, 0.0);
            assert_eq!(c, if k % 2 == 0 { 1.0 } else { -1.0 });
        }
        let (s, c) = sin_cos_reduced(0.3 + 3.0 * PI);
        assert!((s - (0.3 + 3.0 * PI).sin()).abs() < 1e-15);
        assert!((c - (0.3 + 3.0 * PI).cos()).abs() < 1e-15);
    }

    #[test]
    fn coupling_examples() {
        let k = coupling_triple(0.7, 0.0, 2.5, 0.0);
        assert_eq!(k, CartesianTriple::new(0.0, 1.25, 0.0));
        let k = coupling_triple(0.7, 1.5 * PI, 2.5, 0.0);
        assert!((k.x - 1.25).abs() < 1e-15 && k.y.abs() < 1e-15 && k.z == 0.0);
    }

    /// `θ = a + bt`, `φ = ωt`, and the exact parallel phase.
    fn smooth_angles(t: f64) -> (SphericalTriple, f64) {
        let (a, b, w) = (0.6, 1.7, 2.3);
        let theta = a + b * t;
        let eps = -(w / (2.0 * b)) * (theta.sin() - a.sin());
        (SphericalTriple::new(theta, w * t, 1.0), eps)
    }

    #[test]
    fn coupling_matches_finite_difference_oracle() {
        let h = 1e-4;
        for k in 0..10 {
            let t = 0.1 * k as f64;
            let at = |t: f64| {
                let (s, e) = smooth_angles(t);
                frame_rotation(&s, e)
            };
            // 4th-order central difference of Ã
            let d = (at(t - 2.0 * h) - at(t - h).scale(Complex64::new(8.0, 0.0))
                + at(t + h).scale(Complex64::new(8.0, 0.0))
                - at(t + 2.0 * h))
            .scale(Complex64::new(1.0 / (12.0 * h), 0.0));
            let oracle = (d * at(t).adjoint()).scale(Complex64::i());
            let (s, _) = smooth_angles(t);
            let k = coupling_triple(s.theta, s.phi, 1.7, 2.3);
            assert!((oracle - compose(&k)).op_norm() < 1e-6, "t={t}");
        }
    }

    #[test]
    fn lift_matches_direct_transformation() {
        for k in 0..10 {
            let t = 0.1 * k as f64;
            let (mut s, eps) = smooth_angles(t);
            s.r = 0.8 + t;
            let h = compose(&s.to_cartesian());
            let kk = compose(&coupling_triple(s.theta, s.phi, 1.7, 2.3));
            let a = frame_rotation(&s, eps);
            let direct = (a.adjoint() * (h - kk) * a).to_cartesian();
            let lifted = lifted_triple(s.theta, s.r, eps, 1.7, 2.3);
            assert!(direct.max_abs_diff(&lifted) < 1e-12, "t={t}: {direct:?} vs {lifted:?}");
        }
    }

    #[test]
    fn first_lift_of_planar_sweep() {
        let p = table_protocol();
        let f0 = base_frame(&p, Some(3)).unwrap();
        assert!(f0.eps.iter().all(|&e| e == 0.0));
        let f1 = lift_frame(&f0).unwrap();
        for i in 0..f1.len() {
            let c = f1.cartesian[i];
            assert_eq!(c.x, 0.0);
            assert!((c.y + 0.5 * f0.theta_dot[i]).abs() < 1e-12);
            assert_eq!(c.z, -f0.spherical[i].r);
        }
        let peak = f1.cartesian.iter().map(|c| c.y.abs()).fold(0.0, f64::max);
        assert!((peak - 50.0).abs() < 0.5, "{peak}");
    }

    #[test]
    fn static_hamiltonian_has_no_couplings() {
        let g = TimeGrid::new(1.0, 1001).unwrap();
        let p = ControlProtocol::from_samples(g, vec![0.7; 1001], vec![-0.4; 1001]).unwrap();
        let s = iterate(&p, 3).unwrap();
        assert_eq!(s.mode, DerivativeMode::FiniteDifference);
        for k in &s.couplings {
            assert!(k.iter().all(|c| c.norm() == 0.0));
        }
        let f1 = &s.frames[1];
        assert!(f1.cartesian.iter().all(|c| c.x == 0.0 && c.y == 0.0));
        assert!((f1.cartesian[0].z + s.frames[0].spherical[0].r).abs() < 1e-15);
    }

    #[test]
    fn fixed_axis_detection() {
        let on_line: Vec<_> =
            (0..5).map(|k| CartesianTriple::new(0.6 * (k as f64 - 2.0), 0.8 * (k as f64 - 2.0), 1.0)).collect();
        let (c, s) = fixed_transverse_axis(&on_line).unwrap();
        assert!((c.abs() - 0.6).abs() < 1e-15 && (s.abs() - 0.8).abs() < 1e-15);
        let off_line: Vec<_> = (0..5).map(|k| CartesianTriple::new(1.0, k as f64, 0.0)).collect();
        assert!(fixed_transverse_axis(&off_line).is_none());
        let polar = vec![CartesianTriple::new(0.0, 0.0, 2.0); 3];
        assert_eq!(fixed_transverse_axis(&polar), Some((1.0, 0.0)));
    }

    #[test]
    fn pole_passage_shifts_phase_by_quarter_turn() {
        let s = iterate(&table_protocol(), 2).unwrap();
        let f2 = &s.frames[2];
        assert_eq!(f2.pole_passages, vec![1000]);
        assert_eq!(f2.eps[0], 0.0);
        assert_eq!(f2.eps.last().unwrap().abs(), FRAC_PI_2);
        // Ã stays continuous across the passage
        let jump = (f2.rotation(1001) - f2.rotation(1000)).op_norm();
        let step = (f2.rotation(1000) - f2.rotation(999)).op_norm();
        assert!(jump < 10.0 * step + 1e-12, "{jump} vs {step}");
    }

    #[test]
    fn rejects_invalid_requests() {
        let p = table_protocol();
        assert!(matches!(iterate(&p, MAX_ORDER + 1), Err(Error::InvalidParameter(_))));
        let coarse = landau_zener(LZParams { chirp: -20.0, rabi: 0.2, duration: 0.2 }, 501).unwrap();
        assert!(matches!(iterate(&coarse, 1), Err(Error::TooFewSamples { .. })));
        let opts = IterateOptions { mode: None, basis: Matrix2::sigma_x().scale(Complex64::new(2.0, 0.0)) };
        assert!(matches!(iterate_with(&p, 1, &opts), Err(Error::NotUnitary(_))));
        let opts = IterateOptions { mode: Some(DerivativeMode::Taylor), basis: Matrix2::identity() };
        assert!(iterate_with(&p.sampled_only(), 1, &opts).is_err());
        assert_eq!(basis_equivalence_check(&p, 2, &Matrix2::identity()).unwrap(), 0.0);
    }
}
