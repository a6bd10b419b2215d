//! Fixed-step propagation of the time-dependent Schrödinger equation and the
//! superadiabatic approximate evolutions.

use num_complex::Complex64;

use crate::engine::{FrameTrajectory, IterationStack};
use crate::error::{Error, Result};
use crate::pauli::{compose, eigensystem, CartesianTriple, Matrix2, Spinor};
use crate::sampled::{cubic_midpoint, cumulative_simpson, SampledFunction, TimeGrid};

/// Norm drift above which a propagation is reported as under-resolved.
pub const NORM_DRIFT_WARNING: f64 = 1e-7;

const MIN_PROPAGATION_SAMPLES: usize = 1001;

#[derive(Debug, Clone)]
pub struct StateTrajectory {
    pub grid: TimeGrid,
    pub states: Vec<Spinor>,
}

impl StateTrajectory {
    pub fn last(&self) -> &Spinor {
        self.states.last().expect("non-empty trajectory")
    }

    /// `max_t |‖ψ(t)‖ − 1|`
    pub fn max_norm_drift(&self) -> f64 {
        self.states.iter().map(|s| (s.norm() - 1.0).abs()).fold(0.0, f64::max)
    }

    /// `max_t ‖ψ(t) − φ(t)‖`
    pub fn max_distance(&self, other: &StateTrajectory) -> Result<f64> {
        self.grid.ensure_same(&other.grid)?;
        Ok(self
            .states
            .iter()
            .zip(&other.states)
            .map(|(a, b)| a.distance(b))
            .fold(0.0, f64::max))
    }
}

#[derive(Debug, Clone)]
pub struct PopulationTrace {
    pub p1: SampledFunction,
    pub p2: SampledFunction,
}

impl PopulationTrace {
    pub fn final_p1(&self) -> f64 {
        *self.p1.values.last().unwrap()
    }

    /// Largest deviation of either population from its initial value.
    pub fn max_variation(&self) -> f64 {
        let var = |f: &SampledFunction| {
            let v0 = f.values[0];
            f.values.iter().map(|v| (v - v0).abs()).fold(0.0, f64::max)
        };
        var(&self.p1).max(var(&self.p2))
    }
}

fn rhs(h: &Matrix2, psi: &Spinor) -> Spinor {
    h.apply(psi).scale(-Complex64::i())
}

fn axpy(psi: &Spinor, a: f64, k: &Spinor) -> Spinor {
    Spinor::new(psi.c1 + k.c1 * a, psi.c2 + k.c2 * a)
}

/// Integrates `i dψ/dt = H(t) ψ` with classical RK4, one step per grid
/// interval; the mid-step Hamiltonian is the cubic interpolant of the
/// Cartesian components.
pub fn propagate(grid: &TimeGrid, h: &[CartesianTriple], psi0: &Spinor) -> Result<StateTrajectory> {
    if h.len() != grid.len() {
        return Err(Error::GridMismatch(format!(
            "{} Hamiltonian samples on a {}-sample grid",
            h.len(),
            grid.len()
        )));
    }
    if grid.len() < MIN_PROPAGATION_SAMPLES {
        return Err(Error::TooFewSamples { needed: MIN_PROPAGATION_SAMPLES, got: grid.len() });
    }
    let norm = psi0.norm();
    if (norm - 1.0).abs() > 1e-9 {
        return Err(Error::NotNormalized(norm));
    }
    let xs: Vec<f64> = h.iter().map(|c| c.x).collect();
    let ys: Vec<f64> = h.iter().map(|c| c.y).collect();
    let zs: Vec<f64> = h.iter().map(|c| c.z).collect();
    let dt = grid.dt();
    let mut states = Vec::with_capacity(grid.len());
    let mut psi = *psi0;
    states.push(psi);
    for i in 0..grid.len() - 1 {
        let h0 = compose(&h[i]);
        let hm = compose(&CartesianTriple::new(
            cubic_midpoint(&xs, i),
            cubic_midpoint(&ys, i),
            cubic_midpoint(&zs, i),
        ));
        let h1 = compose(&h[i + 1]);
        let k1 = rhs(&h0, &psi);
        let k2 = rhs(&hm, &axpy(&psi, 0.5 * dt, &k1));
        let k3 = rhs(&hm, &axpy(&psi, 0.5 * dt, &k2));
        let k4 = rhs(&h1, &axpy(&psi, dt, &k3));
        psi = Spinor::new(
            psi.c1 + (k1.c1 + 2.0 * k2.c1 + 2.0 * k3.c1 + k4.c1) * (dt / 6.0),
            psi.c2 + (k1.c2 + 2.0 * k2.c2 + 2.0 * k3.c2 + k4.c2) * (dt / 6.0),
        );
        states.push(psi);
    }
    let traj = StateTrajectory { grid: *grid, states };
    let drift = traj.max_norm_drift();
    if drift > NORM_DRIFT_WARNING {
        log::warn!("norm drift {drift:e} exceeds {NORM_DRIFT_WARNING:e}; refine the grid");
    }
    Ok(traj)
}

/// Bare-basis populations `|c1|²`, `|c2|²`.
pub fn populations(traj: &StateTrajectory) -> PopulationTrace {
    let p1 = traj.states.iter().map(|s| s.c1.norm_sqr()).collect();
    let p2 = traj.states.iter().map(|s| s.c2.norm_sqr()).collect();
    PopulationTrace {
        p1: SampledFunction { grid: traj.grid, values: p1 },
        p2: SampledFunction { grid: traj.grid, values: p2 },
    }
}

/// Populations `|⟨ñ(t)|ψ(t)⟩|²` in the instantaneous eigenbasis of a frame
/// (for frame 0: the adiabatic basis of `H₀`).
pub fn adiabatic_overlap(traj: &StateTrajectory, frame: &FrameTrajectory) -> Result<PopulationTrace> {
    traj.grid.ensure_same(&frame.grid)?;
    let (p1, p2) = traj
        .states
        .iter()
        .zip(frame.spherical.iter().zip(&frame.eps))
        .map(|(psi, (s, &eps))| {
            let (one, two, _, _) = eigensystem(s, eps);
            (one.inner(psi).norm_sqr(), two.inner(psi).norm_sqr())
        })
        .unzip();
    Ok(PopulationTrace {
        p1: SampledFunction { grid: traj.grid, values: p1 },
        p2: SampledFunction { grid: traj.grid, values: p2 },
    })
}

/// `ψ₀^(j)(t) = B_j(t) U_j(t) ψ₀`, the approximate evolution of the `j`-th
/// interaction picture mapped back to the bare basis.
///
/// `U_j` is diagonal with phases `exp(∓i ∫ R_{j−1})`. In the constant-basis
/// frames `B̃_j(0)` differs from the identity, so the initial state is first
/// expressed in the `j`-th picture as `B̃_j(0)† ψ₀`.
pub fn superadiabatic_approximation(
    stack: &IterationStack,
    j: usize,
    psi0: &Spinor,
) -> Result<StateTrajectory> {
    let available = stack.j_max() + 1;
    if j == 0 || j > available {
        return Err(Error::OrderOutOfRange { requested: j, available });
    }
    let norm = psi0.norm();
    if (norm - 1.0).abs() > 1e-9 {
        return Err(Error::NotNormalized(norm));
    }
    let frame = &stack.frames[j - 1];
    let b = &stack.frame_products[j];
    let radius: Vec<f64> = frame.spherical.iter().map(|s| s.r).collect();
    let phase = cumulative_simpson(&radius, stack.grid.dt());

    let u = stack.basis;
    let psi_j0 = b[0].adjoint().apply(&u.adjoint().apply(psi0));
    let states = (0..stack.grid.len())
        .map(|i| {
            // E1 = −R, E2 = +R
            let evolved = Spinor::new(
                psi_j0.c1 * Complex64::from_polar(1.0, phase[i]),
                psi_j0.c2 * Complex64::from_polar(1.0, -phase[i]),
            );
            u.apply(&b[i].apply(&evolved))
        })
        .collect();
    Ok(StateTrajectory { grid: stack.grid, states })
}
