//! Sampled control protocols `Ω_R(t)`, `Δ(t)`.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::jet::Jet;
use crate::pauli::CartesianTriple;
use crate::sampled::{SampledFunction, TimeGrid};

/// Closed-form controls that can supply Taylor jets at any time.
pub trait AnalyticControls: Send + Sync {
    /// `(Ω_R, Δ)` jets of length `len` around `t`.
    fn jets(&self, t: f64, len: usize) -> (Jet, Jet);
}

/// Rabi frequency and detuning sampled on a uniform grid, defining
/// `H₀(t) = (Ω_R/2) σx − (Δ/2) σz`.
#[derive(Clone)]
pub struct ControlProtocol {
    pub grid: TimeGrid,
    pub omega_r: Vec<f64>,
    pub delta: Vec<f64>,
    analytic: Option<Arc<dyn AnalyticControls>>,
}

impl fmt::Debug for ControlProtocol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ControlProtocol")
            .field("grid", &self.grid)
            .field("analytic", &self.analytic.is_some())
            .finish_non_exhaustive()
    }
}

impl ControlProtocol {
    pub fn from_samples(grid: TimeGrid, omega_r: Vec<f64>, delta: Vec<f64>) -> Result<Self> {
        if omega_r.len() != grid.len() || delta.len() != grid.len() {
            return Err(Error::GridMismatch(format!(
                "controls have {} / {} samples, grid has {}",
                omega_r.len(),
                delta.len(),
                grid.len()
            )));
        }
        if omega_r.iter().chain(&delta).any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("non-finite control sample".into()));
        }
        Ok(Self { grid, omega_r, delta, analytic: None })
    }

    /// Samples closed-form controls and keeps them for exact differentiation.
    pub fn from_analytic(grid: TimeGrid, controls: Arc<dyn AnalyticControls>) -> Self {
        let (omega_r, delta) = grid
            .times()
            .map(|t| {
                let (o, d) = controls.jets(t, 1);
                (o.value(), d.value())
            })
            .unzip();
        Self { grid, omega_r, delta, analytic: Some(controls) }
    }

    pub fn analytic(&self) -> Option<&Arc<dyn AnalyticControls>> {
        self.analytic.as_ref()
    }

    /// Drops the closed form, forcing finite-difference derivatives.
    pub fn sampled_only(&self) -> Self {
        Self { analytic: None, ..self.clone() }
    }

    pub fn hamiltonian(&self) -> Vec<CartesianTriple> {
        self.omega_r
            .iter()
            .zip(&self.delta)
            .map(|(&o, &d)| CartesianTriple::from_controls(o, d))
            .collect()
    }

    pub fn omega_r_fn(&self) -> SampledFunction {
        SampledFunction { grid: self.grid, values: self.omega_r.clone() }
    }

    pub fn delta_fn(&self) -> SampledFunction {
        SampledFunction { grid: self.grid, values: self.delta.clone() }
    }

    /// Frame-0 Cartesian jets `(Ω_R/2, 0, −Δ/2)` at every sample.
    pub(crate) fn hamiltonian_jets(&self, len: usize) -> Option<Vec<[Jet; 3]>> {
        let a = self.analytic.as_ref()?;
        Some(
            self.grid
                .times()
                .map(|t| {
                    let (o, d) = a.jets(t, len);
                    [o.scale(0.5), Jet::zeros(len), d.scale(-0.5)]
                })
                .collect(),
        )
    }
}
