//! Superadiabatic iterations and counterdiabatic shortcuts for two-level
//! systems.
//!
//! The crate builds the sequence of interaction-picture Hamiltonians of a
//! driven two-level system, the counterdiabatic terms `H_cd^(j)` that make
//! each superadiabatic approximation exact, and the tools to check when the
//! resulting Hamiltonians `H₀^(j) = H₀ + H_cd^(j−1)` are genuine shortcuts to
//! adiabaticity. Units: ħ = 1, frequencies in rad/μs, times in μs.

pub mod engine;
pub mod error;
pub mod jet;
pub mod pauli;
pub mod propagator;
pub mod protocol;
pub mod protocols;
pub mod sampled;
pub mod scenario;

pub use engine::{
    basis_equivalence_check, coupling, iterate, iterate_with, lift_frame, parallel_phase,
    DerivativeMode, FrameTrajectory, IterateOptions, IterationStack,
};
pub use error::{Error, Result};
pub use pauli::{
    compose, eigensystem, frame_rotation, to_spherical, CartesianTriple, Matrix2, SphericalTriple,
    Spinor,
};
pub use propagator::{
    adiabatic_overlap, populations, propagate, superadiabatic_approximation, PopulationTrace,
    StateTrajectory,
};
pub use protocol::{AnalyticControls, ControlProtocol};
pub use protocols::{
    adiabaticity_margin, invariance_check, invariant_matrix, invariant_to_controls, landau_zener,
    lz_feasibility, region_onset, region_scan, shortcut_bc_check, AnalysisReport, InvariantAnsatz,
    LZParams,
};
pub use sampled::{derivative, SampledFunction, TimeGrid};
