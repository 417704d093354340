//! 1-D quantum scattering: grid states, propagation, wave and scattering
//! operators, sojourn integrals, and stationary delay formulas.

mod evolve;
mod grid;
mod operators;
mod smatrix;
mod sojourn;
mod state;

pub use evolve::{check_wraparound, free_evolve, full_evolve, SplitStep, EDGE_FRACTION, WRAPAROUND_TOL};
pub use grid::Grid;
pub use operators::{
    a0_commutator_expectation, a0_expectation, apply_a0, apply_inverse_momentum,
    conjugation_identity_residual, energy_distribution_distance, full_time_reversal_q,
    g_commutator_expectation, iq2_commutator_expectation, scattering_operator,
    scattering_operator_inverse, wave_operator, LimitSettings, WaveOperatorSign,
};
pub use smatrix::{
    spectral_transform, stationary_ew_delay, transfer_matrix, SMatrix1D, SpectralAmplitudes,
};
pub use sojourn::{
    free_mass_series, proposition_asympt_check, quantum_time_delays, region_mask, sojourn_time,
    tau_free_from_series, translation_covariance_check, AsymptoticsRecord, EvolutionKind,
    MassSeries, QuantumDelayReport, QuantumDelayRow, RegionMask, SojournSettings,
};
pub use state::{prepare_state, smooth_bump, smooth_step, EnergyWindow, WaveState};

use thiserror::Error;

use crate::geometry::GeometryError;

#[derive(Debug, Error)]
pub enum QuantumError {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("energy window rejected: {0}")]
    WindowOutOfRange(String),
    #[error("energy window retains almost no spectral mass (fraction {retained:.3e})")]
    EmptySpectralMass { retained: f64 },
    #[error("state not admissible: {context} is {mass:.3e} (limit 1e-10)")]
    SpectralLeak { mass: f64, context: &'static str },
    #[error("wavepacket reached the box edge: boundary mass {boundary_mass:.3e}")]
    Wraparound { boundary_mass: f64 },
    #[error("operator limit not converged before horizon {horizon} (residual {residual:.3e})")]
    LimitNotConverged { residual: f64, horizon: f64 },
    #[error("operator is not an isometry: norm defect {defect:.3e}")]
    IsometryDefect { defect: f64 },
    #[error("scattering matrix unitarity defect {defect:.3e} at energy {energy}")]
    UnitarityDefect { defect: f64, energy: f64 },
    #[error("sojourn integrand has not decayed at the window ends ({integrand:.3e})")]
    TailNotConverged { integrand: f64 },
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}
