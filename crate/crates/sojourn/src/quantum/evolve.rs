//! Free and full time evolution on the grid.
//!
//! Free evolution is exact: a single spectral phase for any time step. Full
//! evolution is symmetric (Strang) splitting, second-order in the step and
//! exactly norm-preserving; the kinetic half is exact, so outside the
//! potential support a split step is exact free motion.

use std::sync::Arc;

use num_complex::Complex64;

use crate::potential::Potential;

use super::grid::Grid;
use super::state::WaveState;
use super::QuantumError;

/// Mass allowed within the edge monitoring band before a run aborts.
pub const WRAPAROUND_TOL: f64 = 1e-8;
/// Width of the edge band as a fraction of the box.
pub const EDGE_FRACTION: f64 = 0.02;

/// Exact free propagation by time `t` (any sign).
pub fn free_evolve(state: &WaveState, t: f64) -> WaveState {
    let table: Vec<Complex64> = state
        .grid
        .wavenumbers()
        .iter()
        .map(|&k| Complex64::from_polar(1.0, -t * 0.5 * k * k))
        .collect();
    let mut amps = state.amps.clone();
    state.grid.apply_spectral(&mut amps, &table);
    WaveState {
        grid: state.grid.clone(),
        amps,
        window: state.window,
    }
}

/// Reusable split-step machinery for one step size and potential.
pub struct SplitStep {
    grid: Arc<Grid>,
    half_potential: Vec<Complex64>,
    kinetic: Vec<Complex64>,
    pub dt: f64,
}

impl SplitStep {
    pub fn new(grid: &Arc<Grid>, potential: &dyn Potential, dt: f64) -> Self {
        let half_potential = grid
            .positions()
            .iter()
            .map(|&x| Complex64::from_polar(1.0, -0.5 * dt * potential.value(&[x])))
            .collect();
        let kinetic = grid
            .wavenumbers()
            .iter()
            .map(|&k| Complex64::from_polar(1.0, -dt * 0.5 * k * k))
            .collect();
        Self {
            grid: grid.clone(),
            half_potential,
            kinetic,
            dt,
        }
    }

    /// One Strang step `exp(-i dt V/2) exp(-i dt T) exp(-i dt V/2)`.
    pub fn step(&self, amps: &mut [Complex64]) {
        for (a, h) in amps.iter_mut().zip(&self.half_potential) {
            *a *= h;
        }
        self.grid.apply_spectral(amps, &self.kinetic);
        for (a, h) in amps.iter_mut().zip(&self.half_potential) {
            *a *= h;
        }
    }
}

/// Full evolution by time `t` under kinetic energy plus the potential.
///
/// The step count is chosen so the actual step never exceeds `dt` in
/// magnitude. Aborts with a diagnostic when probability reaches the box
/// edges (periodic wraparound would silently corrupt everything after).
pub fn full_evolve(
    state: &WaveState,
    t: f64,
    potential: &dyn Potential,
    dt: f64,
) -> Result<WaveState, QuantumError> {
    if t == 0.0 {
        return Ok(state.clone());
    }
    if !(dt > 0.0) {
        return Err(QuantumError::InvalidInput(format!(
            "split step must be positive, got {dt}"
        )));
    }
    let steps = (t.abs() / dt).ceil().max(1.0) as usize;
    let signed_dt = t / steps as f64;
    let stepper = SplitStep::new(&state.grid, potential, signed_dt);
    let mut out = state.clone();
    for i in 0..steps {
        stepper.step(&mut out.amps);
        if i % 64 == 63 {
            check_wraparound(&out)?;
        }
    }
    check_wraparound(&out)?;
    Ok(out)
}

pub fn check_wraparound(state: &WaveState) -> Result<(), QuantumError> {
    let mass = state.boundary_mass(EDGE_FRACTION);
    if mass > WRAPAROUND_TOL {
        return Err(QuantumError::Wraparound { boundary_mass: mass });
    }
    Ok(())
}
