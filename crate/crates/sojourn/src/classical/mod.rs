//! Classical scattering: trajectories, region crossings, and time delays.

mod crossing;
mod delays;
mod trajectory;

pub use crossing::{
    crossing_times, Crossing, CrossingMode, CrossingOptions, FreeLine, Path,
};
pub use delays::{
    asymptote_lines, classical_ew_delay, delay_curve, reversed_delay_row, sojourn_times,
    time_delays, DelayRow, ScatteringData,
};
pub use trajectory::{
    full_time_reversal, integrate_trajectory, verlet_endpoint, PathNode, Trajectory,
    TrajectoryOptions,
};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum ClassicalError {
    #[error("non-scattering trajectory: no escape before the step budget ran out")]
    NonScattering,
    #[error("energy drift {drift:.3e} exceeds tolerance {tolerance:.3e}")]
    EnergyDrift { drift: f64, tolerance: f64 },
    #[error("asymptotic momenta not settled: tail deviation {deviation:.3e}")]
    AsymptoticsNotSettled { deviation: f64 },
    #[error("path never enters the dilated region (no crossing)")]
    NoCrossing,
    #[error("multiple crossings ({entries} entries, {exits} exits) of a region declared convex")]
    MultipleCrossings { entries: usize, exits: usize },
    #[error("crossing scan window starts or ends inside the region")]
    CrossingWindow,
    #[error("dilation r = {r} too small: the region must cover the ball of radius {needed}")]
    RegionTooSmall { r: f64, needed: f64 },
    #[error("integrator failure: {0}")]
    Integrator(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
}
