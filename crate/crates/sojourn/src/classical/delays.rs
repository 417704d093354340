//! Sojourn times and time delays of a classical scattering trajectory.
//!
//! For a dilated region containing the interaction support, three sojourn
//! times exist: the scattered particle's, the incoming free particle's and
//! the outgoing free particle's. Their combinations give the usual delay
//! `tau_in = T - T0`, the symmetrized delay `tau = T - (T0 + T0')/2`, and
//! the split `tau = tau1 + tau2` where only `tau1` survives as `r` grows
//! and only free trajectories enter `tau2`.

use crate::convergence::{extrapolate_limit, ConvergenceVerdict, FitModel};
use crate::geometry::Region;

use super::crossing::{crossing_times, Crossing, CrossingOptions, FreeLine, Path};
use super::trajectory::{full_time_reversal, Trajectory};
use super::ClassicalError;

/// One sampled row of the delay curve for a single trajectory.
#[derive(Debug, Clone, Copy)]
pub struct DelayRow {
    pub r: f64,
    /// Sojourn time of the scattered particle.
    pub t_full: f64,
    /// Sojourn time of the incoming free particle.
    pub t0_in: f64,
    /// Sojourn time of the outgoing free particle.
    pub t0_out: f64,
    pub tau_in: f64,
    pub tau: f64,
    pub tau1: f64,
    pub tau2: f64,
}

/// Scattering quantities of a trajectory relative to one dilation `r`.
#[derive(Debug, Clone)]
pub struct ScatteringData {
    pub r: f64,
    pub p_minus: [f64; 2],
    pub p_plus: [f64; 2],
    /// Asymptotic speed `sqrt(2E)`.
    pub speed: f64,
    /// The particle enters at `-t_minus` and leaves at `t_plus`.
    pub t_minus: f64,
    pub t_plus: f64,
    pub x_minus: [f64; 2],
    pub x_plus: [f64; 2],
    pub x_tilde_minus: [f64; 2],
    pub x_tilde_plus: [f64; 2],
}

fn dot(a: &[f64; 2], b: &[f64; 2]) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

/// The incoming and outgoing free asymptotes of a trajectory.
///
/// Both tails of the integrated path lie outside the interaction support, so
/// the lines through the end nodes with the end momenta are exact.
pub fn asymptote_lines(trajectory: &Trajectory) -> (FreeLine, FreeLine) {
    let (t_lo, p_lo, t_hi, p_hi) = trajectory.linear_tails();
    let incoming = FreeLine::new(trajectory.dim(), trajectory.position(t_lo), p_lo, t_lo);
    let outgoing = FreeLine::new(trajectory.dim(), trajectory.position(t_hi), p_hi, t_hi);
    (incoming, outgoing)
}

fn require_region_covers_support(
    region: &Region,
    r: f64,
    support_radius: f64,
) -> Result<(), ClassicalError> {
    // margin absorbs support-table interpolation error
    if support_radius > 0.0 && !region.dilation_contains_ball(r, 1.5 * support_radius) {
        return Err(ClassicalError::RegionTooSmall {
            r,
            needed: 1.5 * support_radius,
        });
    }
    Ok(())
}

/// The three sojourn times `(T_r, T0_r, T0'_r)` for the dilated region.
pub fn sojourn_times(
    trajectory: &Trajectory,
    region: &Region,
    r: f64,
    support_radius: f64,
    opts: &CrossingOptions,
) -> Result<(f64, f64, f64), ClassicalError> {
    require_region_covers_support(region, r, support_radius)?;
    let full = crossing_times(trajectory, region, r, opts)?;
    let (incoming, outgoing) = asymptote_lines(trajectory);
    let c_in = crossing_times(&incoming, region, r, opts)?;
    let c_out = crossing_times(&outgoing, region, r, opts)?;
    Ok((full.sojourn(), c_in.sojourn(), c_out.sojourn()))
}

/// Full delay row for the dilated region, including the `tau1 + tau2` split.
pub fn time_delays(
    trajectory: &Trajectory,
    region: &Region,
    r: f64,
    support_radius: f64,
    opts: &CrossingOptions,
) -> Result<(DelayRow, ScatteringData), ClassicalError> {
    require_region_covers_support(region, r, support_radius)?;
    let full: Crossing = crossing_times(trajectory, region, r, opts)?;
    let (incoming, outgoing) = asymptote_lines(trajectory);
    let c_in = crossing_times(&incoming, region, r, opts)?;
    let c_out = crossing_times(&outgoing, region, r, opts)?;

    let p_minus = trajectory.p_minus();
    let p_plus = trajectory.p_plus();
    let p_sq = 0.5 * (dot(&p_minus, &p_minus) + dot(&p_plus, &p_plus));

    let t_minus = -full.t_entry;
    let t_plus = full.t_exit;
    let x_minus = trajectory.position(full.t_entry);
    let x_plus = trajectory.position(full.t_exit);
    let x_tilde_minus = [
        x_minus[0] + t_minus * p_minus[0],
        x_minus[1] + t_minus * p_minus[1],
    ];
    let x_tilde_plus = [
        x_plus[0] - t_plus * p_plus[0],
        x_plus[1] - t_plus * p_plus[1],
    ];

    // exit of the incoming free particle, entrance of the outgoing one
    let x0_plus = incoming.position(c_in.t_exit);
    let x0p_minus = outgoing.position(c_out.t_entry);

    let t_full = full.sojourn();
    let t0_in = c_in.sojourn();
    let t0_out = c_out.sojourn();

    let tau_in = t_full - t0_in;
    let tau = t_full - 0.5 * (t0_in + t0_out);
    let tau1 = (dot(&p_minus, &x_tilde_minus) - dot(&p_plus, &x_tilde_plus)) / p_sq;
    let tau2 = (dot(&p_plus, &x_plus) - dot(&p_minus, &x_minus) - dot(&p_minus, &x0_plus)
        + dot(&p_plus, &x0p_minus))
        / (2.0 * p_sq);

    let row = DelayRow {
        r,
        t_full,
        t0_in,
        t0_out,
        tau_in,
        tau,
        tau1,
        tau2,
    };
    let data = ScatteringData {
        r,
        p_minus,
        p_plus,
        speed: trajectory.speed(),
        t_minus,
        t_plus,
        x_minus,
        x_plus,
        x_tilde_minus,
        x_tilde_plus,
    };
    Ok((row, data))
}

/// Delay rows over an increasing grid of dilations.
pub fn delay_curve(
    trajectory: &Trajectory,
    region: &Region,
    r_grid: &[f64],
    support_radius: f64,
    opts: &CrossingOptions,
) -> Result<Vec<DelayRow>, ClassicalError> {
    r_grid
        .iter()
        .map(|&r| time_delays(trajectory, region, r, support_radius, opts).map(|(row, _)| row))
        .collect()
}

/// Extrapolated limit of `tau1` over the dilation grid: the classical
/// stationary value of the time delay.
pub fn classical_ew_delay(
    trajectory: &Trajectory,
    region: &Region,
    r_grid: &[f64],
    support_radius: f64,
    opts: &CrossingOptions,
    gap_tol: f64,
) -> Result<ConvergenceVerdict, ClassicalError> {
    let rows = delay_curve(trajectory, region, r_grid, support_radius, opts)?;
    let samples: Vec<(f64, f64)> = rows.iter().map(|row| (row.r, row.tau1)).collect();
    extrapolate_limit(&samples, FitModel::COverR, gap_tol)
        .map_err(|e| ClassicalError::InvalidInput(e.to_string()))
}

/// Delay row of the time-reversed trajectory, for reversal-invariance checks.
pub fn reversed_delay_row(
    trajectory: &Trajectory,
    region: &Region,
    r: f64,
    support_radius: f64,
    opts: &CrossingOptions,
) -> Result<DelayRow, ClassicalError> {
    let reversed = full_time_reversal(trajectory);
    time_delays(&reversed, region, r, support_radius, opts).map(|(row, _)| row)
}
