//! Classical scattering trajectories in a compactly supported potential.
//!
//! A trajectory is integrated adaptively only while it can interact;
//! outside the escape radius the motion is exactly free and the stored path
//! is extended analytically. Dense output between stored nodes uses quintic
//! Hermite interpolation in position (the acceleration is known at the
//! nodes) and cubic Hermite in momentum.

use crate::ode::{integrate_adaptive, OdeOptions, OdeStats, OdeStep};
use crate::potential::Potential;

use super::ClassicalError;

/// Phase-space sample along the path. Only the first `dim` components of the
/// vectors are meaningful; d=1 runs keep the second component at zero.
#[derive(Debug, Clone, Copy)]
pub struct PathNode {
    pub t: f64,
    pub x: [f64; 2],
    pub p: [f64; 2],
    /// Acceleration `-grad V(x)` at the node.
    pub a: [f64; 2],
}

#[derive(Debug, Clone, Copy)]
pub struct TrajectoryOptions {
    /// Integration stops once `|x|` exceeds this radius moving outward.
    /// Must be at least twice the potential support radius.
    pub escape_radius: f64,
    /// Hard time limit before the orbit is declared non-scattering.
    pub max_time: f64,
    /// Allowed relative energy drift along the integrated path.
    pub energy_tol: f64,
    /// Allowed spread of the momentum over the free tail nodes.
    pub asymptotic_tol: f64,
    pub ode: OdeOptions,
}

impl TrajectoryOptions {
    pub fn for_potential(p: &dyn Potential) -> Self {
        let rho = p.support_radius().max(1.0);
        Self {
            escape_radius: 2.5 * rho,
            max_time: 1e4,
            energy_tol: 1e-8,
            asymptotic_tol: 1e-9,
            ode: OdeOptions {
                rtol: 1e-12,
                atol: 1e-13,
                h_initial: 1e-3,
                h_max: 0.05,
                max_steps: 2_000_000,
            },
        }
    }
}

/// Integrated scattering trajectory with dense output and exact free
/// extension beyond both ends.
#[derive(Debug, Clone)]
pub struct Trajectory {
    dim: usize,
    /// Nodes in increasing time; the first and last lie outside the escape
    /// radius.
    nodes: Vec<PathNode>,
    energy: f64,
    stats: OdeStats,
}

impl Trajectory {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn energy(&self) -> f64 {
        self.energy
    }

    pub fn stats(&self) -> OdeStats {
        self.stats
    }

    pub fn nodes(&self) -> &[PathNode] {
        &self.nodes
    }

    /// Time span covered by integration; the path is exactly free outside.
    pub fn integrated_span(&self) -> (f64, f64) {
        (self.nodes[0].t, self.nodes[self.nodes.len() - 1].t)
    }

    /// Incoming asymptotic momentum.
    pub fn p_minus(&self) -> [f64; 2] {
        self.nodes[0].p
    }

    /// Outgoing asymptotic momentum.
    pub fn p_plus(&self) -> [f64; 2] {
        self.nodes[self.nodes.len() - 1].p
    }

    /// Asymptotic speed `sqrt(2E)` from the mean of the two end momenta.
    pub fn speed(&self) -> f64 {
        let pm = self.p_minus();
        let pp = self.p_plus();
        let m2 = pm[0] * pm[0] + pm[1] * pm[1];
        let p2 = pp[0] * pp[0] + pp[1] * pp[1];
        (0.5 * (m2 + p2)).sqrt()
    }

    pub fn position(&self, t: f64) -> [f64; 2] {
        let first = &self.nodes[0];
        if t <= first.t {
            return [
                first.x[0] + first.p[0] * (t - first.t),
                first.x[1] + first.p[1] * (t - first.t),
            ];
        }
        let last = &self.nodes[self.nodes.len() - 1];
        if t >= last.t {
            return [
                last.x[0] + last.p[0] * (t - last.t),
                last.x[1] + last.p[1] * (t - last.t),
            ];
        }
        let idx = self.bracket(t);
        let (n0, n1) = (&self.nodes[idx], &self.nodes[idx + 1]);
        let h = n1.t - n0.t;
        let u = (t - n0.t) / h;
        let mut out = [0.0; 2];
        for c in 0..2 {
            out[c] = quintic_hermite(
                u,
                n0.x[c],
                h * n0.p[c],
                h * h * n0.a[c],
                n1.x[c],
                h * n1.p[c],
                h * h * n1.a[c],
            );
        }
        out
    }

    pub fn momentum(&self, t: f64) -> [f64; 2] {
        let first = &self.nodes[0];
        if t <= first.t {
            return first.p;
        }
        let last = &self.nodes[self.nodes.len() - 1];
        if t >= last.t {
            return last.p;
        }
        let idx = self.bracket(t);
        let (n0, n1) = (&self.nodes[idx], &self.nodes[idx + 1]);
        let h = n1.t - n0.t;
        let u = (t - n0.t) / h;
        let mut out = [0.0; 2];
        for c in 0..2 {
            out[c] = cubic_hermite(u, n0.p[c], h * n0.a[c], n1.p[c], h * n1.a[c]);
        }
        out
    }

    fn bracket(&self, t: f64) -> usize {
        let mut lo = 0;
        let mut hi = self.nodes.len() - 1;
        while hi - lo > 1 {
            let mid = (lo + hi) / 2;
            if self.nodes[mid].t <= t {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        lo
    }

    /// Largest relative energy deviation over the stored nodes; requires the
    /// potential used for integration.
    pub fn energy_drift(&self, potential: &dyn Potential) -> f64 {
        let e0 = self.energy;
        self.nodes
            .iter()
            .map(|n| {
                let x = &n.x[..self.dim];
                let kin = 0.5 * (n.p[0] * n.p[0] + n.p[1] * n.p[1]);
                ((kin + potential.value(x)) - e0).abs() / e0.abs()
            })
            .fold(0.0, f64::max)
    }
}

fn quintic_hermite(u: f64, f0: f64, d0: f64, s0: f64, f1: f64, d1: f64, s1: f64) -> f64 {
    let u2 = u * u;
    let u3 = u2 * u;
    let u4 = u3 * u;
    let u5 = u4 * u;
    let h00 = 1.0 - 10.0 * u3 + 15.0 * u4 - 6.0 * u5;
    let h10 = u - 6.0 * u3 + 8.0 * u4 - 3.0 * u5;
    let h20 = 0.5 * (u2 - 3.0 * u3 + 3.0 * u4 - u5);
    let h01 = 10.0 * u3 - 15.0 * u4 + 6.0 * u5;
    let h11 = -4.0 * u3 + 7.0 * u4 - 3.0 * u5;
    let h21 = 0.5 * (u3 - 2.0 * u4 + u5);
    f0 * h00 + d0 * h10 + s0 * h20 + f1 * h01 + d1 * h11 + s1 * h21
}

fn cubic_hermite(u: f64, f0: f64, d0: f64, f1: f64, d1: f64) -> f64 {
    let u2 = u * u;
    let u3 = u2 * u;
    f0 * (2.0 * u3 - 3.0 * u2 + 1.0)
        + d0 * (u3 - 2.0 * u2 + u)
        + f1 * (-2.0 * u3 + 3.0 * u2)
        + d1 * (u3 - u2)
}

/// Integrate the scattering trajectory through `(x0, p0)` at `t = 0`.
pub fn integrate_trajectory(
    potential: &dyn Potential,
    x0: &[f64],
    p0: &[f64],
    opts: &TrajectoryOptions,
) -> Result<Trajectory, ClassicalError> {
    let dim = x0.len();
    if dim == 0 || dim > 2 || p0.len() != dim {
        return Err(ClassicalError::InvalidInput(format!(
            "classical runs support d in {{1, 2}}, got x0 of dim {dim}, p0 of dim {}",
            p0.len()
        )));
    }
    let rho = potential.support_radius();
    if opts.escape_radius < 2.0 * rho {
        return Err(ClassicalError::InvalidInput(format!(
            "escape radius {} must be at least twice the support radius {rho}",
            opts.escape_radius
        )));
    }
    let energy = 0.5 * p0.iter().map(|c| c * c).sum::<f64>() + potential.value(x0);
    if !(energy > 0.0) {
        return Err(ClassicalError::InvalidInput(format!(
            "scattering requires positive energy, got E = {energy}"
        )));
    }

    let mut y0 = [0.0; 4];
    for c in 0..dim {
        y0[c] = x0[c];
        y0[2 + c] = p0[c];
    }
    let deriv = move |_t: f64, y: &[f64; 4]| -> [f64; 4] {
        let mut g = [0.0; 2];
        potential.gradient(&y[0..dim], &mut g[0..dim]);
        [y[2], y[3], -g[0], -g[1]]
    };
    // receding means x.p >= 0 along forward time, x.p <= 0 along backward time
    let escaped = |y: &[f64; 4], time_sign: f64| -> bool {
        let r2 = y[0] * y[0] + y[1] * y[1];
        let outward = time_sign * (y[0] * y[2] + y[1] * y[3]);
        r2 >= opts.escape_radius * opts.escape_radius && outward >= 0.0
    };

    let run = |t_end: f64| -> Result<(Vec<OdeStep<4>>, OdeStats), ClassicalError> {
        let sign = t_end.signum();
        let (nodes, stats) =
            integrate_adaptive(&deriv, 0.0, y0, t_end, &opts.ode, |_t, y| escaped(y, sign))
                .map_err(|e| ClassicalError::Integrator(e.to_string()))?;
        if !escaped(&nodes.last().unwrap().y, sign) {
            return Err(ClassicalError::NonScattering);
        }
        Ok((nodes, stats))
    };

    let (forward, stats_f) = run(opts.max_time)?;
    let (backward, stats_b) = run(-opts.max_time)?;

    let to_node = |s: &OdeStep<4>| PathNode {
        t: s.t,
        x: [s.y[0], s.y[1]],
        p: [s.y[2], s.y[3]],
        a: [s.dy[2], s.dy[3]],
    };
    let mut nodes: Vec<PathNode> = backward.iter().skip(1).rev().map(to_node).collect();
    nodes.extend(forward.iter().map(to_node));

    let trajectory = Trajectory {
        dim,
        nodes,
        energy,
        stats: OdeStats {
            accepted: stats_f.accepted + stats_b.accepted,
            rejected: stats_f.rejected + stats_b.rejected,
        },
    };

    let drift = trajectory.energy_drift(potential);
    if drift > opts.energy_tol {
        return Err(ClassicalError::EnergyDrift {
            drift,
            tolerance: opts.energy_tol,
        });
    }

    // asymptotic momenta must have settled over the free tails
    for tail in [true, false] {
        let iter: Box<dyn Iterator<Item = &PathNode>> = if tail {
            Box::new(trajectory.nodes.iter().rev())
        } else {
            Box::new(trajectory.nodes.iter())
        };
        let mut reference: Option<[f64; 2]> = None;
        for node in iter {
            let r = (node.x[0] * node.x[0] + node.x[1] * node.x[1]).sqrt();
            if r < rho {
                break;
            }
            match reference {
                None => reference = Some(node.p),
                Some(p_ref) => {
                    let dev = ((node.p[0] - p_ref[0]).powi(2) + (node.p[1] - p_ref[1]).powi(2))
                        .sqrt();
                    if dev > opts.asymptotic_tol {
                        return Err(ClassicalError::AsymptoticsNotSettled { deviation: dev });
                    }
                }
            }
        }
    }

    Ok(trajectory)
}

/// Full time reversal: the path `t -> (x(-t), -p(-t))`.
///
/// Sample-exact involution; applying it twice returns the original nodes.
pub fn full_time_reversal(trajectory: &Trajectory) -> Trajectory {
    let nodes = trajectory
        .nodes
        .iter()
        .rev()
        .map(|n| PathNode {
            t: -n.t,
            x: n.x,
            p: [-n.p[0], -n.p[1]],
            a: n.a,
        })
        .collect();
    Trajectory {
        dim: trajectory.dim,
        nodes,
        energy: trajectory.energy,
        stats: trajectory.stats,
    }
}

/// Fixed-step velocity Verlet, used as an independent cross-check of the
/// adaptive integrator.
pub fn verlet_endpoint(
    potential: &dyn Potential,
    x0: &[f64],
    p0: &[f64],
    dt: f64,
    t_end: f64,
) -> ([f64; 2], [f64; 2]) {
    let dim = x0.len();
    let mut x = [0.0; 2];
    let mut p = [0.0; 2];
    x[..dim].copy_from_slice(x0);
    p[..dim].copy_from_slice(p0);
    let mut g = [0.0; 2];
    potential.gradient(&x[..dim], &mut g[..dim]);
    let mut a = [-g[0], -g[1]];
    let steps = (t_end / dt).round() as usize;
    for _ in 0..steps {
        for c in 0..2 {
            x[c] += p[c] * dt + 0.5 * a[c] * dt * dt;
        }
        potential.gradient(&x[..dim], &mut g[..dim]);
        let a_new = [-g[0], -g[1]];
        for c in 0..2 {
            p[c] += 0.5 * (a[c] + a_new[c]) * dt;
        }
        a = a_new;
    }
    (x, p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potential::{BumpPotential, FreePotential};

    #[test]
    fn free_motion_is_a_straight_line() {
        let potential = FreePotential;
        let opts = TrajectoryOptions {
            escape_radius: 12.0,
            ..TrajectoryOptions::for_potential(&potential)
        };
        let traj = integrate_trajectory(&potential, &[-10.0, 0.0], &[1.0, 0.0], &opts).unwrap();
        assert_eq!(traj.p_minus(), [1.0, 0.0]);
        assert_eq!(traj.p_plus(), [1.0, 0.0]);
        let x = traj.position(25.0);
        assert!((x[0] - 15.0).abs() < 1e-9 && x[1].abs() < 1e-12);
        let x = traj.position(-7.0);
        assert!((x[0] + 17.0).abs() < 1e-9);
    }

    #[test]
    fn head_on_backscattering_below_barrier() {
        // 1-D radial turning point: E < V0 on a head-on line reverses p
        let potential = BumpPotential::new(3.0, 2.0);
        let opts = TrajectoryOptions::for_potential(&potential);
        let traj = integrate_trajectory(&potential, &[-8.0, 0.0], &[2.0, 0.0], &opts).unwrap();
        let pp = traj.p_plus();
        assert!((pp[0] + 2.0).abs() < 1e-8, "p_plus = {pp:?}");
        assert!(pp[1].abs() < 1e-10);
    }

    #[test]
    fn large_impact_parameter_misses_support() {
        let potential = BumpPotential::new(3.0, 2.0);
        let opts = TrajectoryOptions::for_potential(&potential);
        let traj = integrate_trajectory(&potential, &[-8.0, 2.5], &[2.0, 0.0], &opts).unwrap();
        let pp = traj.p_plus();
        assert_eq!(pp, [2.0, 0.0]);
    }

    #[test]
    fn energy_conserved_through_scattering() {
        let potential = BumpPotential::new(3.0, 2.0);
        let opts = TrajectoryOptions::for_potential(&potential);
        let traj = integrate_trajectory(&potential, &[-8.0, 0.8], &[2.0, 0.0], &opts).unwrap();
        assert!(traj.energy_drift(&potential) < 1e-10);
        let pm = traj.p_minus();
        let pp = traj.p_plus();
        let before = (pm[0] * pm[0] + pm[1] * pm[1]).sqrt();
        let after = (pp[0] * pp[0] + pp[1] * pp[1]).sqrt();
        assert!((before - after).abs() / before < 1e-8);
        // actual deflection happened
        assert!(pp[1].abs() > 1e-3);
    }

    #[test]
    fn trapped_start_is_rejected() {
        // negative total energy inside an attractive well cannot scatter
        let potential = BumpPotential::new(-4.0, 2.0);
        let opts = TrajectoryOptions::for_potential(&potential);
        let err = integrate_trajectory(&potential, &[0.0, 0.0], &[0.5, 0.0], &opts).unwrap_err();
        assert!(matches!(err, ClassicalError::InvalidInput(_)));
    }

    #[test]
    fn reversal_is_a_sample_exact_involution() {
        let potential = BumpPotential::new(3.0, 2.0);
        let opts = TrajectoryOptions::for_potential(&potential);
        let traj = integrate_trajectory(&potential, &[-8.0, 0.8], &[2.0, 0.0], &opts).unwrap();
        let rev = full_time_reversal(&traj);
        // reversal swaps the asymptotic momenta and negates them
        let pm = traj.p_minus();
        let rev_pp = rev.p_plus();
        assert_eq!(rev_pp, [-pm[0], -pm[1]]);
        let twice = full_time_reversal(&rev);
        for (a, b) in traj.nodes().iter().zip(twice.nodes()) {
            assert_eq!(a.t, b.t);
            assert_eq!(a.x, b.x);
            assert_eq!(a.p, b.p);
        }
    }

    #[test]
    fn adaptive_and_verlet_agree() {
        let potential = BumpPotential::new(3.0, 2.0);
        let opts = TrajectoryOptions::for_potential(&potential);
        let traj = integrate_trajectory(&potential, &[-6.0, 0.8], &[2.0, 0.0], &opts).unwrap();
        let (x_v, p_v) = verlet_endpoint(&potential, &[-6.0, 0.8], &[2.0, 0.0], 1e-4, 6.0);
        let x_a = traj.position(6.0);
        let p_a = traj.momentum(6.0);
        for c in 0..2 {
            assert!((x_v[c] - x_a[c]).abs() < 1e-6, "x mismatch {x_v:?} vs {x_a:?}");
            assert!((p_v[c] - p_a[c]).abs() < 1e-6);
        }
    }

    #[test]
    fn dense_output_matches_nodes_inside_interaction() {
        let potential = BumpPotential::new(-2.0, 2.0);
        let opts = TrajectoryOptions::for_potential(&potential);
        let traj = integrate_trajectory(&potential, &[-8.0, 0.5], &[2.0, 0.0], &opts).unwrap();
        // halfway between two interior nodes, dense output conserves energy
        let (t0, t1) = traj.integrated_span();
        let mut t = t0;
        while t < t1 {
            let x = traj.position(t);
            let p = traj.momentum(t);
            let e = 0.5 * (p[0] * p[0] + p[1] * p[1]) + potential.value(&x);
            // interpolation floor: the bump's high derivatives near the edge
            // of the support limit the Hermite accuracy between nodes
            assert!(
                (e - traj.energy()).abs() < 1e-6,
                "dense-output energy off at t={t}: {:.3e}",
                (e - traj.energy()).abs()
            );
            t += 0.037;
        }
    }
}
