//! Dilation-averaged shape functions of a region.
//!
//! For a bounded open region containing the origin, the renormalized average
//! of the indicator along the dilation orbit of a point,
//!
//! ```text
//! R(x) = int_1^inf dmu/mu 1_Sigma(mu x) + int_0^1 dmu/mu [1_Sigma(mu x) - 1],
//! ```
//!
//! exists for every `x != 0`; its even part `G(x) = (R(x) + R(-x)) / 2`
//! satisfies `G(x) = G(x/|x|) - ln|x|` and carries the whole shape dependence
//! of the symmetrized time delay. For a star-shaped region both reduce to
//! logarithms of the support function, which this module uses as a fast path
//! and the tests use as a cross-check against the generic quadrature.
//!
//! The integrand is piecewise constant in `mu` for fixed `x`, so quadrature
//! reduces to locating the membership jumps along the ray: a logarithmic scan
//! brackets them and bisection refines each to relative accuracy 1e-12.

use rayon::prelude::*;

use super::star::{Interpolation, StarRegion};
use super::{GeometryError, Region};

/// Controls for the ray-scan quadrature.
#[derive(Debug, Clone, Copy)]
pub struct QuadratureSettings {
    /// Requested absolute error of the averaged integrals.
    pub tolerance: f64,
    /// Scan density for bracketing membership jumps (per decade in `mu`).
    pub points_per_decade: usize,
    /// Lowest scanned dilation, as a fraction of the bounding radius.
    pub min_scan_fraction: f64,
    /// Relative accuracy of the bisection locating each jump.
    pub bisection_rel: f64,
}

impl Default for QuadratureSettings {
    fn default() -> Self {
        Self {
            tolerance: 1e-9,
            points_per_decade: 1024,
            min_scan_fraction: 1e-9,
            bisection_rel: 1e-12,
        }
    }
}

/// Maximal intervals of `t > 0` with `t * dir` inside the region.
///
/// `dir` must be unit length. Intervals are returned in increasing order; a
/// leading interval starting at exactly `0.0` means the ray leaves the origin
/// inside the region (always the case for valid regions).
pub fn ray_membership_intervals(
    region: &Region,
    dir: &[f64],
    settings: &QuadratureSettings,
) -> Result<Vec<(f64, f64)>, GeometryError> {
    if let Region::Star(star) = region {
        return Ok(vec![(0.0, star.support_unit(dir))]);
    }
    let inside = |t: f64| {
        let point: Vec<f64> = dir.iter().map(|c| c * t).collect();
        region.contains(&point)
    };
    let t_hi = region.bounding_radius();
    let mut t_lo = t_hi * settings.min_scan_fraction;
    // The origin is interior, so membership holds for small enough t.
    let mut probes = 0;
    while !inside(t_lo) {
        t_lo *= 1e-3;
        probes += 1;
        if probes > 4 {
            return Err(GeometryError::OriginNeighborhoodNotFound);
        }
    }

    let decades = (t_hi / t_lo).log10();
    let n = ((decades * settings.points_per_decade as f64).ceil() as usize).max(16);
    let log_lo = t_lo.ln();
    let step = (t_hi.ln() - log_lo) / n as f64;

    let refine = |mut a: f64, mut b: f64, a_inside: bool| -> f64 {
        while b - a > settings.bisection_rel * b {
            let mid = 0.5 * (a + b);
            if inside(mid) == a_inside {
                a = mid;
            } else {
                b = mid;
            }
        }
        0.5 * (a + b)
    };

    let mut intervals = Vec::new();
    let mut current_start = Some(0.0); // inside from the origin
    let mut prev_t = t_lo;
    let mut prev_inside = true;
    for i in 1..=n {
        let t = (log_lo + step * i as f64).exp();
        let now_inside = inside(t);
        if now_inside != prev_inside {
            let jump = refine(prev_t, t, prev_inside);
            if prev_inside {
                intervals.push((current_start.take().unwrap(), jump));
            } else {
                current_start = Some(jump);
            }
        }
        prev_t = t;
        prev_inside = now_inside;
    }
    if let Some(start) = current_start {
        // still inside at the bounding radius cannot happen (clipped indicator),
        // but close the interval defensively at t_hi
        intervals.push((start, if prev_inside { t_hi } else { prev_t }));
    }
    Ok(intervals)
}

fn unit_direction(x: &[f64]) -> Result<(Vec<f64>, f64), GeometryError> {
    let norm = x.iter().map(|c| c * c).sum::<f64>().sqrt();
    if norm == 0.0 {
        return Err(GeometryError::UndefinedAtOrigin);
    }
    Ok((x.iter().map(|c| c / norm).collect(), norm))
}

/// Renormalized dilation average `R(x)` by jump-located quadrature.
///
/// Works for every region kind; used directly for indicator regions and as
/// the cross-check for the star-region closed form.
pub fn r_sigma_quadrature(
    region: &Region,
    x: &[f64],
    settings: &QuadratureSettings,
) -> Result<f64, GeometryError> {
    let (dir, t0) = unit_direction(x)?;
    let intervals = ray_membership_intervals(region, &dir, settings)?;

    let jumps = intervals.len() * 2;
    let achieved = jumps as f64 * 2.0 * settings.bisection_rel;
    if achieved > settings.tolerance {
        return Err(GeometryError::QuadratureNotConverged {
            achieved,
            requested: settings.tolerance,
        });
    }

    let mut total = 0.0;
    // membership above t0: + ln(b/a) per covered piece
    for &(a, b) in &intervals {
        let lo = a.max(t0);
        if b > lo {
            total += (b / lo).ln();
        }
    }
    // gaps below t0: - ln(b/a) per uncovered piece
    let mut last_end: f64 = 0.0;
    for &(a, b) in &intervals {
        let hi = a.min(t0);
        if hi > last_end && last_end > 0.0 {
            total -= (hi / last_end).ln();
        }
        last_end = b;
    }
    if t0 > last_end && last_end > 0.0 {
        total -= (t0 / last_end).ln();
    }
    Ok(total)
}

/// Renormalized dilation average `R(x)`.
///
/// Star regions use the closed form `ln l(x/|x|) - ln|x|`; indicator regions
/// fall back to quadrature.
pub fn r_sigma(region: &Region, x: &[f64], settings: &QuadratureSettings) -> Result<f64, GeometryError> {
    match region {
        Region::Star(star) => {
            let (dir, norm) = unit_direction(x)?;
            Ok(star.support_unit(&dir).ln() - norm.ln())
        }
        Region::Indicator(_) => r_sigma_quadrature(region, x, settings),
    }
}

/// Even part `G(x) = (R(x) + R(-x)) / 2`.
pub fn g_sigma(region: &Region, x: &[f64], settings: &QuadratureSettings) -> Result<f64, GeometryError> {
    let minus: Vec<f64> = x.iter().map(|c| -c).collect();
    Ok(0.5 * (r_sigma(region, x, settings)? + r_sigma(region, &minus, settings)?))
}

/// Asymmetry defect `M(x) = |x| int_0^inf dmu [1(mu x) - 1(-mu x)]`.
///
/// Depends only on the direction of `x`; vanishes identically exactly when
/// the region's dilation averages are symmetric (the condition required for
/// the symmetrized delay to converge).
pub fn asymmetry_defect(
    region: &Region,
    x: &[f64],
    settings: &QuadratureSettings,
) -> Result<f64, GeometryError> {
    let (dir, _) = unit_direction(x)?;
    let measure = |intervals: &[(f64, f64)]| -> f64 {
        intervals.iter().map(|&(a, b)| b - a).sum()
    };
    let plus = ray_membership_intervals(region, &dir, settings)?;
    let neg: Vec<f64> = dir.iter().map(|c| -c).collect();
    let minus = ray_membership_intervals(region, &neg, settings)?;
    Ok(measure(&plus) - measure(&minus))
}

/// Result of testing the shape-symmetry condition on a direction grid.
#[derive(Debug, Clone)]
pub struct SymmetryReport {
    pub holds: bool,
    pub worst_defect: f64,
    pub worst_direction: Vec<f64>,
}

/// Check the dilation-symmetry condition: `max |M| <= tol` over the grid.
pub fn check_assumption_symmetry(
    region: &Region,
    directions: &[Vec<f64>],
    tol: f64,
    settings: &QuadratureSettings,
) -> Result<SymmetryReport, GeometryError> {
    if directions.is_empty() {
        return Err(GeometryError::EmptyDirectionGrid);
    }
    let mut worst = 0.0f64;
    let mut worst_dir = directions[0].clone();
    for dir in directions {
        let m = asymmetry_defect(region, dir, settings)?;
        if m.abs() > worst.abs() {
            worst = m;
            worst_dir = dir.clone();
        }
    }
    Ok(SymmetryReport {
        holds: worst.abs() <= tol,
        worst_defect: worst,
        worst_direction: worst_dir,
    })
}

/// Uniform grid of unit vectors (2 signs in d=1, `n` angles in d=2).
pub fn direction_grid(dim: usize, n: usize) -> Vec<Vec<f64>> {
    match dim {
        1 => vec![vec![1.0], vec![-1.0]],
        2 => (0..n)
            .map(|i| {
                let theta = 2.0 * std::f64::consts::PI * i as f64 / n as f64;
                vec![theta.cos(), theta.sin()]
            })
            .collect(),
        _ => panic!("direction grids exist for d in {{1, 2}}"),
    }
}

/// The symmetric star-shaped region with the same dilation averages:
/// support function `exp(G(omega))` on the sphere.
pub fn symmetrize(
    region: &Region,
    n_grid: usize,
    settings: &QuadratureSettings,
) -> Result<StarRegion, GeometryError> {
    match region.dim() {
        1 => {
            let g = g_sigma(region, &[1.0], settings)?;
            let l = g.exp();
            StarRegion::interval(l, l)
        }
        2 => {
            let n = if n_grid % 2 == 0 { n_grid } else { n_grid + 1 };
            let half: Vec<f64> = (0..n / 2)
                .into_par_iter()
                .map(|i| {
                    let theta = 2.0 * std::f64::consts::PI * i as f64 / n as f64;
                    let dir = [theta.cos(), theta.sin()];
                    g_sigma(region, &dir, settings).map(f64::exp)
                })
                .collect::<Result<_, _>>()?;
            // antipodal halves share values, so the result is exactly symmetric
            let mut values = half.clone();
            values.extend_from_slice(&half);
            StarRegion::from_angle_table(values, Interpolation::Linear)
        }
        d => match region {
            Region::Star(star) if star.table_values().is_none() => Ok(star.clone()),
            _ => Err(GeometryError::UnsupportedDimension {
                dim: d,
                context: "symmetrization beyond d=2 is available for balls only",
            }),
        },
    }
}

/// Cached sphere-grid evaluations of the even shape function `G`.
#[derive(Debug, Clone)]
pub struct ShapeAverages {
    pub directions: Vec<Vec<f64>>,
    pub r_values: Vec<f64>,
    pub g_values: Vec<f64>,
    pub tolerance: f64,
}

impl ShapeAverages {
    pub fn new(region: &Region, n_grid: usize, settings: &QuadratureSettings) -> Result<Self, GeometryError> {
        let directions = direction_grid(region.dim(), n_grid);
        let r_values: Vec<f64> = directions
            .iter()
            .map(|d| r_sigma(region, d, settings))
            .collect::<Result<_, _>>()?;
        let n = directions.len();
        let g_values = (0..n)
            .map(|i| 0.5 * (r_values[i] + r_values[(i + n / 2) % n]))
            .collect();
        Ok(Self {
            directions,
            r_values,
            g_values,
            tolerance: settings.tolerance,
        })
    }

    /// `G` at an arbitrary nonzero point via `G(x) = G(x/|x|) - ln|x|`.
    pub fn g_at(&self, x: &[f64]) -> Result<f64, GeometryError> {
        let (dir, norm) = unit_direction(x)?;
        Ok(self.g_unit(&dir) - norm.ln())
    }

    /// `G` on the sphere, interpolated from the cached grid.
    pub fn g_unit(&self, dir: &[f64]) -> f64 {
        match dir.len() {
            1 => {
                if dir[0] >= 0.0 {
                    self.g_values[0]
                } else {
                    self.g_values[1]
                }
            }
            2 => {
                let n = self.directions.len();
                let two_pi = 2.0 * std::f64::consts::PI;
                let theta = dir[1].atan2(dir[0]).rem_euclid(two_pi);
                let u = theta / two_pi * n as f64;
                let i0 = (u.floor() as usize) % n;
                let w = u - u.floor();
                self.g_values[i0] * (1.0 - w) + self.g_values[(i0 + 1) % n] * w
            }
            _ => self.g_values[0],
        }
    }

    /// Largest `|G(omega) - G(-omega)|` over the cached grid.
    pub fn evenness_defect(&self) -> f64 {
        let n = self.g_values.len();
        (0..n)
            .map(|i| (self.g_values[i] - self.g_values[(i + n / 2) % n]).abs())
            .fold(0.0, f64::max)
    }
}
