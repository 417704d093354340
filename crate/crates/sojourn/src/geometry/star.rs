//! Star-shaped regions described by a support function on the unit sphere.

use serde::{Deserialize, Serialize};

use super::GeometryError;

/// Interpolation rule for d=2 angle tables.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Interpolation {
    #[default]
    Linear,
    /// Periodic Catmull-Rom through the table values.
    CubicSpline,
}

#[derive(Debug, Clone, PartialEq)]
enum SupportData {
    /// d = 1: distances to the boundary at omega = +1 and omega = -1.
    Pair { plus: f64, minus: f64 },
    /// d = 2: values on the uniform angle grid `theta_i = 2 pi i / n`.
    Table { values: Vec<f64>, mode: Interpolation },
    /// Ball of the given radius, any dimension.
    Constant { radius: f64 },
}

/// Bounded open star-shaped region containing the origin.
///
/// The region is `{ t * omega : 0 <= t < support(omega) }`; dilation by `r`
/// scales the support function, so all queries take the unscaled region plus
/// an explicit dilation factor where needed.
#[derive(Debug, Clone, PartialEq)]
pub struct StarRegion {
    dim: usize,
    support: SupportData,
    /// Set when a d=2 table looks rough on its grid scale (large slope in
    /// consecutive values); such tables are evaluated anyway.
    pub lipschitz_warning: bool,
}

impl StarRegion {
    /// Open ball of the given radius in any dimension.
    pub fn ball(dim: usize, radius: f64) -> Self {
        assert!(dim >= 1 && radius > 0.0);
        Self {
            dim,
            support: SupportData::Constant { radius },
            lipschitz_warning: false,
        }
    }

    /// d=1 region `(-minus, plus)`.
    pub fn interval(minus: f64, plus: f64) -> Result<Self, GeometryError> {
        if !(minus > 0.0 && plus > 0.0) {
            return Err(GeometryError::NonPositiveSupport);
        }
        Ok(Self {
            dim: 1,
            support: SupportData::Pair { plus, minus },
            lipschitz_warning: false,
        })
    }

    /// d=2 region from support values on the uniform angle grid.
    pub fn from_angle_table(values: Vec<f64>, mode: Interpolation) -> Result<Self, GeometryError> {
        if values.len() < 4 {
            return Err(GeometryError::DirectionCoverage(format!(
                "angle table needs at least 4 samples, got {}",
                values.len()
            )));
        }
        if values.iter().any(|&v| !(v > 0.0) || !v.is_finite()) {
            return Err(GeometryError::NonPositiveSupport);
        }
        let n = values.len();
        let dtheta = 2.0 * std::f64::consts::PI / n as f64;
        let mut rough = false;
        for i in 0..n {
            let a = values[i];
            let b = values[(i + 1) % n];
            // slope large compared with the local value: likely not Lipschitz
            if (b - a).abs() / dtheta > 20.0 * a.min(b) {
                rough = true;
            }
        }
        Ok(Self {
            dim: 2,
            support: SupportData::Table { values, mode },
            lipschitz_warning: rough,
        })
    }

    /// d=2 region sampled from a support function of the polar angle.
    pub fn from_support_fn(
        n: usize,
        mode: Interpolation,
        f: impl Fn(f64) -> f64,
    ) -> Result<Self, GeometryError> {
        let values = (0..n)
            .map(|i| f(2.0 * std::f64::consts::PI * i as f64 / n as f64))
            .collect();
        Self::from_angle_table(values, mode)
    }

    /// Axis-aligned ellipse with the given semi-axes, sampled on `n` angles.
    pub fn ellipse(a: f64, b: f64, n: usize) -> Result<Self, GeometryError> {
        if !(a > 0.0 && b > 0.0) {
            return Err(GeometryError::NonPositiveSupport);
        }
        Self::from_support_fn(n, Interpolation::Linear, |theta| {
            let (s, c) = theta.sin_cos();
            1.0 / ((c / a).powi(2) + (s / b).powi(2)).sqrt()
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Support value for a direction assumed to be unit length.
    pub fn support_unit(&self, dir: &[f64]) -> f64 {
        match &self.support {
            SupportData::Pair { plus, minus } => {
                if dir[0] >= 0.0 {
                    *plus
                } else {
                    *minus
                }
            }
            SupportData::Table { values, mode } => {
                let theta = dir[1].atan2(dir[0]);
                self.support_at_angle_raw(values, *mode, theta)
            }
            SupportData::Constant { radius } => *radius,
        }
    }

    /// Support value at a polar angle (d=2 only; ball accepted too).
    pub fn support_at_angle(&self, theta: f64) -> f64 {
        match &self.support {
            SupportData::Table { values, mode } => self.support_at_angle_raw(values, *mode, theta),
            SupportData::Constant { radius } => *radius,
            SupportData::Pair { plus, minus } => {
                if theta.cos() >= 0.0 {
                    *plus
                } else {
                    *minus
                }
            }
        }
    }

    fn support_at_angle_raw(&self, values: &[f64], mode: Interpolation, theta: f64) -> f64 {
        let n = values.len();
        let two_pi = 2.0 * std::f64::consts::PI;
        let mut u = theta.rem_euclid(two_pi) / two_pi * n as f64;
        if u >= n as f64 {
            u -= n as f64;
        }
        let i0 = u.floor() as usize % n;
        let w = u - u.floor();
        match mode {
            Interpolation::Linear => {
                let a = values[i0];
                let b = values[(i0 + 1) % n];
                a + (b - a) * w
            }
            Interpolation::CubicSpline => {
                let pm1 = values[(i0 + n - 1) % n];
                let p0 = values[i0];
                let p1 = values[(i0 + 1) % n];
                let p2 = values[(i0 + 2) % n];
                // Catmull-Rom
                let w2 = w * w;
                let w3 = w2 * w;
                0.5 * ((2.0 * p0)
                    + (p1 - pm1) * w
                    + (2.0 * pm1 - 5.0 * p0 + 4.0 * p1 - p2) * w2
                    + (3.0 * (p0 - p1) + p2 - pm1) * w3)
            }
        }
    }

    /// Distance from the origin to the boundary in the direction `theta`.
    ///
    /// `theta` must be a unit vector (within 1e-12).
    pub fn boundary_distance(&self, theta: &[f64]) -> Result<f64, GeometryError> {
        if theta.len() != self.dim {
            return Err(GeometryError::InvalidParameter(format!(
                "direction has dimension {}, region has {}",
                theta.len(),
                self.dim
            )));
        }
        let norm = theta.iter().map(|c| c * c).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > 1e-12 {
            return Err(GeometryError::NonUnitDirection { norm });
        }
        Ok(self.support_unit(theta))
    }

    /// Membership test for the dilated region `Sigma_r`.
    pub fn contains_scaled(&self, x: &[f64], r: f64) -> bool {
        let norm = x.iter().map(|c| c * c).sum::<f64>().sqrt();
        if norm == 0.0 {
            return true;
        }
        let dir: Vec<f64> = x.iter().map(|c| c / norm).collect();
        norm < r * self.support_unit(&dir)
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        self.contains_scaled(x, 1.0)
    }

    pub fn min_support(&self) -> f64 {
        match &self.support {
            SupportData::Pair { plus, minus } => plus.min(*minus),
            SupportData::Table { values, .. } => values.iter().cloned().fold(f64::INFINITY, f64::min),
            SupportData::Constant { radius } => *radius,
        }
    }

    pub fn max_support(&self) -> f64 {
        match &self.support {
            SupportData::Pair { plus, minus } => plus.max(*minus),
            SupportData::Table { values, .. } => values.iter().cloned().fold(0.0, f64::max),
            SupportData::Constant { radius } => *radius,
        }
    }

    /// Raw table values for serialization (d=2 tables only).
    pub fn table_values(&self) -> Option<&[f64]> {
        match &self.support {
            SupportData::Table { values, .. } => Some(values),
            _ => None,
        }
    }

    /// Support values at omega = +1 and omega = -1 (d=1 only).
    pub fn pair_values(&self) -> Option<(f64, f64)> {
        match &self.support {
            SupportData::Pair { plus, minus } => Some((*plus, *minus)),
            _ => None,
        }
    }
}

/// Build a star region from sampled `(direction, boundary distance)` pairs.
///
/// In d=1 both signs must appear; in d=2 the sampled angles must cover the
/// circle without gaps larger than a quarter turn. d=2 samples are resampled
/// onto the uniform grid used internally (4096 points, linear interpolation).
pub fn make_star_region(samples: &[(Vec<f64>, f64)]) -> Result<StarRegion, GeometryError> {
    if samples.is_empty() {
        return Err(GeometryError::DirectionCoverage("no samples given".into()));
    }
    if samples.iter().any(|(_, v)| !(*v > 0.0) || !v.is_finite()) {
        return Err(GeometryError::NonPositiveSupport);
    }
    let dim = samples[0].0.len();
    match dim {
        1 => {
            let mut plus = None;
            let mut minus = None;
            for (dir, v) in samples {
                if dir.len() != 1 {
                    return Err(GeometryError::InvalidParameter("mixed dimensions".into()));
                }
                if dir[0] > 0.0 {
                    plus = Some(*v);
                } else if dir[0] < 0.0 {
                    minus = Some(*v);
                } else {
                    return Err(GeometryError::NonUnitDirection { norm: 0.0 });
                }
            }
            match (plus, minus) {
                (Some(p), Some(m)) => StarRegion::interval(m, p),
                _ => Err(GeometryError::DirectionCoverage(
                    "d=1 needs samples at both omega = +1 and omega = -1".into(),
                )),
            }
        }
        2 => {
            let mut angled: Vec<(f64, f64)> = samples
                .iter()
                .map(|(dir, v)| {
                    let theta = dir[1].atan2(dir[0]).rem_euclid(2.0 * std::f64::consts::PI);
                    (theta, *v)
                })
                .collect();
            angled.sort_by(|a, b| a.0.total_cmp(&b.0));
            angled.dedup_by(|a, b| (a.0 - b.0).abs() < 1e-14);
            if angled.len() < 3 {
                return Err(GeometryError::DirectionCoverage(
                    "d=2 needs at least 3 distinct directions".into(),
                ));
            }
            let two_pi = 2.0 * std::f64::consts::PI;
            let mut max_gap: f64 = 0.0;
            for i in 0..angled.len() {
                let next = if i + 1 == angled.len() {
                    angled[0].0 + two_pi
                } else {
                    angled[i + 1].0
                };
                max_gap = max_gap.max(next - angled[i].0);
            }
            if max_gap > std::f64::consts::FRAC_PI_2 + 1e-12 {
                return Err(GeometryError::DirectionCoverage(format!(
                    "largest angular gap {max_gap:.3} rad exceeds pi/2"
                )));
            }
            // resample onto the internal uniform grid
            let n = 4096;
            let mut values = Vec::with_capacity(n);
            let m = angled.len();
            for i in 0..n {
                let theta = two_pi * i as f64 / n as f64;
                // locate the sample pair bracketing theta
                let j = angled.partition_point(|(a, _)| *a <= theta);
                let (t0, v0, t1, v1) = if j == 0 {
                    let (tl, vl) = angled[m - 1];
                    (tl - two_pi, vl, angled[0].0, angled[0].1)
                } else if j == m {
                    let (tr, vr) = angled[0];
                    (angled[m - 1].0, angled[m - 1].1, tr + two_pi, vr)
                } else {
                    (angled[j - 1].0, angled[j - 1].1, angled[j].0, angled[j].1)
                };
                let w = if t1 > t0 { (theta - t0) / (t1 - t0) } else { 0.0 };
                values.push(v0 + (v1 - v0) * w);
            }
            StarRegion::from_angle_table(values, Interpolation::Linear)
        }
        d => Err(GeometryError::UnsupportedDimension {
            dim: d,
            context: "support-function tables exist for d in {1, 2}; use a ball otherwise",
        }),
    }
}
