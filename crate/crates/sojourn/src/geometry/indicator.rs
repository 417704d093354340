//! Regions given only through a membership function.

use std::fmt;
use std::sync::Arc;

use super::GeometryError;

type MembershipFn = Arc<dyn Fn(&[f64]) -> bool + Send + Sync>;

/// Bounded open region containing the origin, described by an indicator.
///
/// The stored membership function is clipped at the declared bounding radius,
/// so `contains(x)` is false for every `|x| >= bounding_radius` by
/// construction.
#[derive(Clone)]
pub struct IndicatorRegion {
    dim: usize,
    bounding_radius: f64,
    membership: MembershipFn,
}

impl fmt::Debug for IndicatorRegion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("IndicatorRegion")
            .field("dim", &self.dim)
            .field("bounding_radius", &self.bounding_radius)
            .finish()
    }
}

impl IndicatorRegion {
    /// Wrap an arbitrary membership function.
    ///
    /// Fails unless the origin is inside and the bounding radius is positive.
    pub fn from_closure(
        dim: usize,
        bounding_radius: f64,
        membership: impl Fn(&[f64]) -> bool + Send + Sync + 'static,
    ) -> Result<Self, GeometryError> {
        if !(bounding_radius > 0.0) {
            return Err(GeometryError::InvalidParameter(
                "bounding radius must be positive".into(),
            ));
        }
        let origin = vec![0.0; dim];
        if !membership(&origin) {
            return Err(GeometryError::OriginNotInside);
        }
        let rb = bounding_radius;
        let clipped: MembershipFn = Arc::new(move |x: &[f64]| {
            let n2: f64 = x.iter().map(|c| c * c).sum();
            n2 < rb * rb && membership(x)
        });
        Ok(Self {
            dim,
            bounding_radius,
            membership: clipped,
        })
    }

    /// d=1 union of open intervals; exactly one must straddle the origin.
    pub fn from_intervals(intervals: &[(f64, f64)]) -> Result<Self, GeometryError> {
        if intervals.is_empty() {
            return Err(GeometryError::InvalidParameter("no intervals given".into()));
        }
        for &(a, b) in intervals {
            if !(a < b) {
                return Err(GeometryError::InvalidParameter(format!(
                    "degenerate interval ({a}, {b})"
                )));
            }
        }
        let bound = intervals
            .iter()
            .map(|&(a, b)| a.abs().max(b.abs()))
            .fold(0.0, f64::max)
            * (1.0 + 1e-12)
            + 1e-300;
        let list: Vec<(f64, f64)> = intervals.to_vec();
        Self::from_closure(1, bound, move |x| {
            list.iter().any(|&(a, b)| x[0] > a && x[0] < b)
        })
    }

    /// d=2 rasterized region on an `n x n` grid over the square
    /// `[-extent, extent]^2`: membership is the value of the covering cell.
    pub fn from_grid(extent: f64, n: usize, cells: Vec<bool>) -> Result<Self, GeometryError> {
        if n == 0 || cells.len() != n * n {
            return Err(GeometryError::InvalidParameter(format!(
                "grid size mismatch: n = {n}, cells = {}",
                cells.len()
            )));
        }
        if !(extent > 0.0) {
            return Err(GeometryError::InvalidParameter("extent must be positive".into()));
        }
        let bound = extent * std::f64::consts::SQRT_2 * (1.0 + 1e-12);
        Self::from_closure(2, bound, move |x| {
            let to_index = |c: f64| -> Option<usize> {
                let u = (c + extent) / (2.0 * extent) * n as f64;
                if u < 0.0 || u >= n as f64 {
                    None
                } else {
                    Some(u as usize)
                }
            };
            match (to_index(x[0]), to_index(x[1])) {
                (Some(i), Some(j)) => cells[j * n + i],
                _ => false,
            }
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn bounding_radius(&self) -> f64 {
        self.bounding_radius
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        (self.membership)(x)
    }

    /// Membership test for the dilated region `Sigma_r`.
    pub fn contains_scaled(&self, x: &[f64], r: f64) -> bool {
        let scaled: Vec<f64> = x.iter().map(|c| c / r).collect();
        (self.membership)(&scaled)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_region_without_origin() {
        let r = IndicatorRegion::from_closure(1, 5.0, |x| x[0] > 1.0 && x[0] < 2.0);
        assert!(matches!(r, Err(GeometryError::OriginNotInside)));
    }

    #[test]
    fn clipping_enforces_bounding_radius() {
        // claim everything inside, declare bound 2
        let r = IndicatorRegion::from_closure(2, 2.0, |_| true).unwrap();
        assert!(r.contains(&[1.0, 1.0]));
        assert!(!r.contains(&[2.0, 0.0]));
        assert!(!r.contains(&[5.0, 5.0]));
    }

    #[test]
    fn interval_union_membership() {
        // (-c, c) u (a, b) u (-b, -a) with c=0.5, a=1, b=2
        let r = IndicatorRegion::from_intervals(&[(-0.5, 0.5), (1.0, 2.0), (-2.0, -1.0)]).unwrap();
        assert!(r.contains(&[0.0]));
        assert!(r.contains(&[1.5]));
        assert!(r.contains(&[-1.5]));
        assert!(!r.contains(&[0.75]));
        assert!(!r.contains(&[2.5]));
    }

    #[test]
    fn grid_region_lookup() {
        let n = 8;
        let mut cells = vec![false; n * n];
        // fill the disk of radius 0.9 on [-1,1]^2
        for j in 0..n {
            for i in 0..n {
                let x = -1.0 + 2.0 * (i as f64 + 0.5) / n as f64;
                let y = -1.0 + 2.0 * (j as f64 + 0.5) / n as f64;
                cells[j * n + i] = x * x + y * y < 0.81;
            }
        }
        let r = IndicatorRegion::from_grid(1.0, n, cells).unwrap();
        assert!(r.contains(&[0.0, 0.0]));
        assert!(!r.contains(&[0.95, 0.95]));
    }
}
