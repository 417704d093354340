//! Spatial regions and their dilation-averaged shape functions.

mod averages;
mod indicator;
mod star;

pub use averages::{
    asymmetry_defect, check_assumption_symmetry, direction_grid, g_sigma, r_sigma,
    r_sigma_quadrature, ray_membership_intervals, symmetrize, QuadratureSettings, ShapeAverages,
    SymmetryReport,
};
pub use indicator::IndicatorRegion;
pub use star::{make_star_region, Interpolation, StarRegion};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum GeometryError {
    #[error("support function must be strictly positive")]
    NonPositiveSupport,
    #[error("direction coverage insufficient: {0}")]
    DirectionCoverage(String),
    #[error("direction must be a unit vector, |theta| = {norm}")]
    NonUnitDirection { norm: f64 },
    #[error("R_Sigma undefined at the origin")]
    UndefinedAtOrigin,
    #[error("region does not contain the origin")]
    OriginNotInside,
    #[error("could not locate an interior neighborhood of the origin along the ray")]
    OriginNeighborhoodNotFound,
    #[error("quadrature did not reach the requested accuracy: achieved {achieved:.3e}, requested {requested:.3e}")]
    QuadratureNotConverged { achieved: f64, requested: f64 },
    #[error("direction grid is empty")]
    EmptyDirectionGrid,
    #[error("unsupported dimension {dim}: {context}")]
    UnsupportedDimension { dim: usize, context: &'static str },
    #[error("invalid region parameter: {0}")]
    InvalidParameter(String),
}

/// A bounded open region containing the origin, in either representation.
#[derive(Debug, Clone)]
pub enum Region {
    Star(StarRegion),
    Indicator(IndicatorRegion),
}

impl Region {
    pub fn dim(&self) -> usize {
        match self {
            Region::Star(s) => s.dim(),
            Region::Indicator(i) => i.dim(),
        }
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        match self {
            Region::Star(s) => s.contains(x),
            Region::Indicator(i) => i.contains(x),
        }
    }

    /// Membership in the dilated region `Sigma_r`.
    pub fn contains_scaled(&self, x: &[f64], r: f64) -> bool {
        match self {
            Region::Star(s) => s.contains_scaled(x, r),
            Region::Indicator(i) => i.contains_scaled(x, r),
        }
    }

    pub fn bounding_radius(&self) -> f64 {
        match self {
            Region::Star(s) => s.max_support(),
            Region::Indicator(i) => i.bounding_radius(),
        }
    }

    pub fn as_star(&self) -> Option<&StarRegion> {
        match self {
            Region::Star(s) => Some(s),
            Region::Indicator(_) => None,
        }
    }

    /// Whether `Sigma_r` contains the ball of the given radius.
    ///
    /// Exact for star regions; sampled on a direction fan for indicator
    /// regions.
    pub fn dilation_contains_ball(&self, r: f64, ball_radius: f64) -> bool {
        match self {
            Region::Star(s) => r * s.min_support() >= ball_radius,
            Region::Indicator(ind) => {
                let dirs = direction_grid(ind.dim(), 256);
                dirs.iter().all(|d| {
                    let x: Vec<f64> = d.iter().map(|c| c * ball_radius).collect();
                    ind.contains_scaled(&x, r)
                })
            }
        }
    }
}

/// Serializable description of a region, as it appears in experiment
/// configuration files and standalone JSON documents.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum RegionSpec {
    Ball {
        dim: usize,
        radius: f64,
    },
    Ellipse {
        semi_axes: [f64; 2],
        #[serde(default = "default_table_points")]
        table_points: usize,
    },
    PolygonSupportTable {
        values: Vec<f64>,
        #[serde(default)]
        spline: bool,
    },
    IntervalUnion {
        intervals: Vec<[f64; 2]>,
    },
    IndicatorGrid {
        extent: f64,
        cells_per_side: usize,
        /// Row-major cells, `0` outside / nonzero inside.
        cells: Vec<u8>,
    },
}

fn default_table_points() -> usize {
    4096
}

impl RegionSpec {
    pub fn build(&self) -> Result<Region, GeometryError> {
        match self {
            RegionSpec::Ball { dim, radius } => {
                if *dim == 0 || !(*radius > 0.0) {
                    return Err(GeometryError::InvalidParameter(format!(
                        "ball needs dim >= 1 and radius > 0, got dim {dim}, radius {radius}"
                    )));
                }
                Ok(Region::Star(StarRegion::ball(*dim, *radius)))
            }
            RegionSpec::Ellipse {
                semi_axes,
                table_points,
            } => Ok(Region::Star(StarRegion::ellipse(
                semi_axes[0],
                semi_axes[1],
                *table_points,
            )?)),
            RegionSpec::PolygonSupportTable { values, spline } => {
                let mode = if *spline {
                    Interpolation::CubicSpline
                } else {
                    Interpolation::Linear
                };
                Ok(Region::Star(StarRegion::from_angle_table(values.clone(), mode)?))
            }
            RegionSpec::IntervalUnion { intervals } => {
                let pairs: Vec<(f64, f64)> = intervals.iter().map(|p| (p[0], p[1])).collect();
                Ok(Region::Indicator(IndicatorRegion::from_intervals(&pairs)?))
            }
            RegionSpec::IndicatorGrid {
                extent,
                cells_per_side,
                cells,
            } => {
                let bools: Vec<bool> = cells.iter().map(|&c| c != 0).collect();
                Ok(Region::Indicator(IndicatorRegion::from_grid(
                    *extent,
                    *cells_per_side,
                    bools,
                )?))
            }
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("region specs are always serializable")
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn region_spec_round_trips_through_json() {
        let specs = vec![
            RegionSpec::Ball { dim: 2, radius: 1.0 },
            RegionSpec::Ellipse {
                semi_axes: [2.0, 1.0],
                table_points: 512,
            },
            RegionSpec::IntervalUnion {
                intervals: vec![[-0.5, 0.5], [1.0, 2.0]],
            },
        ];
        for spec in specs {
            let json = spec.to_json();
            let back = RegionSpec::from_json(&json).unwrap();
            assert_eq!(spec, back);
            back.build().unwrap();
        }
    }

    #[test]
    fn malformed_specs_are_rejected() {
        assert!(RegionSpec::Ball { dim: 0, radius: 1.0 }.build().is_err());
        assert!(RegionSpec::Ball { dim: 2, radius: -1.0 }.build().is_err());
        assert!(RegionSpec::IntervalUnion {
            intervals: vec![[1.0, 2.0]] // origin outside
        }
        .build()
        .is_err());
        assert!(RegionSpec::PolygonSupportTable {
            values: vec![1.0, -1.0, 1.0, 1.0],
            spline: false,
        }
        .build()
        .is_err());
    }

    #[test]
    fn dilation_ball_containment_gate() {
        let ellipse = RegionSpec::Ellipse {
            semi_axes: [2.0, 1.0],
            table_points: 512,
        }
        .build()
        .unwrap();
        assert!(ellipse.dilation_contains_ball(3.0, 3.0)); // min support 1
        assert!(!ellipse.dilation_contains_ball(2.9, 3.0));
    }
}
