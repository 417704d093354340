//! Entry and exit times of a path through a dilated region.

use crate::geometry::Region;

use super::trajectory::Trajectory;
use super::ClassicalError;

/// Anything that can report a position at every time.
pub trait Path {
    fn dim(&self) -> usize;
    fn position(&self, t: f64) -> [f64; 2];
    /// A time interval outside of which the motion is exactly linear,
    /// together with the end momenta `(t_lo, p_lo, t_hi, p_hi)`.
    fn linear_tails(&self) -> (f64, [f64; 2], f64, [f64; 2]);
}

impl Path for Trajectory {
    fn dim(&self) -> usize {
        self.dim()
    }

    fn position(&self, t: f64) -> [f64; 2] {
        Trajectory::position(self, t)
    }

    fn linear_tails(&self) -> (f64, [f64; 2], f64, [f64; 2]) {
        let (t0, t1) = self.integrated_span();
        (t0, self.p_minus(), t1, self.p_plus())
    }
}

/// Free path `x(t) = x0 + p (t - t0)`.
#[derive(Debug, Clone, Copy)]
pub struct FreeLine {
    pub dim: usize,
    pub x0: [f64; 2],
    pub p: [f64; 2],
    pub t0: f64,
}

impl FreeLine {
    pub fn new(dim: usize, x0: [f64; 2], p: [f64; 2], t0: f64) -> Self {
        Self { dim, x0, p, t0 }
    }
}

impl Path for FreeLine {
    fn dim(&self) -> usize {
        self.dim
    }

    fn position(&self, t: f64) -> [f64; 2] {
        [
            self.x0[0] + self.p[0] * (t - self.t0),
            self.x0[1] + self.p[1] * (t - self.t0),
        ]
    }

    fn linear_tails(&self) -> (f64, [f64; 2], f64, [f64; 2]) {
        (self.t0, self.p, self.t0, self.p)
    }
}

/// Crossing behavior expected of the region.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CrossingMode {
    /// Single entry and exit; more than one pair is a consistency error.
    #[default]
    Convex,
    /// Non-convex regions: report the first entry and the last exit.
    FirstEntryLastExit,
}

#[derive(Debug, Clone, Copy)]
pub struct CrossingOptions {
    pub mode: CrossingMode,
    /// Bisection tolerance for each crossing time.
    pub time_tol: f64,
    /// Samples used to bracket sign changes over the scan window.
    pub scan_samples: usize,
}

impl Default for CrossingOptions {
    fn default() -> Self {
        Self {
            mode: CrossingMode::Convex,
            time_tol: 1e-10,
            scan_samples: 4096,
        }
    }
}

/// Entry and exit times of the path through `Sigma_r`.
#[derive(Debug, Clone, Copy)]
pub struct Crossing {
    pub t_entry: f64,
    pub t_exit: f64,
}

impl Crossing {
    pub fn sojourn(&self) -> f64 {
        self.t_exit - self.t_entry
    }
}

fn speed(p: &[f64; 2]) -> f64 {
    (p[0] * p[0] + p[1] * p[1]).sqrt()
}

/// Times at which a free line enters and leaves the ball of radius `radius`,
/// or `None` if it misses it.
fn line_ball_window(x0: &[f64; 2], p: &[f64; 2], t0: f64, radius: f64) -> Option<(f64, f64)> {
    let p2 = p[0] * p[0] + p[1] * p[1];
    if p2 == 0.0 {
        return None;
    }
    let xp = x0[0] * p[0] + x0[1] * p[1];
    let x2 = x0[0] * x0[0] + x0[1] * x0[1];
    let disc = xp * xp - p2 * (x2 - radius * radius);
    if disc <= 0.0 {
        return None;
    }
    let sq = disc.sqrt();
    Some((t0 + (-xp - sq) / p2, t0 + (-xp + sq) / p2))
}

/// Locate the crossings of the path through the dilated region `Sigma_r`.
///
/// Membership flips are bracketed on a scan over the window in which the
/// path can intersect the region and refined by bisection to `time_tol`.
/// Star regions use the sign of the residual `|x(t)| - r l(x(t)/|x(t)|)`,
/// which is the same membership test expressed through the support function.
pub fn crossing_times(
    path: &dyn Path,
    region: &Region,
    r: f64,
    opts: &CrossingOptions,
) -> Result<Crossing, ClassicalError> {
    let dim = path.dim();
    let ball = r * region.bounding_radius() * (1.0 + 1e-9);
    let (t_lo, p_lo, t_hi, p_hi) = path.linear_tails();

    // scan window: wherever the backward tail, the forward tail or the
    // integrated span can be inside the bounding ball
    let x_lo = path.position(t_lo);
    let x_hi = path.position(t_hi);
    let w_lo = line_ball_window(&x_lo, &p_lo, t_lo, ball);
    let w_hi = line_ball_window(&x_hi, &p_hi, t_hi, ball);
    let mut t_a = t_lo;
    let mut t_b = t_hi;
    if let Some((a, _)) = w_lo {
        t_a = t_a.min(a);
    }
    if let Some((_, b)) = w_hi {
        t_b = t_b.max(b);
    }
    if w_lo.is_none() && w_hi.is_none() && t_lo >= t_hi {
        // a pure free line missing the bounding ball cannot cross
        return Err(ClassicalError::NoCrossing);
    }
    let v = speed(&p_lo).max(speed(&p_hi)).max(1e-12);
    let margin = 0.05 * ball / v;
    t_a -= margin;
    t_b += margin;

    let inside = |t: f64| -> bool {
        let x = path.position(t);
        region.contains_scaled(&x[..dim], r)
    };

    let n = opts.scan_samples.max(64);
    let dt = (t_b - t_a) / n as f64;
    let mut entries = Vec::new();
    let mut exits = Vec::new();
    let mut prev_t = t_a;
    let mut prev_in = inside(prev_t);
    if prev_in {
        // the scan window construction guarantees the endpoints are outside
        return Err(ClassicalError::CrossingWindow);
    }
    for i in 1..=n {
        let t = t_a + dt * i as f64;
        let now_in = inside(t);
        if now_in != prev_in {
            let (mut a, mut b) = (prev_t, t);
            while b - a > opts.time_tol {
                let mid = 0.5 * (a + b);
                if inside(mid) == prev_in {
                    a = mid;
                } else {
                    b = mid;
                }
            }
            let root = 0.5 * (a + b);
            if prev_in {
                exits.push(root);
            } else {
                entries.push(root);
            }
        }
        prev_t = t;
        prev_in = now_in;
    }
    if prev_in {
        return Err(ClassicalError::CrossingWindow);
    }

    if entries.is_empty() {
        return Err(ClassicalError::NoCrossing);
    }
    match opts.mode {
        CrossingMode::Convex => {
            if entries.len() > 1 || exits.len() > 1 {
                return Err(ClassicalError::MultipleCrossings {
                    entries: entries.len(),
                    exits: exits.len(),
                });
            }
            Ok(Crossing {
                t_entry: entries[0],
                t_exit: exits[0],
            })
        }
        CrossingMode::FirstEntryLastExit => Ok(Crossing {
            t_entry: entries[0],
            t_exit: *exits.last().unwrap(),
        }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{IndicatorRegion, StarRegion};

    #[test]
    fn chord_through_ball_center() {
        // unit ball dilated by 5, unit speed: sojourn = chord / speed = 10
        let ball = Region::Star(StarRegion::ball(2, 1.0));
        let line = FreeLine::new(2, [-20.0, 0.0], [1.0, 0.0], 0.0);
        let c = crossing_times(&line, &ball, 5.0, &CrossingOptions::default()).unwrap();
        assert!((c.sojourn() - 10.0).abs() < 1e-9);
        assert!((c.t_entry - 15.0).abs() < 1e-9);
    }

    #[test]
    fn offset_chord_matches_circle_intersection() {
        // line x(t) = (t, 0.5) in the unit ball: chord 2 sqrt(1 - 0.25)
        let ball = Region::Star(StarRegion::ball(2, 1.0));
        let line = FreeLine::new(2, [0.0, 0.5], [1.0, 0.0], 0.0);
        let c = crossing_times(&line, &ball, 1.0, &CrossingOptions::default()).unwrap();
        assert!((c.sojourn() - 3.0f64.sqrt()).abs() < 1e-9);
    }

    #[test]
    fn ellipse_major_axis_chord() {
        // ellipse (2,1) dilated by 3, speed 2 along the major axis: 12/2 = 6
        let ellipse = Region::Star(StarRegion::ellipse(2.0, 1.0, 4096).unwrap());
        let line = FreeLine::new(2, [-30.0, 0.0], [2.0, 0.0], 0.0);
        let c = crossing_times(&line, &ellipse, 3.0, &CrossingOptions::default()).unwrap();
        assert!((c.sojourn() - 6.0).abs() < 1e-8);
    }

    #[test]
    fn miss_is_reported() {
        let ball = Region::Star(StarRegion::ball(2, 1.0));
        let line = FreeLine::new(2, [0.0, 7.0], [1.0, 0.0], 0.0);
        assert!(matches!(
            crossing_times(&line, &ball, 5.0, &CrossingOptions::default()),
            Err(ClassicalError::NoCrossing)
        ));
    }

    #[test]
    fn nonconvex_region_needs_the_flag() {
        // two lobes along x: (-c,c) u (a,b) u (-b,-a) in d=1
        let region = Region::Indicator(
            IndicatorRegion::from_intervals(&[(-0.5, 0.5), (1.0, 2.0), (-2.0, -1.0)]).unwrap(),
        );
        let line = FreeLine::new(1, [-10.0, 0.0], [1.0, 0.0], 0.0);
        let err = crossing_times(&line, &region, 1.0, &CrossingOptions::default()).unwrap_err();
        assert!(matches!(err, ClassicalError::MultipleCrossings { .. }));

        let opts = CrossingOptions {
            mode: CrossingMode::FirstEntryLastExit,
            ..CrossingOptions::default()
        };
        let c = crossing_times(&line, &region, 1.0, &opts).unwrap();
        // first entry at x=-2, last exit at x=+2
        assert!((c.t_entry - 8.0).abs() < 1e-9);
        assert!((c.t_exit - 12.0).abs() < 1e-9);
    }
}
