//! Adaptive Dormand-Prince 5(4) integration with stored nodes.
//!
//! The embedded pair drives the step size from the usual weighted error norm;
//! accepted nodes keep the derivative so callers can build Hermite
//! interpolants between them.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum OdeError {
    #[error("step budget exhausted after {steps} accepted steps at t = {t}")]
    StepBudgetExhausted { steps: usize, t: f64 },
    #[error("step size underflow at t = {t}")]
    StepUnderflow { t: f64 },
}

/// One accepted node: time, state and state derivative.
#[derive(Debug, Clone, Copy)]
pub struct OdeStep<const N: usize> {
    pub t: f64,
    pub y: [f64; N],
    pub dy: [f64; N],
}

#[derive(Debug, Clone, Copy)]
pub struct OdeOptions {
    pub rtol: f64,
    pub atol: f64,
    pub h_initial: f64,
    pub h_max: f64,
    pub max_steps: usize,
}

impl Default for OdeOptions {
    fn default() -> Self {
        Self {
            rtol: 1e-11,
            atol: 1e-12,
            h_initial: 1e-3,
            h_max: 0.05,
            max_steps: 2_000_000,
        }
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct OdeStats {
    pub accepted: usize,
    pub rejected: usize,
}

// Dormand-Prince 5(4) tableau.
const C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
const B5: [f64; 7] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
    0.0,
];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

/// Integrate `dy/dt = f(t, y)` from `t0` towards `t_end` (either direction).
///
/// Stops early, after completing the current step, once `stop` returns true.
/// Returns the accepted nodes (including the initial one) and step counts.
pub fn integrate_adaptive<const N: usize>(
    f: &dyn Fn(f64, &[f64; N]) -> [f64; N],
    t0: f64,
    y0: [f64; N],
    t_end: f64,
    opts: &OdeOptions,
    mut stop: impl FnMut(f64, &[f64; N]) -> bool,
) -> Result<(Vec<OdeStep<N>>, OdeStats), OdeError> {
    let direction = if t_end >= t0 { 1.0 } else { -1.0 };
    let mut t = t0;
    let mut y = y0;
    let mut dy = f(t, &y);
    let mut h = opts.h_initial.min(opts.h_max).min((t_end - t0).abs()).max(f64::MIN_POSITIVE);
    let mut nodes = vec![OdeStep { t, y, dy }];
    let mut stats = OdeStats::default();

    if stop(t, &y) || t0 == t_end {
        return Ok((nodes, stats));
    }

    let mut k = [[0.0; N]; 7];
    loop {
        if stats.accepted >= opts.max_steps {
            return Err(OdeError::StepBudgetExhausted { steps: stats.accepted, t });
        }
        let remaining = (t_end - t).abs();
        let h_try = h.min(remaining);
        if h_try < 1e-14 * t.abs().max(1.0) {
            return Err(OdeError::StepUnderflow { t });
        }
        let hs = direction * h_try;

        k[0] = dy;
        for stage in 1..7 {
            let mut ys = y;
            for i in 0..N {
                let mut acc = 0.0;
                for (j, kj) in k.iter().enumerate().take(stage) {
                    acc += A[stage][j] * kj[i];
                }
                ys[i] += hs * acc;
            }
            k[stage] = f(t + C[stage] * hs, &ys);
        }

        let mut y_new = y;
        let mut err_norm_sq = 0.0;
        for i in 0..N {
            let mut sum5 = 0.0;
            let mut err = 0.0;
            for (j, kj) in k.iter().enumerate() {
                sum5 += B5[j] * kj[i];
                err += (B5[j] - B4[j]) * kj[i];
            }
            y_new[i] = y[i] + hs * sum5;
            let scale = opts.atol + opts.rtol * y[i].abs().max(y_new[i].abs());
            let e = hs * err / scale;
            err_norm_sq += e * e;
        }
        let err_norm = (err_norm_sq / N as f64).sqrt();

        if err_norm <= 1.0 {
            t += hs;
            y = y_new;
            dy = k[6]; // FSAL: stage 7 is f(t+h, y_new)
            nodes.push(OdeStep { t, y, dy });
            stats.accepted += 1;
            let reached_end = (t_end - t).abs() < 1e-14 * t.abs().max(1.0);
            if stop(t, &y) || reached_end {
                return Ok((nodes, stats));
            }
        } else {
            stats.rejected += 1;
        }

        let factor = if err_norm > 0.0 {
            (0.9 * err_norm.powf(-0.2)).clamp(0.2, 5.0)
        } else {
            5.0
        };
        h = (h_try * factor).min(opts.h_max);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_decay() {
        let f = |_t: f64, y: &[f64; 1]| [-y[0]];
        let (nodes, _) = integrate_adaptive(&f, 0.0, [1.0], 3.0, &OdeOptions::default(), |_, _| false)
            .unwrap();
        let last = nodes.last().unwrap();
        assert!((last.t - 3.0).abs() < 1e-12);
        assert!((last.y[0] - (-3.0f64).exp()).abs() < 1e-10);
    }

    #[test]
    fn harmonic_oscillator_energy() {
        let f = |_t: f64, y: &[f64; 2]| [y[1], -y[0]];
        let (nodes, _) = integrate_adaptive(&f, 0.0, [1.0, 0.0], 50.0, &OdeOptions::default(), |_, _| false)
            .unwrap();
        for node in &nodes {
            let e = 0.5 * (node.y[0] * node.y[0] + node.y[1] * node.y[1]);
            assert!((e - 0.5).abs() < 1e-9, "energy drift at t={}", node.t);
        }
        let last = nodes.last().unwrap();
        assert!((last.y[0] - 50.0f64.cos()).abs() < 1e-8);
    }

    #[test]
    fn backward_integration() {
        let f = |_t: f64, y: &[f64; 1]| [y[0]];
        let (nodes, _) =
            integrate_adaptive(&f, 0.0, [1.0], -2.0, &OdeOptions::default(), |_, _| false).unwrap();
        let last = nodes.last().unwrap();
        assert!((last.t + 2.0).abs() < 1e-12);
        assert!((last.y[0] - (-2.0f64).exp()).abs() < 1e-10);
    }

    #[test]
    fn early_stop_condition() {
        let f = |_t: f64, y: &[f64; 1]| [y[0]];
        let (nodes, _) = integrate_adaptive(&f, 0.0, [1.0], 100.0, &OdeOptions::default(), |_, y| {
            y[0] > 10.0
        })
        .unwrap();
        let last = nodes.last().unwrap();
        assert!(last.y[0] > 10.0 && last.y[0] < 12.0);
    }
}
