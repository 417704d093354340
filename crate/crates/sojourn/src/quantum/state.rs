//! Wavepacket states with compactly supported kinetic-energy content.
//!
//! Scattering states live in the subspace with kinetic energy confined to a
//! compact window `J = [lambda_min, lambda_max]` away from zero: the
//! singular spectral multipliers (`1/k`, `ln|k|`, shape functions) are only
//! applied on that window, and states are admissible when their spectral
//! mass outside it is negligible. Preparation enforces the window exactly by
//! multiplying a Gaussian with a smooth energy cutoff vanishing outside `J`.

use std::sync::Arc;

use num_complex::Complex64;

use super::grid::Grid;
use super::QuantumError;

/// Compact kinetic-energy window `J = [lambda_min, lambda_max]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyWindow {
    pub lambda_min: f64,
    pub lambda_max: f64,
}

impl EnergyWindow {
    pub fn new(lambda_min: f64, lambda_max: f64) -> Result<Self, QuantumError> {
        if !(lambda_min > 0.0 && lambda_max > lambda_min) {
            return Err(QuantumError::WindowOutOfRange(format!(
                "energy window [{lambda_min}, {lambda_max}] must satisfy 0 < min < max"
            )));
        }
        Ok(Self {
            lambda_min,
            lambda_max,
        })
    }

    pub fn contains(&self, lambda: f64) -> bool {
        lambda >= self.lambda_min && lambda <= self.lambda_max
    }

    /// Lower edge in momentum: `sqrt(2 lambda_min)`.
    pub fn k_min(&self) -> f64 {
        (2.0 * self.lambda_min).sqrt()
    }

    pub fn k_max(&self) -> f64 {
        (2.0 * self.lambda_max).sqrt()
    }

    /// Wavenumbers below this carry no admissible mass; singular momentum
    /// multipliers are zeroed there.
    pub fn exclusion_floor(&self) -> f64 {
        0.5 * self.k_min()
    }
}

/// Complex state on the grid with its energy window.
#[derive(Debug, Clone)]
pub struct WaveState {
    pub grid: Arc<Grid>,
    pub amps: Vec<Complex64>,
    pub window: EnergyWindow,
}

/// Smooth step: 0 for `s <= 0`, 1 for `s >= 1`, C-infinity in between.
pub fn smooth_step(s: f64) -> f64 {
    let f = |u: f64| if u > 0.0 { (-1.0 / u).exp() } else { 0.0 };
    let a = f(s);
    let b = f(1.0 - s);
    a / (a + b)
}

/// Smooth bump supported exactly on `(-width, width)`, equal to 1 at 0.
pub fn smooth_bump(y: f64, width: f64) -> f64 {
    let u = (y / width).powi(2);
    if u >= 1.0 {
        0.0
    } else {
        (1.0 - 1.0 / (1.0 - u)).exp()
    }
}

impl WaveState {
    pub fn norm(&self) -> f64 {
        self.grid.norm_position(&self.amps)
    }

    pub fn inner(&self, other: &WaveState) -> Complex64 {
        self.grid.inner_position(&self.amps, &other.amps)
    }

    pub fn normalize(&mut self) {
        let n = self.norm();
        if n > 0.0 {
            let inv = 1.0 / n;
            for a in &mut self.amps {
                *a *= inv;
            }
        }
    }

    pub fn conjugate(&self) -> WaveState {
        WaveState {
            grid: self.grid.clone(),
            amps: self.amps.iter().map(|a| a.conj()).collect(),
            window: self.window,
        }
    }

    /// Multiply by a function of position.
    pub fn position_multiplied(&self, f: impl Fn(f64) -> Complex64) -> WaveState {
        let amps = self
            .grid
            .positions()
            .iter()
            .zip(&self.amps)
            .map(|(&x, a)| f(x) * a)
            .collect();
        WaveState {
            grid: self.grid.clone(),
            amps,
            window: self.window,
        }
    }

    /// Apply a real multiplier in momentum space.
    pub fn spectral_multiplied(&self, f: impl Fn(f64) -> f64) -> WaveState {
        let table: Vec<Complex64> = self
            .grid
            .wavenumbers()
            .iter()
            .map(|&k| Complex64::new(f(k), 0.0))
            .collect();
        let mut amps = self.amps.clone();
        self.grid.apply_spectral(&mut amps, &table);
        WaveState {
            grid: self.grid.clone(),
            amps,
            window: self.window,
        }
    }

    /// Fraction of the squared norm carried by kinetic energies outside `J`.
    pub fn spectral_mass_outside_window(&self) -> f64 {
        let spec = self.grid.spectrum(&self.amps);
        let dk = self.grid.dk();
        let mut outside = 0.0;
        let mut total = 0.0;
        for (m, &k) in self.grid.wavenumbers().iter().enumerate() {
            let mass = spec[m].norm_sqr() * dk;
            total += mass;
            if !self.window.contains(0.5 * k * k) {
                outside += mass;
            }
        }
        if total > 0.0 {
            outside / total
        } else {
            1.0
        }
    }

    /// Fraction of the squared norm below the exclusion floor around `k = 0`.
    pub fn spectral_mass_in_exclusion(&self) -> f64 {
        let spec = self.grid.spectrum(&self.amps);
        let dk = self.grid.dk();
        let floor = self.window.exclusion_floor();
        let mut inside = 0.0;
        let mut total = 0.0;
        for (m, &k) in self.grid.wavenumbers().iter().enumerate() {
            let mass = spec[m].norm_sqr() * dk;
            total += mass;
            if k.abs() < floor {
                inside += mass;
            }
        }
        if total > 0.0 {
            inside / total
        } else {
            1.0
        }
    }

    /// Verify the admissibility invariants of a scattering state.
    pub fn check_admissible(&self) -> Result<(), QuantumError> {
        let outside = self.spectral_mass_outside_window();
        if outside > 1e-10 {
            return Err(QuantumError::SpectralLeak {
                mass: outside,
                context: "kinetic-energy mass outside the window",
            });
        }
        let excluded = self.spectral_mass_in_exclusion();
        if excluded > 1e-10 {
            return Err(QuantumError::SpectralLeak {
                mass: excluded,
                context: "spectral mass inside the k = 0 exclusion window",
            });
        }
        Ok(())
    }

    /// Mean kinetic energy `<psi, P^2/2 psi>`.
    pub fn mean_kinetic_energy(&self) -> f64 {
        let spec = self.grid.spectrum(&self.amps);
        let dk = self.grid.dk();
        let mut mean = 0.0;
        let mut total = 0.0;
        for (m, &k) in self.grid.wavenumbers().iter().enumerate() {
            let mass = spec[m].norm_sqr() * dk;
            mean += 0.5 * k * k * mass;
            total += mass;
        }
        mean / total
    }

    /// Kinetic-energy distribution integrated over uniform bins covering `J`.
    pub fn energy_distribution(&self, bins: usize) -> Vec<f64> {
        let spec = self.grid.spectrum(&self.amps);
        let dk = self.grid.dk();
        let lo = self.window.lambda_min;
        let hi = self.window.lambda_max;
        let mut out = vec![0.0; bins];
        for (m, &k) in self.grid.wavenumbers().iter().enumerate() {
            let lambda = 0.5 * k * k;
            if lambda >= lo && lambda < hi {
                let b = ((lambda - lo) / (hi - lo) * bins as f64) as usize;
                out[b.min(bins - 1)] += spec[m].norm_sqr() * dk;
            }
        }
        out
    }

    /// Mass within `edge_fraction` of either box edge; the wraparound monitor.
    pub fn boundary_mass(&self, edge_fraction: f64) -> f64 {
        let n = self.grid.len();
        let band = ((n as f64 * edge_fraction) as usize).max(2);
        let dx = self.grid.dx();
        let mut mass = 0.0;
        for j in 0..band {
            mass += self.amps[j].norm_sqr() * dx;
            mass += self.amps[n - 1 - j].norm_sqr() * dx;
        }
        mass
    }
}

/// Gaussian wavepacket spectrally confined to the energy window.
///
/// The Gaussian `exp(-(x-x0)^2/(4 sigma^2) + i k0 x)` is transformed, cut by
/// a smooth window supported exactly in `J` (tapering over `taper_fraction`
/// of the window at each edge), transformed back and normalized.
pub fn prepare_state(
    grid: &Arc<Grid>,
    x0: f64,
    sigma: f64,
    k0: f64,
    window: EnergyWindow,
    taper_fraction: f64,
) -> Result<WaveState, QuantumError> {
    if !(sigma > 0.0) {
        return Err(QuantumError::InvalidInput(format!(
            "packet width must be positive, got {sigma}"
        )));
    }
    let nyquist_energy = 0.5 * grid.nyquist() * grid.nyquist();
    if window.lambda_max >= 0.95 * nyquist_energy {
        return Err(QuantumError::WindowOutOfRange(format!(
            "window top {} too close to the grid Nyquist energy {nyquist_energy:.3}",
            window.lambda_max
        )));
    }
    if x0.abs() > 0.45 * grid.box_length() {
        return Err(QuantumError::InvalidInput(format!(
            "packet center {x0} too close to the box edge"
        )));
    }

    let mut amps: Vec<Complex64> = grid
        .positions()
        .iter()
        .map(|&x| {
            let envelope = (-((x - x0) / (2.0 * sigma)).powi(2)).exp();
            Complex64::from_polar(envelope, k0 * x)
        })
        .collect();

    let width = window.lambda_max - window.lambda_min;
    let delta = taper_fraction.clamp(0.01, 0.49) * width;
    let cutoff = |k: f64| -> f64 {
        let lambda = 0.5 * k * k;
        smooth_step((lambda - window.lambda_min) / delta)
            * smooth_step((window.lambda_max - lambda) / delta)
    };
    let table: Vec<Complex64> = grid
        .wavenumbers()
        .iter()
        .map(|&k| Complex64::new(cutoff(k), 0.0))
        .collect();

    let norm_before = grid.norm_position(&amps);
    grid.apply_spectral(&mut amps, &table);
    let norm_after = grid.norm_position(&amps);
    if norm_after < 1e-6 * norm_before {
        return Err(QuantumError::EmptySpectralMass {
            retained: norm_after / norm_before,
        });
    }

    let mut state = WaveState {
        grid: grid.clone(),
        amps,
        window,
    };
    state.normalize();
    state.check_admissible()?;
    Ok(state)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn default_grid() -> Arc<Grid> {
        Grid::new(4096, 200.0).unwrap()
    }

    #[test]
    fn prepared_state_is_normalized_and_admissible() {
        let grid = default_grid();
        let window = EnergyWindow::new(10.0, 15.0).unwrap();
        let state = prepare_state(&grid, -30.0, 2.0, 5.0, window, 0.15).unwrap();
        assert!((state.norm() - 1.0).abs() < 1e-12);
        assert!(state.spectral_mass_outside_window() < 1e-12);
        assert!(state.spectral_mass_in_exclusion() < 1e-14);
    }

    #[test]
    fn wide_cutoff_barely_changes_the_gaussian() {
        let grid = default_grid();
        // J generously covers the packet: cutoff is 1 on its effective support
        let window = EnergyWindow::new(2.0, 40.0).unwrap();
        let state = prepare_state(&grid, 0.0, 2.0, 5.0, window, 0.05).unwrap();
        let reference: Vec<Complex64> = grid
            .positions()
            .iter()
            .map(|&x| Complex64::from_polar((-(x / 4.0) * (x / 4.0)).exp(), 5.0 * x))
            .collect();
        let norm = grid.norm_position(&reference);
        let overlap = grid
            .inner_position(&state.amps, &reference)
            .norm()
            / norm;
        assert!(overlap > 0.9999, "overlap {overlap}");
    }

    #[test]
    fn window_missing_the_carrier_is_rejected() {
        let grid = default_grid();
        // k0 = 5 has energy 12.5; J = [30, 40] excludes it entirely
        let window = EnergyWindow::new(30.0, 40.0).unwrap();
        let err = prepare_state(&grid, 0.0, 2.0, 5.0, window, 0.15).unwrap_err();
        assert!(matches!(err, QuantumError::EmptySpectralMass { .. }));
    }

    #[test]
    fn window_must_stay_positive_and_below_nyquist() {
        assert!(EnergyWindow::new(0.0, 10.0).is_err());
        assert!(EnergyWindow::new(-1.0, 10.0).is_err());
        let grid = default_grid();
        let nyq = 0.5 * grid.nyquist() * grid.nyquist();
        let window = EnergyWindow::new(1.0, nyq).unwrap();
        assert!(prepare_state(&grid, 0.0, 2.0, 5.0, window, 0.15).is_err());
    }

    #[test]
    fn mean_energy_sits_inside_the_window() {
        let grid = default_grid();
        let window = EnergyWindow::new(10.0, 15.0).unwrap();
        let state = prepare_state(&grid, 0.0, 1.0, 5.0, window, 0.15).unwrap();
        // spectral-moment oracle: the mean must land in J even though the
        // raw packet (sigma = 1, k0 = 5) has substantial mass outside
        let mean = state.mean_kinetic_energy();
        assert!(
            (10.0..=15.0).contains(&mean),
            "mean kinetic energy {mean} outside J"
        );
    }

    #[test]
    fn smooth_step_is_a_partition() {
        assert_eq!(smooth_step(-0.5), 0.0);
        assert_eq!(smooth_step(1.5), 1.0);
        for i in 1..20 {
            let s = i as f64 / 20.0;
            let v = smooth_step(s);
            assert!(v > 0.0 && v < 1.0);
            assert!((smooth_step(s) + smooth_step(1.0 - s) - 1.0).abs() < 1e-15);
        }
    }
}
