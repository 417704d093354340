//! Uniform 1-D grid with the discrete Fourier conventions used throughout.
//!
//! Positions are `x_j = -L/2 + j dx`, `j = 0..N`, with `dx = L/N`.
//! Wavenumbers follow the FFT layout `k_m = 2 pi m / L` for `m < N/2` and
//! negative frequencies above. The continuum-normalized transform is
//!
//! ```text
//! spectrum_m = dx / sqrt(2 pi) * exp(-i k_m x_0) * DFT(psi)_m,
//! ```
//!
//! which discretizes `(2 pi)^{-1/2} int dx psi(x) exp(-i k x)`. With these
//! factors the position norm `sum |psi_j|^2 dx` and the momentum norm
//! `sum |spectrum_m|^2 dk` agree to rounding (Parseval).

use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use super::QuantumError;

pub struct Grid {
    n: usize,
    length: f64,
    dx: f64,
    dk: f64,
    positions: Vec<f64>,
    wavenumbers: Vec<f64>,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for Grid {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Grid")
            .field("n", &self.n)
            .field("length", &self.length)
            .field("dx", &self.dx)
            .finish()
    }
}

impl Grid {
    pub fn new(n: usize, length: f64) -> Result<Arc<Self>, QuantumError> {
        if !n.is_power_of_two() || n < 16 {
            return Err(QuantumError::InvalidInput(format!(
                "grid size must be a power of two >= 16, got {n}"
            )));
        }
        if !(length > 0.0) {
            return Err(QuantumError::InvalidInput(format!(
                "box length must be positive, got {length}"
            )));
        }
        let dx = length / n as f64;
        let dk = 2.0 * std::f64::consts::PI / length;
        let positions = (0..n).map(|j| -0.5 * length + j as f64 * dx).collect();
        let wavenumbers = (0..n)
            .map(|m| {
                let signed = if m < n / 2 { m as isize } else { m as isize - n as isize };
                signed as f64 * dk
            })
            .collect();
        let mut planner = FftPlanner::new();
        Ok(Arc::new(Self {
            n,
            length,
            dx,
            dk,
            positions,
            wavenumbers,
            forward: planner.plan_fft_forward(n),
            inverse: planner.plan_fft_inverse(n),
        }))
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn box_length(&self) -> f64 {
        self.length
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    pub fn dk(&self) -> f64 {
        self.dk
    }

    pub fn positions(&self) -> &[f64] {
        &self.positions
    }

    /// Wavenumbers in FFT storage order.
    pub fn wavenumbers(&self) -> &[f64] {
        &self.wavenumbers
    }

    /// Largest resolvable wavenumber magnitude.
    pub fn nyquist(&self) -> f64 {
        std::f64::consts::PI / self.dx
    }

    /// In-place DFT without normalization (internal building block).
    pub(crate) fn fft_forward(&self, amps: &mut [Complex64]) {
        self.forward.process(amps);
    }

    pub(crate) fn fft_inverse(&self, amps: &mut [Complex64]) {
        self.inverse.process(amps);
    }

    /// Apply a diagonal multiplier in momentum space: `psi <- F^-1 m F psi`.
    ///
    /// `multiplier` is indexed in FFT storage order, matching
    /// [`Grid::wavenumbers`]. Exactly unitary when the multiplier is a phase.
    pub fn apply_spectral(&self, amps: &mut [Complex64], multiplier: &[Complex64]) {
        self.forward.process(amps);
        let scale = 1.0 / self.n as f64;
        for (a, m) in amps.iter_mut().zip(multiplier) {
            *a *= m * scale;
        }
        self.inverse.process(amps);
    }

    /// Continuum-normalized spectrum (includes the `x_0` phase and the
    /// `dx / sqrt(2 pi)` measure), in FFT storage order.
    pub fn spectrum(&self, amps: &[Complex64]) -> Vec<Complex64> {
        let mut work = amps.to_vec();
        self.forward.process(&mut work);
        let scale = self.dx / (2.0 * std::f64::consts::PI).sqrt();
        let x0 = self.positions[0];
        for (w, &k) in work.iter_mut().zip(&self.wavenumbers) {
            let phase = Complex64::from_polar(1.0, -k * x0);
            *w *= scale * phase;
        }
        work
    }

    /// Rebuild position amplitudes from a continuum-normalized spectrum.
    pub fn from_spectrum(&self, spectrum: &[Complex64]) -> Vec<Complex64> {
        let mut work = spectrum.to_vec();
        let x0 = self.positions[0];
        let scale = self.dk / (2.0 * std::f64::consts::PI).sqrt();
        for (w, &k) in work.iter_mut().zip(&self.wavenumbers) {
            let phase = Complex64::from_polar(1.0, k * x0);
            *w *= scale * phase;
        }
        self.inverse.process(&mut work);
        work
    }

    pub fn norm_position(&self, amps: &[Complex64]) -> f64 {
        (amps.iter().map(|a| a.norm_sqr()).sum::<f64>() * self.dx).sqrt()
    }

    pub fn norm_spectrum(&self, spectrum: &[Complex64]) -> f64 {
        (spectrum.iter().map(|a| a.norm_sqr()).sum::<f64>() * self.dk).sqrt()
    }

    pub fn inner_position(&self, a: &[Complex64], b: &[Complex64]) -> Complex64 {
        a.iter()
            .zip(b)
            .map(|(x, y)| x.conj() * y)
            .sum::<Complex64>()
            * self.dx
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gaussian(grid: &Grid, x0: f64, sigma: f64, k0: f64) -> Vec<Complex64> {
        grid.positions()
            .iter()
            .map(|&x| {
                let envelope = (-((x - x0) / (2.0 * sigma)).powi(2) / 1.0).exp();
                Complex64::from_polar(envelope, k0 * x)
            })
            .collect()
    }

    #[test]
    fn parseval_holds_to_rounding() {
        let grid = Grid::new(1024, 100.0).unwrap();
        let amps = gaussian(&grid, -5.0, 2.0, 3.0);
        let norm_x = grid.norm_position(&amps);
        let spec = grid.spectrum(&amps);
        let norm_k = grid.norm_spectrum(&spec);
        assert!(
            ((norm_x - norm_k) / norm_x).abs() < 1e-12,
            "{norm_x} vs {norm_k}"
        );
    }

    #[test]
    fn spectrum_roundtrip_is_identity() {
        let grid = Grid::new(512, 60.0).unwrap();
        let amps = gaussian(&grid, 3.0, 1.5, -2.0);
        let spec = grid.spectrum(&amps);
        let back = grid.from_spectrum(&spec);
        let err: f64 = amps
            .iter()
            .zip(&back)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        assert!(err < 1e-12, "roundtrip error {err}");
    }

    #[test]
    fn spectrum_peaks_at_carrier_momentum() {
        let grid = Grid::new(2048, 200.0).unwrap();
        let amps = gaussian(&grid, 0.0, 2.0, 5.0);
        let spec = grid.spectrum(&amps);
        let (m_best, _) = spec
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.norm_sqr().total_cmp(&b.1.norm_sqr()))
            .unwrap();
        let k_best = grid.wavenumbers()[m_best];
        assert!((k_best - 5.0).abs() < 2.0 * grid.dk());
    }

    #[test]
    fn analytic_gaussian_transform_matches() {
        // psi(x) = exp(-x^2/(4 s^2)), spectrum (2 s^2/pi)^(1/4)-scaled Gaussian:
        // hat psi(k) = sqrt(2) s^... checked against the closed form
        let grid = Grid::new(4096, 200.0).unwrap();
        let s: f64 = 1.7;
        let amps: Vec<Complex64> = grid
            .positions()
            .iter()
            .map(|&x| Complex64::new((-x * x / (4.0 * s * s)).exp(), 0.0))
            .collect();
        let spec = grid.spectrum(&amps);
        // closed form: (1/sqrt(2pi)) int exp(-x^2/(4s^2) - ikx) dx
        //            = sqrt(2) s exp(-k^2 s^2)
        for (m, &k) in grid.wavenumbers().iter().enumerate() {
            if k.abs() < 2.0 {
                let expected = std::f64::consts::SQRT_2 * s * (-k * k * s * s).exp();
                assert!(
                    (spec[m].re - expected).abs() < 1e-10,
                    "k={k}: {} vs {expected}",
                    spec[m].re
                );
                assert!(spec[m].im.abs() < 1e-10);
            }
        }
    }

    #[test]
    fn rejects_bad_grid_parameters() {
        assert!(Grid::new(1000, 100.0).is_err());
        assert!(Grid::new(1024, -5.0).is_err());
    }
}
