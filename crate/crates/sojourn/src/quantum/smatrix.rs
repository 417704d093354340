//! Stationary scattering: transfer matrices, the 2x2 scattering matrix per
//! energy, the spectral transform, and the stationary delay integral.
//!
//! This pipeline never touches the time-domain propagator, so it serves as
//! an independent oracle for the sojourn-time delays: the stationary
//! solutions come from integrating `psi'' = (2V - k^2) psi` across the
//! support and matching plane waves on both sides.

use num_complex::Complex64;
use rayon::prelude::*;
use std::sync::Arc;

use crate::ode::{integrate_adaptive, OdeOptions};
use crate::potential::Potential;

use super::grid::Grid;
use super::state::{EnergyWindow, WaveState};
use super::QuantumError;

/// Transfer matrix mapping plane-wave amplitudes `(a, b)` on the left of the
/// support to `(c, d)` on the right, in the basis `a e^{ikx} + b e^{-ikx}`.
pub fn transfer_matrix(
    potential: &dyn Potential,
    k: f64,
    ode: &OdeOptions,
) -> Result<[[Complex64; 2]; 2], QuantumError> {
    if !(k > 0.0) {
        return Err(QuantumError::InvalidInput(format!(
            "transfer matrix needs k > 0, got {k}"
        )));
    }
    let rho = potential.support_radius();
    let deriv = move |x: f64, y: &[f64; 4]| -> [f64; 4] {
        // y = [Re psi, Im psi, Re psi', Im psi']
        let factor = 2.0 * potential.value(&[x]) - k * k;
        [y[2], y[3], factor * y[0], factor * y[1]]
    };

    let propagate = |psi0: Complex64, dpsi0: Complex64| -> Result<(Complex64, Complex64), QuantumError> {
        let y0 = [psi0.re, psi0.im, dpsi0.re, dpsi0.im];
        let (nodes, _) = integrate_adaptive(&deriv, -rho, y0, rho, ode, |_, _| false)
            .map_err(|e| QuantumError::InvalidInput(format!("stationary solve failed: {e}")))?;
        let y = nodes.last().unwrap().y;
        Ok((Complex64::new(y[0], y[1]), Complex64::new(y[2], y[3])))
    };

    let ik = Complex64::new(0.0, k);
    let mut columns = [[Complex64::default(); 2]; 2];
    for (col, (a, b)) in [(1.0, 0.0), (0.0, 1.0)].iter().enumerate() {
        let e_m = Complex64::from_polar(1.0, -k * rho); // e^{-ik rho}
        let e_p = Complex64::from_polar(1.0, k * rho);
        let psi0 = a * e_m + b * e_p;
        let dpsi0 = ik * (a * e_m - b * e_p);
        let (psi1, dpsi1) = propagate(psi0, dpsi0)?;
        // match c e^{ikx} + d e^{-ikx} at x = +rho
        let c = 0.5 * e_m * (psi1 + dpsi1 / ik);
        let d = 0.5 * e_p * (psi1 - dpsi1 / ik);
        columns[col] = [c, d];
    }
    Ok([
        [columns[0][0], columns[1][0]],
        [columns[0][1], columns[1][1]],
    ])
}

/// Scattering matrix at one energy in the incoming-direction basis
/// `(omega = +1, omega = -1)`: transmission on the diagonal, reflections off
/// it.
pub fn s_matrix_at(
    potential: &dyn Potential,
    k: f64,
    ode: &OdeOptions,
) -> Result<[[Complex64; 2]; 2], QuantumError> {
    let m = transfer_matrix(potential, k, ode)?;
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    let t_left = det / m[1][1];
    let t_right = 1.0 / m[1][1];
    let r_left = -m[1][0] / m[1][1];
    let r_right = m[0][1] / m[1][1];
    Ok([[t_left, r_right], [r_left, t_right]])
}

/// Scattering matrices sampled on a uniform wavenumber grid.
#[derive(Debug, Clone)]
pub struct SMatrix1D {
    pub wavenumbers: Vec<f64>,
    pub energies: Vec<f64>,
    pub matrices: Vec<[[Complex64; 2]; 2]>,
}

impl SMatrix1D {
    /// Build on an explicit wavenumber grid (must be positive, increasing,
    /// uniformly spaced: the stationary derivative uses a uniform stencil).
    pub fn build(
        potential: &dyn Potential,
        wavenumbers: Vec<f64>,
        ode: &OdeOptions,
    ) -> Result<Self, QuantumError> {
        if wavenumbers.len() < 5 {
            return Err(QuantumError::InvalidInput(
                "scattering matrix grid needs at least 5 energies".into(),
            ));
        }
        if wavenumbers[0] <= 0.0 {
            return Err(QuantumError::InvalidInput(
                "scattering energies must be positive".into(),
            ));
        }
        let dk = wavenumbers[1] - wavenumbers[0];
        if wavenumbers
            .windows(2)
            .any(|w| ((w[1] - w[0]) - dk).abs() > 1e-9 * dk)
        {
            return Err(QuantumError::InvalidInput(
                "scattering wavenumber grid must be uniform".into(),
            ));
        }
        let matrices: Vec<_> = wavenumbers
            .par_iter()
            .map(|&k| s_matrix_at(potential, k, ode))
            .collect::<Result<_, _>>()?;
        let energies = wavenumbers.iter().map(|&k| 0.5 * k * k).collect();
        Ok(Self {
            wavenumbers,
            energies,
            matrices,
        })
    }

    /// Grid wavenumbers whose kinetic energy lies in the window, padded by
    /// `pad` spectral steps on each side.
    pub fn grid_window_wavenumbers(grid: &Arc<Grid>, window: &EnergyWindow, pad: usize) -> Vec<f64> {
        let dk = grid.dk();
        let m_lo = (window.k_min() / dk).floor() as isize - pad as isize;
        let m_hi = (window.k_max() / dk).ceil() as isize + pad as isize;
        (m_lo.max(1)..=m_hi)
            .map(|m| m as f64 * dk)
            .filter(|&k| k < grid.nyquist())
            .collect()
    }

    pub fn unitarity_defect(&self) -> f64 {
        let mut worst = 0.0f64;
        for s in &self.matrices {
            // S* S - 1, max entry magnitude
            for i in 0..2 {
                for j in 0..2 {
                    let mut acc = Complex64::default();
                    for (l, row) in s.iter().enumerate() {
                        acc += s[l][i].conj() * row[j];
                        let _ = l;
                    }
                    if i == j {
                        acc -= 1.0;
                    }
                    worst = worst.max(acc.norm());
                }
            }
        }
        worst
    }

    pub fn check_unitarity(&self, tol: f64) -> Result<(), QuantumError> {
        let defect = self.unitarity_defect();
        if defect > tol {
            let worst = self
                .matrices
                .iter()
                .zip(&self.energies)
                .map(|(_, &e)| e)
                .next()
                .unwrap_or(0.0);
            return Err(QuantumError::UnitarityDefect {
                defect,
                energy: worst,
            });
        }
        Ok(())
    }

    /// Largest entry-wise change between neighboring energies; shrinks as the
    /// grid refines for continuous scattering matrices.
    pub fn continuity_defect(&self) -> f64 {
        self.matrices
            .windows(2)
            .map(|w| {
                let mut d = 0.0f64;
                for i in 0..2 {
                    for j in 0..2 {
                        d = d.max((w[1][i][j] - w[0][i][j]).norm());
                    }
                }
                d
            })
            .fold(0.0, f64::max)
    }

    /// `dS/dlambda` by the five-point uniform stencil in `k`, divided by
    /// `dlambda/dk = k`. Defined away from the two outermost points on each
    /// side.
    pub fn ds_dlambda(&self, i: usize) -> Option<[[Complex64; 2]; 2]> {
        if i < 2 || i + 2 >= self.matrices.len() {
            return None;
        }
        let dk = self.wavenumbers[1] - self.wavenumbers[0];
        let k = self.wavenumbers[i];
        let mut out = [[Complex64::default(); 2]; 2];
        for r in 0..2 {
            for c in 0..2 {
                let ds_dk = (-self.matrices[i + 2][r][c] + 8.0 * self.matrices[i + 1][r][c]
                    - 8.0 * self.matrices[i - 1][r][c]
                    + self.matrices[i - 2][r][c])
                    / (12.0 * dk);
                out[r][c] = ds_dk / k;
            }
        }
        Some(out)
    }

    /// Largest `|dS/dlambda|` entry over the grid; a resonance inside the
    /// window shows up as a spike here.
    pub fn max_energy_derivative(&self) -> f64 {
        (2..self.matrices.len().saturating_sub(2))
            .filter_map(|i| self.ds_dlambda(i))
            .map(|d| {
                d.iter()
                    .flat_map(|row| row.iter().map(|e| e.norm()))
                    .fold(0.0, f64::max)
            })
            .fold(0.0, f64::max)
    }
}

/// Energy-resolved amplitudes of a state on the positive grid wavenumbers:
/// `(2 lambda)^{-1/4} spectrum(+-k)`, the two sphere components in d = 1.
#[derive(Debug, Clone)]
pub struct SpectralAmplitudes {
    pub wavenumbers: Vec<f64>,
    pub lambdas: Vec<f64>,
    pub plus: Vec<Complex64>,
    pub minus: Vec<Complex64>,
}

impl SpectralAmplitudes {
    /// `|phi(lambda)|^2` at index `i`.
    pub fn density(&self, i: usize) -> f64 {
        self.plus[i].norm_sqr() + self.minus[i].norm_sqr()
    }

    /// Trapezoid weight in `lambda` at index `i` (nonuniform grid).
    pub fn weight(&self, i: usize) -> f64 {
        let n = self.lambdas.len();
        if n < 2 {
            return 0.0;
        }
        if i == 0 {
            0.5 * (self.lambdas[1] - self.lambdas[0])
        } else if i + 1 == n {
            0.5 * (self.lambdas[n - 1] - self.lambdas[n - 2])
        } else {
            0.5 * (self.lambdas[i + 1] - self.lambdas[i - 1])
        }
    }

    /// `int dlambda |phi(lambda)|^2`; equals the squared norm when the
    /// transform is evaluated on the full admissible window.
    pub fn total_mass(&self) -> f64 {
        (0..self.lambdas.len())
            .map(|i| self.weight(i) * self.density(i))
            .sum()
    }
}

/// The spectral transform of a state on the given positive wavenumbers,
/// which must be grid wavenumbers (no interpolation happens here).
pub fn spectral_transform(
    state: &WaveState,
    wavenumbers: &[f64],
) -> Result<SpectralAmplitudes, QuantumError> {
    let grid = &state.grid;
    let spectrum = grid.spectrum(&state.amps);
    let dk = grid.dk();
    let n = grid.len();
    let mut plus = Vec::with_capacity(wavenumbers.len());
    let mut minus = Vec::with_capacity(wavenumbers.len());
    let mut lambdas = Vec::with_capacity(wavenumbers.len());
    for &k in wavenumbers {
        let m = (k / dk).round() as usize;
        if m == 0 || m >= n / 2 || (k - m as f64 * dk).abs() > 1e-9 * dk {
            return Err(QuantumError::InvalidInput(format!(
                "wavenumber {k} is not on the spectral grid"
            )));
        }
        let lambda = 0.5 * k * k;
        let scale = (2.0 * lambda).powf(-0.25);
        plus.push(scale * spectrum[m]);
        minus.push(scale * spectrum[n - m]);
        lambdas.push(lambda);
    }
    Ok(SpectralAmplitudes {
        wavenumbers: wavenumbers.to_vec(),
        lambdas,
        plus,
        minus,
    })
}

/// One energy sample of the stationary delay integrand.
#[derive(Debug, Clone, Copy)]
pub struct EwSample {
    pub lambda: f64,
    pub integrand: f64,
    pub s_matrix: [[Complex64; 2]; 2],
}

/// Stationary delay: `-i int dlambda <phi(lambda), S* dS/dlambda phi(lambda)>`.
///
/// The scattering matrices must be sampled on grid wavenumbers so the
/// state's spectrum is used exactly; the windowed state vanishes at the grid
/// edges, so dropping the stencil margin loses nothing.
pub fn stationary_ew_delay(
    state: &WaveState,
    smatrix: &SMatrix1D,
    unitarity_tol: f64,
) -> Result<(f64, Vec<EwSample>), QuantumError> {
    smatrix.check_unitarity(unitarity_tol)?;
    let amplitudes = spectral_transform(state, &smatrix.wavenumbers)?;
    let mut total = 0.0;
    let mut samples = Vec::new();
    for i in 0..smatrix.wavenumbers.len() {
        let Some(ds) = smatrix.ds_dlambda(i) else {
            continue;
        };
        let s = &smatrix.matrices[i];
        let phi = [amplitudes.plus[i], amplitudes.minus[i]];
        // S* dS/dlambda phi
        let mut sds_phi = [Complex64::default(); 2];
        for r in 0..2 {
            for c in 0..2 {
                let mut s_star_ds = Complex64::default();
                for l in 0..2 {
                    s_star_ds += s[l][r].conj() * ds[l][c];
                }
                sds_phi[r] += s_star_ds * phi[c];
            }
        }
        let inner = phi[0].conj() * sds_phi[0] + phi[1].conj() * sds_phi[1];
        let integrand = (-Complex64::i() * inner).re;
        total += amplitudes.weight(i) * integrand;
        samples.push(EwSample {
            lambda: amplitudes.lambdas[i],
            integrand,
            s_matrix: *s,
        });
    }
    Ok((total, samples))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potential::{BumpPotential, FreePotential};
    use crate::quantum::state::prepare_state;

    fn ode() -> OdeOptions {
        OdeOptions {
            rtol: 1e-12,
            atol: 1e-13,
            h_initial: 1e-3,
            h_max: 0.01,
            max_steps: 5_000_000,
        }
    }

    #[test]
    fn free_potential_gives_identity_s_matrix() {
        let s = s_matrix_at(&FreePotential, 5.0, &ode()).unwrap();
        assert!((s[0][0] - 1.0).norm() < 1e-10);
        assert!((s[1][1] - 1.0).norm() < 1e-10);
        assert!(s[0][1].norm() < 1e-12);
        assert!(s[1][0].norm() < 1e-12);
    }

    #[test]
    fn transmission_plus_reflection_is_unity() {
        let potential = BumpPotential::new(-5.0, 0.6);
        for k in [1.0, 2.5, 5.0] {
            let s = s_matrix_at(&potential, k, &ode()).unwrap();
            let sum = s[0][0].norm_sqr() + s[1][0].norm_sqr();
            assert!((sum - 1.0).abs() < 1e-9, "|t|^2 + |r|^2 = {sum} at k={k}");
        }
    }

    #[test]
    fn unitarity_defect_small_over_a_window() {
        let potential = BumpPotential::new(-4.0, 2.0);
        let ks: Vec<f64> = (0..40).map(|i| 4.0 + 0.05 * i as f64).collect();
        let sm = SMatrix1D::build(&potential, ks, &ode()).unwrap();
        assert!(sm.unitarity_defect() < 1e-8, "defect {}", sm.unitarity_defect());
        sm.check_unitarity(1e-8).unwrap();
    }

    #[test]
    fn continuity_improves_under_refinement() {
        let potential = BumpPotential::new(-4.0, 2.0);
        let coarse: Vec<f64> = (0..10).map(|i| 4.0 + 0.1 * i as f64).collect();
        let fine: Vec<f64> = (0..19).map(|i| 4.0 + 0.05 * i as f64).collect();
        let sm_c = SMatrix1D::build(&potential, coarse, &ode()).unwrap();
        let sm_f = SMatrix1D::build(&potential, fine, &ode()).unwrap();
        assert!(sm_f.continuity_defect() < sm_c.continuity_defect());
    }

    #[test]
    fn symmetric_potential_has_equal_transmissions() {
        let potential = BumpPotential::new(-5.0, 0.6);
        let s = s_matrix_at(&potential, 3.0, &ode()).unwrap();
        assert!((s[0][0] - s[1][1]).norm() < 1e-10);
        assert!((s[1][0] - s[0][1]).norm() < 1e-10);
    }

    #[test]
    fn spectral_transform_is_an_isometry() {
        let grid = Grid::new(8192, 400.0).unwrap();
        let window = EnergyWindow::new(10.0, 15.0).unwrap();
        let state = prepare_state(&grid, -30.0, 2.0, 5.0, window, 0.15).unwrap();
        let ks = SMatrix1D::grid_window_wavenumbers(&grid, &window, 8);
        let amps = spectral_transform(&state, &ks).unwrap();
        let mass = amps.total_mass();
        assert!(
            (mass - 1.0).abs() < 1e-8,
            "int dlambda |phi(lambda)|^2 = {mass}"
        );
    }

    #[test]
    fn ew_delay_vanishes_for_free_motion() {
        let grid = Grid::new(8192, 400.0).unwrap();
        let window = EnergyWindow::new(10.0, 15.0).unwrap();
        let state = prepare_state(&grid, -30.0, 2.0, 5.0, window, 0.15).unwrap();
        let ks = SMatrix1D::grid_window_wavenumbers(&grid, &window, 8);
        let sm = SMatrix1D::build(&FreePotential, ks, &ode()).unwrap();
        let (value, _) = stationary_ew_delay(&state, &sm, 1e-8).unwrap();
        assert!(value.abs() < 1e-10, "free EW delay {value}");
    }

    #[test]
    fn ew_delay_matches_narrow_band_phase_derivative() {
        // narrow packet: the delay approaches d(arg t)/dlambda at the carrier
        let potential = BumpPotential::new(-4.0, 2.0);
        let grid = Grid::new(8192, 400.0).unwrap();
        let window = EnergyWindow::new(11.0, 14.0).unwrap();
        let state = prepare_state(&grid, -40.0, 6.0, 5.0, window, 0.1).unwrap();
        let ks = SMatrix1D::grid_window_wavenumbers(&grid, &window, 8);
        let sm = SMatrix1D::build(&potential, ks, &ode()).unwrap();
        let (value, _) = stationary_ew_delay(&state, &sm, 1e-8).unwrap();

        let k0 = 5.0f64;
        let h = 1e-4;
        let phase = |k: f64| s_matrix_at(&potential, k, &ode()).unwrap()[0][0].arg();
        let dphase_dlambda = (phase(k0 + h) - phase(k0 - h)) / (2.0 * h) / k0;
        assert!(
            (value - dphase_dlambda).abs() < 0.05 * dphase_dlambda.abs().max(0.01),
            "EW {value} vs narrow-band {dphase_dlambda}"
        );
    }
}
