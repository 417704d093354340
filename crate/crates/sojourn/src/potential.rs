//! Compactly supported interaction potentials.
//!
//! The scattering machinery only assumes a real potential that vanishes
//! identically outside a finite radius, exposed through the [`Potential`]
//! trait. The canonical interaction is the radial [`BumpPotential`], which is
//! smooth everywhere and exactly zero for `|x| >= rho`.

/// A real potential with compact support.
///
/// Implementations must guarantee `value` and `gradient` vanish identically
/// for `|x| >= support_radius()`; both the classical integrator and the
/// quantum propagator rely on the motion being exactly free outside that
/// shell.
pub trait Potential: Send + Sync {
    /// Potential value at the point `x` (any dimension).
    fn value(&self, x: &[f64]) -> f64;

    /// Gradient at `x`, written into `out`.
    fn gradient(&self, x: &[f64], out: &mut [f64]);

    /// Radius of the support: the potential is exactly zero outside.
    fn support_radius(&self) -> f64;
}

/// Radial bump `V(x) = v0 * exp(1 - 1/(1 - (|x|/rho)^2))` for `|x| < rho`.
///
/// Smooth on all of space, exactly compactly supported, with barrier height
/// (or well depth) `v0` at the origin. `v0 > 0` is repulsive, `v0 < 0`
/// attractive.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BumpPotential {
    /// Strength at the origin.
    pub v0: f64,
    /// Support radius.
    pub rho: f64,
}

impl BumpPotential {
    pub fn new(v0: f64, rho: f64) -> Self {
        assert!(rho > 0.0, "support radius must be positive");
        Self { v0, rho }
    }

    /// Profile as a function of the radius `s = |x|`.
    pub fn radial(&self, s: f64) -> f64 {
        let u = (s / self.rho).powi(2);
        if u >= 1.0 {
            0.0
        } else {
            self.v0 * (1.0 - 1.0 / (1.0 - u)).exp()
        }
    }

    /// Derivative of the radial profile with respect to `s`.
    pub fn radial_derivative(&self, s: f64) -> f64 {
        let u = (s / self.rho).powi(2);
        if u >= 1.0 {
            0.0
        } else {
            // d/ds exp(1 - 1/(1-u)) = -V(s) * (2 s / rho^2) / (1-u)^2
            let v = self.v0 * (1.0 - 1.0 / (1.0 - u)).exp();
            -v * (2.0 * s / self.rho.powi(2)) / (1.0 - u).powi(2)
        }
    }
}

impl Potential for BumpPotential {
    fn value(&self, x: &[f64]) -> f64 {
        let s2: f64 = x.iter().map(|c| c * c).sum();
        let u = s2 / (self.rho * self.rho);
        if u >= 1.0 {
            0.0
        } else {
            self.v0 * (1.0 - 1.0 / (1.0 - u)).exp()
        }
    }

    fn gradient(&self, x: &[f64], out: &mut [f64]) {
        let s2: f64 = x.iter().map(|c| c * c).sum();
        let u = s2 / (self.rho * self.rho);
        if u >= 1.0 {
            out.fill(0.0);
        } else {
            // grad V = -V(x) * (2/rho^2) / (1-u)^2 * x, regular at the origin
            let v = self.v0 * (1.0 - 1.0 / (1.0 - u)).exp();
            let factor = -v * 2.0 / (self.rho * self.rho) / (1.0 - u).powi(2);
            for (o, c) in out.iter_mut().zip(x) {
                *o = factor * c;
            }
        }
    }

    fn support_radius(&self) -> f64 {
        self.rho
    }
}

/// A potential moved away from the origin.
///
/// Keeps compact support; the reported support radius is measured from the
/// origin, so region-containment gates stay valid. An off-center interaction
/// breaks angular momentum conservation about the origin, which is what makes
/// the incoming and outgoing impact parameters differ.
#[derive(Debug, Clone, Copy)]
pub struct TranslatedPotential<P> {
    pub inner: P,
    pub center: [f64; 2],
}

impl<P: Potential> TranslatedPotential<P> {
    pub fn new(inner: P, center: [f64; 2]) -> Self {
        Self { inner, center }
    }

    fn shift(&self, x: &[f64]) -> [f64; 2] {
        let mut out = [0.0; 2];
        for (c, (xi, ci)) in out.iter_mut().zip(x.iter().zip(&self.center)) {
            *c = xi - ci;
        }
        out
    }
}

impl<P: Potential> Potential for TranslatedPotential<P> {
    fn value(&self, x: &[f64]) -> f64 {
        let shifted = self.shift(x);
        self.inner.value(&shifted[..x.len()])
    }

    fn gradient(&self, x: &[f64], out: &mut [f64]) {
        let shifted = self.shift(x);
        self.inner.gradient(&shifted[..x.len()], out)
    }

    fn support_radius(&self) -> f64 {
        let offset = self.center.iter().map(|c| c * c).sum::<f64>().sqrt();
        self.inner.support_radius() + offset
    }
}

/// Free motion; useful as the trivial reference interaction.
#[derive(Debug, Clone, Copy, Default)]
pub struct FreePotential;

impl Potential for FreePotential {
    fn value(&self, _x: &[f64]) -> f64 {
        0.0
    }

    fn gradient(&self, _x: &[f64], out: &mut [f64]) {
        out.fill(0.0);
    }

    fn support_radius(&self) -> f64 {
        0.0
    }
}
