//! Numerical laboratory for sojourn times and symmetrized time delay in
//! potential scattering.

pub mod classical;
pub mod convergence;
pub mod geometry;
pub mod ode;
pub mod potential;
