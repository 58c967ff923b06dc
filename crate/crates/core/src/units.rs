//! Physical constants (CODATA 2018) and the unit system used across the crate.
//!
//! Energies are in eV, lengths in nm, masses in units of the free electron
//! mass, temperatures in kelvin, densities at interfaces in cm^-3.

use std::f64::consts::PI;

pub const HBAR: f64 = 1.054_571_817e-34;
pub const ELECTRON_MASS: f64 = 9.109_383_701_5e-31;
pub const ELEMENTARY_CHARGE: f64 = 1.602_176_634e-19;
pub const BOLTZMANN: f64 = 1.380_649e-23;
pub const VACUUM_PERMITTIVITY: f64 = 8.854_187_812_8e-12;

/// hbar^2 / (2 m0) in eV nm^2.
pub fn hbar2_over_2m0() -> f64 {
    HBAR * HBAR / (2.0 * ELECTRON_MASS) / ELEMENTARY_CHARGE * 1e18
}

/// kT in eV.
pub fn thermal_energy(temperature: f64) -> f64 {
    BOLTZMANN * temperature / ELEMENTARY_CHARGE
}

/// e / eps0 in V nm. Multiplied by a density in nm^-3 this gives V / nm^2.
pub fn charge_over_eps0() -> f64 {
    ELEMENTARY_CHARGE / VACUUM_PERMITTIVITY * 1e9
}

/// nm^-3 per cm^-3.
pub const PER_CM3_TO_PER_NM3: f64 = 1e-21;

/// q^2 / (pi^2 hbar) in A. Times an integral over E (eV) and kz (1/nm)
/// this yields a current per unit width in A/nm.
pub fn current_prefactor() -> f64 {
    ELEMENTARY_CHARGE * ELEMENTARY_CHARGE / (PI * PI * HBAR)
}

/// Squared wavevector (nm^-2) for a kinetic energy `e` (eV) and mass `m` (m0).
pub fn k_squared(mass: f64, energy: f64) -> f64 {
    mass * energy / hbar2_over_2m0()
}

/// 2D thermal density factor m kT / (2 pi hbar^2) in nm^-2.
pub fn thermal_2d(mass: f64, kt: f64) -> f64 {
    mass * kt / (4.0 * PI * hbar2_over_2m0())
}

/// Bulk effective density of states 2 (m kT / (2 pi hbar^2))^{3/2} in cm^-3.
pub fn effective_dos(mass: f64, kt: f64) -> f64 {
    2.0 * thermal_2d(mass, kt).powf(1.5) / PER_CM3_TO_PER_NM3
}
