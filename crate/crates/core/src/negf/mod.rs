//! Open-boundary Green's functions for one (E, kz) slice.

pub mod dense;
pub mod lead;
pub mod rgf;
pub mod truncated;

use nalgebra::{Complex, DMatrix};

pub use lead::{lead_self_energy, LeadSelfEnergy};
pub use rgf::{recursive_greens, OpenSystem, RecursiveGreens, Want};
pub use truncated::{truncated_spectral, TruncatedSpectral};

use crate::error::Result;
use crate::hamiltonian::DeviceHamiltonian;

pub type C64 = Complex<f64>;
pub type CMat = DMatrix<C64>;

/// Default retarded broadening, eV.
pub const DEFAULT_ETA: f64 = 1e-6;

/// Per-slice outputs.
#[derive(Clone, Debug, PartialEq)]
pub struct NegfSlice {
    pub energy: f64,
    pub kz: f64,
    pub transmission: f64,
    /// source-injected LDOS per node, 1/(eV nm^2)
    pub d1: Vec<f64>,
    /// drain-injected LDOS per node, 1/(eV nm^2)
    pub d2: Vec<f64>,
    /// largest lead surface-equation residual of this slice
    pub lead_residual: f64,
    /// the energy was nudged off an isolated singular point
    pub shifted: bool,
}

/// Solve one slice with the recursive algorithm.
pub fn solve_slice(h: &DeviceHamiltonian, energy: f64, kz: f64, eta: f64, want: Want) -> Result<NegfSlice> {
    let mut shifted = false;
    let mut e = energy;
    let mut last_err = None;
    for attempt in 0..4 {
        let sys = OpenSystem::new(h, e, eta)?;
        match recursive_greens(&sys, want) {
            Ok(g) => {
                let transmission = g.transmission(&sys);
                let (d1, d2) = if want.ldos { g.ldos(&sys) } else { (Vec::new(), Vec::new()) };
                return Ok(NegfSlice {
                    energy,
                    kz,
                    transmission,
                    d1,
                    d2,
                    lead_residual: sys.source.residual.max(sys.drain.residual),
                    shifted,
                });
            }
            Err(err) => {
                log::debug!("singular slice at E = {e}, attempt {attempt}: {err}");
                last_err = Some(err);
                shifted = true;
                e = energy + 1e-9 * (attempt + 1) as f64;
            }
        }
    }
    Err(last_err.expect("at least one attempt"))
}

pub(crate) fn inverse(m: CMat) -> Result<CMat> {
    m.try_inverse().ok_or_else(|| crate::Error::numerical("singular block in Green's function recursion"))
}
