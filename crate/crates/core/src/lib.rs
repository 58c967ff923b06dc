//! Two-dimensional ballistic quantum transport for band-to-band tunneling
//! transistors.
//!
//! The pipeline is: [`device`] description and mesh, [`poisson`] potential,
//! [`bands`] for the energy and kz dependent two-band effective potential,
//! [`hamiltonian`] assembly, [`negf`] open-boundary Green's functions,
//! [`carriers`] densities, the [`scf`] loop, and [`transport`] currents.
//! [`io`] drives batch runs from a TOML description.

pub mod bands;
pub mod carriers;
pub mod device;
pub mod error;
pub mod hamiltonian;
pub mod io;
pub mod negf;
pub mod poisson;
pub mod quad;
pub mod scf;
pub mod transport;
pub mod units;

pub use error::{Error, Result};
