//! Carrier densities from the band profile.

pub mod closed;
pub mod density;
pub mod fermi;
pub mod pockets;

pub use closed::{closed_boundary_density, ClosedResult};
pub use density::{
    full_density_oracle, negf_densities, Densities, DensityOptions, EnergyGrid, FermiLevels, GridPolicy, OracleOptions,
};
pub use pockets::{fill_pockets, fill_profile, Pocket, PocketReport};
