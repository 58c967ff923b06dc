//! Terminal current, the WKB comparator and the local Kane diagnostic.

pub mod current;
pub mod kane;
pub mod wkb;

pub use current::{
    confined_bands, integrate_current, subthreshold_swing, wkb_current, Confinement, CurrentOptions, CurrentResult, CurrentStatus, KzPartial,
};
pub use kane::{field_strength, kane_generation, kane_rate};
pub use wkb::{forbidden_action, slice_wkb, wkb_transmission, WkbResult};
