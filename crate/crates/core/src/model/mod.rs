//! Physical parameters, unit conventions, derived quantities and validation.

mod derived;
mod params;
mod schedule;
mod setup;
mod validate;

pub use derived::{effective_photon_number, leak_amplitude, swap_coupling_from_duration};
pub use params::{
    NoiseEfficiencyParams, ParametricCavityParams, PhysicalConfig, QubitParams, ReadoutCavityParams,
    TibParams,
};
pub use schedule::{DriveShape, EventKind, PulseEvent, PulseSchedule, RamseySettings};
pub use setup::{paper_setup, IntegratorSettings, Setup, PAPER_JSON};
pub use validate::{validate_config, Violation};
