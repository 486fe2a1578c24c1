//! Amplitude-sweep analysis: dephasing and fidelity fits, efficiency and
//! excess backaction with bootstrap uncertainties.

mod analysis;
mod fit;
mod models;
mod sweep;

pub use analysis::{bootstrap, calibrate, characterize, BootstrapErrors, CalibrationResult, FitResiduals, MIN_RESAMPLES};
pub use fit::{
    efficiency, excess_backaction, fit_dephasing, fit_fidelity, weights, DephasingFit, Estimate, Exclusion,
    FidelityFit, FidelityPoint, MIN_FIT_POINTS,
};
pub use models::{DephasingModel, FidelityModel};
pub use sweep::{amplitude_grid, run_characterization_sweep, SweepDataset};
