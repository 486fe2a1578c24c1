//! Coupled readout/parametric cavity dynamics: mean-field trajectories per
//! qubit branch, stochastic single shots, and latching.

mod budget;
pub mod controls;
mod engine;
mod latch;
mod output;
mod shots;

pub use budget::EfficiencyBudget;
pub use controls::{ControlTable, Controls};
pub use engine::{integrate_conditional, ConditionalTrajectory, Engine, Modes, RawShot, QubitState};
pub use latch::{latch, latch_with_noise, LatchOutcome};
pub use output::{write_shots_csv, write_trajectory_csv};
pub use shots::{simulate_shot, swap_peaks, swap_scan, ShotRecord, SwapPoint};
