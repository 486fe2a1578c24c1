//! Simulation and calibration toolkit for dispersive qubit readout through a
//! switched parametric amplifier.
//!
//! The readout cavity is driven, its field is swapped into a parametric
//! cavity through a tunable switch, amplified and latched by a flux pump, and
//! released to the output line. [`dynamics`] integrates that sequence,
//! [`measurement`] turns trajectories and shots into fidelity and coherence,
//! and [`calibration`] extracts efficiency and excess backaction from an
//! amplitude sweep.
//!
//! Everything numeric is generic over [`Real`] (`f32` or `f64`); the aliases
//! below fix the scalar for common use.

// Negated comparisons are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod calibration;
pub mod dynamics;
pub mod error;
pub mod measurement;
pub mod model;
pub mod optim;
pub mod rng;
pub mod scalar;

pub use error::{Error, Result};
pub use scalar::{mhz_to_rad_per_ns, Real};

pub type Config = model::PhysicalConfig<f64>;
pub type Schedule = model::PulseSchedule<f64>;
pub type Setup = model::Setup<f64>;
pub type Trajectory = dynamics::ConditionalTrajectory<f64>;
pub type Shot = dynamics::ShotRecord<f64>;
pub type Dataset = calibration::SweepDataset<f64>;
pub type Calibration = calibration::CalibrationResult<f64>;

pub type Config32 = model::PhysicalConfig<f32>;
pub type Schedule32 = model::PulseSchedule<f32>;
pub type Setup32 = model::Setup<f32>;
pub type Trajectory32 = dynamics::ConditionalTrajectory<f32>;
pub type Shot32 = dynamics::ShotRecord<f32>;
pub type Dataset32 = calibration::SweepDataset<f32>;
pub type Calibration32 = calibration::CalibrationResult<f32>;
