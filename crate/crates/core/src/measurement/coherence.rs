use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::dynamics::ConditionalTrajectory;
use crate::error::{Error, Result};
use crate::model::{EventKind, PhysicalConfig, PulseSchedule};
use crate::scalar::Real;

/// Post-measurement coherence at one readout amplitude.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct CoherencePoint<T> {
    pub epsilon: T,
    /// `|ρ₀₁'|`, in `[0, 1/2]`.
    pub rho01: T,
    pub pump_on: bool,
    pub stderr: T,
}

/// `½·exp(−2(n_b + n_r))`.
pub fn dephasing_ideal<T: Real>(n_r: T, n_b_total: T) -> T {
    debug_assert!(n_r >= T::zero() && n_b_total >= T::zero());
    T::lit(0.5) * (T::lit(-2.0) * (n_b_total + n_r)).exp()
}

/// Extra dephasing photons charged to a schedule: switch actuation whenever a
/// TIB window runs, pump injection whenever the pump runs.
pub fn scheduled_backaction<T: Real>(config: &PhysicalConfig<T>, schedule: &PulseSchedule<T>) -> T {
    let mut n = T::zero();
    if schedule.has(EventKind::Tib1Transmit) || schedule.has(EventKind::Tib2Transmit) {
        n += config.noise.n_b_tib;
    }
    if schedule.has(EventKind::PumpOn) {
        n += config.noise.n_b_injected;
    }
    n
}

/// Which-path separation `∫κ|α_g−α_e|² dt + |α_g−α_e|²` up to the capture sample.
pub fn integrated_separation<T: Real>(g: &ConditionalTrajectory<T>, e: &ConditionalTrajectory<T>) -> Result<T> {
    if g.times_ns.len() != e.times_ns.len()
        || g.capture_index != e.capture_index
        || g.times_ns.iter().zip(&e.times_ns).any(|(a, b)| a != b)
    {
        return Err(Error::GridMismatch);
    }
    if g.is_empty() {
        return Ok(T::zero());
    }
    let end = g.capture_index.min(g.len() - 1);
    let density = |i: usize| {
        g.loss_r * (g.alpha_r[i] - e.alpha_r[i]).norm_sqr()
            + g.loss_p[i] * (g.alpha_p[i] - e.alpha_p[i]).norm_sqr()
    };
    let mut lost = T::zero();
    for i in 0..end {
        lost += (density(i) + density(i + 1)) * (g.times_ns[i + 1] - g.times_ns[i]) / T::lit(2.0);
    }
    let residual = (g.alpha_r[end] - e.alpha_r[end]).norm_sqr() + (g.alpha_p[end] - e.alpha_p[end]).norm_sqr();
    Ok(lost + residual)
}

/// Coherence left by the measurement described by the two branch trajectories.
pub fn dephasing_from_trajectories<T: Real>(
    traj_g: &ConditionalTrajectory<T>,
    traj_e: &ConditionalTrajectory<T>,
    config: &PhysicalConfig<T>,
    schedule: &PulseSchedule<T>,
) -> Result<T> {
    let d = integrated_separation(traj_g, traj_e)?;
    Ok(dephasing_ideal(d / T::lit(4.0), scheduled_backaction(config, schedule)))
}

/// Columns `epsilon, rho01, stderr, pump_on`.
pub fn write_coherence_csv<'a, T: Real, W: Write>(
    points: impl IntoIterator<Item = &'a CoherencePoint<T>>,
    out: W,
) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["epsilon", "rho01", "stderr", "pump_on"])?;
    for p in points {
        w.write_record(&[
            p.epsilon.to_string(),
            p.rho01.to_string(),
            p.stderr.to_string(),
            p.pump_on.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
