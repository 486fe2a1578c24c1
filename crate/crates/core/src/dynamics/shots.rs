//! Single-shot records and the swap tune-up scan.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::engine::{Engine, QubitState};
use crate::error::{Error, Result};
use crate::measurement::{readout_fidelity, threshold_decide, HistogramPair};
use crate::model::{PhysicalConfig, PulseSchedule};
use crate::rng::SeedStream;
use crate::scalar::Real;

/// One stochastic run of the measurement sequence.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct ShotRecord<T> {
    /// Nominal preparation: ground is the `0` pulse, excited the `π` pulse.
    pub qubit_prep: QubitState,
    pub latched_phase: T,
    pub x_measured: T,
    pub decision: QubitState,
    pub seed: u64,
}

impl QubitState {
    /// Label of the corresponding preparation pulse.
    pub fn prep_label(self) -> &'static str {
        match self {
            QubitState::Ground => "0",
            QubitState::Excited => "pi",
        }
    }

    pub fn decision_label(self) -> &'static str {
        match self {
            QubitState::Ground => "g",
            QubitState::Excited => "e",
        }
    }

    fn stream_tag(self) -> u64 {
        match self {
            QubitState::Ground => 0,
            QubitState::Excited => 1,
        }
    }
}

impl<T: Real> Engine<T> {
    pub fn shot(&self, prepared: QubitState, seed: u64) -> Result<ShotRecord<T>> {
        let raw = self.raw_shot(prepared, seed)?;
        Ok(ShotRecord {
            qubit_prep: prepared,
            latched_phase: raw.latched_phase,
            x_measured: raw.x_measured,
            decision: threshold_decide(raw.x_measured, T::zero()),
            seed,
        })
    }

    /// `n` shots with seeds drawn from `stream`, run in parallel.
    pub fn shots(&self, prepared: QubitState, n: usize, stream: SeedStream) -> Result<Vec<ShotRecord<T>>> {
        let sub = stream.child(prepared.stream_tag());
        (0..n as u64)
            .into_par_iter()
            .map(|i| self.shot(prepared, sub.seed(i)))
            .collect()
    }

    /// Measured quadratures for both preparations.
    pub fn histograms(&self, n: usize, stream: SeedStream) -> Result<HistogramPair<T>> {
        let xs = |q| -> Result<Vec<T>> {
            Ok(self.shots(q, n, stream)?.into_iter().map(|s| s.x_measured).collect())
        };
        Ok(HistogramPair::new(xs(QubitState::Ground)?, xs(QubitState::Excited)?))
    }
}

/// One stochastic shot. Prefer [`Engine::shot`] when running many.
pub fn simulate_shot<T: Real>(
    config: &PhysicalConfig<T>,
    schedule: &PulseSchedule<T>,
    prepared: QubitState,
    seed: u64,
) -> Result<ShotRecord<T>> {
    Engine::new(config, schedule)?.shot(prepared, seed)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct SwapPoint<T> {
    pub duration_ns: T,
    pub fidelity: T,
    pub stderr: T,
}

/// Readout fidelity versus TIB1 transmit duration.
pub fn swap_scan<T: Real>(
    config: &PhysicalConfig<T>,
    schedule: &PulseSchedule<T>,
    durations_ns: &[T],
    shots: usize,
    master_seed: u64,
) -> Result<Vec<SwapPoint<T>>> {
    if let Some(d) = durations_ns.iter().find(|d| !(**d > T::zero())) {
        return Err(Error::Domain(format!("swap duration must be positive, got {d}")));
    }
    let root = SeedStream::new(master_seed);
    durations_ns
        .iter()
        .enumerate()
        .map(|(i, &d)| {
            let engine = Engine::new(config, &schedule.with_swap_duration(d))?;
            let hist = engine.histograms(shots, root.child(i as u64))?;
            let (fidelity, stderr) = readout_fidelity(&hist)?;
            Ok(SwapPoint {
                duration_ns: d,
                fidelity,
                stderr,
            })
        })
        .collect()
}

/// Locations of the first two fidelity maxima, refined by a parabola through
/// each discrete peak and its neighbours.
pub fn swap_peaks<T: Real>(scan: &[SwapPoint<T>]) -> Vec<T> {
    let mut peaks = Vec::new();
    for i in 1..scan.len().saturating_sub(1) {
        let (a, b, c) = (scan[i - 1].fidelity, scan[i].fidelity, scan[i + 1].fidelity);
        if b > a && b >= c {
            let h = scan[i + 1].duration_ns - scan[i].duration_ns;
            let curv = a - T::lit(2.0) * b + c;
            let offset = if curv < T::zero() {
                (a - c) / (T::lit(2.0) * curv) * h
            } else {
                T::zero()
            };
            peaks.push(scan[i].duration_ns + offset);
        }
    }
    peaks
}
