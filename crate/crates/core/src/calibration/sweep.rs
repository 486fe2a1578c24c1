use std::io::{Read, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::fit::FidelityPoint;
use crate::dynamics::Engine;
use crate::error::{Error, Result};
use crate::measurement::{
    fit_fringe, fit_fringe_fixed, fringe_probabilities, measurement_coherence_with, readout_fidelity,
    sample_fringe, coherence_ratio, CoherencePoint,
};
use crate::model::{EventKind, Setup};
use crate::rng::SeedStream;
use crate::scalar::Real;

/// Fidelity and coherence versus readout amplitude.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct SweepDataset<T> {
    pub epsilons: Vec<T>,
    pub fidelity: Vec<FidelityPoint<T>>,
    pub coherence_off: Vec<CoherencePoint<T>>,
    pub coherence_on: Vec<CoherencePoint<T>>,
    pub shots_per_point: usize,
    /// Error message for every point whose simulation failed.
    pub failures: Vec<Option<String>>,
}

const COLUMNS: [&str; 8] = [
    "epsilon",
    "fr",
    "fr_stderr",
    "rho01_off",
    "rho01_off_stderr",
    "rho01_on",
    "rho01_on_stderr",
    "failed",
];

impl<T: Real> SweepDataset<T> {
    pub fn len(&self) -> usize {
        self.epsilons.len()
    }

    pub fn is_empty(&self) -> bool {
        self.epsilons.is_empty()
    }

    pub fn failed_points(&self) -> usize {
        self.failures.iter().filter(|f| f.is_some()).count()
    }

    /// Index-aligned lists, strictly increasing amplitudes starting at zero.
    pub fn check_shape(&self) -> Result<()> {
        let n = self.epsilons.len();
        if [self.fidelity.len(), self.coherence_off.len(), self.coherence_on.len(), self.failures.len()]
            .iter()
            .any(|&m| m != n)
        {
            return Err(Error::Schema("dataset columns have different lengths".into()));
        }
        if self.epsilons.first() != Some(&T::zero()) {
            return Err(Error::Precondition("the first amplitude must be epsilon = 0".into()));
        }
        if self.epsilons.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Precondition("amplitudes must be strictly increasing".into()));
        }
        Ok(())
    }

    /// CSV with columns
    /// `epsilon, fr, fr_stderr, rho01_off, rho01_off_stderr, rho01_on, rho01_on_stderr, failed`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(COLUMNS)?;
        for i in 0..self.len() {
            let (f, off, on) = (&self.fidelity[i], &self.coherence_off[i], &self.coherence_on[i]);
            w.write_record(&[
                self.epsilons[i].to_string(),
                f.fidelity.to_string(),
                f.stderr.to_string(),
                off.rho01.to_string(),
                off.stderr.to_string(),
                on.rho01.to_string(),
                on.stderr.to_string(),
                u8::from(self.failures[i].is_some()).to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    /// Parse a dataset written by [`SweepDataset::write_csv`]. A missing or
    /// malformed column is a schema error naming the column.
    pub fn read_csv<R: Read>(input: R, shots_per_point: usize) -> Result<Self> {
        let mut r = csv::Reader::from_reader(input);
        let headers = r.headers()?.clone();
        let mut idx = [0usize; 8];
        for (k, name) in COLUMNS.iter().enumerate() {
            idx[k] = headers
                .iter()
                .position(|h| h.trim() == *name)
                .ok_or_else(|| Error::Schema(format!("missing column `{name}`")))?;
        }
        let mut ds = SweepDataset {
            epsilons: Vec::new(),
            fidelity: Vec::new(),
            coherence_off: Vec::new(),
            coherence_on: Vec::new(),
            shots_per_point,
            failures: Vec::new(),
        };
        for (line, rec) in r.records().enumerate() {
            let rec = rec?;
            let get = |k: usize| -> Result<T> {
                let raw = rec.get(idx[k]).unwrap_or("").trim();
                raw.parse::<f64>()
                    .map(T::lit)
                    .map_err(|_| Error::Schema(format!("column `{}` row {}: cannot parse {raw:?}", COLUMNS[k], line + 1)))
            };
            let eps = get(0)?;
            ds.epsilons.push(eps);
            ds.fidelity.push(FidelityPoint {
                epsilon: eps,
                fidelity: get(1)?,
                stderr: get(2)?,
            });
            ds.coherence_off.push(CoherencePoint {
                epsilon: eps,
                rho01: get(3)?,
                stderr: get(4)?,
                pump_on: false,
            });
            ds.coherence_on.push(CoherencePoint {
                epsilon: eps,
                rho01: get(5)?,
                stderr: get(6)?,
                pump_on: true,
            });
            ds.failures.push((get(7)? != T::zero()).then(|| "failed in source run".to_string()));
        }
        Ok(ds)
    }
}

struct PointResult<T> {
    fidelity: FidelityPoint<T>,
    off: CoherencePoint<T>,
    on: CoherencePoint<T>,
}

const TAG_SHOTS: u64 = 1;
const TAG_RAMSEY: u64 = 2;

/// Coherence from a simulated Ramsey record, against a reference fitted once per sweep point.
fn ramsey_point<T: Real>(
    engine: &Engine<T>,
    reference_fit: &crate::measurement::FringeFit<T>,
    delays: &[T],
    shots: u64,
    stream: SeedStream,
) -> Result<(T, T)> {
    let cfg = engine.config();
    let t2_ns = cfg.qubit.t2_us * T::lit(1e3);
    let c = measurement_coherence_with(engine)?;
    let probs = fringe_probabilities(cfg, &engine.schedule().ramsey, c, delays);
    let data = sample_fringe(&probs, Some(shots), &mut stream.rng(0));
    let fit = fit_fringe_fixed(delays, &data, t2_ns, reference_fit.detuning_mhz)?;
    let (rho, err) = coherence_ratio(&fit, reference_fit);
    Ok((rho.max(T::zero()).min(T::lit(0.5)), err))
}

fn run_point<T: Real>(
    on: &Engine<T>,
    off: &Engine<T>,
    eps: T,
    shots: usize,
    stream: SeedStream,
) -> Result<PointResult<T>> {
    let on = on.with_amplitude(eps);
    let off = off.with_amplitude(eps);
    let hist = on.histograms(shots, stream.child(TAG_SHOTS))?;
    let (fr, fr_err) = readout_fidelity(&hist)?;
    let settings = &on.schedule().ramsey;
    let delays = settings.delays_ns();
    let t2_ns = on.config().qubit.t2_us * T::lit(1e3);
    let ramsey = stream.child(TAG_RAMSEY);
    let ref_probs = fringe_probabilities(on.config(), settings, T::lit(0.5), &delays);
    let ref_data = sample_fringe(&ref_probs, Some(shots as u64), &mut ramsey.rng(0));
    let reference = fit_fringe(&delays, &ref_data, t2_ns, settings.detuning_mhz)?;
    let (rho_off, err_off) = ramsey_point(&off, &reference, &delays, shots as u64, ramsey.child(1))?;
    let (rho_on, err_on) = ramsey_point(&on, &reference, &delays, shots as u64, ramsey.child(2))?;
    Ok(PointResult {
        fidelity: FidelityPoint {
            epsilon: eps,
            fidelity: fr,
            stderr: fr_err,
        },
        off: CoherencePoint {
            epsilon: eps,
            rho01: rho_off,
            pump_on: false,
            stderr: err_off,
        },
        on: CoherencePoint {
            epsilon: eps,
            rho01: rho_on,
            pump_on: true,
            stderr: err_on,
        },
    })
}

/// Sweep the readout amplitude: single-shot fidelity with the full pipeline and
/// Ramsey coherence with the pump on and off. Failed points are flagged and
/// the sweep continues.
pub fn run_characterization_sweep<T: Real>(
    setup: &Setup<T>,
    epsilons: &[T],
    shots_per_point: usize,
    master_seed: u64,
) -> Result<SweepDataset<T>> {
    if shots_per_point == 0 {
        return Err(Error::Precondition("shots_per_point must be positive".into()));
    }
    setup.ensure_valid()?;
    let on = Engine::new(&setup.config, &setup.schedule)?;
    let violations = on.budget().violations();
    if !violations.is_empty() {
        return Err(Error::InvalidConfig(violations));
    }
    let off = Engine::new(&setup.config, &setup.schedule.without(EventKind::PumpOn))?;
    let root = SeedStream::new(master_seed);
    let results: Vec<Result<PointResult<T>>> = epsilons
        .par_iter()
        .enumerate()
        .map(|(i, &eps)| run_point(&on, &off, eps, shots_per_point, root.child(i as u64)))
        .collect();
    let nan = T::nan();
    let mut ds = SweepDataset {
        epsilons: epsilons.to_vec(),
        fidelity: Vec::new(),
        coherence_off: Vec::new(),
        coherence_on: Vec::new(),
        shots_per_point,
        failures: Vec::new(),
    };
    for (&eps, r) in epsilons.iter().zip(results) {
        match r {
            Ok(p) => {
                ds.fidelity.push(p.fidelity);
                ds.coherence_off.push(p.off);
                ds.coherence_on.push(p.on);
                ds.failures.push(None);
            }
            Err(e) => {
                ds.fidelity.push(FidelityPoint {
                    epsilon: eps,
                    fidelity: nan,
                    stderr: nan,
                });
                for (list, pump_on) in [(&mut ds.coherence_off, false), (&mut ds.coherence_on, true)] {
                    list.push(CoherencePoint {
                        epsilon: eps,
                        rho01: nan,
                        pump_on,
                        stderr: nan,
                    });
                }
                ds.failures.push(Some(e.to_string()));
            }
        }
    }
    Ok(ds)
}

/// `n` amplitudes evenly spaced from 0 to `eps_max`.
pub fn amplitude_grid<T: Real>(eps_max: T, n: usize) -> Vec<T> {
    let last = T::from_usize_lossy(n.saturating_sub(1).max(1));
    (0..n).map(|i| eps_max * T::from_usize_lossy(i) / last).collect()
}
