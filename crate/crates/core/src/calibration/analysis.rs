use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::fit::{
    efficiency, excess_backaction, fit_dephasing, fit_fidelity, Estimate, Exclusion, FidelityPoint,
};
use super::sweep::SweepDataset;
use crate::error::{Error, Result};
use crate::measurement::CoherencePoint;
use crate::rng::SeedStream;
use crate::scalar::Real;

pub const MIN_RESAMPLES: usize = 100;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct FitResiduals<T> {
    pub dephasing: Vec<T>,
    pub fidelity: Vec<T>,
}

/// Readout performance summary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct CalibrationResult<T> {
    pub rho_b: Estimate<T>,
    pub sigma: Estimate<T>,
    pub nu: Estimate<T>,
    pub f0: Estimate<T>,
    pub eta: Estimate<T>,
    pub n_b: Estimate<T>,
    pub excluded_points: usize,
    pub fit_residuals: FitResiduals<T>,
}

impl<T: Real> CalibrationResult<T> {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("result serialises")
    }

    /// Fixed-width table of the headline numbers.
    pub fn summary_table(&self) -> String {
        let row = |name: &str, e: &Estimate<T>, pct: bool| {
            let (v, s) = (e.value.as_f64(), e.stderr.as_f64());
            if pct {
                format!("{name:<34} {:>8.1}% ± {:.1}%\n", 100.0 * v, 100.0 * s)
            } else {
                format!("{name:<34} {v:>9.3} ± {s:.3}\n")
            }
        };
        let mut out = String::from("Readout performance summary\n");
        out.push_str(&"-".repeat(52));
        out.push('\n');
        out.push_str(&row("Measurement efficiency eta", &self.eta, true));
        out.push_str(&row("Excess backaction n_b (photons)", &self.n_b, false));
        out.push_str(&row("Fidelity ceiling F0", &self.f0, true));
        out.push_str(&row("Pump-on coherence rho_b", &self.rho_b, false));
        out.push_str(&row("Dephasing width sigma", &self.sigma, false));
        out.push_str(&row("Fidelity slope nu", &self.nu, false));
        out.push_str(&format!("{:<34} {:>9}\n", "Excluded low-amplitude points", self.excluded_points));
        out
    }
}

fn usable<T: Real>(ds: &SweepDataset<T>) -> (Vec<FidelityPoint<T>>, Vec<CoherencePoint<T>>, Vec<CoherencePoint<T>>) {
    let keep = |i: usize| ds.failures[i].is_none();
    let idx: Vec<usize> = (0..ds.len()).filter(|&i| keep(i)).collect();
    (
        idx.iter().map(|&i| ds.fidelity[i]).collect(),
        idx.iter().map(|&i| ds.coherence_off[i]).collect(),
        idx.iter().map(|&i| ds.coherence_on[i]).collect(),
    )
}

/// Fit a sweep. Uncertainties come from the fit covariances.
pub fn calibrate<T: Real>(ds: &SweepDataset<T>, exclusion: Exclusion<T>) -> Result<CalibrationResult<T>> {
    ds.check_shape()?;
    let (fid, off, on) = usable(ds);
    let zero = on
        .iter()
        .find(|p| p.epsilon == T::zero())
        .ok_or_else(|| Error::Precondition("rho_b requires a usable epsilon = 0 row".into()))?;
    let rho_b = Estimate::new(zero.rho01, zero.stderr);
    let deph = fit_dephasing(&off, exclusion)?;
    let fidelity = fit_fidelity(&fid)?;
    Ok(CalibrationResult {
        rho_b,
        sigma: deph.sigma,
        nu: fidelity.nu,
        f0: fidelity.f0,
        eta: efficiency(deph.sigma, fidelity.nu)?,
        n_b: excess_backaction(rho_b)?,
        excluded_points: deph.excluded,
        fit_residuals: FitResiduals {
            dephasing: deph.residuals,
            fidelity: fidelity.residuals,
        },
    })
}

/// Bootstrap standard deviations of the derived quantities.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct BootstrapErrors<T> {
    pub rho_b: T,
    pub sigma: T,
    pub nu: T,
    pub f0: T,
    pub eta: T,
    pub n_b: T,
    /// Resamples whose refit succeeded.
    pub resamples: usize,
}

fn jitter<T: Real, R: Rng>(value: T, stderr: T, rng: &mut R) -> T {
    let z: f64 = rng.sample(StandardNormal);
    if stderr > T::zero() {
        value + stderr * T::lit(z)
    } else {
        value
    }
}

fn resample<T: Real>(ds: &SweepDataset<T>, stream: SeedStream, k: u64) -> SweepDataset<T> {
    let mut rng = stream.rng(k);
    let mut out = ds.clone();
    for f in out.fidelity.iter_mut() {
        f.fidelity = jitter(f.fidelity, f.stderr, &mut rng);
    }
    for c in out.coherence_off.iter_mut().chain(out.coherence_on.iter_mut()) {
        c.rho01 = jitter(c.rho01, c.stderr, &mut rng);
    }
    out
}

fn std_dev<T: Real>(xs: &[T]) -> T {
    // Shifted by the first sample so identical refits give exactly zero.
    let n = T::from_usize_lossy(xs.len());
    let d: Vec<T> = xs.iter().map(|x| *x - xs[0]).collect();
    let mean = d.iter().copied().sum::<T>() / n;
    let var = d.iter().map(|x| (*x - mean).powi(2)).sum::<T>() / (n - T::one()).max(T::one());
    var.sqrt()
}

/// Parametric bootstrap: every point is redrawn from a normal distribution
/// with its stated standard error and the full analysis is repeated.
pub fn bootstrap<T: Real>(
    ds: &SweepDataset<T>,
    exclusion: Exclusion<T>,
    resamples: usize,
    seed: u64,
) -> Result<BootstrapErrors<T>> {
    if resamples < MIN_RESAMPLES {
        return Err(Error::Precondition(format!("bootstrap needs at least {MIN_RESAMPLES} resamples")));
    }
    ds.check_shape()?;
    let stream = SeedStream::new(seed);
    let fits: Vec<CalibrationResult<T>> = (0..resamples as u64)
        .into_par_iter()
        .filter_map(|k| calibrate(&resample(ds, stream, k), exclusion).ok())
        .collect();
    if fits.len() < 2 {
        return Err(Error::NonConvergence {
            reason: "bootstrap refits failed".into(),
            cost: f64::NAN,
            residuals: Vec::new(),
        });
    }
    let pick = |f: fn(&CalibrationResult<T>) -> T| std_dev(&fits.iter().map(f).collect::<Vec<_>>());
    Ok(BootstrapErrors {
        rho_b: pick(|r| r.rho_b.value),
        sigma: pick(|r| r.sigma.value),
        nu: pick(|r| r.nu.value),
        f0: pick(|r| r.f0.value),
        eta: pick(|r| r.eta.value),
        n_b: pick(|r| r.n_b.value),
        resamples: fits.len(),
    })
}

/// Point estimates from the fits, uncertainties from the bootstrap.
pub fn characterize<T: Real>(
    ds: &SweepDataset<T>,
    exclusion: Exclusion<T>,
    resamples: usize,
    seed: u64,
) -> Result<CalibrationResult<T>> {
    let mut result = calibrate(ds, exclusion)?;
    let b = bootstrap(ds, exclusion, resamples, seed)?;
    result.rho_b.stderr = b.rho_b;
    result.sigma.stderr = b.sigma;
    result.nu.stderr = b.nu;
    result.f0.stderr = b.f0;
    result.eta.stderr = b.eta;
    result.n_b.stderr = b.n_b;
    Ok(result)
}
