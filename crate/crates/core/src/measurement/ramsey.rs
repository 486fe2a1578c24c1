//! Ramsey-embedded variable-strength measurement.
//!
//! π/2, optional measurement, delay, π/2, projective readout. The fringe
//! contrast after the inserted measurement, relative to a reference without
//! it, gives twice the remaining coherence.

use rand::Rng;
use rand_distr::Binomial;

use super::coherence::dephasing_from_trajectories;
use crate::dynamics::{Engine, QubitState};
use crate::error::{Error, Result};
use crate::model::{PhysicalConfig, PulseSchedule, RamseySettings};
use crate::optim::{invert, levenberg_marquardt, solve, LmSettings};
use crate::rng::SeedStream;
use crate::scalar::Real;

/// Fitted `P(τ) = B + e^{−τ/T₂}(a cos 2πfτ + b sin 2πfτ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct FringeFit<T> {
    pub offset: T,
    /// `√(a² + b²)`.
    pub amplitude: T,
    pub amplitude_err: T,
    pub detuning_mhz: T,
    pub residuals: Vec<T>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RamseyCoherence<T> {
    pub fringe_amplitude: T,
    pub fringe_amplitude_err: T,
    pub reference_amplitude: T,
    pub reference_amplitude_err: T,
    /// `½ · fringe_amplitude / reference_amplitude`.
    pub rho01: T,
    pub stderr: T,
}

/// Remaining coherence `|ρ₀₁'|` after the measurement a schedule performs.
pub fn measurement_coherence<T: Real>(config: &PhysicalConfig<T>, schedule: &PulseSchedule<T>) -> Result<T> {
    let engine = Engine::new(config, schedule)?;
    measurement_coherence_with(&engine)
}

pub fn measurement_coherence_with<T: Real>(engine: &Engine<T>) -> Result<T> {
    let g = engine.conditional(QubitState::Ground)?;
    let e = engine.conditional(QubitState::Excited)?;
    dephasing_from_trajectories(&g, &e, engine.config(), engine.schedule())
}

/// Probability of reading `e` after the second π/2 pulse, for coherence `c`.
pub fn fringe_probabilities<T: Real>(
    config: &PhysicalConfig<T>,
    settings: &RamseySettings<T>,
    coherence: T,
    delays_ns: &[T],
) -> Vec<T> {
    let t2_ns = config.qubit.t2_us * T::lit(1e3);
    let contrast = coherence * (T::one() - T::lit(2.0) * config.qubit.p_thermal);
    let f = settings.detuning_mhz * T::lit(1e-3);
    let visible = T::one() - settings.p_e_given_g - settings.p_g_given_e;
    delays_ns
        .iter()
        .map(|&tau| {
            let p_e = T::lit(0.5) - contrast * (-tau / t2_ns).exp() * (T::TAU() * f * tau).cos();
            settings.p_e_given_g + visible * p_e
        })
        .collect()
}

/// Binomially sampled excited fractions, or the exact probabilities when `shots` is `None`.
pub fn sample_fringe<T: Real, R: Rng>(probabilities: &[T], shots: Option<u64>, rng: &mut R) -> Vec<T> {
    match shots {
        None => probabilities.to_vec(),
        Some(n) => probabilities
            .iter()
            .map(|p| {
                let p = p.as_f64().clamp(0.0, 1.0);
                let k = rng.sample(Binomial::new(n, p).expect("valid binomial"));
                T::lit(k as f64 / n as f64)
            })
            .collect(),
    }
}

fn envelope_basis<T: Real>(tau: T, t2_ns: T, f: T) -> (T, T, T) {
    let env = (-tau / t2_ns).exp();
    let ph = T::TAU() * f * tau;
    (env, env * ph.cos(), env * ph.sin())
}

/// Linear fit of `(B, a, b)` at fixed detuning; returns the parameters and
/// their covariance scaled by the residual variance.
fn linear_fringe<T: Real>(delays: &[T], p: &[T], t2_ns: T, f: T) -> Result<(Vec<T>, Vec<Vec<T>>, Vec<T>)> {
    let rows: Vec<[T; 3]> = delays
        .iter()
        .map(|&tau| {
            let (_, c, s) = envelope_basis(tau, t2_ns, f);
            [T::one(), c, s]
        })
        .collect();
    let mut xtx = vec![vec![T::zero(); 3]; 3];
    let mut xty = vec![T::zero(); 3];
    for (row, y) in rows.iter().zip(p) {
        for i in 0..3 {
            xty[i] += row[i] * *y;
            for j in 0..3 {
                xtx[i][j] += row[i] * row[j];
            }
        }
    }
    let singular = || Error::NonConvergence {
        reason: "singular fringe design matrix".into(),
        cost: f64::NAN,
        residuals: Vec::new(),
    };
    let beta = solve(xtx.clone(), xty).ok_or_else(singular)?;
    let residuals: Vec<T> = rows
        .iter()
        .zip(p)
        .map(|(row, y)| row[0] * beta[0] + row[1] * beta[1] + row[2] * beta[2] - *y)
        .collect();
    let dof = T::from_usize_lossy(delays.len().saturating_sub(3).max(1));
    let s2 = residuals.iter().map(|r| *r * *r).sum::<T>() / dof;
    let cov = invert(&xtx)
        .ok_or_else(singular)?
        .into_iter()
        .map(|row| row.into_iter().map(|v| v * s2).collect())
        .collect();
    Ok((beta, cov, residuals))
}

fn amplitude_with_error<T: Real>(a: T, b: T, cov_ab: [[T; 2]; 2]) -> (T, T) {
    let amp = (a * a + b * b).sqrt();
    let var = if amp > T::zero() {
        (a * a * cov_ab[0][0] + T::lit(2.0) * a * b * cov_ab[0][1] + b * b * cov_ab[1][1]) / (amp * amp)
    } else {
        (cov_ab[0][0] + cov_ab[1][1]) / T::lit(2.0)
    };
    (amp, var.max(T::zero()).sqrt())
}

/// Fringe fit with the detuning held fixed.
pub fn fit_fringe_fixed<T: Real>(delays: &[T], p: &[T], t2_ns: T, detuning_mhz: T) -> Result<FringeFit<T>> {
    let (beta, cov, residuals) = linear_fringe(delays, p, t2_ns, detuning_mhz * T::lit(1e-3))?;
    let (amplitude, amplitude_err) =
        amplitude_with_error(beta[1], beta[2], [[cov[1][1], cov[1][2]], [cov[2][1], cov[2][2]]]);
    Ok(FringeFit {
        offset: beta[0],
        amplitude,
        amplitude_err,
        detuning_mhz,
        residuals,
    })
}

/// Fringe fit with the detuning free, started from `detuning_guess_mhz`.
pub fn fit_fringe<T: Real>(delays: &[T], p: &[T], t2_ns: T, detuning_guess_mhz: T) -> Result<FringeFit<T>> {
    let f0 = detuning_guess_mhz * T::lit(1e-3);
    let (start, _, _) = linear_fringe(delays, p, t2_ns, f0)?;
    let p0 = [start[0], start[1], start[2], f0];
    let model = |q: &[T], tau: T| {
        let (_, c, s) = envelope_basis(tau, t2_ns, q[3]);
        q[0] + q[1] * c + q[2] * s
    };
    let report = levenberg_marquardt(
        &p0,
        |q| delays.iter().zip(p).map(|(&tau, y)| model(q, tau) - *y).collect(),
        |q| {
            delays
                .iter()
                .map(|&tau| {
                    let (_, c, s) = envelope_basis(tau, t2_ns, q[3]);
                    let w = T::TAU() * tau;
                    vec![T::one(), c, s, w * (q[2] * c - q[1] * s)]
                })
                .collect()
        },
        LmSettings::default(),
    )?;
    let q = &report.params;
    let dof = T::from_usize_lossy(delays.len().saturating_sub(4).max(1));
    let s2 = T::lit(2.0) * report.cost / dof;
    let cov = report.covariance.ok_or_else(|| Error::NonConvergence {
        reason: "singular fringe covariance".into(),
        cost: report.cost.as_f64(),
        residuals: report.residuals.iter().map(|r| r.as_f64()).collect(),
    })?;
    let (amplitude, amplitude_err) = amplitude_with_error(
        q[1],
        q[2],
        [[cov[1][1] * s2, cov[1][2] * s2], [cov[2][1] * s2, cov[2][2] * s2]],
    );
    Ok(FringeFit {
        offset: q[0],
        amplitude,
        amplitude_err,
        detuning_mhz: q[3] * T::lit(1e3),
        residuals: report.residuals.clone(),
    })
}

/// Ratio estimate of `|ρ₀₁'|` from a fringe and its reference.
pub fn coherence_ratio<T: Real>(measured: &FringeFit<T>, reference: &FringeFit<T>) -> (T, T) {
    let half = T::lit(0.5);
    let rho = half * measured.amplitude / reference.amplitude;
    let rel_ref = reference.amplitude_err / reference.amplitude;
    let err = half
        * ((measured.amplitude_err / reference.amplitude).powi(2) + (measured.amplitude / reference.amplitude * rel_ref).powi(2))
            .sqrt();
    (rho, err)
}

/// Simulated Ramsey experiment with an optional inserted measurement.
///
/// `shots` per delay point draws binomial counts; `None` uses exact
/// probabilities. Requires the delays to span at least two fringe periods.
pub fn ramsey_coherence<T: Real>(
    config: &PhysicalConfig<T>,
    settings: &RamseySettings<T>,
    inserted: Option<&PulseSchedule<T>>,
    delays_ns: &[T],
    shots: Option<u64>,
    seed: u64,
) -> Result<RamseyCoherence<T>> {
    let (lo, hi) = delays_ns
        .iter()
        .fold((T::infinity(), T::neg_infinity()), |(l, h), d| (l.min(*d), h.max(*d)));
    let period = T::lit(1e3) / settings.detuning_mhz;
    if !(hi - lo >= T::lit(2.0) * period * (T::one() - T::lit(1e-9))) {
        return Err(Error::Precondition(format!(
            "Ramsey delays must span at least two fringe periods ({} ns)",
            T::lit(2.0) * period
        )));
    }
    let t2_ns = config.qubit.t2_us * T::lit(1e3);
    let stream = SeedStream::new(seed);
    let ref_probs = fringe_probabilities(config, settings, T::lit(0.5), delays_ns);
    let ref_data = sample_fringe(&ref_probs, shots, &mut stream.rng(0));
    let reference = fit_fringe(delays_ns, &ref_data, t2_ns, settings.detuning_mhz)?;
    let Some(schedule) = inserted else {
        return Ok(RamseyCoherence {
            fringe_amplitude: reference.amplitude,
            fringe_amplitude_err: reference.amplitude_err,
            reference_amplitude: reference.amplitude,
            reference_amplitude_err: reference.amplitude_err,
            rho01: T::lit(0.5),
            stderr: T::zero(),
        });
    };
    let coherence = measurement_coherence(config, schedule)?;
    let probs = fringe_probabilities(config, settings, coherence, delays_ns);
    let data = sample_fringe(&probs, shots, &mut stream.rng(1));
    let measured = fit_fringe_fixed(delays_ns, &data, t2_ns, reference.detuning_mhz)?;
    let (rho01, stderr) = coherence_ratio(&measured, &reference);
    Ok(RamseyCoherence {
        fringe_amplitude: measured.amplitude,
        fringe_amplitude_err: measured.amplitude_err,
        reference_amplitude: reference.amplitude,
        reference_amplitude_err: reference.amplitude_err,
        rho01,
        stderr,
    })
}
