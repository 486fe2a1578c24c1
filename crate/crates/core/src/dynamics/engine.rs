//! Two-mode integrator shared by the deterministic and stochastic paths.

use num_complex::Complex;
use rand::Rng;
use rand_distr::StandardNormal;

use super::budget::{self, EfficiencyBudget};
use super::controls::{ControlTable, Controls};
use crate::error::{Error, Result};
use crate::model::{PhysicalConfig, PulseSchedule};
use crate::rng::{rng_from_seed, SimRng};
use crate::scalar::{mhz_to_rad_per_ns, Real};

/// Qubit eigenstate selecting the sign of the dispersive pull.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QubitState {
    Ground,
    Excited,
}

impl QubitState {
    /// `+1` for ground (cavity pulled by `+chi`), `-1` for excited.
    pub fn pull_sign<T: Real>(self) -> T {
        match self {
            QubitState::Ground => T::one(),
            QubitState::Excited => -T::one(),
        }
    }

    pub fn flipped(self) -> Self {
        match self {
            QubitState::Ground => QubitState::Excited,
            QubitState::Excited => QubitState::Ground,
        }
    }
}

/// Field amplitudes of the readout (`r`) and parametric (`p`) cavities.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Modes<T> {
    pub r: Complex<T>,
    pub p: Complex<T>,
}

impl<T: Real> Modes<T> {
    #[inline]
    fn axpy(self, h: T, k: Modes<T>) -> Modes<T> {
        Modes {
            r: self.r + k.r * h,
            p: self.p + k.p * h,
        }
    }

    pub fn photons(&self) -> T {
        self.r.norm_sqr() + self.p.norm_sqr()
    }
}

/// Static rates in rad/ns.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Rates<T> {
    pub kappa_r: T,
    pub detuning_r: T,
    pub chi: T,
    pub detuning_p: T,
    pub kerr: T,
    /// `exp(2iβ)`, orienting the amplified quadrature along `β`.
    pub pump_phase: Complex<T>,
}

impl<T: Real> Rates<T> {
    pub fn new(config: &PhysicalConfig<T>, beta: T) -> Self {
        let two_beta = T::lit(2.0) * beta;
        Self {
            kappa_r: mhz_to_rad_per_ns(config.readout_port_rate()),
            detuning_r: mhz_to_rad_per_ns(config.readout.detuning_r),
            chi: mhz_to_rad_per_ns(config.qubit.chi),
            detuning_p: mhz_to_rad_per_ns(config.paramp.detuning_p),
            kerr: mhz_to_rad_per_ns(config.resolved_kerr()),
            pump_phase: Complex::new(two_beta.cos(), two_beta.sin()),
        }
    }

    #[inline]
    pub fn rhs(&self, s: Modes<T>, c: &Controls<T>, sign: T, kerr: bool) -> Modes<T> {
        let half = T::lit(0.5);
        let i = Complex::<T>::i();
        let ig = Complex::new(T::zero(), -c.g);
        let r = s.r * Complex::new(-half * self.kappa_r, -(self.detuning_r + sign * self.chi))
            + ig * s.p
            + Complex::new(c.drive, T::zero());
        let mut p = s.p * Complex::new(-half * c.kappa_p, -self.detuning_p)
            + ig * s.r
            + self.pump_phase * s.p.conj() * c.lambda;
        if kerr {
            p += i * s.p * (self.kerr * s.p.norm_sqr());
        }
        Modes { r, p }
    }

    /// One classical RK4 step from grid point `n`.
    #[inline]
    pub fn rk4(&self, table: &ControlTable<T>, n: usize, s: Modes<T>, sign: T, kerr: bool) -> Modes<T> {
        let dt = table.dt;
        let h2 = dt / T::lit(2.0);
        let c0 = table.at_half(2 * n);
        let c1 = table.at_half(2 * n + 1);
        let c2 = table.at_half(2 * n + 2);
        let k1 = self.rhs(s, c0, sign, kerr);
        let k2 = self.rhs(s.axpy(h2, k1), c1, sign, kerr);
        let k3 = self.rhs(s.axpy(h2, k2), c1, sign, kerr);
        let k4 = self.rhs(s.axpy(dt, k3), c2, sign, kerr);
        let sixth = dt / T::lit(6.0);
        Modes {
            r: s.r + (k1.r + (k2.r + k3.r) * T::lit(2.0) + k4.r) * sixth,
            p: s.p + (k1.p + (k2.p + k3.p) * T::lit(2.0) + k4.p) * sixth,
        }
    }
}

pub(crate) fn check_finite<T: Real>(s: &Modes<T>, t: T) -> Result<()> {
    let n = s.photons();
    if n.is_finite() && n < T::lit(1e12) {
        Ok(())
    } else {
        Err(Error::Divergence { t_ns: t.as_f64() })
    }
}

/// Deterministic mean-field trajectory for one qubit eigenstate.
#[derive(Debug, Clone, PartialEq)]
pub struct ConditionalTrajectory<T> {
    pub qubit: QubitState,
    pub times_ns: Vec<T>,
    pub alpha_r: Vec<Complex<T>>,
    pub alpha_p: Vec<Complex<T>>,
    /// Readout-cavity energy decay rate (rad/ns).
    pub loss_r: T,
    /// Parametric-cavity energy decay rate at each sample (rad/ns).
    pub loss_p: Vec<T>,
    /// Sample index at which the field is handed to the amplifier.
    pub capture_index: usize,
}

impl<T: Real> ConditionalTrajectory<T> {
    pub fn len(&self) -> usize {
        self.times_ns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times_ns.is_empty()
    }

    /// Total photon number at each sample.
    pub fn photons(&self) -> Vec<T> {
        self.alpha_r
            .iter()
            .zip(&self.alpha_p)
            .map(|(r, p)| r.norm_sqr() + p.norm_sqr())
            .collect()
    }
}

/// Prepared setup: control tables, amplified axis and efficiency budget.
#[derive(Debug, Clone)]
pub struct Engine<T: Real> {
    pub(crate) config: PhysicalConfig<T>,
    pub(crate) schedule: PulseSchedule<T>,
    pub(crate) table: ControlTable<T>,
    pub(crate) rates: Rates<T>,
    pub(crate) budget: EfficiencyBudget<T>,
    pub(crate) capture_step: usize,
    pub(crate) release_step: usize,
}

/// Outcome of one stochastic shot, before thresholding.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RawShot<T> {
    pub x_measured: T,
    pub latched_phase: T,
    /// Qubit state actually realised after preparation and decay.
    pub actual: QubitState,
}

impl<T: Real> Engine<T> {
    pub fn new(config: &PhysicalConfig<T>, schedule: &PulseSchedule<T>) -> Result<Self> {
        if !(config.dt_ns > T::zero()) || !(schedule.total_ns > T::zero()) {
            return Err(Error::Precondition(
                "time step and sequence length must be positive".into(),
            ));
        }
        let budget = budget::compute(config, schedule)?;
        Ok(Self::assemble(config, schedule, budget))
    }

    fn assemble(config: &PhysicalConfig<T>, schedule: &PulseSchedule<T>, budget: EfficiencyBudget<T>) -> Self {
        let table = ControlTable::new(config, schedule);
        let capture_step = table.step_at(schedule.capture_time());
        let release_step = table.step_at(schedule.release_time()).max(capture_step);
        Self {
            rates: Rates::new(config, budget.amplified_axis),
            config: config.clone(),
            schedule: schedule.clone(),
            table,
            budget,
            capture_step,
            release_step,
        }
    }

    /// Same setup with every drive amplitude set to `epsilon`. The budget is
    /// amplitude independent and is reused.
    pub fn with_amplitude(&self, epsilon: T) -> Self {
        let schedule = self.schedule.with_drive_amplitude(epsilon);
        Self::assemble(&self.config, &schedule, self.budget.clone())
    }

    pub fn config(&self) -> &PhysicalConfig<T> {
        &self.config
    }

    pub fn schedule(&self) -> &PulseSchedule<T> {
        &self.schedule
    }

    pub fn budget(&self) -> &EfficiencyBudget<T> {
        &self.budget
    }

    /// Angle of the amplified quadrature in the parametric-cavity frame.
    pub fn amplified_axis(&self) -> T {
        self.budget.amplified_axis
    }

    /// Fixed readout drive amplitude of the schedule (first drive event).
    pub fn drive_amplitude(&self) -> T {
        self.schedule
            .first(crate::model::EventKind::Drive)
            .map(|e| e.amplitude)
            .unwrap_or(T::zero())
    }

    /// Mean-field trajectory over the whole sequence, starting from vacuum.
    pub fn conditional(&self, qubit: QubitState) -> Result<ConditionalTrajectory<T>> {
        self.conditional_from(qubit, Modes::default())
    }

    /// Mean-field trajectory starting from the given amplitudes.
    pub fn conditional_from(&self, qubit: QubitState, initial: Modes<T>) -> Result<ConditionalTrajectory<T>> {
        let sign = qubit.pull_sign::<T>();
        let n = self.table.n_steps;
        let mut times = Vec::with_capacity(n + 1);
        let mut ar = Vec::with_capacity(n + 1);
        let mut ap = Vec::with_capacity(n + 1);
        let mut lp = Vec::with_capacity(n + 1);
        let scale = self.budget.beam_splitter.sqrt();
        let mut s = initial;
        for step in 0..=n {
            // The capture sample keeps the field as it arrives; the beam
            // splitter acts on it immediately afterwards.
            times.push(self.table.time(step));
            ar.push(s.r);
            ap.push(s.p);
            lp.push(self.table.at_half(2 * step).kappa_p);
            if step == self.capture_step {
                s.p = s.p * scale;
            }
            if step < n {
                s = self.rates.rk4(&self.table, step, s, sign, true);
                check_finite(&s, self.table.time(step + 1))?;
            }
        }
        Ok(ConditionalTrajectory {
            qubit,
            times_ns: times,
            alpha_r: ar,
            alpha_p: ap,
            loss_r: self.rates.kappa_r,
            loss_p: lp,
            capture_index: self.capture_step,
        })
    }

    /// Probability that an excited qubit relaxes before the drive ends.
    pub fn decay_probability(&self) -> T {
        let t1_ns = self.config.qubit.t1_us * T::lit(1e3);
        if !(t1_ns > T::zero()) {
            return T::zero();
        }
        T::one() - (-self.schedule.drive_end() / t1_ns).exp()
    }

    /// Qubit state realised in a shot: thermal preparation error, then
    /// relaxation before the end of the drive.
    pub fn realised_state(&self, prepared: QubitState, rng: &mut SimRng) -> QubitState {
        let u_prep: f64 = rng.random();
        let u_decay: f64 = rng.random();
        let mut actual = prepared;
        if u_prep < self.config.qubit.p_thermal.as_f64() {
            actual = actual.flipped();
        }
        if actual == QubitState::Excited && u_decay < self.decay_probability().as_f64() {
            actual = QubitState::Ground;
        }
        actual
    }

    /// Noisy field at the start of the release window for a qubit that is in
    /// `actual` throughout. Every noise increment is multiplied by `noise_sign`.
    pub fn noisy_release_state(&self, actual: QubitState, rng: &mut SimRng, noise_sign: T) -> Result<Modes<T>> {
        let sign = actual.pull_sign::<T>();
        let half = T::lit(0.5);
        let gauss = |rng: &mut SimRng| -> Complex<T> {
            let x: f64 = rng.sample(StandardNormal);
            let y: f64 = rng.sample(StandardNormal);
            Complex::new(T::lit(x), T::lit(y)) * noise_sign
        };
        // Vacuum: each quadrature has variance 1/4.
        let mut s = Modes {
            r: gauss(rng) * half,
            p: gauss(rng) * half,
        };
        let dt = self.table.dt;
        let sq_r = (self.rates.kappa_r * dt).sqrt() * half;
        let eta_bs = self.budget.beam_splitter;
        let eta_amp = self.config.noise.eta_amp;
        for step in 0..self.release_step {
            if step == self.capture_step {
                let vac = (T::one() - eta_bs).max(T::zero()).sqrt() * half;
                s.p = s.p * eta_bs.sqrt() + gauss(rng) * vac;
                if eta_amp < T::one() {
                    let added = ((T::one() / eta_amp - T::one()) / T::lit(4.0)).sqrt();
                    s.p += gauss(rng) * added;
                }
            }
            let kp = self.table.at_half(2 * step).kappa_p;
            s = self.rates.rk4(&self.table, step, s, sign, true);
            s.r += gauss(rng) * sq_r;
            s.p += gauss(rng) * ((kp * dt).sqrt() * half);
            if step % 64 == 0 {
                check_finite(&s, self.table.time(step + 1))?;
            }
        }
        check_finite(&s, self.table.time(self.release_step))?;
        Ok(s)
    }

    /// One stochastic shot for a qubit nominally prepared in `prepared`.
    pub fn raw_shot(&self, prepared: QubitState, seed: u64) -> Result<RawShot<T>> {
        let mut rng = rng_from_seed(seed);
        let actual = self.realised_state(prepared, &mut rng);
        let s = self.noisy_release_state(actual, &mut rng, T::one())?;
        let beta = self.amplified_axis();
        let q = s.p * Complex::new(beta.cos(), -beta.sin());
        let mut phase = q.im.atan2(q.re);
        if phase <= -T::PI() {
            phase = T::PI();
        }
        Ok(RawShot {
            x_measured: q.re,
            latched_phase: phase,
            actual,
        })
    }
}

/// Integrate the mean field of one qubit branch across the whole schedule.
pub fn integrate_conditional<T: Real>(
    config: &PhysicalConfig<T>,
    schedule: &PulseSchedule<T>,
    qubit: QubitState,
) -> Result<ConditionalTrajectory<T>> {
    Engine::new(config, schedule)?.conditional(qubit)
}
