//! Bifurcation of the pumped parametric cavity in isolation.

use num_complex::Complex;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::model::PhysicalConfig;
use crate::rng::rng_from_seed;
use crate::scalar::{mhz_to_rad_per_ns, Real};

/// Settling time in units of the pumped energy decay time.
const SETTLE_DECAY_TIMES: f64 = 8.0;
const MIN_SETTLE_NS: f64 = 100.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LatchOutcome<T> {
    /// Phase of the final amplitude relative to the amplified quadrature, in `(-π, π]`.
    pub latched_phase: T,
    /// Photon number of the latched state: `|α|²` averaged over the second
    /// half of the settling window, so one noisy sample does not stand in for it.
    pub n_final: T,
}

impl<T: Real> LatchOutcome<T> {
    /// `+1` when the state sits on the positive side of the amplified axis.
    pub fn side(&self) -> i8 {
        if self.latched_phase.cos() > T::zero() {
            1
        } else {
            -1
        }
    }
}

struct Oscillator<T> {
    detuning: T,
    kappa: T,
    kerr: T,
    lambda: T,
    ramp_ns: T,
}

impl<T: Real> Oscillator<T> {
    fn new(config: &PhysicalConfig<T>) -> Result<Self> {
        let threshold = config.latching_threshold();
        if !(config.paramp.pump_lambda > threshold) {
            return Err(Error::NoLatch(format!(
                "pump_lambda {} MHz does not exceed the latching threshold {} MHz",
                config.paramp.pump_lambda, threshold
            )));
        }
        let kerr = config.resolved_kerr();
        if kerr == T::zero() {
            return Err(Error::NoLatch("Kerr coefficient is zero".into()));
        }
        Ok(Self {
            detuning: mhz_to_rad_per_ns(config.paramp.detuning_p),
            kappa: mhz_to_rad_per_ns(config.pumped_loss_rate()),
            kerr: mhz_to_rad_per_ns(kerr),
            lambda: mhz_to_rad_per_ns(config.paramp.pump_lambda),
            ramp_ns: config.paramp.pump_ramp_ns,
        })
    }

    fn settle_ns(&self) -> T {
        (T::lit(SETTLE_DECAY_TIMES) / self.kappa).max(T::lit(MIN_SETTLE_NS)) + self.ramp_ns
    }

    fn pump(&self, t: T) -> T {
        if self.ramp_ns <= T::zero() || t >= self.ramp_ns {
            self.lambda
        } else {
            self.lambda * T::lit(0.5) * (T::one() - (T::PI() * t / self.ramp_ns).cos())
        }
    }

    #[inline]
    fn rhs(&self, a: Complex<T>, t: T) -> Complex<T> {
        let lin = Complex::new(-self.kappa / T::lit(2.0), -self.detuning + self.kerr * a.norm_sqr());
        a * lin + a.conj() * self.pump(t)
    }

    fn rk4(&self, a: Complex<T>, t: T, dt: T) -> Complex<T> {
        let h = dt / T::lit(2.0);
        let k1 = self.rhs(a, t);
        let k2 = self.rhs(a + k1 * h, t + h);
        let k3 = self.rhs(a + k2 * h, t + h);
        let k4 = self.rhs(a + k3 * dt, t + dt);
        a + (k1 + (k2 + k3) * T::lit(2.0) + k4) * (dt / T::lit(6.0))
    }
}

fn outcome<T: Real>(a: Complex<T>, n_mean: T) -> LatchOutcome<T> {
    let mut phase = a.im.atan2(a.re);
    if phase <= -T::PI() {
        phase = T::PI();
    }
    LatchOutcome {
        latched_phase: phase,
        n_final: n_mean,
    }
}

fn evolve<T: Real>(
    config: &PhysicalConfig<T>,
    seed_amplitude: Complex<T>,
    mut noise: impl FnMut(T) -> Complex<T>,
) -> Result<LatchOutcome<T>> {
    let osc = Oscillator::new(config)?;
    let dt = config.dt_ns;
    let steps = (osc.settle_ns() / dt).ceil().to_usize().unwrap_or(0);
    let average_from = steps / 2;
    let mut a = seed_amplitude;
    let mut n_sum = T::zero();
    for n in 0..steps {
        let t = T::from_usize_lossy(n) * dt;
        a = osc.rk4(a, t, dt) + noise(osc.kappa * dt);
        if !a.norm_sqr().is_finite() {
            return Err(Error::Divergence { t_ns: (t + dt).as_f64() });
        }
        if n >= average_from {
            n_sum += a.norm_sqr();
        }
    }
    let averaged = T::from_usize_lossy((steps - average_from).max(1));
    Ok(outcome(a, n_sum / averaged))
}

/// Deterministic latch from a seed amplitude (pump turned on at t = 0).
pub fn latch<T: Real>(config: &PhysicalConfig<T>, seed_amplitude: Complex<T>) -> Result<LatchOutcome<T>> {
    evolve(config, seed_amplitude, |_| Complex::default())
}

/// Latch with vacuum noise entering through the loss ports.
pub fn latch_with_noise<T: Real>(
    config: &PhysicalConfig<T>,
    seed_amplitude: Complex<T>,
    seed: u64,
) -> Result<LatchOutcome<T>> {
    let mut rng = rng_from_seed(seed);
    let half = T::lit(0.5);
    evolve(config, seed_amplitude, |kdt| {
        let x: f64 = rng.sample(StandardNormal);
        let y: f64 = rng.sample(StandardNormal);
        Complex::new(T::lit(x), T::lit(y)) * (kdt.sqrt() * half)
    })
}
