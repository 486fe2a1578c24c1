//! Time-dependent control waveforms sampled on the integrator half-step grid.

use crate::model::{DriveShape, EventKind, PhysicalConfig, PulseSchedule};
use crate::scalar::{mhz_to_rad_per_ns, Real};

/// Edge duration of readout drive pulses.
pub const DRIVE_EDGE_NS: f64 = 2.0;

/// Raised-cosine step centred on 0, rising over `[-1/2, 1/2]`.
fn raised_step<T: Real>(x: T) -> T {
    let half = T::lit(0.5);
    if x <= -half {
        T::zero()
    } else if x >= half {
        T::one()
    } else {
        half * (T::one() + (T::PI() * x).sin())
    }
}

/// Edge centred on `t_edge` with total width `width` (a hard step when zero).
fn edge<T: Real>(t: T, t_edge: T, width: T) -> T {
    if width <= T::zero() {
        if t >= t_edge {
            T::one()
        } else {
            T::zero()
        }
    } else {
        raised_step((t - t_edge) / width)
    }
}

/// Switch transmission in `[0, 1]`. Edges are centred on the nominal window
/// bounds so the pulse area equals the window length.
pub fn switch_profile<T: Real>(schedule: &PulseSchedule<T>, kind: EventKind, rise_ns: T, t: T) -> T {
    let s: T = schedule
        .events_of(kind)
        .map(|e| edge(t, e.t_start_ns, rise_ns) - edge(t, e.t_stop_ns, rise_ns))
        .sum();
    s.max(T::zero()).min(T::one())
}

/// Pump envelope in `[0, 1]`: ramps up after the window opens and down before it closes.
pub fn pump_profile<T: Real>(schedule: &PulseSchedule<T>, ramp_ns: T, t: T) -> T {
    let half = ramp_ns / T::lit(2.0);
    let s: T = schedule
        .events_of(EventKind::PumpOn)
        .map(|e| edge(t, e.t_start_ns + half, ramp_ns) - edge(t, e.t_stop_ns - half, ramp_ns))
        .sum();
    s.max(T::zero()).min(T::one())
}

/// Drive term in photon½/ns, normalised so that each window deposits
/// `epsilon_scale · amplitude` photon½ on a resonant lossless cavity
/// (for a square pulse).
pub fn drive_waveform<T: Real>(config: &PhysicalConfig<T>, schedule: &PulseSchedule<T>, t: T) -> T {
    let w = T::lit(DRIVE_EDGE_NS);
    schedule
        .events_of(EventKind::Drive)
        .map(|e| {
            let dur = e.duration();
            if dur <= T::zero() || e.amplitude == T::zero() {
                return T::zero();
            }
            let width = w.min(dur / T::lit(4.0));
            let shape = match e.shape {
                DriveShape::Square => edge(t, e.t_start_ns, width) - edge(t, e.t_stop_ns, width),
                DriveShape::Bipolar => {
                    let mid = e.t_start_ns + dur / T::lit(2.0);
                    edge(t, e.t_start_ns, width) - T::lit(2.0) * edge(t, mid, width)
                        + edge(t, e.t_stop_ns, width)
                }
            };
            config.readout.epsilon_scale * e.amplitude * shape / dur
        })
        .sum()
}

/// Control values at one instant, angular units (rad/ns).
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Controls<T> {
    /// Readout drive (photon½/ns).
    pub drive: T,
    /// TIB1 exchange coupling.
    pub g: T,
    /// Parametric-cavity total energy decay rate.
    pub kappa_p: T,
    /// Pump rate.
    pub lambda: T,
}

/// Controls on the grid `t_k = k·dt/2`, `k = 0..=2N`.
#[derive(Debug, Clone)]
pub struct ControlTable<T> {
    pub dt: T,
    pub n_steps: usize,
    samples: Vec<Controls<T>>,
}

impl<T: Real> ControlTable<T> {
    pub fn new(config: &PhysicalConfig<T>, schedule: &PulseSchedule<T>) -> Self {
        let dt = config.dt_ns;
        let n_steps = (schedule.total_ns / dt).round().to_usize().unwrap_or(0);
        let g_on = mhz_to_rad_per_ns(config.tib1.g_on);
        let g_off = mhz_to_rad_per_ns(config.tib1_g_off());
        let kout_on = mhz_to_rad_per_ns(config.tib2.g_on);
        let kout_off = mhz_to_rad_per_ns(config.tib2_kappa_off());
        let k_loss = mhz_to_rad_per_ns(config.paramp.kappa_loss);
        let lam = mhz_to_rad_per_ns(config.paramp.pump_lambda);
        let half_dt = dt / T::lit(2.0);
        let samples = (0..=2 * n_steps)
            .map(|k| {
                let t = T::from_usize_lossy(k) * half_dt;
                let s1 = switch_profile(schedule, EventKind::Tib1Transmit, config.tib1.rise_ns, t);
                let s2 = switch_profile(schedule, EventKind::Tib2Transmit, config.tib2.rise_ns, t);
                Controls {
                    drive: drive_waveform(config, schedule, t),
                    g: g_off + (g_on - g_off) * s1,
                    kappa_p: k_loss + kout_off + (kout_on - kout_off) * s2,
                    lambda: lam * pump_profile(schedule, config.paramp.pump_ramp_ns, t),
                }
            })
            .collect();
        Self { dt, n_steps, samples }
    }

    /// Controls at `t = k·dt/2`.
    #[inline]
    pub fn at_half(&self, k: usize) -> &Controls<T> {
        &self.samples[k.min(self.samples.len() - 1)]
    }

    pub fn time(&self, step: usize) -> T {
        T::from_usize_lossy(step) * self.dt
    }

    /// Index of the first grid step at or after `t`.
    pub fn step_at(&self, t: T) -> usize {
        let s = (t / self.dt - T::lit(1e-9)).ceil().to_usize().unwrap_or(0);
        s.min(self.n_steps)
    }
}
