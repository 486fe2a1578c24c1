//! Quantities derived from the raw parameters.

use crate::error::{Error, Result};
use crate::model::PhysicalConfig;
use crate::scalar::Real;

/// Effective photon number of a readout pulse of amplitude `alpha_mag`.
///
/// The two qubit-conditioned coherent states sit at angle `±θ` with
/// `θ = atan(2χ/κ_r)`; `n_r` is the square of half their separation,
/// `(|α| sin θ)²`.
pub fn effective_photon_number<T: Real>(alpha_mag: T, chi: T, kappa_r: T) -> Result<T> {
    for (name, v) in [("alpha_mag", alpha_mag), ("chi", chi), ("kappa_r", kappa_r)] {
        if !v.is_finite() || v < T::zero() {
            return Err(Error::Domain(format!("{name} must be finite and >= 0, got {v}")));
        }
    }
    if kappa_r <= T::zero() {
        return Err(Error::Domain("kappa_r must be > 0".into()));
    }
    let theta = (T::lit(2.0) * chi / kappa_r).atan();
    let half_sep = alpha_mag * theta.sin();
    Ok(half_sep * half_sep)
}

/// TIB1 coupling (MHz) whose exchange fully transfers one cavity into the
/// other after `t_swap_ns`: `2π g t = π/2`.
pub fn swap_coupling_from_duration<T: Real>(t_swap_ns: T) -> Result<T> {
    if !t_swap_ns.is_finite() || t_swap_ns <= T::zero() {
        return Err(Error::Domain(format!("swap duration must be > 0, got {t_swap_ns}")));
    }
    Ok(T::one() / (T::lit(4.0) * t_swap_ns * T::lit(1e-3)))
}

/// Amplitude transmission of a switch in reflect mode.
pub fn leak_amplitude<T: Real>(leak_db: T) -> T {
    T::lit(10.0).powf(leak_db / T::lit(20.0))
}

impl<T: Real> PhysicalConfig<T> {
    /// TIB1 exchange coupling in reflect mode.
    pub fn tib1_g_off(&self) -> T {
        self.tib1.g_on * leak_amplitude(self.tib1.leak_db)
    }

    /// Output decay rate through TIB2 in reflect mode. The leak scales the
    /// coupling amplitude, so the rate scales with its square.
    pub fn tib2_kappa_off(&self) -> T {
        let a = leak_amplitude(self.tib2.leak_db);
        self.tib2.g_on * a * a
    }

    /// Decay rate of the readout cavity through its own input port. The rest of
    /// the total linewidth `kappa_r` is carried by the TIB1 leak into the lossy
    /// parametric cavity, which the coupled-mode equations produce themselves.
    pub fn readout_port_rate(&self) -> T {
        self.readout.kappa_r * self.readout.kappa_in_fraction
    }

    /// Parametric-cavity energy decay rate while the pump runs (TIB2 reflecting).
    pub fn pumped_loss_rate(&self) -> T {
        self.paramp.kappa_loss + self.tib2_kappa_off()
    }

    /// Pump rate at which the linearised parametric oscillator becomes unstable.
    pub fn latching_threshold(&self) -> T {
        let half = self.pumped_loss_rate() / T::lit(2.0);
        (half * half + self.paramp.detuning_p * self.paramp.detuning_p).sqrt()
    }

    /// Kerr coefficient (MHz per photon). Either the configured value, or the
    /// softening value that puts the latched state at `n_latch_target`:
    /// the steady state obeys `(Δ - K n)² = λ² - κ²/4`.
    pub fn resolved_kerr(&self) -> T {
        if let Some(k) = self.paramp.kerr {
            return k;
        }
        let lam = self.paramp.pump_lambda;
        let half = self.pumped_loss_rate() / T::lit(2.0);
        let excess = (lam * lam - half * half).max(T::zero()).sqrt();
        (self.paramp.detuning_p - excess) / self.paramp.n_latch_target
    }

    /// Latched photon number of the deterministic steady state at full pump.
    pub fn latched_photon_number(&self) -> Option<T> {
        let k = self.resolved_kerr();
        let lam = self.paramp.pump_lambda;
        let half = self.pumped_loss_rate() / T::lit(2.0);
        if k == T::zero() || lam <= half {
            return None;
        }
        let excess = (lam * lam - half * half).sqrt();
        // K n = Δ - excess for the softening branch.
        let n = (self.paramp.detuning_p - excess.copysign(-k)) / k;
        (n > T::zero()).then_some(n)
    }

    /// Fastest rate in the model (MHz), used to bound the step size.
    pub fn fastest_rate(&self) -> T {
        let k = self.resolved_kerr().abs() * self.paramp.n_latch_target;
        [
            self.qubit.chi,
            self.readout.kappa_r,
            self.readout.detuning_r.abs(),
            self.paramp.kappa_loss,
            self.paramp.detuning_p.abs(),
            self.paramp.pump_lambda,
            k,
            self.tib1.g_on,
            self.tib2.g_on,
        ]
        .into_iter()
        .fold(T::zero(), T::max)
    }
}
