//! Device parameter blocks.
//!
//! Every rate is a linear frequency in MHz (the value of `rate / 2π`);
//! every time is in ns unless the field name says otherwise.

use serde::{Deserialize, Serialize};

use crate::scalar::Real;

fn one<T: Real>() -> T {
    T::one()
}

/// Transmon parameters relevant to dispersive readout.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct QubitParams<T> {
    /// Dispersive shift. The readout cavity is pulled by `+chi` (ground) or `-chi` (excited).
    pub chi: T,
    pub t1_us: T,
    pub t2_us: T,
    /// Probability of preparing the wrong eigenstate (thermal excitation).
    pub p_thermal: T,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct ReadoutCavityParams<T> {
    /// Total energy decay rate (linewidth) of the readout cavity.
    pub kappa_r: T,
    /// Share of `kappa_r` carried by the weak input port. This port is the
    /// only decay channel integrated explicitly; the remaining linewidth
    /// arises from the TIB1 leak into the lossy parametric cavity.
    pub kappa_in_fraction: T,
    /// Cavity detuning from the drive frame.
    pub detuning_r: T,
    /// Conversion from experimental amplitude units to intracavity amplitude.
    ///
    /// A drive of amplitude `epsilon` deposits `epsilon_scale * epsilon` photon½
    /// of resonant, lossless displacement over its window.
    #[serde(default = "one")]
    pub epsilon_scale: T,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct ParametricCavityParams<T> {
    /// Internal loss rate.
    pub kappa_loss: T,
    /// Detuning from half the pump frequency.
    pub detuning_p: T,
    /// Kerr coefficient in MHz per photon (negative softens). When absent it is
    /// derived from `n_latch_target`.
    #[serde(default)]
    pub kerr: Option<T>,
    /// Degenerate pump rate at full strength.
    pub pump_lambda: T,
    /// Raised-cosine turn-on (and turn-off) time of the pump.
    pub pump_ramp_ns: T,
    /// Photon number of the latched states.
    pub n_latch_target: T,
}

/// A tunable-inductor-bridge switch.
///
/// For TIB1, `g_on` is the exchange coupling between the two cavities. For TIB2
/// it is the energy decay rate of the parametric cavity into the output line.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct TibParams<T> {
    pub g_on: T,
    /// Residual transmission in reflect mode (dB, negative).
    pub leak_db: T,
    /// Duration of each raised-cosine switching edge.
    pub rise_ns: T,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct NoiseEfficiencyParams<T> {
    /// Total transmission of qubit-state information up to the start of amplification.
    pub eta_loss: T,
    /// Amplifier noise factor; 1 is a noiseless phase-sensitive amplifier.
    #[serde(default = "one")]
    pub eta_amp: T,
    /// Extra dephasing photons applied whenever the pump window runs.
    pub n_b_injected: T,
    /// Extra dephasing photons from switch actuation alone.
    pub n_b_tib: T,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct PhysicalConfig<T> {
    pub qubit: QubitParams<T>,
    pub readout: ReadoutCavityParams<T>,
    pub paramp: ParametricCavityParams<T>,
    pub tib1: TibParams<T>,
    pub tib2: TibParams<T>,
    pub noise: NoiseEfficiencyParams<T>,
    /// Integrator step.
    pub dt_ns: T,
}

impl<T: Real> PhysicalConfig<T> {
    /// Convert every field to another scalar type.
    pub fn cast<U: Real>(&self) -> PhysicalConfig<U> {
        let c = |x: T| U::lit(x.as_f64());
        PhysicalConfig {
            qubit: QubitParams {
                chi: c(self.qubit.chi),
                t1_us: c(self.qubit.t1_us),
                t2_us: c(self.qubit.t2_us),
                p_thermal: c(self.qubit.p_thermal),
            },
            readout: ReadoutCavityParams {
                kappa_r: c(self.readout.kappa_r),
                kappa_in_fraction: c(self.readout.kappa_in_fraction),
                detuning_r: c(self.readout.detuning_r),
                epsilon_scale: c(self.readout.epsilon_scale),
            },
            paramp: ParametricCavityParams {
                kappa_loss: c(self.paramp.kappa_loss),
                detuning_p: c(self.paramp.detuning_p),
                kerr: self.paramp.kerr.map(c),
                pump_lambda: c(self.paramp.pump_lambda),
                pump_ramp_ns: c(self.paramp.pump_ramp_ns),
                n_latch_target: c(self.paramp.n_latch_target),
            },
            tib1: TibParams {
                g_on: c(self.tib1.g_on),
                leak_db: c(self.tib1.leak_db),
                rise_ns: c(self.tib1.rise_ns),
            },
            tib2: TibParams {
                g_on: c(self.tib2.g_on),
                leak_db: c(self.tib2.leak_db),
                rise_ns: c(self.tib2.rise_ns),
            },
            noise: NoiseEfficiencyParams {
                eta_loss: c(self.noise.eta_loss),
                eta_amp: c(self.noise.eta_amp),
                n_b_injected: c(self.noise.n_b_injected),
                n_b_tib: c(self.noise.n_b_tib),
            },
            dt_ns: c(self.dt_ns),
        }
    }
}
