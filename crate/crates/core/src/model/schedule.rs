//! Timed control events that define one measurement sequence.

use serde::{Deserialize, Serialize};

use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    Drive,
    Tib1Transmit,
    Tib2Transmit,
    PumpOn,
}

impl EventKind {
    pub const ALL: [EventKind; 4] = [
        EventKind::Drive,
        EventKind::Tib1Transmit,
        EventKind::Tib2Transmit,
        EventKind::PumpOn,
    ];

    pub fn name(self) -> &'static str {
        match self {
            EventKind::Drive => "drive",
            EventKind::Tib1Transmit => "tib1_transmit",
            EventKind::Tib2Transmit => "tib2_transmit",
            EventKind::PumpOn => "pump_on",
        }
    }
}

/// Readout drive envelope.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DriveShape {
    /// Constant amplitude.
    Square,
    /// Sign-reversed halves. The two qubit branches then end up displaced in
    /// opposite directions with almost no common-mode amplitude.
    #[default]
    Bipolar,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct PulseEvent<T> {
    pub kind: EventKind,
    pub t_start_ns: T,
    pub t_stop_ns: T,
    /// Readout amplitude `epsilon` in experimental units (drive events only).
    #[serde(default)]
    pub amplitude: T,
    #[serde(default)]
    pub shape: DriveShape,
}

impl<T: Real> PulseEvent<T> {
    pub fn new(kind: EventKind, t_start_ns: T, t_stop_ns: T) -> Self {
        Self {
            kind,
            t_start_ns,
            t_stop_ns,
            amplitude: T::zero(),
            shape: DriveShape::default(),
        }
    }

    pub fn drive(t_start_ns: T, t_stop_ns: T, amplitude: T, shape: DriveShape) -> Self {
        Self {
            kind: EventKind::Drive,
            t_start_ns,
            t_stop_ns,
            amplitude,
            shape,
        }
    }

    pub fn duration(&self) -> T {
        self.t_stop_ns - self.t_start_ns
    }
}

/// Ramsey sequence used to measure post-measurement coherence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct RamseySettings<T> {
    /// Artificial detuning of the Ramsey fringes.
    pub detuning_mhz: T,
    pub points_per_period: usize,
    pub periods: usize,
    /// Assignment errors of the final projective readout.
    pub p_e_given_g: T,
    pub p_g_given_e: T,
}

impl<T: Real> Default for RamseySettings<T> {
    fn default() -> Self {
        Self {
            detuning_mhz: T::one(),
            points_per_period: 20,
            periods: 3,
            p_e_given_g: T::lit(0.02),
            p_g_given_e: T::lit(0.025),
        }
    }
}

impl<T: Real> RamseySettings<T> {
    /// Delay grid in ns, starting at zero.
    pub fn delays_ns(&self) -> Vec<T> {
        let period_ns = T::lit(1e3) / self.detuning_mhz;
        let n = self.points_per_period * self.periods;
        let step = period_ns / T::from_usize_lossy(self.points_per_period);
        (0..n).map(|i| T::from_usize_lossy(i) * step).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct PulseSchedule<T> {
    pub events: Vec<PulseEvent<T>>,
    pub total_ns: T,
    #[serde(default)]
    pub ramsey: RamseySettings<T>,
}

impl<T: Real> PulseSchedule<T> {
    pub fn new(events: Vec<PulseEvent<T>>, total_ns: T) -> Self {
        Self {
            events,
            total_ns,
            ramsey: RamseySettings::default(),
        }
    }

    pub fn events_of(&self, kind: EventKind) -> impl Iterator<Item = &PulseEvent<T>> {
        self.events.iter().filter(move |e| e.kind == kind)
    }

    /// First window of the given kind.
    pub fn first(&self, kind: EventKind) -> Option<&PulseEvent<T>> {
        self.events_of(kind).next()
    }

    pub fn has(&self, kind: EventKind) -> bool {
        self.first(kind).is_some()
    }

    /// Time at which the measured field is handed to the amplifier: the pump
    /// start, else the close of the swap window, else the release start, else
    /// the end of the sequence.
    pub fn capture_time(&self) -> T {
        if let Some(p) = self.first(EventKind::PumpOn) {
            return p.t_start_ns;
        }
        let release = self.release_time();
        self.first(EventKind::Tib1Transmit)
            .map(|e| e.t_stop_ns)
            .filter(|&t| t <= release)
            .unwrap_or(release)
    }

    /// Readout time: the start of the release window, else the end of the sequence.
    pub fn release_time(&self) -> T {
        self.first(EventKind::Tib2Transmit)
            .map(|e| e.t_start_ns)
            .unwrap_or(self.total_ns)
    }

    /// End of the last drive window (zero when there is none).
    pub fn drive_end(&self) -> T {
        self.events_of(EventKind::Drive)
            .map(|e| e.t_stop_ns)
            .fold(T::zero(), T::max)
    }

    /// Copy with every drive amplitude replaced by `epsilon`.
    pub fn with_drive_amplitude(&self, epsilon: T) -> Self {
        let mut out = self.clone();
        for e in out.events.iter_mut().filter(|e| e.kind == EventKind::Drive) {
            e.amplitude = epsilon;
        }
        out
    }

    /// Copy with every event of `kind` removed.
    pub fn without(&self, kind: EventKind) -> Self {
        let mut out = self.clone();
        out.events.retain(|e| e.kind != kind);
        out
    }

    /// Copy whose first TIB1 window lasts `duration_ns`; events starting at or
    /// after the end of the original window move with it.
    pub fn with_swap_duration(&self, duration_ns: T) -> Self {
        let mut out = self.clone();
        let Some(idx) = out
            .events
            .iter()
            .position(|e| e.kind == EventKind::Tib1Transmit)
        else {
            return out;
        };
        let old_stop = out.events[idx].t_stop_ns;
        let shift = out.events[idx].t_start_ns + duration_ns - old_stop;
        out.events[idx].t_stop_ns = old_stop + shift;
        for (i, e) in out.events.iter_mut().enumerate() {
            if i != idx && e.t_start_ns >= old_stop {
                e.t_start_ns += shift;
                e.t_stop_ns += shift;
            }
        }
        out.total_ns += shift;
        out
    }

    pub fn cast<U: Real>(&self) -> PulseSchedule<U> {
        let c = |x: T| U::lit(x.as_f64());
        PulseSchedule {
            events: self
                .events
                .iter()
                .map(|e| PulseEvent {
                    kind: e.kind,
                    t_start_ns: c(e.t_start_ns),
                    t_stop_ns: c(e.t_stop_ns),
                    amplitude: c(e.amplitude),
                    shape: e.shape,
                })
                .collect(),
            total_ns: c(self.total_ns),
            ramsey: RamseySettings {
                detuning_mhz: c(self.ramsey.detuning_mhz),
                points_per_period: self.ramsey.points_per_period,
                periods: self.ramsey.periods,
                p_e_given_g: c(self.ramsey.p_e_given_g),
                p_g_given_e: c(self.ramsey.p_g_given_e),
            },
        }
    }
}
