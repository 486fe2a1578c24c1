use std::fmt;

use serde::Serialize;

use crate::model::{EventKind, PhysicalConfig, PulseSchedule};
use crate::scalar::Real;

/// One failed invariant, named by its dotted JSON path.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct Violation {
    pub field: String,
    pub message: String,
}

impl Violation {
    pub fn new(field: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            field: field.into(),
            message: message.into(),
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.field, self.message)
    }
}

struct Checker {
    out: Vec<Violation>,
}

impl Checker {
    fn check(&mut self, ok: bool, field: &str, message: impl FnOnce() -> String) {
        if !ok {
            self.out.push(Violation::new(field, message()));
        }
    }

    fn finite<T: Real>(&mut self, v: T, field: &str) -> bool {
        let ok = v.is_finite();
        self.check(ok, field, || format!("must be finite, got {v}"));
        ok
    }
}

/// Check every parameter invariant. Never fails; returns all violations sorted
/// by field so the result is independent of check order.
pub fn validate_config<T: Real>(cfg: &PhysicalConfig<T>, schedule: &PulseSchedule<T>) -> Vec<Violation> {
    let zero = T::zero();
    let mut c = Checker { out: Vec::new() };

    let q = &cfg.qubit;
    if c.finite(q.chi, "qubit.chi") {
        c.check(q.chi > zero, "qubit.chi", || format!("must be > 0, got {}", q.chi));
    }
    let t_ok = c.finite(q.t1_us, "qubit.t1_us") & c.finite(q.t2_us, "qubit.t2_us");
    if t_ok {
        c.check(q.t1_us > zero, "qubit.t1_us", || format!("must be > 0, got {}", q.t1_us));
        c.check(q.t2_us > zero, "qubit.t2_us", || format!("must be > 0, got {}", q.t2_us));
        c.check(q.t2_us <= T::lit(2.0) * q.t1_us, "qubit.t2_us", || {
            format!("must not exceed 2·t1_us = {}, got {}", T::lit(2.0) * q.t1_us, q.t2_us)
        });
    }
    if c.finite(q.p_thermal, "qubit.p_thermal") {
        c.check(q.p_thermal >= zero && q.p_thermal < T::lit(0.5), "qubit.p_thermal", || {
            format!("must lie in [0, 0.5), got {}", q.p_thermal)
        });
    }

    let r = &cfg.readout;
    if c.finite(r.kappa_r, "readout.kappa_r") {
        c.check(r.kappa_r > zero, "readout.kappa_r", || format!("must be > 0, got {}", r.kappa_r));
    }
    if c.finite(r.kappa_in_fraction, "readout.kappa_in_fraction") {
        c.check(
            r.kappa_in_fraction >= zero && r.kappa_in_fraction <= T::one(),
            "readout.kappa_in_fraction",
            || format!("must lie in [0, 1], got {}", r.kappa_in_fraction),
        );
    }
    c.finite(r.detuning_r, "readout.detuning_r");
    if c.finite(r.epsilon_scale, "readout.epsilon_scale") {
        c.check(r.epsilon_scale > zero, "readout.epsilon_scale", || {
            format!("must be > 0, got {}", r.epsilon_scale)
        });
    }

    let p = &cfg.paramp;
    if c.finite(p.kappa_loss, "paramp.kappa_loss") {
        c.check(p.kappa_loss >= zero, "paramp.kappa_loss", || {
            format!("must be >= 0, got {}", p.kappa_loss)
        });
    }
    c.finite(p.detuning_p, "paramp.detuning_p");
    if let Some(k) = p.kerr {
        c.finite(k, "paramp.kerr");
    }
    if c.finite(p.pump_lambda, "paramp.pump_lambda") {
        c.check(p.pump_lambda >= zero, "paramp.pump_lambda", || {
            format!("must be >= 0, got {}", p.pump_lambda)
        });
    }
    if c.finite(p.pump_ramp_ns, "paramp.pump_ramp_ns") {
        c.check(p.pump_ramp_ns >= zero, "paramp.pump_ramp_ns", || {
            format!("must be >= 0, got {}", p.pump_ramp_ns)
        });
    }
    if c.finite(p.n_latch_target, "paramp.n_latch_target") {
        c.check(p.n_latch_target > zero, "paramp.n_latch_target", || {
            format!("must be > 0, got {}", p.n_latch_target)
        });
    }

    for (name, tib) in [("tib1", &cfg.tib1), ("tib2", &cfg.tib2)] {
        let f = |s: &str| format!("{name}.{s}");
        if c.finite(tib.g_on, &f("g_on")) {
            c.check(tib.g_on > zero, &f("g_on"), || format!("must be > 0, got {}", tib.g_on));
        }
        if c.finite(tib.leak_db, &f("leak_db")) {
            c.check(tib.leak_db <= T::lit(-20.0), &f("leak_db"), || {
                format!("must be <= -20 dB, got {}", tib.leak_db)
            });
        }
        if c.finite(tib.rise_ns, &f("rise_ns")) {
            c.check(tib.rise_ns > zero, &f("rise_ns"), || format!("must be > 0, got {}", tib.rise_ns));
        }
    }

    let n = &cfg.noise;
    if c.finite(n.eta_loss, "noise.eta_loss") {
        c.check(n.eta_loss > zero && n.eta_loss <= T::one(), "noise.eta_loss", || {
            format!("must lie in (0, 1], got {}", n.eta_loss)
        });
    }
    if c.finite(n.eta_amp, "noise.eta_amp") {
        c.check(n.eta_amp > zero && n.eta_amp <= T::one(), "noise.eta_amp", || {
            format!("must lie in (0, 1], got {}", n.eta_amp)
        });
    }
    for (field, v) in [("noise.n_b_injected", n.n_b_injected), ("noise.n_b_tib", n.n_b_tib)] {
        if c.finite(v, field) {
            c.check(v >= zero, field, || format!("must be >= 0, got {v}"));
        }
    }

    if c.finite(cfg.dt_ns, "integrator.dt_ns") {
        let fastest = cfg.fastest_rate();
        let bound = T::lit(1e3) / (T::lit(50.0) * fastest);
        c.check(cfg.dt_ns > zero, "integrator.dt_ns", || format!("must be > 0, got {}", cfg.dt_ns));
        c.check(fastest <= zero || cfg.dt_ns <= bound, "integrator.dt_ns", || {
            format!("must resolve the fastest rate ({fastest} MHz): dt <= {bound} ns, got {}", cfg.dt_ns)
        });
    }

    check_schedule(&mut c, schedule);

    if schedule.has(EventKind::PumpOn) && p.pump_lambda.is_finite() {
        let thr = cfg.latching_threshold();
        c.check(p.pump_lambda > thr, "paramp.pump_lambda", || {
            format!("below latching threshold: {} <= {thr} MHz", p.pump_lambda)
        });
        if let Some(k) = p.kerr {
            c.check(k != zero, "paramp.kerr", || "latching requires a nonzero Kerr term".into());
        } else if p.pump_lambda > thr {
            c.check(cfg.resolved_kerr() < zero, "paramp.detuning_p", || {
                "too large to place a softening latched state at n_latch_target".into()
            });
        }
    }

    if schedule.has(EventKind::Drive) {
        c.check(r.kappa_in_fraction > zero, "readout.kappa_in_fraction", || {
            "must be > 0 when a drive is scheduled".into()
        });
    }

    c.out.sort();
    c.out.dedup();
    c.out
}

fn check_schedule<T: Real>(c: &mut Checker, s: &PulseSchedule<T>) {
    let zero = T::zero();
    if c.finite(s.total_ns, "schedule.total_ns") {
        c.check(s.total_ns > zero, "schedule.total_ns", || format!("must be > 0, got {}", s.total_ns));
    }
    for (i, e) in s.events.iter().enumerate() {
        let f = format!("schedule.events[{i}]");
        if !(c.finite(e.t_start_ns, &f) & c.finite(e.t_stop_ns, &f) & c.finite(e.amplitude, &f)) {
            continue;
        }
        c.check(e.t_start_ns >= zero && e.t_start_ns < e.t_stop_ns, &f, || {
            format!("{} window [{}, {}] is empty or starts before 0", e.kind.name(), e.t_start_ns, e.t_stop_ns)
        });
        c.check(e.t_stop_ns <= s.total_ns, &f, || {
            format!("{} window ends at {} after total_ns = {}", e.kind.name(), e.t_stop_ns, s.total_ns)
        });
        c.check(e.amplitude >= zero, &f, || format!("drive amplitude must be >= 0, got {}", e.amplitude));
    }
    for kind in EventKind::ALL {
        let mut last_stop: Option<T> = None;
        for e in s.events_of(kind) {
            if let Some(prev) = last_stop {
                c.check(e.t_start_ns >= prev, "schedule.events", || {
                    format!("{} windows overlap or are out of order", kind.name())
                });
            }
            last_stop = Some(e.t_stop_ns);
        }
    }
    let r = &s.ramsey;
    if c.finite(r.detuning_mhz, "schedule.ramsey.detuning_mhz") {
        c.check(r.detuning_mhz > zero, "schedule.ramsey.detuning_mhz", || "must be > 0".into());
    }
    c.check(r.points_per_period >= 4, "schedule.ramsey.points_per_period", || "must be >= 4".into());
    c.check(r.periods >= 2, "schedule.ramsey.periods", || "must span >= 2 fringe periods".into());
    for (field, v) in [("schedule.ramsey.p_e_given_g", r.p_e_given_g), ("schedule.ramsey.p_g_given_e", r.p_g_given_e)] {
        if c.finite(v, field) {
            c.check(v >= zero && v < T::lit(0.5), field, || format!("must lie in [0, 0.5), got {v}"));
        }
    }
}
