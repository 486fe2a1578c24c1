#![allow(dead_code)]

use simba::model::{paper_setup, EventKind, PhysicalConfig, PulseEvent, PulseSchedule, Setup};

/// Shipped reference operating point.
pub fn paper() -> Setup<f64> {
    paper_setup()
}

/// Lossless, unpumped, linear two-mode system with the switch held open.
pub fn lossless(total_ns: f64) -> (PhysicalConfig<f64>, PulseSchedule<f64>) {
    let mut c = paper().config;
    c.qubit.chi = 0.0;
    c.readout.kappa_in_fraction = 0.0;
    c.paramp.kappa_loss = 0.0;
    c.paramp.kerr = Some(0.0);
    c.paramp.pump_lambda = 0.0;
    c.tib1.rise_ns = 0.0;
    c.tib2.g_on = 0.0;
    c.noise.eta_loss = 1.0;
    let s = PulseSchedule::new(vec![PulseEvent::new(EventKind::Tib1Transmit, 0.0, total_ns)], total_ns);
    (c, s)
}

/// Direct quadrature readout: no pump, no Kerr, negligible loss, full swap.
/// `eta_loss` is set to what the remaining ports allow, so no extra beam
/// splitter is inserted.
pub fn gaussian_oracle() -> Setup<f64> {
    let mut s = paper();
    let c = &mut s.config;
    c.readout.kappa_r = 1e-4;
    c.paramp.kappa_loss = 0.0;
    c.paramp.kerr = Some(0.0);
    c.paramp.pump_lambda = 0.0;
    c.tib1.leak_db = -200.0;
    c.tib2.leak_db = -200.0;
    c.qubit.p_thermal = 0.0;
    c.qubit.t1_us = 1e12;
    c.noise.n_b_injected = 0.0;
    s.schedule = s.schedule.without(EventKind::PumpOn);
    let engine = simba::dynamics::Engine::new(&s.config, &s.schedule).unwrap();
    s.config.noise.eta_loss = engine.budget().intrinsic_efficiency;
    s
}
