mod common;

use num_complex::Complex;
use proptest::prelude::*;
use simba::dynamics::*;
use simba::measurement::{readout_fidelity, threshold_decide};
use simba::model::{DriveShape, EventKind, PulseEvent, PulseSchedule};
use simba::rng::{rng_from_seed, SeedStream};

fn two_mode_rabi(g_mhz: f64, t_ns: f64) -> f64 {
    (std::f64::consts::TAU * g_mhz * 1e-3 * t_ns).cos().powi(2)
}

#[test]
fn lossless_exchange_follows_two_mode_rabi() {
    let (c, s) = common::lossless(40.0);
    let e = Engine::new(&c, &s).unwrap();
    let init = Modes { r: Complex::new(1.0, 0.0), p: Complex::default() };
    let tr = e.conditional_from(QubitState::Ground, init).unwrap();
    for i in (0..tr.len()).step_by(50) {
        let want = two_mode_rabi(c.tib1.g_on, tr.times_ns[i]);
        assert!((tr.alpha_r[i].norm_sqr() - want).abs() < 1e-8, "t = {}", tr.times_ns[i]);
    }
    let at20 = tr.times_ns.iter().position(|t| (*t - 20.0).abs() < 1e-9).unwrap();
    assert!((tr.alpha_p[at20].norm_sqr() - 1.0).abs() < 1e-8);
}

#[test]
fn zero_input_stays_zero() {
    let mut setup = common::paper();
    setup.schedule = setup.schedule.with_drive_amplitude(0.0).without(EventKind::PumpOn);
    for q in [QubitState::Ground, QubitState::Excited] {
        let tr = integrate_conditional(&setup.config, &setup.schedule, q).unwrap();
        assert!(tr.alpha_r.iter().chain(&tr.alpha_p).all(|a| a.norm_sqr() == 0.0));
    }
}

#[test]
fn slow_drive_reflection_phase() {
    let mut setup = common::paper();
    let t = 6000.0;
    setup.schedule = PulseSchedule::new(vec![PulseEvent::drive(0.0, t, 1.0, DriveShape::Square)], t);
    let g = integrate_conditional(&setup.config, &setup.schedule, QubitState::Ground).unwrap();
    let e = integrate_conditional(&setup.config, &setup.schedule, QubitState::Excited).unwrap();
    let i = g.times_ns.iter().position(|x| *x >= t - 100.0).unwrap();
    let dphi = (e.alpha_r[i] / g.alpha_r[i]).arg().abs();
    let c = &setup.config;
    let want = 2.0 * (2.0 * c.qubit.chi / c.readout.kappa_r).atan();
    assert!((dphi - want).abs() / want < 0.05, "{dphi} vs {want}");
}

fn photon_drift(kerr: f64) -> f64 {
    let (mut c, _) = common::lossless(200.0);
    c.paramp.kerr = Some(kerr);
    c.tib1.rise_ns = 2.0;
    let s = PulseSchedule::new(
        vec![
            PulseEvent::new(EventKind::Tib1Transmit, 10.0, 35.0),
            PulseEvent::new(EventKind::Tib1Transmit, 80.0, 150.0),
        ],
        200.0,
    );
    let e = Engine::new(&c, &s).unwrap();
    let init = Modes { r: Complex::new(0.8, -0.3), p: Complex::new(0.1, 0.5) };
    let tr = e.conditional_from(QubitState::Excited, init).unwrap();
    let n = tr.photons();
    n.iter().map(|x| (x - n[0]).abs() / n[0]).fold(0.0, f64::max)
}

#[test]
fn photon_number_conserved_without_loss() {
    // 200 ns of switching; the bound is 1e-6 per 100 ns.
    assert!(photon_drift(0.0) < 2e-6);
    assert!(photon_drift(-0.3) < 2e-6);
}

#[test]
fn step_halving_converges() {
    let setup = common::paper();
    let e = Engine::new(&setup.config, &setup.schedule).unwrap();
    let eps = e.budget().epsilon_for_photons(2.4);
    let sched = setup.schedule.with_drive_amplitude(eps);
    let mut fine = setup.config.clone();
    fine.dt_ns /= 2.0;
    for q in [QubitState::Ground, QubitState::Excited] {
        let a = integrate_conditional(&setup.config, &sched, q).unwrap();
        let b = integrate_conditional(&fine, &sched, q).unwrap();
        let (pa, pb) = (*a.alpha_p.last().unwrap(), *b.alpha_p.last().unwrap());
        let (ra, rb) = (*a.alpha_r.last().unwrap(), *b.alpha_r.last().unwrap());
        let scale = (pa.norm_sqr() + ra.norm_sqr()).sqrt();
        assert!(((pa - pb).norm() + (ra - rb).norm()) / scale < 1e-4);
    }
}

#[test]
fn deterministic_latch_follows_seed() {
    let c = common::paper().config;
    let n_target = c.paramp.n_latch_target;
    let pos = latch(&c, Complex::new(0.7, 0.0)).unwrap();
    let neg = latch(&c, Complex::new(-0.7, 0.0)).unwrap();
    let quarter = std::f64::consts::FRAC_PI_4;
    assert!(pos.latched_phase.abs() < quarter, "{pos:?}");
    assert!(std::f64::consts::PI - neg.latched_phase.abs() < quarter, "{neg:?}");
    for o in [pos, neg] {
        assert!((o.n_final - n_target).abs() / n_target <= 0.25);
    }
    assert!((pos.n_final - neg.n_final).abs() < 1e-9);
    let zero = latch(&c, Complex::new(0.0, 0.0)).unwrap();
    assert_eq!(zero.n_final, 0.0);
}

#[test]
fn latch_requires_pump_above_threshold_and_kerr() {
    let mut c = common::paper().config;
    c.paramp.pump_lambda = 1.0;
    assert!(matches!(latch(&c, Complex::new(0.7, 0.0)), Err(simba::Error::NoLatch(_))));
    let mut c = common::paper().config;
    c.paramp.kerr = Some(0.0);
    assert!(matches!(latch(&c, Complex::new(0.7, 0.0)), Err(simba::Error::NoLatch(_))));
}

#[test]
fn noisy_latch_keeps_seed_side() {
    let c = common::paper().config;
    let stream = SeedStream::new(11);
    for (k, amp) in [0.5, -0.5].into_iter().enumerate() {
        let sub = stream.child(k as u64);
        let wrong = (0..300)
            .filter(|&i| latch_with_noise(&c, Complex::new(amp, 0.0), sub.seed(i)).unwrap().side() as f64 * amp < 0.0)
            .count();
        assert_eq!(wrong, 0);
    }
}

#[test]
fn kerr_runaway_is_reported_with_time() {
    let mut setup = common::paper();
    setup.config.paramp.kerr = Some(1e4);
    let e = Engine::new(&setup.config, &setup.schedule.without(EventKind::Drive)).unwrap();
    let init = Modes { r: Complex::default(), p: Complex::new(3.0, 0.0) };
    match e.conditional_from(QubitState::Excited, init) {
        Err(simba::Error::Divergence { t_ns }) => assert!(t_ns > 0.0 && t_ns <= 160.0),
        other => panic!("expected divergence, got {other:?}"),
    }
}

#[test]
fn shot_records_follow_threshold_rule() {
    let setup = common::paper();
    let e = Engine::new(&setup.config, &setup.schedule).unwrap().with_amplitude(10.0);
    for q in [QubitState::Ground, QubitState::Excited] {
        for s in e.shots(q, 50, SeedStream::new(3)).unwrap() {
            assert!(s.latched_phase > -std::f64::consts::PI && s.latched_phase <= std::f64::consts::PI);
            assert_eq!(s.decision, threshold_decide(s.x_measured, 0.0));
            assert_eq!(s.qubit_prep, q);
        }
    }
    let one = simulate_shot(&setup.config, &setup.schedule.with_drive_amplitude(10.0), QubitState::Excited, 99).unwrap();
    assert_eq!(one, e.shot(QubitState::Excited, 99).unwrap());
}

#[test]
fn shots_are_order_independent() {
    let setup = common::paper();
    let e = Engine::new(&setup.config, &setup.schedule).unwrap();
    let stream = SeedStream::new(5);
    let batch = e.shots(QubitState::Ground, 20, stream).unwrap();
    let again = e.shots(QubitState::Ground, 20, stream).unwrap();
    assert_eq!(batch, again);
    for rec in batch.iter().rev() {
        assert_eq!(*rec, e.shot(QubitState::Ground, rec.seed).unwrap());
    }
}

#[test]
fn zero_amplitude_splits_evenly() {
    let setup = common::paper();
    let e = Engine::new(&setup.config, &setup.schedule).unwrap().with_amplitude(0.0);
    let n = 2000;
    let shots = e.shots(QubitState::Ground, n, SeedStream::new(8)).unwrap();
    let excited = shots.iter().filter(|s| s.decision == QubitState::Excited).count() as f64 / n as f64;
    let sd = (0.25 / n as f64).sqrt();
    assert!((excited - 0.5).abs() < 3.0 * sd, "{excited}");
}

#[test]
fn direct_readout_matches_coherent_state_histograms() {
    let setup = common::gaussian_oracle();
    let e = Engine::new(&setup.config, &setup.schedule).unwrap();
    let eps = e.budget().epsilon_for_photons(1.0);
    let e = e.with_amplitude(eps);
    let n = 4000;
    let h = e.histograms(n, SeedStream::new(21)).unwrap();
    let stats = |x: &[f64]| {
        let m = x.iter().sum::<f64>() / x.len() as f64;
        let v = x.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (x.len() - 1) as f64;
        (m, v.sqrt())
    };
    let (m0, s0) = stats(&h.x0);
    let (m1, s1) = stats(&h.x1);
    let tol = 4.0 * 0.5 / (n as f64).sqrt();
    assert!((m0 + 1.0).abs() < tol && (m1 - 1.0).abs() < tol, "{m0} {m1}");
    assert!((s0 - 0.5).abs() < 0.02 && (s1 - 0.5).abs() < 0.02, "{s0} {s1}");
}

#[test]
fn projective_point_matches_erf_model() {
    let setup = common::paper();
    let e = Engine::new(&setup.config, &setup.schedule).unwrap();
    let e = e.with_amplitude(e.budget().epsilon_for_photons(2.4));
    let (f, se) = readout_fidelity(&e.histograms(4000, SeedStream::new(2)).unwrap()).unwrap();
    let want = 0.955 * libm::erf((2.0f64 * 0.704 * 2.4).sqrt());
    assert!((f - want).abs() < 3.0 * se, "{f} ± {se} vs {want}");
}

#[test]
fn swap_scan_tracks_exchange() {
    let setup = common::paper();
    let s = setup.schedule.with_drive_amplitude(
        Engine::new(&setup.config, &setup.schedule).unwrap().budget().epsilon_for_photons(0.5),
    );
    let scan = swap_scan(&setup.config, &s, &[20.0, 30.0], 1000, 4).unwrap();
    assert!(scan[0].fidelity > scan[1].fidelity, "{scan:?}");
    // Without the reflect-mode leak nothing reaches the amplifier for a vanishing window.
    let mut sealed = setup.config.clone();
    sealed.tib1.leak_db = -200.0;
    let short = swap_scan(&sealed, &s, &[0.25], 1000, 4).unwrap()[0];
    assert!(short.fidelity.abs() < 3.0 * short.stderr.max(0.02), "{short:?}");
    assert!(swap_scan(&setup.config, &s, &[0.0], 10, 4).is_err());
}

#[test]
fn eta_loss_above_port_budget_is_a_violation() {
    let mut setup = common::paper();
    setup.config.noise.eta_loss = 0.9;
    let v = setup.violations();
    assert!(v.iter().any(|v| v.field == "noise.eta_loss"), "{v:?}");
}

#[test]
fn realised_efficiency_matches_target() {
    let mut setup = common::gaussian_oracle();
    setup.config.noise.eta_loss = 0.5;
    let e = Engine::new(&setup.config, &setup.schedule).unwrap();
    assert!((e.budget().intrinsic_efficiency * e.budget().beam_splitter - 0.5).abs() < 1e-3);
}

#[test]
fn trajectory_and_shot_csv_headers() {
    let setup = common::paper();
    let tr = integrate_conditional(&setup.config, &setup.schedule, QubitState::Ground).unwrap();
    let mut buf = Vec::new();
    write_trajectory_csv(&tr, &mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    assert!(text.starts_with("t_ns,re_ar,im_ar,re_ap,im_ap\n"));
    assert_eq!(text.lines().count(), tr.len() + 1);
    let e = Engine::new(&setup.config, &setup.schedule).unwrap();
    let shots = e.shots(QubitState::Excited, 3, SeedStream::new(0)).unwrap();
    let mut buf = Vec::new();
    write_shots_csv(&shots, &mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    assert!(text.starts_with("prep,seed,latched_phase,x_measured,decision\n"));
    assert!(text.lines().nth(1).unwrap().starts_with("pi,"));
}

#[test]
fn single_precision_pipeline_runs() {
    let setup = common::paper().cast::<f32>();
    let e = Engine::new(&setup.config, &setup.schedule).unwrap();
    let a = e.conditional(QubitState::Ground).unwrap();
    assert!(a.alpha_p.iter().all(|z| z.re.is_finite()));
    let s = e.shot(QubitState::Excited, 1).unwrap();
    assert!(s.x_measured.is_finite());
}

fn linear_setup() -> simba::model::Setup<f64> {
    let mut s = common::paper();
    s.config.paramp.kerr = Some(0.0);
    s.config.paramp.pump_lambda = 3.0;
    s.config.qubit.p_thermal = 0.0;
    s.config.qubit.t1_us = 1e12;
    s.schedule = s.schedule.with_drive_amplitude(5.0);
    s
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    // The dispersive term acts on the fluctuations differently in the two
    // branches, so the noise-free quantity is the response to the drive:
    // within one branch, the difference between two drive amplitudes.
    #[test]
    fn drive_response_is_independent_of_noise(seed_a in any::<u64>(), seed_b in any::<u64>()) {
        let s = linear_setup();
        let lo = Engine::new(&s.config, &s.schedule.with_drive_amplitude(2.0)).unwrap();
        let hi = Engine::new(&s.config, &s.schedule.with_drive_amplitude(7.0)).unwrap();
        for q in [QubitState::Ground, QubitState::Excited] {
            let diff = |seed: u64| {
                let a = lo.noisy_release_state(q, &mut rng_from_seed(seed), 1.0).unwrap();
                let b = hi.noisy_release_state(q, &mut rng_from_seed(seed), 1.0).unwrap();
                (b.r - a.r, b.p - a.p)
            };
            let (a, b) = (diff(seed_a), diff(seed_b));
            let scale = a.1.norm().max(a.0.norm()).max(1.0);
            prop_assert!((a.0 - b.0).norm() / scale < 1e-9);
            prop_assert!((a.1 - b.1).norm() / scale < 1e-9);
        }
    }

    #[test]
    fn drive_and_noise_reversal_negates_field(seed in any::<u64>(), eps in 0.5f64..30.0) {
        let s = common::paper();
        let plus = Engine::new(&s.config, &s.schedule.with_drive_amplitude(eps)).unwrap();
        let minus = Engine::new(&s.config, &s.schedule.with_drive_amplitude(-eps)).unwrap();
        for q in [QubitState::Ground, QubitState::Excited] {
            let a = plus.noisy_release_state(q, &mut rng_from_seed(seed), 1.0).unwrap();
            let b = minus.noisy_release_state(q, &mut rng_from_seed(seed), -1.0).unwrap();
            prop_assert_eq!(a.r, -b.r);
            prop_assert_eq!(a.p, -b.p);
        }
    }
}

