mod common;

use num_complex::Complex;
use proptest::prelude::*;
use rand::Rng;
use rand_distr::StandardNormal;
use simba::dynamics::{integrate_conditional, ConditionalTrajectory, Engine, Modes, QubitState};
use simba::measurement::*;
use simba::model::{EventKind, RamseySettings};
use simba::rng::{rng_from_seed, SeedStream};

fn gaussians(mu0: f64, mu1: f64, sd: f64, n: usize, seed: u64) -> HistogramPair<f64> {
    let mut rng = rng_from_seed(seed);
    let mut draw = |mu: f64| -> Vec<f64> {
        (0..n)
            .map(|_| {
                let z: f64 = rng.sample(StandardNormal);
                mu + sd * z
            })
            .collect()
    };
    let x0 = draw(mu0);
    HistogramPair::new(x0, draw(mu1))
}

#[test]
fn decision_rule() {
    assert_eq!(threshold_decide(3.0, 0.0), QubitState::Excited);
    assert_eq!(threshold_decide(-3.0, 0.0), QubitState::Ground);
    assert_eq!(threshold_decide(0.0, 0.0), QubitState::Ground);
}

#[test]
fn fidelity_extremes() {
    let perfect = HistogramPair::new(vec![-1.0; 100], vec![1.0; 100]);
    assert_eq!(readout_fidelity(&perfect).unwrap(), (1.0, 0.0));
    let half: Vec<f64> = (0..200).map(|i| if i % 2 == 0 { -1.0 } else { 1.0 }).collect();
    let none = HistogramPair::new(half.clone(), half);
    assert_eq!(readout_fidelity(&none).unwrap().0, 0.0);
    assert!(readout_fidelity(&HistogramPair::new(vec![], vec![1.0; 100])).is_err());
    assert!(readout_fidelity(&HistogramPair::new(vec![-1.0; 99], vec![1.0; 100])).is_err());
}

#[test]
fn gaussian_overlap_gives_erf() {
    // means ±√(η n_r) with η n_r = 1, std 1/2
    let h = gaussians(-1.0, 1.0, 0.5, 20_000, 7);
    let (f, se) = readout_fidelity(&h).unwrap();
    let want = libm::erf(2f64.sqrt());
    assert!((want - 0.9545).abs() < 1e-4);
    assert!((f - want).abs() < 3.0 * se, "{f} ± {se}");
}

#[test]
fn threshold_of_symmetric_gaussians() {
    let h = gaussians(-1.0, 1.0, 0.5, 200_000, 3);
    let t = choose_threshold(&h);
    assert!(t.abs() < 0.02, "{t}");
}

#[test]
fn threshold_is_translation_equivariant() {
    let h = gaussians(-1.0, 1.0, 0.5, 5000, 4);
    let c = 2.75;
    let shifted = HistogramPair::new(
        h.x0.iter().map(|x| x + c).collect(),
        h.x1.iter().map(|x| x + c).collect(),
    );
    assert!((choose_threshold(&shifted) - choose_threshold(&h) - c).abs() < 1e-9);
}

#[test]
fn threshold_on_latched_shots_matches_erf() {
    let setup = common::paper();
    let e = Engine::new(&setup.config, &setup.schedule).unwrap();
    let e = e.with_amplitude(e.budget().epsilon_for_photons(2.4));
    let h = e.histograms(3000, SeedStream::new(12)).unwrap();
    let t = choose_threshold(&h);
    let (f, se) = readout_fidelity(&h.with_threshold(t)).unwrap();
    let want = 0.955 * libm::erf((2.0f64 * 0.704 * 2.4).sqrt());
    // The optimised threshold can only help; allow the in-sample gain.
    assert!(f - want > -3.0 * se && f - want < 3.0 * se + 0.01, "{f} ± {se} vs {want}");
}

#[test]
fn ideal_dephasing_values() {
    assert_eq!(dephasing_ideal(0.0, 0.0), 0.5);
    assert!((dephasing_ideal(0.0f64, 0.63) - 0.141).abs() < 0.002);
    assert!((dephasing_ideal(1.0, 0.0) - 0.5 * (-2.0f64).exp()).abs() < 1e-15);
    // Overlap of coherent states two apart.
    let overlap = (-(2.0f64.powi(2)) / 2.0).exp();
    assert!((2.0 * dephasing_ideal(1.0, 0.0) - overlap).abs() < 1e-15);
}

fn pair(setup: &simba::model::Setup<f64>) -> (ConditionalTrajectory<f64>, ConditionalTrajectory<f64>) {
    let g = integrate_conditional(&setup.config, &setup.schedule, QubitState::Ground).unwrap();
    let e = integrate_conditional(&setup.config, &setup.schedule, QubitState::Excited).unwrap();
    (g, e)
}

#[test]
fn identical_trajectories_keep_backaction_only() {
    let setup = common::paper();
    let (g, _) = pair(&setup);
    let rho = dephasing_from_trajectories(&g, &g, &setup.config, &setup.schedule).unwrap();
    assert!((rho - 0.5 * (-2.0f64 * 0.63).exp()).abs() < 1e-12);
    let off = setup.schedule.without(EventKind::PumpOn);
    let rho = dephasing_from_trajectories(&g, &g, &setup.config, &off).unwrap();
    assert!((rho - 0.5 * (-0.1f64).exp()).abs() < 1e-12);
}

#[test]
fn lossless_capture_overlap() {
    // Field with separation 2√n_r sitting in a lossless parametric cavity at capture.
    let (c, _) = common::lossless(20.0);
    let s = simba::model::PulseSchedule::new(vec![], 20.0);
    let e = Engine::new(&c, &s).unwrap();
    let n_r: f64 = 0.8;
    let half = n_r.sqrt();
    let g = e.conditional_from(QubitState::Ground, Modes { r: Complex::default(), p: Complex::new(0.0, -half) }).unwrap();
    let x = e.conditional_from(QubitState::Excited, Modes { r: Complex::default(), p: Complex::new(0.0, half) }).unwrap();
    let rho = dephasing_from_trajectories(&g, &x, &c, &s).unwrap();
    let want = dephasing_ideal(n_r, 0.0);
    assert!((rho - want).abs() / want < 0.01, "{rho} vs {want}");
}

#[test]
fn projective_measurement_erases_coherence() {
    let setup = common::paper();
    let eps = Engine::new(&setup.config, &setup.schedule).unwrap().budget().epsilon_for_photons(2.4);
    let mut s = setup.clone();
    s.schedule = s.schedule.with_drive_amplitude(eps);
    let (g, e) = pair(&s);
    let rho = dephasing_from_trajectories(&g, &e, &s.config, &s.schedule).unwrap();
    assert!(rho <= 0.01, "{rho}");
    let n_r = integrated_separation(&g, &e).unwrap() / 4.0;
    assert!((n_r - 2.4).abs() < 0.05, "{n_r}");
}

#[test]
fn grid_mismatch_is_an_error() {
    let setup = common::paper();
    let (g, e) = pair(&setup);
    let mut fine = setup.config.clone();
    fine.dt_ns /= 2.0;
    let f = integrate_conditional(&fine, &setup.schedule, QubitState::Excited).unwrap();
    assert!(matches!(
        dephasing_from_trajectories(&g, &f, &setup.config, &setup.schedule),
        Err(simba::Error::GridMismatch)
    ));
    assert!(dephasing_from_trajectories(&g, &e, &setup.config, &setup.schedule).unwrap() <= 0.5);
}

#[test]
fn ramsey_without_measurement_is_half() {
    let setup = common::paper();
    let st = RamseySettings::default();
    let r = ramsey_coherence(&setup.config, &st, None, &st.delays_ns(), Some(2000), 1).unwrap();
    assert_eq!(r.rho01, 0.5);
    assert_eq!(r.fringe_amplitude, r.reference_amplitude);
    let short: Vec<f64> = st.delays_ns().into_iter().take(25).collect();
    assert!(matches!(
        ramsey_coherence(&setup.config, &st, None, &short, None, 1),
        Err(simba::Error::Precondition(_))
    ));
}

#[test]
fn ramsey_pump_on_zero_amplitude() {
    let mut setup = common::paper();
    setup.config.noise.n_b_injected = 0.63;
    setup.config.noise.n_b_tib = 0.0;
    let st = RamseySettings::default();
    let sched = setup.schedule.with_drive_amplitude(0.0);
    let r = ramsey_coherence(&setup.config, &st, Some(&sched), &st.delays_ns(), Some(10_000), 5).unwrap();
    assert!((r.rho01 - 0.141).abs() < 3.0 * r.stderr.max(1e-3), "{r:?}");
}

#[test]
fn ramsey_pump_off_zero_amplitude() {
    let setup = common::paper();
    let st = RamseySettings::default();
    let sched = setup.schedule.with_drive_amplitude(0.0).without(EventKind::PumpOn);
    let exact = ramsey_coherence(&setup.config, &st, Some(&sched), &st.delays_ns(), None, 5).unwrap();
    assert!((exact.rho01 - 0.5 * (-0.1f64).exp()).abs() < 1e-9, "{exact:?}");
    let noisy = ramsey_coherence(&setup.config, &st, Some(&sched), &st.delays_ns(), Some(10_000), 5).unwrap();
    assert!((noisy.rho01 - 0.452).abs() < 3.0 * noisy.stderr, "{noisy:?}");
}

#[test]
fn ramsey_ratio_ignores_final_readout_quality() {
    let setup = common::paper();
    let sched = setup.schedule.with_drive_amplitude(8.0);
    let good = RamseySettings::default();
    let poor = RamseySettings {
        p_e_given_g: 0.15,
        p_g_given_e: 0.2,
        ..RamseySettings::default()
    };
    let a = ramsey_coherence(&setup.config, &good, Some(&sched), &good.delays_ns(), None, 9).unwrap();
    let b = ramsey_coherence(&setup.config, &poor, Some(&sched), &poor.delays_ns(), None, 9).unwrap();
    assert!(a.fringe_amplitude > b.fringe_amplitude);
    assert!((a.rho01 - b.rho01).abs() < 1e-9, "{} {}", a.rho01, b.rho01);
}

#[test]
fn exports_have_stable_headers() {
    let h = HistogramPair::new(vec![-0.5, -0.25], vec![0.75]);
    let mut buf = Vec::new();
    h.write_csv(&mut buf).unwrap();
    assert_eq!(String::from_utf8(buf).unwrap(), "prep,x_measured\n0,-0.5\n0,-0.25\npi,0.75\n");
    let pts = [CoherencePoint { epsilon: 0.0, rho01: 0.141, pump_on: true, stderr: 0.002 }];
    let mut buf = Vec::new();
    write_coherence_csv(&pts, &mut buf).unwrap();
    assert_eq!(String::from_utf8(buf).unwrap(), "epsilon,rho01,stderr,pump_on\n0,0.141,0.002,true\n");
}

proptest! {
    #[test]
    fn fidelity_is_a_rank_statistic(seed in any::<u64>(), t in -1.0f64..1.0, a in 0.1f64..5.0, b in -3.0f64..3.0) {
        let h = gaussians(-0.7, 0.7, 0.6, 150, seed).with_threshold(t);
        // Strictly increasing map x ↦ a·x³ + a·x + b.
        let f = |x: f64| a * x.powi(3) + a * x + b;
        let mapped = HistogramPair::new(h.x0.iter().map(|x| f(*x)).collect(), h.x1.iter().map(|x| f(*x)).collect())
            .with_threshold(f(t));
        prop_assert_eq!(readout_fidelity(&h).unwrap(), readout_fidelity(&mapped).unwrap());
    }

    #[test]
    fn ideal_dephasing_is_coherent_overlap(n_r in 0.0f64..20.0) {
        prop_assert!((2.0 * dephasing_ideal(n_r, 0.0) - (-2.0 * n_r).exp()).abs() <= 4.0 * f64::EPSILON);
    }

    #[test]
    fn trajectory_coherence_bounded(eps in 0.0f64..40.0) {
        let mut setup = common::paper();
        setup.schedule = setup.schedule.with_drive_amplitude(eps);
        let (g, e) = pair(&setup);
        let rho = dephasing_from_trajectories(&g, &e, &setup.config, &setup.schedule).unwrap();
        prop_assert!(rho <= 0.5 && rho >= 0.0);
    }
}
