//! Efficiency bookkeeping.
//!
//! The chain efficiency of a setup is the signal-to-noise of the amplified
//! quadrature relative to the which-path information the qubit imprinted on
//! the field. Loss ports (readout-cavity decay, parametric-cavity loss and
//! switch leakage) and field left behind in the readout cavity all lower it.
//! The configured `eta_loss` is the efficiency the pipeline should realise:
//! an extra beam splitter at capture removes whatever the modelled ports do
//! not already account for. Asking for more than the ports allow is an
//! invalid configuration.

use num_complex::Complex;

use super::controls::{ControlTable, Controls};
use super::engine::{check_finite, Modes, QubitState, Rates};
use crate::error::Result;
use crate::model::{EventKind, PhysicalConfig, PulseSchedule, Violation};
use crate::scalar::Real;

/// Linear gain beyond which the amplified quadrature is fixed.
const GAIN_SATURATION: f64 = 1e4;

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
#[serde(bound = "T: Real")]
pub struct EfficiencyBudget<T> {
    /// Angle of the amplified quadrature (rad).
    pub amplified_axis: T,
    /// Total which-path separation at unit drive amplitude, `∫κ|Δα|² dt + |Δα(capture)|²`.
    pub separation_per_eps2: T,
    /// Efficiency of the modelled ports alone.
    pub intrinsic_efficiency: T,
    /// Transmission inserted at capture to realise `eta_loss`.
    pub beam_splitter: T,
    /// Requested efficiency.
    pub target_efficiency: T,
}

impl<T: Real> EfficiencyBudget<T> {
    /// Effective measurement photon number per unit amplitude squared.
    pub fn n_r_per_eps2(&self) -> T {
        self.separation_per_eps2 / T::lit(4.0)
    }

    /// Drive amplitude producing `n_r` measurement photons.
    pub fn epsilon_for_photons(&self, n_r: T) -> T {
        (n_r / self.n_r_per_eps2()).sqrt()
    }

    pub fn violations(&self) -> Vec<Violation> {
        let tol = T::lit(1e-9);
        if self.target_efficiency > self.intrinsic_efficiency + tol {
            vec![Violation::new(
                "noise.eta_loss",
                format!(
                    "{} exceeds the {:.4} transmission permitted by the modelled loss ports",
                    self.target_efficiency, self.intrinsic_efficiency
                ),
            )]
        } else {
            Vec::new()
        }
    }
}

type Mat4<T> = [[T; 4]; 4];

fn drift_matrix<T: Real>(r: &Rates<T>, c: &Controls<T>, sign: T) -> Mat4<T> {
    let z = T::zero();
    let h = T::lit(0.5);
    let zr_i = -(r.detuning_r + sign * r.chi);
    let zp_i = -r.detuning_p;
    let (wr, wi) = (c.lambda * r.pump_phase.re, c.lambda * r.pump_phase.im);
    let g = c.g;
    [
        [-h * r.kappa_r, -zr_i, z, g],
        [zr_i, -h * r.kappa_r, -g, z],
        [z, g, -h * c.kappa_p + wr, -zp_i + wi],
        [-g, z, zp_i + wi, -h * c.kappa_p - wr],
    ]
}

fn lyapunov<T: Real>(a: &Mat4<T>, s: &Mat4<T>, kr: T, kp: T) -> Mat4<T> {
    let mut out = [[T::zero(); 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            let mut v = T::zero();
            for k in 0..4 {
                v += a[i][k] * s[k][j] + s[i][k] * a[j][k];
            }
            out[i][j] = v;
        }
    }
    let q = T::lit(0.25);
    out[0][0] += q * kr;
    out[1][1] += q * kr;
    out[2][2] += q * kp;
    out[3][3] += q * kp;
    out
}

fn mat_axpy<T: Real>(s: &Mat4<T>, h: T, k: &Mat4<T>) -> Mat4<T> {
    let mut o = *s;
    for i in 0..4 {
        for j in 0..4 {
            o[i][j] += h * k[i][j];
        }
    }
    o
}

fn covariance_step<T: Real>(r: &Rates<T>, table: &ControlTable<T>, n: usize, s: &Mat4<T>, sign: T) -> Mat4<T> {
    let dt = table.dt;
    let h2 = dt / T::lit(2.0);
    let cs = [table.at_half(2 * n), table.at_half(2 * n + 1), table.at_half(2 * n + 2)];
    let f = |c: &Controls<T>, m: &Mat4<T>| lyapunov(&drift_matrix(r, c, sign), m, r.kappa_r, c.kappa_p);
    let k1 = f(cs[0], s);
    let k2 = f(cs[1], &mat_axpy(s, h2, &k1));
    let k3 = f(cs[1], &mat_axpy(s, h2, &k2));
    let k4 = f(cs[2], &mat_axpy(s, dt, &k3));
    let mut o = *s;
    for i in 0..4 {
        for j in 0..4 {
            o[i][j] += dt / T::lit(6.0) * (k1[i][j] + T::lit(2.0) * (k2[i][j] + k3[i][j]) + k4[i][j]);
        }
    }
    o
}

/// Budget of a setup, evaluated at unit drive amplitude.
pub fn compute<T: Real>(config: &PhysicalConfig<T>, schedule: &PulseSchedule<T>) -> Result<EfficiencyBudget<T>> {
    let target = config.noise.eta_loss;
    let degenerate = EfficiencyBudget {
        amplified_axis: T::zero(),
        separation_per_eps2: T::zero(),
        intrinsic_efficiency: T::one(),
        beam_splitter: target,
        target_efficiency: target,
    };
    if !schedule.has(EventKind::Drive) {
        return Ok(degenerate);
    }
    let unit = schedule.with_drive_amplitude(T::one());
    let table = ControlTable::new(config, &unit);
    let capture = table.step_at(unit.capture_time());
    let release = table.step_at(unit.release_time()).max(capture);
    let rates0 = Rates::new(config, T::zero());

    // Pre-capture: noiseless branches and the information lost through the ports.
    let (sg, se) = (QubitState::Ground.pull_sign::<T>(), QubitState::Excited.pull_sign::<T>());
    let mut g = Modes::default();
    let mut e = Modes::default();
    let loss_density = |g: &Modes<T>, e: &Modes<T>, kp: T| {
        rates0.kappa_r * (e.r - g.r).norm_sqr() + kp * (e.p - g.p).norm_sqr()
    };
    let mut lost = T::zero();
    let mut prev = loss_density(&g, &e, table.at_half(0).kappa_p);
    for n in 0..capture {
        g = rates0.rk4(&table, n, g, sg, true);
        e = rates0.rk4(&table, n, e, se, true);
        check_finite(&g, table.time(n + 1))?;
        check_finite(&e, table.time(n + 1))?;
        let next = loss_density(&g, &e, table.at_half(2 * n + 2).kappa_p);
        lost += (prev + next) * table.dt / T::lit(2.0);
        prev = next;
    }
    let dp = e.p - g.p;
    let separation = lost + (e.r - g.r).norm_sqr() + dp.norm_sqr();
    if !(separation > T::lit(1e-300)) || dp.norm() <= T::lit(1e-12) * separation.sqrt() {
        return Ok(EfficiencyBudget {
            separation_per_eps2: separation,
            ..degenerate
        });
    }
    let beta = dp.im.atan2(dp.re);
    let rates = Rates::new(config, beta);
    let post = ControlTable::new(config, &unit.without(EventKind::Drive));
    let rot = Complex::new(beta.cos(), -beta.sin());

    // Post-capture linear amplification of the signal split by origin, and of the vacuum.
    let only_p = |m: Modes<T>| Modes { r: Complex::default(), p: m.p };
    let only_r = |m: Modes<T>| Modes { r: m.r, p: Complex::default() };
    let mut means = [only_p(g), only_p(e), only_r(g), only_r(e)];
    let signs = [sg, se, sg, se];
    let quarter = T::lit(0.25);
    let mut vac = [[T::zero(); 4]; 4];
    for (i, row) in vac.iter_mut().enumerate() {
        row[i] = quarter;
    }
    let mut cov = [vac, vac];
    let x = |m: &Modes<T>| (m.p * rot).re;
    let gain_cap = T::lit(GAIN_SATURATION) * dp.norm();
    for n in capture..release {
        for (m, &s) in means.iter_mut().zip(&signs) {
            *m = rates.rk4(&post, n, *m, s, false);
        }
        cov[0] = covariance_step(&rates, &post, n, &cov[0], sg);
        cov[1] = covariance_step(&rates, &post, n, &cov[1], se);
        if (x(&means[1]) - x(&means[0])).abs() > gain_cap {
            break;
        }
    }
    let s_p = x(&means[1]) - x(&means[0]);
    let s_r = x(&means[3]) - x(&means[2]);
    let (c, s) = (beta.cos(), beta.sin());
    let var = |m: &Mat4<T>| c * c * m[2][2] + T::lit(2.0) * c * s * m[2][3] + s * s * m[3][3];
    let noise = (var(&cov[0]) + var(&cov[1])) / T::lit(2.0);
    let denom = T::lit(4.0) * noise * separation;
    let signal = s_p + s_r;
    let intrinsic = (signal * signal / denom).min(T::one());
    let beam_splitter = if s_p > T::zero() {
        let root = ((target * denom).sqrt() - s_r) / s_p;
        (root.max(T::zero()).powi(2)).min(T::one())
    } else {
        target
    };
    Ok(EfficiencyBudget {
        amplified_axis: beta,
        separation_per_eps2: separation,
        intrinsic_efficiency: intrinsic,
        beam_splitter,
        target_efficiency: target,
    })
}
