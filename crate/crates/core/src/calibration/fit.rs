use serde::{Deserialize, Serialize};

use super::models::{DephasingModel, FidelityModel};
use crate::error::{Error, Result};
use crate::measurement::CoherencePoint;
use crate::optim::{levenberg_marquardt, LmSettings};
use crate::scalar::Real;

/// Value with one-standard-deviation uncertainty.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct Estimate<T> {
    pub value: T,
    pub stderr: T,
}

impl<T: Real> Estimate<T> {
    pub fn new(value: T, stderr: T) -> Self {
        Self { value, stderr }
    }
}

/// Readout fidelity at one amplitude.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct FidelityPoint<T> {
    pub epsilon: T,
    pub fidelity: T,
    pub stderr: T,
}

/// Which low-amplitude points the dephasing fit ignores.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Exclusion<T> {
    /// Use every point.
    None,
    /// Drop points with `ε / 2σ̂ < cutoff`, σ̂ from a first pass on all points.
    BelowRatio(T),
}

impl<T: Real> Default for Exclusion<T> {
    fn default() -> Self {
        Exclusion::BelowRatio(T::lit(0.2))
    }
}

pub const MIN_FIT_POINTS: usize = 6;

/// Largest σ accepted, relative to the widest amplitude in the data.
const MAX_SIGMA_RATIO: f64 = 1e3;

#[derive(Debug, Clone, PartialEq)]
pub struct DephasingFit<T> {
    pub amplitude: Estimate<T>,
    pub sigma: Estimate<T>,
    pub residuals: Vec<T>,
    pub excluded: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FidelityFit<T> {
    pub f0: Estimate<T>,
    pub nu: Estimate<T>,
    pub residuals: Vec<T>,
}

/// Inverse-variance weights; zero errors take the median weight of the rest.
pub fn weights<T: Real>(stderr: &[T]) -> Vec<T> {
    let mut finite: Vec<T> = stderr
        .iter()
        .filter(|s| **s > T::zero())
        .map(|s| T::one() / (*s * *s))
        .collect();
    finite.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let median = if finite.is_empty() {
        T::one()
    } else if finite.len() % 2 == 1 {
        finite[finite.len() / 2]
    } else {
        (finite[finite.len() / 2 - 1] + finite[finite.len() / 2]) / T::lit(2.0)
    };
    stderr
        .iter()
        .map(|s| if *s > T::zero() { T::one() / (*s * *s) } else { median })
        .collect()
}

fn sqrt_weights<T: Real>(stderr: &[T]) -> Vec<T> {
    weights(stderr).into_iter().map(|w| w.sqrt()).collect()
}

fn degenerate(reason: impl Into<String>, residuals: Vec<f64>) -> Error {
    Error::NonConvergence {
        reason: reason.into(),
        cost: f64::NAN,
        residuals,
    }
}

struct Weighted<T> {
    x: Vec<T>,
    y: Vec<T>,
    sw: Vec<T>,
}

impl<T: Real> Weighted<T> {
    fn fit(
        &self,
        p0: [T; 2],
        value: fn(&[T], T) -> T,
        gradient: fn(&[T], T) -> [T; 2],
    ) -> Result<([T; 2], [[T; 2]; 2], Vec<T>)> {
        let rep = levenberg_marquardt(
            &p0,
            |p| {
                self.x
                    .iter()
                    .zip(&self.y)
                    .zip(&self.sw)
                    .map(|((x, y), w)| (value(p, *x) - *y) * *w)
                    .collect()
            },
            |p| {
                self.x
                    .iter()
                    .zip(&self.sw)
                    .map(|(x, w)| gradient(p, *x).iter().map(|g| *g * *w).collect())
                    .collect()
            },
            LmSettings::default(),
        )?;
        let cov = rep.covariance.ok_or_else(|| {
            degenerate(
                "singular curvature at the solution",
                rep.residuals.iter().map(|r| r.as_f64()).collect(),
            )
        })?;
        let p = [rep.params[0], rep.params[1]];
        let raw: Vec<T> = self.x.iter().zip(&self.y).map(|(x, y)| *y - value(&p, *x)).collect();
        Ok((p, [[cov[0][0], cov[0][1]], [cov[1][0], cov[1][1]]], raw))
    }
}

fn dephasing_pass<T: Real>(points: &[&CoherencePoint<T>]) -> Result<DephasingFit<T>> {
    if points.len() < MIN_FIT_POINTS {
        return Err(Error::Precondition(format!(
            "dephasing fit needs at least {MIN_FIT_POINTS} points, got {}",
            points.len()
        )));
    }
    let data = Weighted {
        x: points.iter().map(|p| p.epsilon).collect(),
        y: points.iter().map(|p| p.rho01).collect(),
        sw: sqrt_weights(&points.iter().map(|p| p.stderr).collect::<Vec<_>>()),
    };
    let eps_max = data.x.iter().fold(T::zero(), |m, x| m.max(x.abs()));
    // Log-linear start: ln ρ = ln A − ε²/2σ² over the positive points.
    let (mut n, mut sx, mut sy, mut sxx, mut sxy) = (T::zero(), T::zero(), T::zero(), T::zero(), T::zero());
    for (x, y) in data.x.iter().zip(&data.y).filter(|(_, y)| **y > T::zero()) {
        let (u, v) = (*x * *x, y.ln());
        n += T::one();
        sx += u;
        sy += v;
        sxx += u * u;
        sxy += u * v;
    }
    let det = n * sxx - sx * sx;
    let raw = || data.y.iter().map(|y| y.as_f64()).collect::<Vec<_>>();
    if !(n >= T::lit(2.0)) || !(det > T::zero()) {
        return Err(degenerate("coherence data do not constrain a Gaussian decay", raw()));
    }
    let slope = (n * sxy - sx * sy) / det;
    let intercept = (sy - slope * sx) / n;
    if !(slope < T::zero()) {
        return Err(degenerate("coherence does not decay with amplitude", raw()));
    }
    let sigma0 = (T::lit(-0.5) / slope).sqrt();
    let (p, cov, residuals) = data.fit([intercept.exp(), sigma0.ln()], DephasingModel::value, DephasingModel::gradient)?;
    let sigma = p[1].exp();
    if !(sigma < T::lit(MAX_SIGMA_RATIO) * eps_max) {
        return Err(degenerate(
            format!("fitted sigma {sigma} is unbounded relative to the amplitude range"),
            residuals.iter().map(|r| r.as_f64()).collect(),
        ));
    }
    Ok(DephasingFit {
        amplitude: Estimate::new(p[0], cov[0][0].max(T::zero()).sqrt()),
        sigma: Estimate::new(sigma, sigma * cov[1][1].max(T::zero()).sqrt()),
        residuals,
        excluded: 0,
    })
}

/// Weighted fit of `ρ₀₁ = A·exp(−ε²/2σ²)` to pump-off coherence points.
pub fn fit_dephasing<T: Real>(points: &[CoherencePoint<T>], exclusion: Exclusion<T>) -> Result<DephasingFit<T>> {
    let all: Vec<&CoherencePoint<T>> = points.iter().filter(|p| p.rho01.is_finite()).collect();
    let first = dephasing_pass(&all)?;
    let Exclusion::BelowRatio(cutoff) = exclusion else {
        return Ok(first);
    };
    let two_sigma = T::lit(2.0) * first.sigma.value;
    let kept: Vec<&CoherencePoint<T>> = all
        .iter()
        .copied()
        .filter(|p| p.epsilon.abs() / two_sigma >= cutoff)
        .collect();
    let excluded = all.len() - kept.len();
    let mut fit = dephasing_pass(&kept)?;
    fit.excluded = excluded;
    Ok(fit)
}

/// Weighted fit of `F_r = F₀·erf(νε)`.
pub fn fit_fidelity<T: Real>(points: &[FidelityPoint<T>]) -> Result<FidelityFit<T>> {
    let pts: Vec<&FidelityPoint<T>> = points.iter().filter(|p| p.fidelity.is_finite()).collect();
    if pts.len() < MIN_FIT_POINTS {
        return Err(Error::Precondition(format!(
            "fidelity fit needs at least {MIN_FIT_POINTS} points, got {}",
            pts.len()
        )));
    }
    if !pts.iter().any(|p| p.epsilon == T::zero()) {
        return Err(Error::Precondition("fidelity fit needs an epsilon = 0 point".into()));
    }
    let data = Weighted {
        x: pts.iter().map(|p| p.epsilon).collect(),
        y: pts.iter().map(|p| p.fidelity).collect(),
        sw: sqrt_weights(&pts.iter().map(|p| p.stderr).collect::<Vec<_>>()),
    };
    let y_max = data.y.iter().fold(T::zero(), |m, y| m.max(*y));
    let eps_max = data.x.iter().fold(T::zero(), |m, x| m.max(x.abs()));
    if !(y_max > T::zero()) || !(eps_max > T::zero()) {
        return Err(degenerate("no readout signal", data.y.iter().map(|y| y.as_f64()).collect()));
    }
    // Grid start: ν spans well below to well above 1/ε_max; F₀ by linear least squares.
    let mut best = (T::infinity(), T::zero(), T::zero());
    for k in 0..121 {
        let nu = T::lit(10f64.powf(-2.0 + 4.0 * k as f64 / 120.0)) / eps_max;
        let (mut num, mut den) = (T::zero(), T::zero());
        for ((x, y), w) in data.x.iter().zip(&data.y).zip(&data.sw) {
            let e = (nu * *x).erf() * *w;
            num += e * *y * *w;
            den += e * e;
        }
        if den <= T::zero() {
            continue;
        }
        let f0 = (num / den).max(T::lit(1e-3)).min(T::lit(0.999));
        let cost: T = data
            .x
            .iter()
            .zip(&data.y)
            .zip(&data.sw)
            .map(|((x, y), w)| ((f0 * (nu * *x).erf() - *y) * *w).powi(2))
            .sum();
        if cost < best.0 {
            best = (cost, f0, nu);
        }
    }
    let u0 = (best.1 / (T::one() - best.1)).ln();
    let (p, cov, residuals) = data.fit([u0, best.2.ln()], FidelityModel::value, FidelityModel::gradient)?;
    let f0 = FidelityModel::f0(p[0]);
    let nu = p[1].exp();
    Ok(FidelityFit {
        f0: Estimate::new(f0, f0 * (T::one() - f0) * cov[0][0].max(T::zero()).sqrt()),
        nu: Estimate::new(nu, nu * cov[1][1].max(T::zero()).sqrt()),
        residuals,
    })
}

/// `η = 2σ²ν²` with first-order error propagation.
pub fn efficiency<T: Real>(sigma: Estimate<T>, nu: Estimate<T>) -> Result<Estimate<T>> {
    if !(sigma.value > T::zero()) || !(nu.value > T::zero()) {
        return Err(Error::Domain("sigma and nu must be positive".into()));
    }
    let two = T::lit(2.0);
    let eta = two * sigma.value * sigma.value * nu.value * nu.value;
    let rel = ((two * sigma.stderr / sigma.value).powi(2) + (two * nu.stderr / nu.value).powi(2)).sqrt();
    Ok(Estimate::new(eta, eta * rel))
}

/// `n_b = −½ ln(2ρ_b)`.
pub fn excess_backaction<T: Real>(rho_b: Estimate<T>) -> Result<Estimate<T>> {
    let half = T::lit(0.5);
    if !(rho_b.value > T::zero() && rho_b.value <= half) {
        return Err(Error::Domain(format!("rho_b must lie in (0, 0.5], got {}", rho_b.value)));
    }
    Ok(Estimate::new(
        -half * (T::lit(2.0) * rho_b.value).ln(),
        half * rho_b.stderr / rho_b.value,
    ))
}
