//! Fit models with analytic Jacobians, in their fitted parametrisations.

use crate::scalar::Real;

/// `A · exp(−ε² / 2σ²)` with parameters `(A, s)`, `σ = eˢ`.
pub struct DephasingModel;

impl DephasingModel {
    pub fn value<T: Real>(p: &[T], eps: T) -> T {
        let sigma = p[1].exp();
        p[0] * (-(eps * eps) / (T::lit(2.0) * sigma * sigma)).exp()
    }

    /// `[∂/∂A, ∂/∂s]`.
    pub fn gradient<T: Real>(p: &[T], eps: T) -> [T; 2] {
        let sigma = p[1].exp();
        let u = eps * eps / (sigma * sigma);
        let g = (-u / T::lit(2.0)).exp();
        [g, p[0] * g * u]
    }
}

/// `F₀ · erf(ν ε)` with parameters `(u, w)`, `F₀ = 1/(1+e⁻ᵘ)`, `ν = eʷ`.
pub struct FidelityModel;

impl FidelityModel {
    pub fn f0<T: Real>(u: T) -> T {
        T::one() / (T::one() + (-u).exp())
    }

    pub fn value<T: Real>(p: &[T], eps: T) -> T {
        Self::f0(p[0]) * (p[1].exp() * eps).erf()
    }

    /// `[∂/∂u, ∂/∂w]`.
    pub fn gradient<T: Real>(p: &[T], eps: T) -> [T; 2] {
        let f0 = Self::f0(p[0]);
        let nu = p[1].exp();
        let x = nu * eps;
        let derf = T::lit(2.0) / T::PI().sqrt() * (-x * x).exp();
        [f0 * (T::one() - f0) * x.erf(), f0 * derf * x]
    }
}
