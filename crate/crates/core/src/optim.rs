//! Small dense linear algebra and a Levenberg–Marquardt least-squares solver.

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Solve `a x = b` by Gaussian elimination with partial pivoting.
/// Returns `None` for a numerically singular matrix.
pub fn solve<T: Real>(mut a: Vec<Vec<T>>, mut b: Vec<T>) -> Option<Vec<T>> {
    let n = b.len();
    let scale = a
        .iter()
        .flat_map(|r| r.iter())
        .fold(T::zero(), |m, v| m.max(v.abs()));
    if !(scale > T::zero()) {
        return None;
    }
    let tiny = scale * T::epsilon() * T::lit(16.0);
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].abs().partial_cmp(&a[j][col].abs()).unwrap())?;
        if !(a[piv][col].abs() > tiny) {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for row in col + 1..n {
            let f = a[row][col] / a[col][col];
            if f == T::zero() {
                continue;
            }
            for k in col..n {
                let v = a[col][k];
                a[row][k] -= f * v;
            }
            let v = b[col];
            b[row] -= f * v;
        }
    }
    let mut x = vec![T::zero(); n];
    for row in (0..n).rev() {
        let mut v = b[row];
        for k in row + 1..n {
            v -= a[row][k] * x[k];
        }
        x[row] = v / a[row][row];
    }
    Some(x)
}

/// Inverse of a small square matrix.
pub fn invert<T: Real>(a: &[Vec<T>]) -> Option<Vec<Vec<T>>> {
    let n = a.len();
    let mut cols = Vec::with_capacity(n);
    for j in 0..n {
        let mut e = vec![T::zero(); n];
        e[j] = T::one();
        cols.push(solve(a.to_vec(), e)?);
    }
    Some((0..n).map(|i| (0..n).map(|j| cols[j][i]).collect()).collect())
}

#[derive(Debug, Clone, Copy)]
pub struct LmSettings {
    pub max_iterations: usize,
    /// Stop when an accepted step lowers the cost by less than this fraction.
    pub relative_tolerance: f64,
    pub initial_damping: f64,
}

impl Default for LmSettings {
    fn default() -> Self {
        Self {
            max_iterations: 200,
            relative_tolerance: 1e-10,
            initial_damping: 1e-3,
        }
    }
}

#[derive(Debug, Clone)]
pub struct LmReport<T> {
    pub params: Vec<T>,
    pub residuals: Vec<T>,
    /// Half the sum of squared residuals.
    pub cost: T,
    pub iterations: usize,
    /// `(JᵀJ)⁻¹` at the solution, unscaled.
    pub covariance: Option<Vec<Vec<T>>>,
}

fn half_sum_sq<T: Real>(r: &[T]) -> T {
    r.iter().map(|v| *v * *v).sum::<T>() / T::lit(2.0)
}

fn normal_equations<T: Real>(jac: &[Vec<T>], r: &[T], n: usize) -> (Vec<Vec<T>>, Vec<T>) {
    let mut h = vec![vec![T::zero(); n]; n];
    let mut g = vec![T::zero(); n];
    for (row, &ri) in jac.iter().zip(r) {
        for i in 0..n {
            g[i] += row[i] * ri;
            for j in 0..n {
                h[i][j] += row[i] * row[j];
            }
        }
    }
    (h, g)
}

/// Minimise `½Σ rᵢ(p)²` from `p0`. `residuals` returns `r(p)`; `jacobian`
/// returns `∂rᵢ/∂pⱼ` as one row per residual.
pub fn levenberg_marquardt<T, R, J>(p0: &[T], residuals: R, jacobian: J, settings: LmSettings) -> Result<LmReport<T>>
where
    T: Real,
    R: Fn(&[T]) -> Vec<T>,
    J: Fn(&[T]) -> Vec<Vec<T>>,
{
    let n = p0.len();
    let mut p = p0.to_vec();
    let mut r = residuals(&p);
    let mut cost = half_sum_sq(&r);
    let fail = |reason: &str, cost: T, r: &[T]| Error::NonConvergence {
        reason: reason.into(),
        cost: cost.as_f64(),
        residuals: r.iter().map(|v| v.as_f64()).collect(),
    };
    if !cost.is_finite() {
        return Err(fail("non-finite residuals at the initial guess", cost, &r));
    }
    let mut mu = T::lit(settings.initial_damping);
    let mut iterations = 0;
    let floor = T::min_positive_value().sqrt();
    let converged = loop {
        if cost <= floor {
            break true;
        }
        if iterations >= settings.max_iterations {
            break false;
        }
        iterations += 1;
        let jac = jacobian(&p);
        let (h, g) = normal_equations(&jac, &r, n);
        let mut gain = None;
        while mu < T::lit(1e16) {
            let mut damped = h.clone();
            for i in 0..n {
                damped[i][i] += mu * h[i][i].max(T::lit(1e-12));
            }
            if let Some(step) = solve(damped, g.iter().map(|v| -*v).collect()) {
                let trial: Vec<T> = p.iter().zip(&step).map(|(a, b)| *a + *b).collect();
                let rt = residuals(&trial);
                let ct = half_sum_sq(&rt);
                if ct.is_finite() && ct <= cost {
                    gain = Some((cost - ct) / cost);
                    p = trial;
                    r = rt;
                    cost = ct;
                    mu = (mu / T::lit(3.0)).max(T::lit(1e-12));
                    break;
                }
            }
            mu *= T::lit(10.0);
        }
        match gain {
            // No descent direction left at machine precision.
            None => break true,
            Some(g) if g < T::lit(settings.relative_tolerance) => break true,
            Some(_) => {}
        }
    };
    if !converged {
        return Err(fail("iteration limit reached", cost, &r));
    }
    let jac = jacobian(&p);
    let (h, _) = normal_equations(&jac, &r, n);
    Ok(LmReport {
        covariance: invert(&h),
        params: p,
        residuals: r,
        cost,
        iterations,
    })
}
