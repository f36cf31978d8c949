//! The unreachable direction `phi`, its closed-form derivatives, the growing
//! solution `e^{qt} phi(x)`, the complex exponential form of the profile, and
//! the projection of grid functions onto `span{phi}`.
//!
//! `phi(x) = -beta e^{alpha x} cos(beta x) + beta e^{-2 alpha x}
//!           + 3 alpha e^{alpha x} sin(beta x)`
//! with `alpha = -a/L`, `beta = -b/L`. It satisfies
//! `phi''' + phi' + q phi = 0` and
//! `phi(0) = phi'(0) = phi(L) = phi''(L) = 0`.

use num_complex::Complex;

use crate::branch::CriticalLengthParams;
use crate::error::{Error, Result};
use crate::quad::simpson_weights;
use crate::{lit, Real};

/// Highest derivative order supported by the closed-form evaluation.
pub const MAX_DERIVATIVE_ORDER: usize = 3;

/// Derivative of order `order` (0..=3) of `phi` at `x` in `[0, L]`.
///
/// Every term is an exponential times a trigonometric factor, so each
/// differentiation maps the coefficient triple `(A, B, C)` of
/// `e^{alpha x}(A cos + B sin) + C e^{-2 alpha x}` to
/// `(alpha A + beta B, alpha B - beta A, -2 alpha C)`; no numerical
/// differentiation is involved.
pub fn eval_profile<T: Real>(params: &CriticalLengthParams<T>, x: T, order: usize) -> Result<T> {
    if order > MAX_DERIVATIVE_ORDER {
        return Err(Error::InvalidArgument(format!(
            "profile derivative order {order} not supported (max {MAX_DERIVATIVE_ORDER})"
        )));
    }
    check_range(params, x)?;
    Ok(eval_profile_unchecked(params, x, order))
}

/// Same closed form without the range validation, for integrand hot loops
/// whose quadrature nodes are inside `[0, L]` by construction.
pub(crate) fn eval_profile_unchecked<T: Real>(
    params: &CriticalLengthParams<T>,
    x: T,
    order: usize,
) -> T {
    let (alpha, beta) = (params.alpha, params.beta);
    let mut a = -beta;
    let mut b = lit::<T>(3.0) * alpha;
    let mut c = beta;
    for _ in 0..order {
        let (na, nb) = (alpha * a + beta * b, alpha * b - beta * a);
        a = na;
        b = nb;
        c = lit::<T>(-2.0) * alpha * c;
    }
    (alpha * x).exp() * (a * (beta * x).cos() + b * (beta * x).sin()) + c * (lit::<T>(-2.0) * alpha * x).exp()
}

/// The growing solution `e^{qt} phi(x)`.
pub fn eval_growth<T: Real>(params: &CriticalLengthParams<T>, t: T, x: T) -> Result<T> {
    Ok((params.q * t).exp() * eval_profile(params, x, 0)?)
}

/// Profile values of all derivative orders 0..=3 at one grid point
/// (`values[k]` carries units of 1/length^k relative to the profile scale).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProfileSample<T: Real> {
    pub x: T,
    pub values: [T; 4],
}

impl<T: Real> ProfileSample<T> {
    /// Residual of `phi''' + phi' + q phi` at this point.
    pub fn ode_residual(&self, q: T) -> T {
        self.values[3] + self.values[1] + q * self.values[0]
    }
}

/// All derivatives of the profile at `x`.
pub fn sample_profile<T: Real>(params: &CriticalLengthParams<T>, x: T) -> Result<ProfileSample<T>> {
    check_range(params, x)?;
    let mut values = [T::zero(); 4];
    for (order, v) in values.iter_mut().enumerate() {
        *v = eval_profile_unchecked(params, x, order);
    }
    Ok(ProfileSample { x, values })
}

fn check_range<T: Real>(params: &CriticalLengthParams<T>, x: T) -> Result<()> {
    if x < T::zero() || x > params.length {
        return Err(Error::InvalidArgument(format!(
            "x = {x} outside [0, {}]",
            params.length
        )));
    }
    Ok(())
}

/// The exponent triple `(alpha + i beta, alpha - i beta, -2 alpha)` of the
/// profile's complex exponential form. All three satisfy
/// `eta^3 + eta + q = 0` and share the boundary value `eta e^{-eta L}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EtaTriplet<T: Real> {
    pub eta: [Complex<T>; 3],
}

impl<T: Real> EtaTriplet<T> {
    /// `(e1, e2, e3) = (sum, sum of pair products, product)`.
    pub fn elementary_symmetrics(&self) -> [Complex<T>; 3] {
        let [n1, n2, n3] = self.eta;
        [n1 + n2 + n3, n1 * n2 + n2 * n3 + n3 * n1, n1 * n2 * n3]
    }

    /// The three values `eta_j e^{-eta_j L}` (equal for critical parameters).
    pub fn boundary_values(&self, length: T) -> [Complex<T>; 3] {
        let mut out = [Complex::new(T::zero(), T::zero()); 3];
        for (o, n) in out.iter_mut().zip(self.eta.iter()) {
            *o = n * (-n * Complex::new(length, T::zero())).exp();
        }
        out
    }

    /// Largest relative spread of the boundary values `eta_j e^{-eta_j L}`.
    pub fn boundary_value_spread(&self, length: T) -> T {
        let v = self.boundary_values(length);
        let scale = v[0].norm().max(v[1].norm()).max(v[2].norm());
        let d = (v[0] - v[1]).norm().max((v[1] - v[2]).norm()).max((v[0] - v[2]).norm());
        d / scale
    }
}

/// The eta triple of a critical branch.
pub fn eta_triplet<T: Real>(params: &CriticalLengthParams<T>) -> EtaTriplet<T> {
    let (alpha, beta) = (params.alpha, params.beta);
    EtaTriplet {
        eta: [
            Complex::new(alpha, beta),
            Complex::new(alpha, -beta),
            Complex::new(lit::<T>(-2.0) * alpha, T::zero()),
        ],
    }
}

/// The complex profile
/// `(eta3 - eta2) e^{eta1 x} + (eta1 - eta3) e^{eta2 x} + (eta2 - eta1) e^{eta3 x}`,
/// which equals `-2i phi(x)`.
pub fn eval_complex_profile<T: Real>(params: &CriticalLengthParams<T>, x: T) -> Result<Complex<T>> {
    check_range(params, x)?;
    let [n1, n2, n3] = eta_triplet(params).eta;
    let xc = Complex::new(x, T::zero());
    Ok((n3 - n2) * (n1 * xc).exp() + (n1 - n3) * (n2 * xc).exp() + (n2 - n1) * (n3 * xc).exp())
}

/// Projection of a uniformly sampled grid function onto `span{phi}`.
#[derive(Debug, Clone)]
pub struct Projection<T: Real> {
    /// Coefficient `<f, phi> / <phi, phi>` (the unreachable space is
    /// one-dimensional, so a single scalar carries the whole projection).
    pub coefficient: T,
    /// `f - coefficient * phi` on the same grid.
    pub remainder: Vec<T>,
}

/// Project `f` (sampled on the uniform grid over `[0, L]`) onto `span{phi}`
/// using composite Simpson inner products on that grid.
pub fn project_onto_unreachable<T: Real>(
    f: &[T],
    params: &CriticalLengthParams<T>,
) -> Result<Projection<T>> {
    if f.len() < 3 {
        return Err(Error::GridMismatch(format!(
            "projection needs at least 3 samples, got {}",
            f.len()
        )));
    }
    let n = f.len() - 1;
    let dx = params.length / lit(n as f64);
    let w = simpson_weights(f.len(), dx)?;
    let mut ff = T::zero();
    let mut pp = T::zero();
    let mut phi = Vec::with_capacity(f.len());
    for (i, (wi, fi)) in w.iter().zip(f).enumerate() {
        let x = if i == n { params.length } else { dx * lit(i as f64) };
        let p = eval_profile(params, x, 0)?;
        phi.push(p);
        ff += *wi * *fi * p;
        pp += *wi * p * p;
    }
    let coefficient = ff / pp;
    let remainder = f
        .iter()
        .zip(phi.iter())
        .map(|(fi, pi)| *fi - coefficient * *pi)
        .collect();
    Ok(Projection { coefficient, remainder })
}

/// Residual report of the profile's defining ODE and boundary conditions on
/// a 1000-point grid.
#[derive(Debug, Clone, Copy)]
pub struct ProfileReport<T: Real> {
    /// `max(|phi(0)|/sup|phi|, |phi'(0)|/sup|phi'|, |phi(L)|/sup|phi|,
    /// |phi''(L)|/sup|phi''|)`.
    pub max_boundary_residual: T,
    /// `max |phi''' + phi' + q phi|` over the grid, relative to the largest
    /// of the three term magnitudes on the grid.
    pub max_ode_residual: T,
    /// Sup-norms of orders 0..=3 over the grid.
    pub sup_norms: [T; 4],
    pub tol: T,
    pub pass: bool,
}

const VERIFY_GRID_POINTS: usize = 1000;

/// Evaluate boundary and ODE residuals of the profile at `params`.
pub fn verify_profile<T: Real>(params: &CriticalLengthParams<T>, tol: T) -> Result<ProfileReport<T>> {
    verify_profile_with_rate(params, params.q, tol)
}

/// As [`verify_profile`] but with an explicit rate in the ODE residual
/// (used to show the test is sharp in `q`).
pub fn verify_profile_with_rate<T: Real>(
    params: &CriticalLengthParams<T>,
    rate: T,
    tol: T,
) -> Result<ProfileReport<T>> {
    let n = VERIFY_GRID_POINTS - 1;
    let dx = params.length / lit(n as f64);
    let mut sup = [T::zero(); 4];
    let mut max_resid = T::zero();
    let mut max_term = T::zero();
    for i in 0..VERIFY_GRID_POINTS {
        let x = if i == n { params.length } else { dx * lit(i as f64) };
        let mut d = [T::zero(); 4];
        for (order, v) in d.iter_mut().enumerate() {
            *v = eval_profile(params, x, order)?;
        }
        for (s, v) in sup.iter_mut().zip(d.iter()) {
            *s = s.max(v.abs());
        }
        let resid = d[3] + d[1] + rate * d[0];
        max_resid = max_resid.max(resid.abs());
        max_term = max_term.max(d[3].abs().max(d[1].abs()).max((rate * d[0]).abs()));
    }
    let phi0 = eval_profile(params, T::zero(), 0)?;
    let dphi0 = eval_profile(params, T::zero(), 1)?;
    let phil = eval_profile(params, params.length, 0)?;
    let ddphil = eval_profile(params, params.length, 2)?;
    let max_boundary_residual = (phi0.abs() / sup[0])
        .max(dphi0.abs() / sup[1])
        .max(phil.abs() / sup[0])
        .max(ddphil.abs() / sup[2]);
    let max_ode_residual = max_resid / max_term;
    Ok(ProfileReport {
        max_boundary_residual,
        max_ode_residual,
        sup_norms: sup,
        tol,
        pass: max_boundary_residual < tol && max_ode_residual < tol,
    })
}
