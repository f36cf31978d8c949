//! The controllability criterion: the quadratic form
//!
//! `Omega(z) = int_0^L | sum_j (l_j e^{l_j L} - l_{j+1} e^{l_{j+1} L}) e^{l_{j+2} x} |^2 phi_x(x) dx`
//!
//! with `l_j = l_j(z)` the roots of `l^3 + l + iz = 0` (cyclic index
//! convention), evaluated on the shifted line `z + i q/2` and minimized over
//! real `z`; plus the frequency-domain transfer quantities `det Q`, `Xi`,
//! `P_D`, `H`, `G` and the large-`z` asymptotics of the normalized integral.

use std::cell::RefCell;
use std::fmt;

use nalgebra::RealField;
use num_complex::Complex;
use num_traits::Float;
use rayon::prelude::*;

use crate::branch::CriticalLengthParams;
use crate::error::{Error, Result};
use crate::profile::{eta_triplet, eval_profile_unchecked};
use crate::quad::integrate_with;
use crate::roots::solve_depressed_cubic;
use crate::{lit, Real};

/// `|Xi|` below this means repeated roots; `H` and `G` are undefined there.
pub const XI_DEGENERACY_TOL: f64 = 1e-12;
/// `|D|` below this is treated as a vanishing transfer denominator.
pub const DENOMINATOR_TOL: f64 = 1e-12;

/// One evaluation of `Omega(z + iq/2)`.
#[derive(Debug, Clone, Copy)]
pub struct OmegaSample<T: Real> {
    /// Offset along the shifted line (the imaginary part is `q/2`).
    pub z: T,
    pub omega_value: T,
    /// Absolute error estimate of the adaptive quadrature.
    pub quad_error: T,
}

/// Controllability verdict decided by the sign of the minimum.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Classification {
    /// `omega < 0`
    ExactControllableFiniteTime,
    /// `omega >= 0`
    NotNullControllableAnyTime,
}

impl Classification {
    pub fn as_str(&self) -> &'static str {
        match self {
            Classification::ExactControllableFiniteTime => {
                "locally exactly controllable in finite time"
            }
            Classification::NotNullControllableAnyTime => {
                "not locally null controllable in any positive time"
            }
        }
    }
}

impl fmt::Display for Classification {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Result of minimizing `Omega` over the shifted line.
#[derive(Debug, Clone, Copy)]
pub struct OmegaResult<T: Real> {
    /// The minimum found.
    pub omega: T,
    /// Its location.
    pub z_star: T,
    /// The scan covered `[-scan_half_width, scan_half_width]`.
    pub scan_half_width: T,
    pub grid_step: T,
    pub classification: Classification,
    /// Set when the minimizer sits at the edge of the scan window.
    pub boundary_warning: bool,
}

/// Scan/minimization configuration.
#[derive(Debug, Clone, Copy)]
pub struct ScanConfig<T: Real> {
    pub half_width: T,
    pub coarse_step: T,
    pub refine_tol: T,
    pub quad_tol: T,
    pub max_intervals: usize,
}

impl<T: Real> Default for ScanConfig<T> {
    fn default() -> Self {
        ScanConfig {
            half_width: lit(200.0),
            coarse_step: lit(0.1),
            refine_tol: lit(1e-8),
            quad_tol: lit(1e-10),
            max_intervals: 4000,
        }
    }
}

/// Frequency-domain transfer quantities at a single complex frequency.
#[derive(Debug, Clone, Copy)]
pub struct TransferQuantities<T: Real> {
    pub z: Complex<T>,
    /// Determinant of the boundary matrix with rows `(1,1,1)`,
    /// `(e^{l_j L})`, `(l_j e^{l_j L})`.
    pub det_q: Complex<T>,
    /// Vandermonde determinant of the roots.
    pub xi: Complex<T>,
    /// `sum_j l_j^2 (l_{j+1} e^{l_{j+1} L} - l_{j+2} e^{l_{j+2} L})`.
    pub p_d: Complex<T>,
    /// `det Q / Xi` (entire in `z`).
    pub h: Complex<T>,
    /// `P_D / Xi` (entire in `z`).
    pub g_transfer: Complex<T>,
    /// `sum_j (l_{j+1} - l_j) e^{-l_{j+2} L}`; equals `det Q` because the
    /// roots sum to zero.
    pub d_denominator: Complex<T>,
}

/// Scan result for the non-vanishing check of `det Q` on the shifted line.
#[derive(Debug, Clone, Copy)]
pub struct DetQScan<T: Real> {
    pub min_modulus: T,
    pub z_at_min: T,
    /// True when a sample fell below [`DENOMINATOR_TOL`].
    pub violation: bool,
}

fn det3<T: Real>(m: [[Complex<T>; 3]; 3]) -> Complex<T> {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
        - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

/// Numerator-sum coefficients: the factor of `e^{l_{j} x}` for each root.
fn numerator_coeffs<T: Real>(lambdas: &[Complex<T>; 3], length: T) -> [Complex<T>; 3] {
    let le = Complex::new(length, T::zero());
    let le_j: Vec<Complex<T>> = lambdas.iter().map(|l| l * (l * le).exp()).collect();
    // expansion of sum_j (l_j e^{l_j L} - l_{j+1} e^{l_{j+1} L}) e^{l_{j+2} x}
    [le_j[1] - le_j[2], le_j[2] - le_j[0], le_j[0] - le_j[1]]
}

pub(crate) fn numerator_from_roots<T: Real>(
    lambdas: &[Complex<T>; 3],
    length: T,
    x: T,
) -> Complex<T> {
    let c = numerator_coeffs(lambdas, length);
    let xc = Complex::new(x, T::zero());
    c[0] * (lambdas[0] * xc).exp() + c[1] * (lambdas[1] * xc).exp() + c[2] * (lambdas[2] * xc).exp()
}

/// The numerator sum `sum_j (l_j e^{l_j L} - l_{j+1} e^{l_{j+1} L}) e^{l_{j+2} x}`
/// at an arbitrary complex frequency. Telescopes to zero at `x = 0` and
/// equals `det Q` at `x = L`.
pub fn transfer_numerator<T: Real + RealField>(z: Complex<T>, x: T, length: T) -> Complex<T> {
    let roots = solve_depressed_cubic(z);
    numerator_from_roots(&roots.lambdas, length, x)
}

struct LineEvaluator<T: Real> {
    lambdas: [Complex<T>; 3],
    coeffs: [Complex<T>; 3],
}

impl<T: Real> LineEvaluator<T> {
    fn numerator(&self, x: T) -> Complex<T> {
        let xc = Complex::new(x, T::zero());
        self.coeffs[0] * (self.lambdas[0] * xc).exp()
            + self.coeffs[1] * (self.lambdas[1] * xc).exp()
            + self.coeffs[2] * (self.lambdas[2] * xc).exp()
    }
}

fn line_evaluator<T: Real + RealField>(params: &CriticalLengthParams<T>, z: T) -> LineEvaluator<T> {
    let w = Complex::new(z, params.q / lit(2.0));
    let roots = solve_depressed_cubic(w);
    let coeffs = numerator_coeffs(&roots.lambdas, params.length);
    LineEvaluator { lambdas: roots.lambdas, coeffs }
}

fn omega_integral<T: Real + RealField>(
    params: &CriticalLengthParams<T>,
    z: T,
    abs_tol: T,
    rel_tol: T,
    max_intervals: usize,
) -> Result<OmegaSample<T>> {
    let ev = line_evaluator(params, z);
    let integrand = |x: T| ev.numerator(x).norm_sqr() * eval_profile_unchecked(params, x, 1);
    let (value, err) = integrate_with(integrand, T::zero(), params.length, abs_tol, rel_tol, max_intervals)?;
    Ok(OmegaSample { z, omega_value: value, quad_error: err })
}

/// Evaluate `Omega(z + iq/2)` by adaptive quadrature.
///
/// `quad_tol` is the absolute tolerance near the interesting small values;
/// for the exponentially large values away from the origin it acts as a
/// relative tolerance so the scan terminates.
pub fn omega_at<T: Real + RealField>(
    z: T,
    params: &CriticalLengthParams<T>,
    quad_tol: T,
) -> Result<OmegaSample<T>> {
    omega_integral(params, z, quad_tol, quad_tol, 4000)
}

/// Golden-section minimization of a unimodal function on `[a, b]`.
pub(crate) fn golden_section_min<T: Real, F: FnMut(T) -> T>(
    mut f: F,
    mut a: T,
    mut b: T,
    tol: T,
    max_iter: usize,
) -> (T, T) {
    let inv_phi = (Float::sqrt(lit::<T>(5.0)) - T::one()) / lit(2.0);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    for _ in 0..max_iter {
        if b - a <= tol {
            break;
        }
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    if fc < fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

/// Evaluate `Omega(. + iq/2)` on the symmetric grid
/// `{-half_width, ..., half_width}` with spacing `coarse_step` (both signs:
/// no evenness is assumed). Grid points are evaluated in parallel.
pub fn scan_omega<T: Real + RealField>(
    params: &CriticalLengthParams<T>,
    config: &ScanConfig<T>,
) -> Result<Vec<OmegaSample<T>>> {
    if !(config.half_width > T::zero()) || !(config.coarse_step > T::zero()) {
        return Err(Error::InvalidArgument(
            "scan half-width and step must be > 0".into(),
        ));
    }
    let steps = (config.half_width / config.coarse_step)
        .to_usize()
        .ok_or_else(|| Error::InvalidArgument("scan grid too large".into()))?;
    let grid: Vec<T> = (-(steps as isize)..=steps as isize)
        .map(|k| config.coarse_step * lit(k as f64))
        .collect();
    grid.par_iter()
        .map(|&z| omega_integral(params, z, config.quad_tol, config.quad_tol, config.max_intervals))
        .collect()
}

/// Minimize `Omega(. + iq/2)` over `[-half_width, half_width]`: coarse grid
/// scan over both signs, then golden-section refinement around every local
/// minimum. Classifies by the sign of the minimum.
pub fn minimize_omega<T: Real + RealField>(
    params: &CriticalLengthParams<T>,
    config: &ScanConfig<T>,
) -> Result<OmegaResult<T>> {
    let samples = scan_omega(params, config)?;

    // every interior local minimum is a refinement candidate
    let mut best: Option<(T, T)> = None;
    let mut consider = |z: T, v: T| {
        if best.is_none_or(|(_, bv)| v < bv) {
            best = Some((z, v));
        }
    };
    for s in &samples {
        consider(s.z, s.omega_value);
    }

    let quad_failure: RefCell<Option<Error>> = RefCell::new(None);
    for i in 1..samples.len().saturating_sub(1) {
        let here = samples[i].omega_value;
        if here <= samples[i - 1].omega_value && here <= samples[i + 1].omega_value {
            let objective = |z: T| match omega_integral(
                params,
                z,
                config.quad_tol,
                config.quad_tol,
                config.max_intervals,
            ) {
                Ok(s) => s.omega_value,
                Err(e) => {
                    quad_failure.borrow_mut().get_or_insert(e);
                    T::infinity()
                }
            };
            let (z_min, v_min) = golden_section_min(
                objective,
                samples[i - 1].z,
                samples[i + 1].z,
                config.refine_tol,
                200,
            );
            consider(z_min, v_min);
        }
    }
    if let Some(e) = quad_failure.into_inner() {
        return Err(e);
    }

    let (z_star, omega) = best.expect("scan grid is non-empty");
    let edge = config.half_width - config.coarse_step;
    let boundary_warning = Float::abs(z_star) >= edge;
    if boundary_warning {
        log::warn!(
            "omega minimizer {z_star} sits at the scan boundary (half-width {})",
            config.half_width
        );
    }
    let classification = if omega < T::zero() {
        Classification::ExactControllableFiniteTime
    } else {
        Classification::NotNullControllableAnyTime
    };
    Ok(OmegaResult {
        omega,
        z_star,
        scan_half_width: config.half_width,
        grid_step: config.coarse_step,
        classification,
        boundary_warning,
    })
}

/// All transfer quantities at an arbitrary complex frequency.
///
/// Fails with [`Error::DegenerateRoots`] when the root triple is (nearly)
/// repeated, where the `Xi`-normalized quantities are undefined.
pub fn transfer_quantities<T: Real + RealField>(
    z: Complex<T>,
    length: T,
) -> Result<TransferQuantities<T>> {
    let roots = solve_depressed_cubic(z);
    let l = roots.lambdas;
    let le = Complex::new(length, T::zero());
    let e: Vec<Complex<T>> = l.iter().map(|lj| (lj * le).exp()).collect();
    let one = Complex::new(T::one(), T::zero());

    let det_q = det3([
        [one, one, one],
        [e[0], e[1], e[2]],
        [l[0] * e[0], l[1] * e[1], l[2] * e[2]],
    ]);
    let xi = det3([
        [one, one, one],
        [l[0], l[1], l[2]],
        [l[0] * l[0], l[1] * l[1], l[2] * l[2]],
    ]);
    let mut p_d = Complex::new(T::zero(), T::zero());
    let mut d_denominator = Complex::new(T::zero(), T::zero());
    for j in 0..3 {
        let (j1, j2) = ((j + 1) % 3, (j + 2) % 3);
        p_d += l[j] * l[j] * (l[j1] * e[j1] - l[j2] * e[j2]);
        d_denominator += (l[j1] - l[j]) * (-l[j2] * le).exp();
    }

    // The guard uses the discriminant identity |Xi|^2 = |27 z^2 - 4|, which
    // is exact in z; the determinant of computed roots cannot drop below the
    // eigenvalue splitting noise even at a true double root.
    let xi_modulus = crate::roots::xi_modulus_from_discriminant(z);
    if xi_modulus < lit(XI_DEGENERACY_TOL) {
        return Err(Error::DegenerateRoots {
            xi_modulus: xi_modulus.to_f64().unwrap_or(f64::NAN),
            threshold: XI_DEGENERACY_TOL,
        });
    }
    Ok(TransferQuantities {
        z,
        det_q,
        xi,
        p_d,
        h: det_q / xi,
        g_transfer: p_d / xi,
        d_denominator,
    })
}

/// `Omega(z + iq/2) / |D(z + iq/2)|^2`: the transfer-normalized integral
/// whose large-`z` behavior is `E |z|^{-1/3} + O(|z|^{-2/3})`.
pub fn b_integral<T: Real + RealField>(
    z: T,
    params: &CriticalLengthParams<T>,
    quad_tol: T,
) -> Result<T> {
    let w = Complex::new(z, params.q / lit(2.0));
    let tq = transfer_quantities(w, params.length)?;
    let d2 = tq.d_denominator.norm_sqr();
    if Float::sqrt(d2) < lit(DENOMINATOR_TOL) {
        return Err(Error::DegenerateDenominator {
            modulus: Float::sqrt(d2).to_f64().unwrap_or(f64::NAN),
            threshold: DENOMINATOR_TOL,
        });
    }
    let sample = omega_integral(params, z, quad_tol * d2, quad_tol, 4000)?;
    Ok(sample.omega_value / d2)
}

/// Closed-form leading coefficient of the normalized integral:
/// `E = -(b e^{2a} / (2 sqrt(3) a L^2)) (b^2 + 9 a^2) > 0`.
pub fn asymptotic_e<T: Real>(params: &CriticalLengthParams<T>) -> T {
    let (a, b, l) = (params.a, params.b, params.length);
    let sqrt3 = Float::sqrt(lit::<T>(3.0));
    -(b * Float::exp(lit::<T>(2.0) * a) / (lit::<T>(2.0) * sqrt3 * a * l * l))
        * (b * b + lit::<T>(9.0) * a * a)
}

/// The same coefficient computed from the eta-triplet route:
/// `(i/2) * E_D` with
/// `E_D = sum_j eta_{j+2}^2 (eta_{j+1} - eta_j) / (sqrt(3) A)` and
/// `A = eta_j e^{-eta_j L}`. The `i/2` factor converts the complex-profile
/// weight into the real-profile weight (`varphi = -2i phi`).
pub fn asymptotic_e_from_eta<T: Real>(params: &CriticalLengthParams<T>) -> Complex<T> {
    let eta = eta_triplet(params).eta;
    let le = Complex::new(params.length, T::zero());
    let a_value = eta[2] * (-eta[2] * le).exp();
    let mut sum = Complex::new(T::zero(), T::zero());
    for j in 0..3 {
        let (j1, j2) = ((j + 1) % 3, (j + 2) % 3);
        sum += eta[j2] * eta[j2] * (eta[j1] - eta[j]);
    }
    let sqrt3 = Complex::new(Float::sqrt(lit::<T>(3.0)), T::zero());
    let e_d = sum / (sqrt3 * a_value);
    Complex::new(T::zero(), T::one() / lit(2.0)) * e_d
}

/// Minimum modulus of `det Q(z + iq/2)` over the symmetric grid with the
/// given step.
pub fn check_detq_nonzero<T: Real + RealField>(
    params: &CriticalLengthParams<T>,
    half_width: T,
    step: T,
) -> Result<DetQScan<T>> {
    if !(half_width > T::zero()) || !(step > T::zero()) {
        return Err(Error::InvalidArgument("scan half-width and step must be > 0".into()));
    }
    let steps = (half_width / step)
        .to_usize()
        .ok_or_else(|| Error::InvalidArgument("scan grid too large".into()))?;
    let shift = params.q / lit(2.0);
    let scan = (-(steps as isize)..=steps as isize)
        .into_par_iter()
        .map(|k| {
            let z = step * lit::<T>(k as f64);
            let w = Complex::new(z, shift);
            let roots = solve_depressed_cubic(w);
            let l = roots.lambdas;
            let le = Complex::new(params.length, T::zero());
            let e: Vec<Complex<T>> = l.iter().map(|lj| (lj * le).exp()).collect();
            let one = Complex::new(T::one(), T::zero());
            let det = det3([
                [one, one, one],
                [e[0], e[1], e[2]],
                [l[0] * e[0], l[1] * e[1], l[2] * e[2]],
            ]);
            (z, det.norm())
        })
        .reduce(
            || (T::zero(), T::infinity()),
            |a, b| if b.1 < a.1 { b } else { a },
        );
    Ok(DetQScan {
        min_modulus: scan.1,
        z_at_min: scan.0,
        violation: scan.1 < lit(DENOMINATOR_TOL),
    })
}
