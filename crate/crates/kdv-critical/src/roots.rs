//! Roots of the characteristic cubic `lambda^3 + lambda + iz = 0` and their
//! large-`z` asymptotics.

use nalgebra::{DMatrix, RealField};
use num_complex::Complex;
use num_traits::Float;

use crate::error::{Error, Result};
use crate::{lit, Real};

/// Two roots closer than this (absolute) are reported as degenerate.
pub const DEGENERACY_TOL: f64 = 1e-9;
/// Real parts closer than this (relative to the root scale) are labeled by
/// imaginary part instead.
pub const REAL_PART_TIE_TOL: f64 = 1e-11;

/// The three roots of `lambda^3 + lambda + iz = 0` for a fixed frequency `z`,
/// labeled by ascending real part (ties broken by ascending imaginary part).
#[derive(Debug, Clone, PartialEq)]
pub struct CubicRoots<T: Real> {
    pub z: Complex<T>,
    pub lambdas: [Complex<T>; 3],
    /// True when two roots coincide within [`DEGENERACY_TOL`].
    pub degenerate: bool,
}

impl<T: Real> CubicRoots<T> {
    /// Largest of the three Vieta residuals, each scaled by the natural size
    /// of the identity it checks:
    /// `|sum| / max(1, |lambda|)`, `|e2 - 1| / max(1, |lambda|^2)` and
    /// `|e3 + iz| / max(1, |z|)`.
    pub fn vieta_residual(&self) -> T {
        let [l1, l2, l3] = self.lambdas;
        let lmax = l1.norm().max(l2.norm()).max(l3.norm());
        let one = T::one();

        let e1 = l1 + l2 + l3;
        let e2 = l1 * l2 + l2 * l3 + l3 * l1;
        let e3 = l1 * l2 * l3;
        let i = Complex::new(T::zero(), one);

        let r1 = e1.norm() / one.max(lmax);
        let r2 = (e2 - Complex::new(one, T::zero())).norm() / one.max(lmax * lmax);
        let r3 = (e3 + i * self.z).norm() / one.max(self.z.norm());
        r1.max(r2).max(r3)
    }

    /// Minimum pairwise distance between the three roots.
    pub fn min_pairwise_distance(&self) -> T {
        let [l1, l2, l3] = self.lambdas;
        (l1 - l2).norm().min((l2 - l3).norm()).min((l1 - l3).norm())
    }
}

fn cubic_value_deriv<T: Real>(l: Complex<T>, iz: Complex<T>) -> (Complex<T>, Complex<T>) {
    let p = l * l * l + l + iz;
    let dp = Complex::new(lit::<T>(3.0), T::zero()) * l * l + Complex::new(T::one(), T::zero());
    (p, dp)
}

/// Solve `lambda^3 + lambda + iz = 0`.
///
/// Eigenvalues of the 3x3 companion matrix, two Newton polish steps per root
/// (one step leaves ~1e-10 of Schur error at |z| ~ 1e8), then the
/// deterministic labeling (sort by real part, ties by imaginary part).
pub fn solve_depressed_cubic<T: Real + RealField>(z: Complex<T>) -> CubicRoots<T> {
    let iz = Complex::new(T::zero(), T::one()) * z;
    let zero = Complex::new(T::zero(), T::zero());
    let one = Complex::new(T::one(), T::zero());

    // Companion matrix of the monic cubic with coefficients (iz, 1, 0).
    let companion = DMatrix::from_row_slice(3, 3, &[zero, zero, -iz, one, zero, -one, zero, one, zero]);
    let (_, t) = companion.schur().unpack();

    let mut lambdas = [zero; 3];
    for (k, lam) in lambdas.iter_mut().enumerate() {
        let mut l = t[(k, k)];
        for _ in 0..2 {
            let (p, dp) = cubic_value_deriv(l, iz);
            if dp.norm() > T::min_positive_value() {
                l -= p / dp;
            }
        }
        *lam = l;
    }

    // Sort by real part with a noise-tolerant tie break on the imaginary
    // part (exactly coincident real parts never survive rounding). The tie
    // relation is not transitive, so sort strictly first and then apply
    // deterministic adjacent swaps instead of feeding it to the comparator.
    let scale = lambdas
        .iter()
        .fold(T::one(), |m, l| Float::max(m, l.norm()));
    let tie = lit::<T>(REAL_PART_TIE_TOL) * scale;
    lambdas.sort_by(|u, v| {
        (u.re, u.im)
            .partial_cmp(&(v.re, v.im))
            .expect("cubic roots are finite")
    });
    for (i, j) in [(0, 1), (1, 2), (0, 1)] {
        if Float::abs(lambdas[i].re - lambdas[j].re) <= tie && lambdas[i].im > lambdas[j].im {
            lambdas.swap(i, j);
        }
    }

    // The eigenvalue split of a genuinely repeated root sits near sqrt(eps),
    // so also consult the discriminant 27 z^2 - 4, which is exact in z:
    // |Xi|^2 = |27 z^2 - 4| and min distance >= sqrt|disc| / max_dist^2.
    let roots = CubicRoots { z, lambdas, degenerate: false };
    let disc = Complex::new(lit::<T>(27.0), T::zero()) * z * z - Complex::new(lit::<T>(4.0), T::zero());
    let max_dist = Float::max(
        Float::max(
            (lambdas[0] - lambdas[1]).norm(),
            (lambdas[1] - lambdas[2]).norm(),
        ),
        (lambdas[0] - lambdas[2]).norm(),
    );
    let disc_distance = Float::sqrt(disc.norm()) / Float::max(max_dist * max_dist, T::one());
    let tol = lit::<T>(DEGENERACY_TOL);
    let degenerate = roots.min_pairwise_distance() < tol || disc_distance < tol;
    CubicRoots { degenerate, ..roots }
}

/// `|Xi|` (the modulus of the Vandermonde product of the roots) computed
/// exactly from the discriminant identity `Xi^2 = 27 z^2 - 4`, without
/// solving for the roots.
pub fn xi_modulus_from_discriminant<T: Real>(z: Complex<T>) -> T {
    let disc = Complex::new(lit::<T>(27.0), T::zero()) * z * z - Complex::new(lit::<T>(4.0), T::zero());
    Float::sqrt(disc.norm())
}

/// Direction constants `mu_j = e^{-i pi/6 - 2 pi i j / 3}`, `j = 1, 2, 3`,
/// satisfying `mu_j^3 = -i` and `Re(mu_1) < Re(mu_2) < Re(mu_3)`.
pub fn asymptotic_mu<T: Real>() -> [Complex<T>; 3] {
    let pi = T::PI();
    let mut mu = [Complex::new(T::zero(), T::zero()); 3];
    for (j, m) in mu.iter_mut().enumerate() {
        let angle = -pi / lit(6.0) - lit::<T>(2.0) * pi * lit::<T>((j + 1) as f64) / lit(3.0);
        *m = Complex::from_polar(T::one(), angle);
    }
    mu
}

/// Two-term asymptotic roots `mu_j z^{1/3} - z^{-1/3} / (3 mu_j)` for real
/// `z > 0`, in the same order as the exact labeling at large `z`.
pub fn asymptotic_roots<T: Real>(z: T) -> Result<[Complex<T>; 3]> {
    if !(z > T::zero()) {
        return Err(Error::InvalidArgument(format!(
            "asymptotic roots need z > 0, got {z}"
        )));
    }
    let cbrt = Float::cbrt(z);
    let inv_cbrt = T::one() / cbrt;
    let three = lit::<T>(3.0);
    let mu = asymptotic_mu::<T>();
    let mut out = [Complex::new(T::zero(), T::zero()); 3];
    for (m, o) in mu.iter().zip(out.iter_mut()) {
        *o = m.scale(cbrt) - (Complex::new(T::one(), T::zero()) / (m.scale(three))).scale(inv_cbrt);
    }
    Ok(out)
}
