//! The transcendental branch system for critical lengths.
//!
//! For each branch index `n` there is a unique `a < 0` with
//! `b = B(a) = 2|a| sqrt(e^{-6a} - 1/4)` in `(pi + 2n pi, 3pi/2 + 2n pi)`
//! such that `b cos b + a sin b = 0`. The critical length and growth rate
//! follow as `L^2 = b^2 - 3a^2` and `q = -2a(a^2 + b^2)/L^3`.

use crate::error::{Error, Result};
use crate::{lit, Real};

/// Bisection on `a` fails if the bracket cannot be narrowed below this.
pub const BISECTION_TOL: f64 = 1e-13;
/// Iteration cap for the bisection on the branch residual.
pub const MAX_BISECTION_ITERATIONS: usize = 200;

/// Parameters of one critical length: the branch root `(a, b)`, the interval
/// length `L`, the exponential rate `q` of the growing solution, and the
/// profile frequencies `alpha = -a/L`, `beta = -b/L`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CriticalLengthParams<T: Real> {
    pub n: usize,
    pub a: T,
    pub b: T,
    pub length: T,
    pub q: T,
    pub alpha: T,
    pub beta: T,
}

/// Signed residuals of the defining identities, for reporting.
#[derive(Debug, Clone, Copy)]
pub struct BranchResiduals<T: Real> {
    /// `b cos b + a sin b`
    pub phase: T,
    /// `a^2 + b^2 - 4 a^2 e^{-6a}`
    pub modulus: T,
    /// `L^2 - (b^2 - 3 a^2)`
    pub length: T,
    /// `q + 2 a (a^2 + b^2) / L^3`
    pub rate: T,
    /// `a cos b - b sin b` (must be positive)
    pub sign_condition: T,
    /// `b` lies in `(pi + 2n pi, 3pi/2 + 2n pi)`
    pub bracket_ok: bool,
}

impl<T: Real> CriticalLengthParams<T> {
    pub fn residuals(&self) -> BranchResiduals<T> {
        let (a, b, l, q) = (self.a, self.b, self.length, self.q);
        let pi = T::PI();
        let two_n_pi = lit::<T>(2.0 * self.n as f64) * pi;
        BranchResiduals {
            phase: b * b.cos() + a * b.sin(),
            modulus: a * a + b * b - lit::<T>(4.0) * a * a * (lit::<T>(-6.0) * a).exp(),
            length: l * l - (b * b - lit::<T>(3.0) * a * a),
            rate: q + lit::<T>(2.0) * a * (a * a + b * b) / (l * l * l),
            sign_condition: a * b.cos() - b * b.sin(),
            bracket_ok: b > pi + two_n_pi && b < lit::<T>(1.5) * pi + two_n_pi,
        }
    }

    /// Checks all defining identities at their standard tolerances.
    pub fn validate(&self) -> Result<()> {
        let r = self.residuals();
        let (a, b, l, q) = (self.a, self.b, self.length, self.q);
        let mut failures = Vec::new();
        if r.phase.abs() > lit::<T>(1e-10) * (a.abs() + b.abs()) {
            failures.push(format!("phase residual {:e}", r.phase));
        }
        if r.modulus.abs() > lit::<T>(1e-9) * (a * a + b * b) {
            failures.push(format!("modulus residual {:e}", r.modulus));
        }
        if r.length.abs() > lit::<T>(1e-9) * l * l {
            failures.push(format!("length residual {:e}", r.length));
        }
        if r.rate.abs() > lit::<T>(1e-12) * q {
            failures.push(format!("rate residual {:e}", r.rate));
        }
        if !(r.sign_condition > T::zero()) {
            failures.push(format!("sign condition {:e}", r.sign_condition));
        }
        if !r.bracket_ok {
            failures.push(format!("b = {b} outside branch window"));
        }
        if failures.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidArgument(format!(
                "branch {} invariants violated: {}",
                self.n,
                failures.join("; ")
            )))
        }
    }
}

/// `B(a) = 2|a| sqrt(e^{-6a} - 1/4)` for `a < 0`.
pub fn aux_b<T: Real>(a: T) -> Result<T> {
    if !(a < T::zero()) {
        return Err(Error::InvalidArgument(format!("aux_b needs a < 0, got {a}")));
    }
    let e = (lit::<T>(-6.0) * a).exp();
    Ok(lit::<T>(2.0) * a.abs() * (e - lit::<T>(0.25)).sqrt())
}

/// Branch residual `F(a) = B(a) cos B(a) + a sin B(a)` for `a < 0`.
pub fn branch_residual<T: Real>(a: T) -> Result<T> {
    let b = aux_b(a)?;
    Ok(b * b.cos() + a * b.sin())
}

/// Most negative `a` the scalar type can evaluate `B` at without overflow.
fn a_floor<T: Real>() -> T {
    let max_exp = T::max_value().ln();
    -(max_exp - lit::<T>(3.0)) / lit(6.0)
}

/// Invert the strictly monotone `B` (decreasing in `a`): the unique `a < 0`
/// with `B(a) = target`.
fn invert_aux_b<T: Real>(target: T) -> Result<T> {
    let mut lo = a_floor::<T>();
    let mut hi = -T::min_positive_value().sqrt();
    if aux_b(lo)? < target {
        return Err(Error::InvalidArgument(format!(
            "branch window {target} not representable in this scalar type"
        )));
    }
    // B(lo) >= target >= B(hi); keep the invariant while halving.
    for _ in 0..200 {
        let mid = (lo + hi) * lit(0.5);
        if mid <= lo || mid >= hi {
            break;
        }
        if aux_b(mid)? > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok((lo + hi) * lit(0.5))
}

/// The `a`-interval whose image under `B` is the branch-`n` window
/// `(pi + 2n pi, 3pi/2 + 2n pi)`. The first endpoint is the more negative
/// one (image `3pi/2 + 2n pi`).
pub fn branch_bracket<T: Real>(n: usize) -> Result<(T, T)> {
    let pi = T::PI();
    let two_n_pi = lit::<T>(2.0 * n as f64) * pi;
    let a_lo = invert_aux_b(lit::<T>(1.5) * pi + two_n_pi)?;
    let a_hi = invert_aux_b(pi + two_n_pi)?;
    Ok((a_lo, a_hi))
}

/// Bisection for the unique zero of the branch residual inside `[a_lo, a_hi]`.
///
/// The residual must change sign across the bracket. `tol` is the failure
/// threshold on the final bracket width; the iteration itself narrows the
/// bracket as far as the scalar type allows.
pub fn solve_branch_in<T: Real>(n: usize, a_lo: T, a_hi: T, tol: T) -> Result<CriticalLengthParams<T>> {
    if !(a_lo < a_hi) || !(a_hi < T::zero()) {
        return Err(Error::InvalidArgument(format!(
            "bad bracket [{a_lo}, {a_hi}] for branch {n}"
        )));
    }
    let mut lo = a_lo;
    let mut hi = a_hi;
    let mut f_lo = branch_residual(lo)?;
    let f_hi = branch_residual(hi)?;
    if f_lo * f_hi > T::zero() {
        return Err(Error::InvalidArgument(format!(
            "branch residual does not change sign on [{a_lo}, {a_hi}] (f_lo={f_lo:e}, f_hi={f_hi:e})"
        )));
    }

    let mut iterations = 0usize;
    while iterations < MAX_BISECTION_ITERATIONS {
        let mid = (lo + hi) * lit(0.5);
        if mid <= lo || mid >= hi {
            break; // bracket no longer representable any tighter
        }
        let f_mid = branch_residual(mid)?;
        if f_mid * f_lo > T::zero() {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
        iterations += 1;
    }

    let width = hi - lo;
    let threshold = tol.max(lit::<T>(8.0) * T::epsilon() * lo.abs());
    if width > threshold {
        return Err(Error::ConvergenceFailure {
            branch: n,
            width: width.to_f64().unwrap_or(f64::NAN),
            tol: threshold.to_f64().unwrap_or(f64::NAN),
            iterations,
        });
    }

    let a = (lo + hi) * lit(0.5);
    let b = aux_b(a)?;
    let length = (b * b - lit::<T>(3.0) * a * a).sqrt();
    let q = lit::<T>(-2.0) * a * (a * a + b * b) / (length * length * length);
    Ok(CriticalLengthParams {
        n,
        a,
        b,
        length,
        q,
        alpha: -a / length,
        beta: -b / length,
    })
}

/// Solve branch `n` of the critical-length system.
pub fn solve_branch<T: Real>(n: usize) -> Result<CriticalLengthParams<T>> {
    solve_branch_with_tol(n, lit(BISECTION_TOL))
}

/// As [`solve_branch`] with an explicit failure threshold on the bracket width.
pub fn solve_branch_with_tol<T: Real>(n: usize, tol: T) -> Result<CriticalLengthParams<T>> {
    if !(tol > T::zero()) {
        return Err(Error::InvalidArgument("root tolerance must be > 0".into()));
    }
    let (a_lo, a_hi) = branch_bracket(n)?;
    solve_branch_in(n, a_lo, a_hi, tol)
}

/// Membership test for the critical set: the branch index `n` with
/// `|length - L_n| <= tol`, if any. `L_n` is strictly increasing in `n`.
pub fn is_critical<T: Real>(length: T, tol: T) -> Option<usize> {
    if !(length > T::zero()) || !(tol > T::zero()) {
        return None;
    }
    for n in 0usize.. {
        let params = solve_branch::<T>(n).ok()?;
        if (length - params.length).abs() <= tol {
            return Some(n);
        }
        if params.length > length + tol {
            return None;
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    // High-precision branch roots (extended-precision bisection oracle,
    // 22 digits) for n = 0..3.
    pub(crate) const ORACLE: [(f64, f64, f64, f64); 4] = [
        (
            -0.506_552_868_755_947_7,
            4.602_776_330_820_787,
            4.518_380_520_167_533_6,
            0.235_491_160_975_096_1,
        ),
        (
            -0.690_370_268_265_097_5,
            10.932_509_647_088_459,
            10.866_919_244_283_034,
            0.129_110_301_318_220_04,
        ),
        (
            -0.794_796_970_288_330_4,
            17.232_670_736_085_08,
            17.177_596_864_124_638,
            0.093_331_233_958_717_16,
        ),
        (
            -0.868_761_848_885_602_8,
            23.525_032_423_941_187,
            23.476_859_012_594_65,
            0.074_415_447_280_881_62,
        ),
    ];

    #[test]
    fn aux_b_limit_and_reference_values() {
        // B(a) -> 0 as a -> 0-
        assert!(aux_b(-1e-8f64).unwrap() < 1e-7);
        // printed 7-digit root reproduces the printed b to its precision
        assert!((aux_b(-0.5065520f64).unwrap() - 4.60256).abs() < 2e-4);
        // extended-precision evaluation of 2 sqrt(e^6 - 1/4)
        assert!((aux_b(-1.0f64).unwrap() - 40.158_625_150_407_48).abs() < 1e-12);
        assert!(aux_b(0.0f64).is_err());
        assert!(aux_b(1.0f64).is_err());
    }

    #[test]
    fn residual_changes_sign_on_first_bracket() {
        let (lo, hi) = branch_bracket::<f64>(0).unwrap();
        let f_lo = branch_residual(lo).unwrap();
        let f_hi = branch_residual(hi).unwrap();
        assert!(f_lo > 0.0 && f_hi < 0.0, "f_lo={f_lo} f_hi={f_hi}");
        // dense scan: exactly one sign change
        let mut changes = 0;
        let mut prev = f_lo;
        let steps = 5000;
        for k in 1..=steps {
            let a = lo + (hi - lo) * k as f64 / steps as f64;
            let f = branch_residual(a).unwrap();
            if f * prev < 0.0 {
                changes += 1;
            }
            prev = f;
        }
        assert_eq!(changes, 1);
    }

    #[test]
    fn residual_is_continuous() {
        let a = -0.5f64;
        let f0 = branch_residual(a).unwrap();
        for h in [1e-4, 1e-6, 1e-8] {
            let df = (branch_residual(a + h).unwrap() - f0).abs();
            assert!(df < 1e2 * h, "h={h} df={df}");
        }
    }

    #[test]
    fn golden_branches_match_oracle() {
        for (n, &(a, b, l, q)) in ORACLE.iter().enumerate() {
            let p = solve_branch::<f64>(n).unwrap();
            assert!((p.a - a).abs() < 1e-13, "n={n} a={} want {a}", p.a);
            assert!((p.b - b).abs() < 1e-11, "n={n} b={} want {b}", p.b);
            assert!((p.length - l).abs() < 1e-11, "n={n} L={} want {l}", p.length);
            assert!((p.q - q).abs() < 1e-13, "n={n} q={} want {q}", p.q);
        }
    }

    #[test]
    fn invariants_hold_for_first_twenty_one_branches() {
        let mut prev_length = 0.0f64;
        let mut prev_b = 0.0f64;
        for n in 0..=20 {
            let p = solve_branch::<f64>(n).unwrap();
            p.validate().unwrap();
            assert!(p.length > prev_length, "L_n not increasing at n={n}");
            let (lo, hi) = branch_bracket::<f64>(n).unwrap();
            assert!(
                branch_residual(lo).unwrap() > 0.0 && branch_residual(hi).unwrap() < 0.0,
                "no sign change across bracket at n={n}"
            );
            if n > 0 {
                let gap = p.b - prev_b;
                assert!(
                    gap > std::f64::consts::PI && gap < 3.0 * std::f64::consts::PI,
                    "b gap {gap} at n={n}"
                );
            }
            prev_length = p.length;
            prev_b = p.b;
        }
    }

    #[test]
    fn resolving_from_a_tighter_bracket_gives_the_same_root() {
        for n in [0usize, 3, 20] {
            let p = solve_branch::<f64>(n).unwrap();
            let (lo, hi) = branch_bracket::<f64>(n).unwrap();
            // The root sits near the lower (more negative) end of the
            // bracket, so shrink from the other side by 10%.
            let hi2 = hi - 0.1 * (hi - lo);
            let p2 = solve_branch_in(n, lo, hi2, BISECTION_TOL).unwrap();
            assert!((p.a - p2.a).abs() < 1e-12, "n={n}: {} vs {}", p.a, p2.a);
        }
    }

    #[test]
    fn branch_root_sits_in_upper_half_of_window() {
        // The proof localizes t_n = b_n - pi - 2n pi to (pi/4, pi/2).
        for n in 0..=20 {
            let p = solve_branch::<f64>(n).unwrap();
            let t = p.b - std::f64::consts::PI * (1.0 + 2.0 * n as f64);
            assert!(
                t > std::f64::consts::FRAC_PI_4 && t < std::f64::consts::FRAC_PI_2,
                "n={n} t={t}"
            );
        }
    }

    #[test]
    fn is_critical_examples() {
        let l0 = solve_branch::<f64>(0).unwrap().length;
        assert_eq!(is_critical(l0, 1e-5), Some(0));
        // printed 8-digit value is a coarse-scan output, accurate to ~2e-5
        assert_eq!(is_critical(4.5183604f64, 1e-4), Some(0));
        assert_eq!(is_critical(1.0f64, 1e-5), None);
        // 2 pi is critical for the Neumann boundary set, not this one
        assert_eq!(is_critical(2.0 * std::f64::consts::PI, 1e-5), None);
        assert_eq!(is_critical(-1.0f64, 1e-5), None);
    }

    #[test]
    fn f32_branch_solve_is_close() {
        let p = solve_branch::<f32>(0).unwrap();
        assert!((p.length - 4.51838).abs() < 1e-3);
    }
}
