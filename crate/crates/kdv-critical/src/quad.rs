//! Numerical integration: adaptive 15-point Gauss-Kronrod quadrature for
//! smooth integrands on finite intervals, and composite Simpson weights for
//! grid functions.

use crate::error::{Error, Result};
use crate::{lit, Real};

/// Kronrod abscissae for the 15-point rule (positive half, last entry is 0).
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_5,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_48,
    0.000000000000000000000000000000000,
];

/// Kronrod weights matching `XGK`.
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224,
    0.063_092_092_629_978_56,
    0.104_790_010_322_250_19,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_42,
    0.204_432_940_075_298_89,
    0.209_482_141_084_727_82,
];

/// Weights of the embedded 7-point Gauss rule (even-indexed abscissae).
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_64,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// QUADPACK-style rescaling of the raw Gauss/Kronrod difference into an
/// error estimate that accounts for round-off on nearly-exact results.
fn rescale_error<T: Real>(err: T, res_abs: T, res_asc: T) -> T {
    let mut scaled = err.abs();
    if res_asc != T::zero() && scaled != T::zero() {
        let scale = (lit::<T>(200.0) * scaled / res_asc).powf(lit(1.5));
        scaled = if scale < T::one() { res_asc * scale } else { res_asc };
    }
    let tiny = T::min_positive_value() / (lit::<T>(50.0) * T::epsilon());
    if res_abs > tiny {
        let min_err = lit::<T>(50.0) * T::epsilon() * res_abs;
        if min_err > scaled {
            scaled = min_err;
        }
    }
    scaled
}

/// One 15-point Gauss-Kronrod panel on `[a, b]`.
///
/// Returns `(result, abserr)`.
pub fn qk15<T: Real, F: Fn(T) -> T>(f: &F, a: T, b: T) -> (T, T) {
    let center = (a + b) * lit(0.5);
    let half = (b - a) * lit(0.5);
    let abs_half = half.abs();

    let f_center = f(center);
    let mut res_gauss = lit::<T>(WG[3]) * f_center;
    let mut res_kronrod = lit::<T>(WGK[7]) * f_center;
    let mut res_abs = res_kronrod.abs();

    let mut fv1 = [T::zero(); 7];
    let mut fv2 = [T::zero(); 7];
    for j in 0..7 {
        let dx = half * lit(XGK[j]);
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        fv1[j] = f1;
        fv2[j] = f2;
        let sum = f1 + f2;
        res_kronrod += lit::<T>(WGK[j]) * sum;
        res_abs += lit::<T>(WGK[j]) * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            res_gauss += lit::<T>(WG[j / 2]) * sum;
        }
    }

    let mean = res_kronrod * lit(0.5);
    let mut res_asc = lit::<T>(WGK[7]) * (f_center - mean).abs();
    for j in 0..7 {
        res_asc += lit::<T>(WGK[j]) * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }

    let result = res_kronrod * half;
    res_abs *= abs_half;
    res_asc *= abs_half;
    let err = rescale_error((res_kronrod - res_gauss) * half, res_abs, res_asc);
    (result, err)
}

struct Segment<T> {
    a: T,
    b: T,
    value: T,
    error: T,
}

/// Adaptive Gauss-Kronrod integration of `f` over `[a, b]` to absolute
/// tolerance `abs_tol`, splitting the worst segment until the summed error
/// estimate is below tolerance or `max_intervals` segments exist.
///
/// Returns `(integral, error_estimate)`.
pub fn integrate<T: Real, F: Fn(T) -> T>(
    f: F,
    a: T,
    b: T,
    abs_tol: T,
    max_intervals: usize,
) -> Result<(T, T)> {
    integrate_with(f, a, b, abs_tol, T::zero(), max_intervals)
}

/// As [`integrate`], accepting in addition a relative tolerance: the target
/// is `max(abs_tol, rel_tol * |integral|)`, so integrands whose magnitude
/// dwarfs `abs_tol` still terminate.
pub fn integrate_with<T: Real, F: Fn(T) -> T>(
    f: F,
    a: T,
    b: T,
    abs_tol: T,
    rel_tol: T,
    max_intervals: usize,
) -> Result<(T, T)> {
    if !(abs_tol > T::zero()) {
        return Err(Error::InvalidArgument("quadrature tolerance must be > 0".into()));
    }
    let (v, e) = qk15(&f, a, b);
    let mut segments = vec![Segment { a, b, value: v, error: e }];

    loop {
        let mut total_err = T::zero();
        let mut total = T::zero();
        let mut worst = 0usize;
        for (i, s) in segments.iter().enumerate() {
            total_err += s.error;
            total += s.value;
            if s.error > segments[worst].error {
                worst = i;
            }
        }
        let target = abs_tol.max(rel_tol * total.abs());
        if total_err <= target {
            return Ok((total, total_err));
        }
        if segments.len() >= max_intervals {
            return Err(Error::QuadratureFailure {
                error: total_err.to_f64().unwrap_or(f64::NAN),
                tol: target.to_f64().unwrap_or(f64::NAN),
                intervals: segments.len(),
            });
        }
        let Segment { a: sa, b: sb, .. } = segments[worst];
        let mid = (sa + sb) * lit(0.5);
        let (v1, e1) = qk15(&f, sa, mid);
        let (v2, e2) = qk15(&f, mid, sb);
        segments[worst] = Segment { a: sa, b: mid, value: v1, error: e1 };
        segments.push(Segment { a: mid, b: sb, value: v2, error: e2 });
    }
}

/// Composite Simpson weights for `n_points` equally spaced samples with
/// spacing `dx`. For an odd interval count the last three intervals use the
/// 3/8 rule. Requires `n_points >= 3`.
pub fn simpson_weights<T: Real>(n_points: usize, dx: T) -> Result<Vec<T>> {
    if n_points < 3 {
        return Err(Error::GridMismatch(format!(
            "Simpson weights need at least 3 points, got {n_points}"
        )));
    }
    let n = n_points - 1;
    let mut w = vec![T::zero(); n_points];
    let simpson_end = if n.is_multiple_of(2) { n } else { n - 3 };
    if simpson_end > 0 {
        let c = dx / lit(3.0);
        w[0] += c;
        w[simpson_end] += c;
        for (i, wi) in w.iter_mut().enumerate().take(simpson_end).skip(1) {
            *wi += if i % 2 == 1 { lit::<T>(4.0) * c } else { lit::<T>(2.0) * c };
        }
    }
    if !n.is_multiple_of(2) {
        let c = lit::<T>(3.0) * dx / lit(8.0);
        for (k, coeff) in [1.0, 3.0, 3.0, 1.0].iter().enumerate() {
            w[n - 3 + k] += lit::<T>(*coeff) * c;
        }
    }
    Ok(w)
}

/// Composite Simpson integral of uniformly sampled values.
pub fn simpson<T: Real>(values: &[T], dx: T) -> Result<T> {
    let w = simpson_weights(values.len(), dx)?;
    let mut acc = T::zero();
    for (wi, vi) in w.iter().zip(values) {
        acc += *wi * *vi;
    }
    Ok(acc)
}
