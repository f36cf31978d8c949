//! Crank-Nicolson finite-difference simulator for the linearized KdV
//! equation `y_t + y_x + y_xxx = 0` on `(0, L)` with three prescribed
//! boundary values per time level, plus exact solutions built from the
//! periodic modal propagator through the `y = e^{2t - x} v` substitution.
//!
//! Spatial stencils (second order throughout):
//!
//! ```text
//! row 0      :  y_0 = h1(t)                                (left Dirichlet)
//! row 1      :  y_x  ~ [-1, 0, 1] / (2 dx)        on nodes (0, 1, 2)
//!               y_xxx ~ [-3/2, 5, -6, 3, -1/2] / dx^3 on nodes (0..=4)
//! rows 2..N-2:  y_x  ~ [-1, 0, 1] / (2 dx)
//!               y_xxx ~ [-1/2, 1, 0, -1, 1/2] / dx^3   (centered)
//! row N-1    :  third boundary condition at x = L:
//!               y_x(L)  ~ [1, -4, 3] / (2 dx)   on nodes (N-2, N-1, N)
//!               y_xx(L) ~ [-1, 4, -5, 2] / dx^2 on nodes (N-3 ..= N)
//! row N      :  y_N = h2(t)                               (right Dirichlet)
//! ```
//!
//! The one-sided closures are the result of eliminating the ghost nodes with
//! the boundary rows plus second-order extrapolation.

use num_complex::Complex;

use crate::banded::BandMatrix;
use crate::branch::CriticalLengthParams;
use crate::error::{Error, Result};
use crate::profile::{eval_growth, eval_profile};
use crate::quad::simpson_weights;
use crate::{lit, Real};

/// Growth factor (relative to the data scale) treated as blow-up.
pub const INSTABILITY_FACTOR: f64 = 1e6;

/// Which derivative the third boundary value prescribes at `x = L`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RightThirdKind {
    /// `y_x(., L) = h3`
    Neumann,
    /// `y_xx(., L) = h3`
    SecondDerivative,
}

pub type TimeFn<T> = Box<dyn Fn(T) -> T>;

/// Three scalar boundary conditions per time level.
pub struct BoundarySpec<T> {
    /// `y(., 0) = h1`
    pub left: TimeFn<T>,
    /// `y(., L) = h2`
    pub right: TimeFn<T>,
    pub third_kind: RightThirdKind,
    /// `h3`, interpreted per `third_kind`.
    pub third: TimeFn<T>,
}

impl<T: Real> BoundarySpec<T> {
    pub fn zero(third_kind: RightThirdKind) -> Self {
        BoundarySpec {
            left: Box::new(|_| T::zero()),
            right: Box::new(|_| T::zero()),
            third_kind,
            third: Box::new(|_| T::zero()),
        }
    }

    /// Homogeneous except for the right Dirichlet control `u`.
    pub fn right_control(u: TimeFn<T>) -> Self {
        BoundarySpec {
            left: Box::new(|_| T::zero()),
            right: u,
            third_kind: RightThirdKind::Neumann,
            third: Box::new(|_| T::zero()),
        }
    }
}

/// Space-time grid extents of one run.
#[derive(Debug, Clone, Copy)]
pub struct SimConfig<T: Real> {
    pub length: T,
    pub duration: T,
    pub dx: T,
    pub dt: T,
}

/// Largest absolute boundary values seen during a run, plus the condition
/// kind; carried by the trajectory so consumers can check the run shape.
#[derive(Debug, Clone, Copy)]
pub struct BcSummary<T: Real> {
    pub third_kind: RightThirdKind,
    pub max_left_abs: T,
    pub max_right_abs: T,
    pub max_third_abs: T,
}

/// Immutable result of a simulation: `frames[k][i] = y(t_k, x_i)`.
#[derive(Debug, Clone)]
pub struct Trajectory<T: Real> {
    pub length: T,
    pub duration: T,
    pub dx: T,
    pub dt: T,
    pub frames: Vec<Vec<T>>,
    pub bc: BcSummary<T>,
    /// `|y0 - h(0)|` mismatches for the three boundary rows at `t = 0`.
    pub initial_mismatch: [T; 3],
}

impl<T: Real> Trajectory<T> {
    pub fn grid_points(&self) -> usize {
        self.frames[0].len()
    }

    pub fn x_grid(&self) -> Vec<T> {
        let n = self.grid_points() - 1;
        (0..=n)
            .map(|i| if i == n { self.length } else { self.dx * lit(i as f64) })
            .collect()
    }

    pub fn time(&self, frame: usize) -> T {
        self.dt * lit(frame as f64)
    }

    pub fn sup_norm(&self) -> T {
        let mut m = T::zero();
        for f in &self.frames {
            for v in f {
                m = m.max(v.abs());
            }
        }
        m
    }
}

struct Stencils<T: Real> {
    /// `(offset from row index, coefficient)` pairs of `d/dx + d^3/dx^3`.
    row1: Vec<(isize, T)>,
    interior: Vec<(isize, T)>,
}

fn operator_stencils<T: Real>(dx: T) -> Stencils<T> {
    let dx3 = dx * dx * dx;
    let inv2dx = T::one() / (lit::<T>(2.0) * dx);
    // row 1: one-sided third derivative on nodes 0..=4 (offsets -1..=3)
    let row1 = vec![
        (-1isize, lit::<T>(-1.5) / dx3 - inv2dx),
        (0, lit::<T>(5.0) / dx3),
        (1, lit::<T>(-6.0) / dx3 + inv2dx),
        (2, lit::<T>(3.0) / dx3),
        (3, lit::<T>(-0.5) / dx3),
    ];
    let interior = vec![
        (-2isize, lit::<T>(-0.5) / dx3),
        (-1, T::one() / dx3 - inv2dx),
        (1, -T::one() / dx3 + inv2dx),
        (2, lit::<T>(0.5) / dx3),
    ];
    Stencils { row1, interior }
}

/// Simulate the linearized KdV equation with Crank-Nicolson time stepping.
///
/// `y0` holds the initial samples on the uniform grid (`round(L/dx) + 1`
/// points). Boundary data incompatible with `y0` at `t = 0` is allowed; the
/// mismatch is reported on the trajectory and logged.
pub fn simulate_linear_kdv<T: Real>(
    config: &SimConfig<T>,
    y0: &[T],
    bc: &BoundarySpec<T>,
) -> Result<Trajectory<T>> {
    let SimConfig { length, duration, dx, dt } = *config;
    if !(length > T::zero() && duration > T::zero() && dx > T::zero() && dt > T::zero()) {
        return Err(Error::InvalidArgument("simulation extents must be positive".into()));
    }
    let n = (length / dx)
        .round()
        .to_usize()
        .ok_or_else(|| Error::InvalidArgument("grid too large".into()))?;
    if n < 6 {
        return Err(Error::GridMismatch(format!("need at least 6 grid intervals, got {n}")));
    }
    let nt = (duration / dt)
        .round()
        .to_usize()
        .ok_or_else(|| Error::InvalidArgument("too many time steps".into()))?
        .max(1);
    if y0.len() != n + 1 {
        return Err(Error::GridMismatch(format!(
            "initial data has {} samples, grid has {}",
            y0.len(),
            n + 1
        )));
    }
    let dx = length / lit(n as f64);
    let dt = duration / lit(nt as f64);
    let half_dt = dt / lit(2.0);

    let st = operator_stencils(dx);
    let (kl, ku) = (2usize, 3usize);

    // A holds the PDE operator on rows 1..=n-2 and zeros elsewhere.
    let mut a_op = BandMatrix::<T>::zeros(n + 1, kl, ku);
    for (off, c) in &st.row1 {
        a_op.add(1, (1 + off) as usize, *c);
    }
    for i in 2..=n - 2 {
        for (off, c) in &st.interior {
            a_op.add(i, (i as isize + off) as usize, *c);
        }
    }

    // implicit matrix: identity + (dt/2) A on PDE rows, boundary rows direct
    let mut m = BandMatrix::<T>::zeros(n + 1, kl, ku);
    for i in 1..=n - 2 {
        m.set(i, i, T::one());
        if i == 1 {
            for (off, c) in &st.row1 {
                m.add(1, (1 + off) as usize, half_dt * *c);
            }
        } else {
            for (off, c) in &st.interior {
                m.add(i, (i as isize + off) as usize, half_dt * *c);
            }
        }
    }
    m.set(0, 0, T::one());
    m.set(n, n, T::one());
    let dx2 = dx * dx;
    match bc.third_kind {
        RightThirdKind::Neumann => {
            let inv2dx = T::one() / (lit::<T>(2.0) * dx);
            m.set(n - 1, n - 2, inv2dx);
            m.set(n - 1, n - 1, lit::<T>(-4.0) * inv2dx);
            m.set(n - 1, n, lit::<T>(3.0) * inv2dx);
        }
        RightThirdKind::SecondDerivative => {
            m.set(n - 1, n - 3, -T::one() / dx2);
            m.set(n - 1, n - 2, lit::<T>(4.0) / dx2);
            m.set(n - 1, n - 1, lit::<T>(-5.0) / dx2);
            m.set(n - 1, n, lit::<T>(2.0) / dx2);
        }
    }
    let lu = m.factor().map_err(|_| Error::SingularStep { step: 0 })?;

    // initial compatibility report
    let h1_0 = (bc.left)(T::zero());
    let h2_0 = (bc.right)(T::zero());
    let h3_0 = (bc.third)(T::zero());
    let third_fd_0 = match bc.third_kind {
        RightThirdKind::Neumann => {
            (y0[n - 2] - lit::<T>(4.0) * y0[n - 1] + lit::<T>(3.0) * y0[n]) / (lit::<T>(2.0) * dx)
        }
        RightThirdKind::SecondDerivative => {
            (-y0[n - 3] + lit::<T>(4.0) * y0[n - 2] - lit::<T>(5.0) * y0[n - 1]
                + lit::<T>(2.0) * y0[n])
                / dx2
        }
    };
    let initial_mismatch = [
        (y0[0] - h1_0).abs(),
        (y0[n] - h2_0).abs(),
        (third_fd_0 - h3_0).abs(),
    ];
    let y0_sup = y0.iter().fold(T::zero(), |m, v| m.max(v.abs()));
    let compat_tol = lit::<T>(1e-8) * T::one().max(y0_sup);
    if initial_mismatch.iter().any(|r| *r > compat_tol) {
        log::warn!(
            "initial data incompatible with boundary data at t=0 (mismatches {:e}, {:e}, {:e})",
            initial_mismatch[0],
            initial_mismatch[1],
            initial_mismatch[2]
        );
    }

    let mut frames = Vec::with_capacity(nt + 1);
    frames.push(y0.to_vec());
    let mut y = y0.to_vec();
    let mut rhs = vec![T::zero(); n + 1];
    let mut ay = vec![T::zero(); n + 1];

    let mut max_left = h1_0.abs();
    let mut max_right = h2_0.abs();
    let mut max_third = h3_0.abs();
    let mut scale = y0_sup;

    for step in 1..=nt {
        let t1 = dt * lit(step as f64);
        a_op.mul_vec(&y, &mut ay);
        for i in 0..=n {
            rhs[i] = y[i] - half_dt * ay[i];
        }
        let (h1, h2, h3) = ((bc.left)(t1), (bc.right)(t1), (bc.third)(t1));
        rhs[0] = h1;
        rhs[n] = h2;
        rhs[n - 1] = h3;
        max_left = max_left.max(h1.abs());
        max_right = max_right.max(h2.abs());
        max_third = max_third.max(h3.abs());
        scale = scale.max(h1.abs()).max(h2.abs()).max(h3.abs());

        lu.solve(&mut rhs);
        y.copy_from_slice(&rhs);

        let sup = y.iter().fold(T::zero(), |m, v| m.max(v.abs()));
        if !sup.is_finite() {
            return Err(Error::SingularStep { step });
        }
        if scale > T::zero() && sup > lit::<T>(INSTABILITY_FACTOR) * scale {
            return Err(Error::Instability {
                step,
                factor: (sup / scale).to_f64().unwrap_or(f64::NAN),
            });
        }
        frames.push(y.clone());
    }

    Ok(Trajectory {
        length,
        duration,
        dx,
        dt,
        frames,
        bc: BcSummary {
            third_kind: bc.third_kind,
            max_left_abs: max_left,
            max_right_abs: max_right,
            max_third_abs: max_third,
        },
        initial_mismatch,
    })
}

/// Advance periodic KdV-Burgers Fourier modes: each coefficient is
/// multiplied by `e^{(-3 n^2 - i(4n - n^3)) t}`. Mode 0 must be absent
/// (mean-zero data).
pub fn kdvb_modal_propagator<T: Real>(
    modes: &[(i32, Complex<T>)],
    t: T,
) -> Result<Vec<(i32, Complex<T>)>> {
    let mut out = Vec::with_capacity(modes.len());
    for &(n, c) in modes {
        if n == 0 {
            return Err(Error::InvalidArgument(
                "mode 0 is not allowed (mean-zero data required)".into(),
            ));
        }
        let nf = lit::<T>(n as f64);
        let exponent = Complex::new(
            lit::<T>(-3.0) * nf * nf * t,
            -(lit::<T>(4.0) * nf - nf * nf * nf) * t,
        );
        out.push((n, c * exponent.exp()));
    }
    Ok(out)
}

/// Exact solution of `y_t + y_x + y_xxx = 0` on `[0, 2 pi]` obtained from
/// periodic KdV-Burgers modes through `y = e^{2t - x} v`.
pub fn manufactured_solution<T: Real>(modes: &[(i32, Complex<T>)], t: T, x: T) -> Result<T> {
    manufactured_solution_dx(modes, t, x, 0)
}

/// Spatial derivative (order 0..=3) of the manufactured solution.
pub fn manufactured_solution_dx<T: Real>(
    modes: &[(i32, Complex<T>)],
    t: T,
    x: T,
    order: usize,
) -> Result<T> {
    if order > 3 {
        return Err(Error::InvalidArgument(format!("derivative order {order} not supported")));
    }
    let two_pi = lit::<T>(2.0) * T::PI();
    if x < T::zero() || x > two_pi {
        return Err(Error::InvalidArgument(format!("x = {x} outside [0, 2 pi]")));
    }
    let advanced = kdvb_modal_propagator(modes, t)?;
    // v^{(m)}(x) = Re sum a_n(t) (i n)^m e^{i n x}
    let mut v = [T::zero(); 4];
    for &(n, c) in &advanced {
        let nf = lit::<T>(n as f64);
        let phase = Complex::new(T::zero(), nf * x).exp();
        let mut factor = c * phase;
        for vm in v.iter_mut().take(order + 1) {
            *vm += factor.re;
            factor *= Complex::new(T::zero(), nf);
        }
    }
    // d^k/dx^k [e^{-x} v] = e^{-x} sum_m C(k,m) (-1)^{k-m} v^{(m)}
    let combo = match order {
        0 => v[0],
        1 => v[1] - v[0],
        2 => v[2] - lit::<T>(2.0) * v[1] + v[0],
        _ => v[3] - lit::<T>(3.0) * v[2] + lit::<T>(3.0) * v[1] - v[0],
    };
    Ok((lit::<T>(2.0) * t - x).exp() * combo)
}

/// Maximum relative drift of the conserved pairing
/// `I(t) = int y(t, x) e^{qt} phi(x) dx` over the trajectory.
///
/// The trajectory must come from the homogeneous-left, zero-Neumann-right
/// boundary shape (arbitrary right Dirichlet control) at the critical length.
pub fn projection_drift<T: Real>(
    traj: &Trajectory<T>,
    params: &CriticalLengthParams<T>,
) -> Result<T> {
    if (traj.length - params.length).abs() > lit(1e-6) {
        return Err(Error::GridMismatch(format!(
            "trajectory length {} does not match critical length {}",
            traj.length, params.length
        )));
    }
    if traj.bc.third_kind != RightThirdKind::Neumann {
        return Err(Error::InvalidArgument(
            "conservation check needs the Neumann-type third boundary condition".into(),
        ));
    }
    let tol = lit::<T>(1e-12) * T::one().max(traj.sup_norm());
    if traj.bc.max_left_abs > tol || traj.bc.max_third_abs > tol {
        return Err(Error::InvalidArgument(
            "conservation check needs y(.,0) = 0 and y_x(.,L) = 0".into(),
        ));
    }

    let xs = traj.x_grid();
    let w = simpson_weights(xs.len(), traj.dx)?;
    let phi: Vec<T> = xs
        .iter()
        .map(|&x| eval_profile(params, x.min(params.length), 0))
        .collect::<Result<_>>()?;
    let sup_phi = phi.iter().fold(T::zero(), |m, v| m.max(v.abs()));

    let mut i0 = T::zero();
    let mut max_dev = T::zero();
    for (k, frame) in traj.frames.iter().enumerate() {
        let growth = (params.q * traj.time(k)).exp();
        let mut acc = T::zero();
        for ((wi, yi), pi) in w.iter().zip(frame).zip(&phi) {
            acc += *wi * *yi * *pi;
        }
        acc *= growth;
        if k == 0 {
            i0 = acc;
        } else {
            max_dev = max_dev.max((acc - i0).abs());
        }
    }
    let growth_end = (params.q * traj.duration).exp();
    let scale = traj.sup_norm() * sup_phi * growth_end * traj.length;
    Ok(max_dev / i0.abs().max(scale))
}

/// Result of simulating the growing mode from `y0 = phi`.
#[derive(Debug, Clone, Copy)]
pub struct EigenmodeReport<T: Real> {
    /// `max_t ||y(t,.) - e^{qt} phi|| / ||e^{qt} phi||` in discrete L2.
    pub rel_error: T,
    /// Largest one-sided slope at `x = 0` over the run (the exact solution
    /// has `y_x(t, 0) = 0` without the scheme imposing it).
    pub max_left_slope: T,
    pub sup_phi_x: T,
    /// `log(||y(T)|| / ||y(0)||) / T` in discrete L2; the exact rate is `q`.
    pub growth_rate: T,
}

/// Simulate `y0 = phi` under the homogeneous Dirichlet/Dirichlet/second-
/// derivative boundary set and compare against the exact growing solution
/// `e^{qt} phi(x)`.
pub fn eigenmode_check<T: Real>(
    params: &CriticalLengthParams<T>,
    duration: T,
    dx: T,
    dt: T,
) -> Result<EigenmodeReport<T>> {
    let config = SimConfig { length: params.length, duration, dx, dt };
    let n = (params.length / dx)
        .round()
        .to_usize()
        .ok_or_else(|| Error::InvalidArgument("grid too large".into()))?;
    let y0: Vec<T> = (0..=n)
        .map(|i| {
            let x = if i == n {
                params.length
            } else {
                params.length * lit::<T>(i as f64) / lit(n as f64)
            };
            eval_profile(params, x, 0)
        })
        .collect::<Result<_>>()?;
    let traj = simulate_linear_kdv(&config, &y0, &BoundarySpec::zero(RightThirdKind::SecondDerivative))?;

    let xs = traj.x_grid();
    let mut rel_error = T::zero();
    let mut max_slope = T::zero();
    let mut norm_first = T::zero();
    let mut norm_last = T::zero();
    let two_dx = lit::<T>(2.0) * traj.dx;
    for (k, frame) in traj.frames.iter().enumerate() {
        let t = traj.time(k);
        let mut num = T::zero();
        let mut den = T::zero();
        let mut nrm = T::zero();
        for (i, x) in xs.iter().enumerate() {
            let exact = eval_growth(params, t, x.min(params.length))?;
            let d = frame[i] - exact;
            num += d * d;
            den += exact * exact;
            nrm += frame[i] * frame[i];
        }
        rel_error = rel_error.max((num / den).sqrt());
        if k == 0 {
            norm_first = nrm.sqrt();
        }
        if k == traj.frames.len() - 1 {
            norm_last = nrm.sqrt();
        }
        let slope = (lit::<T>(-3.0) * frame[0] + lit::<T>(4.0) * frame[1] - frame[2]) / two_dx;
        max_slope = max_slope.max(slope.abs());
    }
    let growth_rate = (norm_last / norm_first).ln() / traj.duration;
    let mut sup_phi_x = T::zero();
    for x in &xs {
        sup_phi_x = sup_phi_x.max(eval_profile(params, x.min(params.length), 1)?.abs());
    }
    Ok(EigenmodeReport { rel_error, max_left_slope: max_slope, sup_phi_x, growth_rate })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::branch::solve_branch;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    type C = Complex<f64>;

    fn modes() -> Vec<(i32, C)> {
        vec![(1, C::new(0.7, 0.2)), (2, C::new(-0.3, 0.1)), (-1, C::new(0.15, -0.05))]
    }

    #[test]
    fn zero_data_stays_zero() {
        let cfg = SimConfig { length: 1.0, duration: 0.05, dx: 1.0 / 40.0, dt: 1e-3 };
        let y0 = vec![0.0f64; 41];
        let traj = simulate_linear_kdv(&cfg, &y0, &BoundarySpec::zero(RightThirdKind::Neumann)).unwrap();
        assert_eq!(traj.frames.len(), 51);
        assert_eq!(traj.grid_points(), 41);
        assert_eq!(traj.sup_norm(), 0.0);
    }

    #[test]
    fn grid_mismatch_is_rejected() {
        let cfg = SimConfig { length: 1.0, duration: 0.01, dx: 0.025, dt: 1e-3 };
        let y0 = vec![0.0f64; 10];
        assert!(matches!(
            simulate_linear_kdv(&cfg, &y0, &BoundarySpec::zero(RightThirdKind::Neumann)),
            Err(Error::GridMismatch(_))
        ));
    }

    #[test]
    fn propagator_identity_decay_linearity() {
        let m = modes();
        let at0 = kdvb_modal_propagator(&m, 0.0).unwrap();
        for ((n0, c0), (n1, c1)) in m.iter().zip(&at0) {
            assert_eq!(n0, n1);
            assert!((c0 - c1).norm() < 1e-15);
        }
        let single = vec![(1, C::new(1.0, 0.0))];
        let t = 0.37;
        let out = kdvb_modal_propagator(&single, t).unwrap();
        assert!((out[0].1.norm() - (-3.0 * t).exp()).abs() < 1e-14);

        let m2: Vec<(i32, C)> = m.iter().map(|(n, c)| (*n, c * C::new(2.0, 0.0))).collect();
        let a = kdvb_modal_propagator(&m, t).unwrap();
        let b = kdvb_modal_propagator(&m2, t).unwrap();
        for ((_, ca), (_, cb)) in a.iter().zip(&b) {
            assert!((cb - ca * C::new(2.0, 0.0)).norm() < 1e-14);
        }

        assert!(kdvb_modal_propagator(&[(0, C::new(1.0, 0.0))], 1.0).is_err());
    }

    #[test]
    fn manufactured_solution_solves_the_pde() {
        // high-order finite differences on the closed form as the oracle
        let m = modes();
        let h = 1e-2;
        let c1 = [1.0 / 12.0, -8.0 / 12.0, 0.0, 8.0 / 12.0, -1.0 / 12.0]; // f' O(h^4)
        let c3 = [1.0 / 8.0, -1.0, 13.0 / 8.0, 0.0, -13.0 / 8.0, 1.0, -1.0 / 8.0]; // f''' O(h^4)
        let mut scale = 0.0f64;
        let mut worst = 0.0f64;
        for (t, x) in [(0.1, 1.0), (0.3, 2.5), (0.05, 4.0)] {
            let yt: f64 = (0..5)
                .map(|k| c1[k] * manufactured_solution(&m, t + (k as f64 - 2.0) * h, x).unwrap())
                .sum::<f64>()
                / h;
            let yx: f64 = (0..5)
                .map(|k| c1[k] * manufactured_solution(&m, t, x + (k as f64 - 2.0) * h).unwrap())
                .sum::<f64>()
                / h;
            let yxxx: f64 = (0..7)
                .map(|k| c3[k] * manufactured_solution(&m, t, x + (k as f64 - 3.0) * h).unwrap())
                .sum::<f64>()
                / (h * h * h);
            scale = scale.max(yt.abs().max(yx.abs()).max(yxxx.abs()));
            worst = worst.max((yt + yx + yxxx).abs());
        }
        assert!(worst < 1e-6 * scale, "residual {worst:e} scale {scale:e}");
    }

    #[test]
    fn manufactured_solution_initial_form_and_linearity() {
        let m = modes();
        for i in 0..8 {
            let x = 2.0 * std::f64::consts::PI * i as f64 / 8.0;
            // t = 0: y = e^{-x} Re sum a_n e^{inx}
            let mut v = C::new(0.0, 0.0);
            for (n, c) in &m {
                v += c * (C::new(0.0, *n as f64 * x)).exp();
            }
            let want = (-x).exp() * v.re;
            assert!((manufactured_solution(&m, 0.0, x).unwrap() - want).abs() < 1e-14);

            // superposition of single-mode solutions
            let t = 0.21;
            let total = manufactured_solution(&m, t, x).unwrap();
            let sum: f64 = m
                .iter()
                .map(|&(n, c)| manufactured_solution(&[(n, c)], t, x).unwrap())
                .sum();
            assert!((total - sum).abs() < 1e-13);
        }
        assert!(manufactured_solution(&m, 0.0, -0.1).is_err());
    }

    #[test]
    fn manufactured_convergence_is_second_order() {
        let m = modes();
        let l = 2.0 * std::f64::consts::PI;
        let mut errors = Vec::new();
        for (ndx, dt) in [(64usize, 2e-3), (128, 1e-3)] {
            let dx = l / ndx as f64;
            let y0: Vec<f64> = (0..=ndx)
                .map(|i| manufactured_solution(&m, 0.0, (i as f64 * dx).min(l)).unwrap())
                .collect();
            let mc = m.clone();
            let mc2 = m.clone();
            let mc3 = m.clone();
            let bc = BoundarySpec {
                left: Box::new(move |t| manufactured_solution(&mc, t, 0.0).unwrap()),
                right: Box::new(move |t| manufactured_solution(&mc2, t, l).unwrap()),
                third_kind: RightThirdKind::Neumann,
                third: Box::new(move |t| manufactured_solution_dx(&mc3, t, l, 1).unwrap()),
            };
            let cfg = SimConfig { length: l, duration: 0.25, dx, dt };
            let traj = simulate_linear_kdv(&cfg, &y0, &bc).unwrap();
            let last = traj.frames.last().unwrap();
            let mut err = 0.0f64;
            for (i, x) in traj.x_grid().iter().enumerate() {
                let exact = manufactured_solution(&m, 0.25, x.min(l)).unwrap();
                err = err.max((last[i] - exact).abs());
            }
            errors.push(err);
        }
        let order = (errors[0] / errors[1]).log2();
        assert!(order > 1.7 && order < 2.3, "order {order} from {errors:?}");
    }

    #[test]
    fn homogeneous_l2_norm_is_nonincreasing() {
        let p = solve_branch::<f64>(0).unwrap();
        let l = p.length;
        let n = 200usize;
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let coeffs: Vec<f64> = (1..=4).map(|_| rng.gen_range(-1.0..1.0)).collect();
        // modes vanishing at both ends with zero slope at x = L
        let y0: Vec<f64> = (0..=n)
            .map(|i| {
                let x = l * i as f64 / n as f64;
                coeffs
                    .iter()
                    .enumerate()
                    .map(|(k, c)| c * ((k + 1) as f64 * std::f64::consts::PI * x / l).sin() * (1.0 - x / l))
                    .sum::<f64>()
            })
            .collect();
        let cfg = SimConfig { length: l, duration: 1.0, dx: l / n as f64, dt: 1e-3 };
        let traj = simulate_linear_kdv(&cfg, &y0, &BoundarySpec::zero(RightThirdKind::Neumann)).unwrap();
        let norms: Vec<f64> = traj
            .frames
            .iter()
            .map(|f| (f.iter().map(|v| v * v).sum::<f64>() * traj.dx).sqrt())
            .collect();
        let budget = 1e-3 * norms[0] * traj.dt; // 0.1% per unit time
        for w in norms.windows(2) {
            assert!(w[1] - w[0] <= budget, "step increase {:e}", w[1] - w[0]);
        }
        assert!(*norms.last().unwrap() < norms[0]);
    }

    #[test]
    fn projection_is_conserved_for_a_smooth_control() {
        let p = solve_branch::<f64>(0).unwrap();
        let n = 200usize;
        let t_final = 0.5f64;
        let u = move |t: f64| (5.0 * t).sin() * t * t * (t_final - t) * (t_final - t);
        let cfg = SimConfig { length: p.length, duration: t_final, dx: p.length / n as f64, dt: 1e-3 };
        let y0 = vec![0.0f64; n + 1];
        let traj = simulate_linear_kdv(&cfg, &y0, &BoundarySpec::right_control(Box::new(u))).unwrap();
        let drift = projection_drift(&traj, &p).unwrap();
        assert!(drift < 1e-3, "drift {drift:e}");
    }

    #[test]
    fn projection_check_rejects_wrong_shapes() {
        let p = solve_branch::<f64>(0).unwrap();
        let n = 100usize;
        let cfg = SimConfig { length: p.length, duration: 0.05, dx: p.length / n as f64, dt: 1e-3 };
        let y0 = vec![0.0f64; n + 1];
        let traj =
            simulate_linear_kdv(&cfg, &y0, &BoundarySpec::zero(RightThirdKind::SecondDerivative)).unwrap();
        assert!(projection_drift(&traj, &p).is_err());

        let cfg2 = SimConfig { length: 3.0, duration: 0.05, dx: 3.0 / n as f64, dt: 1e-3 };
        let traj2 = simulate_linear_kdv(&cfg2, &y0, &BoundarySpec::zero(RightThirdKind::Neumann)).unwrap();
        assert!(projection_drift(&traj2, &p).is_err());
    }

    #[test]
    fn eigenmode_error_is_small_at_coarse_resolution() {
        let p = solve_branch::<f64>(0).unwrap();
        let rep = eigenmode_check(&p, 0.5, p.length / 100.0, 2e-3).unwrap();
        assert!(rep.rel_error < 0.01, "rel error {}", rep.rel_error);
        assert!(
            rep.max_left_slope < 1e-2 * rep.sup_phi_x,
            "left slope {} vs sup phi_x {}",
            rep.max_left_slope,
            rep.sup_phi_x
        );
    }

    #[test]
    fn f32_instantiation_runs() {
        let cfg = SimConfig { length: 1.0f32, duration: 0.01, dx: 0.1, dt: 1e-3 };
        let y0 = vec![0.0f32; 11];
        let traj = simulate_linear_kdv(&cfg, &y0, &BoundarySpec::zero(RightThirdKind::Neumann)).unwrap();
        assert_eq!(traj.sup_norm(), 0.0);
        let m = vec![(1, Complex::new(1.0f32, 0.0))];
        assert!(manufactured_solution(&m, 0.1f32, 1.0).unwrap().is_finite());
    }

    #[test]
    fn incompatible_initial_data_warns_but_runs() {
        let cfg = SimConfig { length: 1.0, duration: 0.01, dx: 0.05, dt: 1e-3 };
        let n = 20usize;
        let y0: Vec<f64> = (0..=n).map(|i| 1.0 + i as f64).collect();
        let traj = simulate_linear_kdv(&cfg, &y0, &BoundarySpec::zero(RightThirdKind::Neumann)).unwrap();
        assert!(traj.initial_mismatch[0] > 0.1);
        assert!(traj.initial_mismatch[1] > 0.1);
    }
}
