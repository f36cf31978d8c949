//! Acceptance suite: one test per criterion, each printing a PASS/FAIL line
//! (run with `cargo test --test acceptance -- --nocapture` to see them all).

use std::time::Instant;

use kdv_critical::branch::{solve_branch, CriticalLengthParams};
use kdv_critical::omega::{
    asymptotic_e, asymptotic_e_from_eta, b_integral, check_detq_nonzero, minimize_omega, omega_at,
    Classification, ScanConfig,
};
use kdv_critical::profile::{eval_complex_profile, eval_profile, verify_profile};
use kdv_critical::roots::{asymptotic_roots, solve_depressed_cubic};
use kdv_critical::sim::{
    eigenmode_check, kdvb_modal_propagator, manufactured_solution, manufactured_solution_dx,
    projection_drift, simulate_linear_kdv, BoundarySpec, RightThirdKind, SimConfig,
};
use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Printed reference table (branch index, L, a, b, q).
const PRINTED_TABLE: [(f64, f64, f64, f64); 4] = [
    (4.5183604, -0.5065520, 4.6027563, 0.2354919),
    (10.866906, -0.6903700, 10.932497, 0.1291104),
    (17.177525, -0.7947960, 17.232599, 0.0933315),
    (23.476776, -0.8687610, 23.524949, 0.0744156),
];

/// Printed reference values of Omega(iq/2) for n = 0..3.
const PRINTED_OMEGA: [f64; 4] = [-0.0140641, -0.0061256, -0.0036196, -0.0024525];

fn branches() -> Vec<CriticalLengthParams<f64>> {
    (0..4).map(|n| solve_branch(n).unwrap()).collect()
}

#[test]
fn acceptance_01_golden_table() {
    let start = Instant::now();
    let ps = branches();
    let elapsed = start.elapsed().as_secs_f64();
    let tol = 5e-6;
    let mut worst: (f64, String) = (0.0, String::new());
    for (p, (l, a, b, q)) in ps.iter().zip(PRINTED_TABLE.iter()) {
        for (name, got, want) in [
            ("L", p.length, *l),
            ("a", p.a, *a),
            ("b", p.b, *b),
            ("q", p.q, *q),
        ] {
            let d = (got - want).abs();
            if d > worst.0 {
                worst = (d, format!("n={} {name}: computed {got:.9} vs printed {want:.9}", p.n));
            }
        }
    }
    let pass = worst.0 <= tol && elapsed < 5.0;
    println!(
        "acceptance 01 golden table: {} (worst |diff| = {:.2e} at {}; {:.2}s)",
        if pass { "PASS" } else { "FAIL" },
        worst.0,
        worst.1,
        elapsed
    );
    assert!(elapsed < 5.0, "runtime {elapsed:.2}s exceeds 5s");
    assert!(
        worst.0 <= tol,
        "golden-table deviation {:.3e} exceeds {tol:.0e} ({}): the printed reference \
         values come from a 1e-6 fixed-step scan in a, so their b and L entries carry \
         ~2e-5..8e-5 of scan truncation; the bisection root satisfies the branch \
         identities to 1e-13 (see criterion 4)",
        worst.0,
        worst.1
    );
}

#[test]
fn acceptance_02_golden_omega_values() {
    let start = Instant::now();
    let ps = branches();
    let mut lines = Vec::new();
    let mut worst = 0.0f64;
    for (p, want) in ps.iter().zip(PRINTED_OMEGA.iter()) {
        let s = omega_at(0.0, p, 1e-10).unwrap();
        let d = (s.omega_value - want).abs();
        worst = worst.max(d);
        lines.push(format!("n={}: Omega(iq/2) = {:+.7} vs printed {want:+.7}", p.n, s.omega_value));
    }
    let elapsed = start.elapsed().as_secs_f64();
    let pass = worst <= 1e-5 && elapsed < 10.0;
    println!(
        "acceptance 02 golden Omega values: {} ({}; {:.2}s)",
        if pass { "PASS" } else { "FAIL" },
        lines.join("; "),
        elapsed
    );
    assert!(elapsed < 10.0, "runtime {elapsed:.2}s exceeds 10s");
    assert!(
        worst <= 1e-5,
        "Omega(iq/2) deviates from the printed values by {worst:.3e} (> 1e-5). The \
         quadratic form as defined (numerator-only weight phi_x) evaluates to \
         +0.9768, +2.0860, +2.8276, +3.4053 for n = 0..3 (verified against two \
         independent extended-precision implementations, and consistent with the \
         E |z|^{{-1/3}} large-z law of criterion 7); the printed negative values are \
         not values of this functional"
    );
}

#[test]
fn acceptance_03_classification() {
    let ps = branches();
    let config = ScanConfig::<f64>::default(); // Z = 200, step = 0.1
    let mut lines = Vec::new();
    let mut all_negative = true;
    let mut bound_ok = true;
    for (p, golden) in ps.iter().zip(PRINTED_OMEGA.iter()) {
        let r = minimize_omega(p, &config).unwrap();
        all_negative &= r.omega < 0.0
            && r.classification == Classification::ExactControllableFiniteTime;
        bound_ok &= r.omega <= golden + 1e-5;
        lines.push(format!(
            "n={}: omega = {:+.7} at z* = {:+.4} -> {}",
            p.n, r.omega, r.z_star, r.classification
        ));
    }
    let pass = all_negative && bound_ok;
    println!(
        "acceptance 03 classification: {} ({})",
        if pass { "PASS" } else { "FAIL" },
        lines.join("; ")
    );
    assert!(
        pass,
        "expected omega < 0 ('locally exactly controllable in finite time') for all \
         of n = 0..3: the defined functional's scan minimum is positive for n = 0 \
         (+0.9768 at z* = 0) and n = 1 (+2.0860 at z* = 0), and dips negative only \
         for n = 2 (-0.4687 at z* = +-0.1898) and n = 3 (-2.3912 at z* = +-0.1420); \
         all four confirmed by independent extended-precision scans ({})",
        lines.join("; ")
    );
}

#[test]
fn acceptance_04_branch_residuals() {
    let mut worst_phase: f64 = 0.0;
    for n in 0..=20 {
        let p = solve_branch::<f64>(n).unwrap();
        p.validate().unwrap_or_else(|e| panic!("branch {n}: {e}"));
        let r = p.residuals();
        assert!(r.sign_condition > 0.0, "n={n}");
        assert!(r.bracket_ok, "n={n}");
        worst_phase = worst_phase.max(r.phase.abs() / (p.a.abs() + p.b.abs()));
    }
    println!(
        "acceptance 04 branch residuals: PASS (n = 0..20 all invariants; worst scaled phase residual {worst_phase:.2e})"
    );
}

#[test]
fn acceptance_05_cubic_solver() {
    // Vieta residuals on 10^4 random frequencies with |z| <= 1e6
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst = 0.0f64;
    for _ in 0..10_000 {
        let radius = 1e6 * rng.gen::<f64>().sqrt();
        let angle = rng.gen::<f64>() * std::f64::consts::TAU;
        let z = Complex::from_polar(radius, angle);
        let r = solve_depressed_cubic(z);
        worst = worst.max(r.vieta_residual());
    }
    let vieta_ok = worst < 1e-12;

    // asymptotic-root error scaled by z^{2/3}
    let mut scaled = Vec::new();
    for z in [1e2, 1e4, 1e6, 1e8] {
        let approx = asymptotic_roots::<f64>(z).unwrap();
        let exact = solve_depressed_cubic(Complex::new(z, 0.0));
        let mut err = 0.0f64;
        for a in approx {
            let d = exact
                .lambdas
                .iter()
                .map(|l| (l - a).norm())
                .fold(f64::INFINITY, f64::min);
            err = err.max(d);
        }
        scaled.push((z, err * z.powf(2.0 / 3.0)));
    }
    let bound = scaled.iter().map(|&(_, s)| s).fold(0.0, f64::max);
    let ratio = scaled.iter().map(|&(_, s)| s).fold(0.0, f64::max)
        / scaled.iter().map(|&(_, s)| s).fold(f64::INFINITY, f64::min);
    let bounded_ok = bound < 5e-4;
    let ratio_ok = ratio < 3.0;

    let pass = vieta_ok && bounded_ok && ratio_ok;
    println!(
        "acceptance 05 cubic solver: {} (worst Vieta {worst:.2e}; err*z^(2/3) = {:?}; spread {ratio:.1}x)",
        if pass { "PASS" } else { "FAIL" },
        scaled.iter().map(|&(z, s)| format!("{z:.0e}:{s:.2e}")).collect::<Vec<_>>()
    );
    assert!(vieta_ok, "worst Vieta residual {worst:.3e} >= 1e-12");
    assert!(bounded_ok, "err * z^(2/3) not bounded: {scaled:?}");
    assert!(
        ratio_ok,
        "err * z^(2/3) varies by {ratio:.1}x (> 3x) across z = 1e2..1e8: the two-term \
         expansion's first omitted term is -mu z^(-5/3)/81 (the z^(-2/3)-order \
         correction vanishes identically), so err * z^(2/3) decays like z^(-1)/81 \
         down to the f64 noise floor instead of staying within a 3x band; measured \
         {scaled:?}"
    );
}

#[test]
fn acceptance_06_profile_verification() {
    let ps = branches();
    let mut worst_ode = 0.0f64;
    let mut worst_bc = 0.0f64;
    for p in &ps {
        let rep = verify_profile(p, 1e-9).unwrap();
        assert!(rep.pass, "n={}: {rep:?}", p.n);
        worst_ode = worst_ode.max(rep.max_ode_residual);
        worst_bc = worst_bc.max(rep.max_boundary_residual);

        let sup = rep.sup_norms[0];
        for i in 0..=100 {
            let x = p.length * i as f64 / 100.0;
            let v = eval_complex_profile(p, x).unwrap();
            let phi = eval_profile(p, x, 0).unwrap();
            let d = (v + Complex::new(0.0, 2.0) * phi).norm();
            assert!(d < 1e-10 * sup, "n={} x={x}: |varphi + 2i phi| = {d:e}", p.n);
        }
    }
    println!(
        "acceptance 06 profile verification: PASS (worst ODE residual {worst_ode:.2e}, worst boundary residual {worst_bc:.2e}, varphi = -2i phi at 100 points)"
    );
}

#[test]
fn acceptance_07_asymptotic_coefficient() {
    let p = solve_branch::<f64>(0).unwrap();
    let e = asymptotic_e(&p);
    assert!(e > 0.0);
    let cross = asymptotic_e_from_eta(&p);
    let cross_dev = (cross.re - e).abs() / e + cross.im.abs() / e;
    assert!(cross_dev < 1e-10, "cross-formula deviation {cross_dev:.3e}");

    let mut lines = Vec::new();
    for (z, band) in [(1e4, 0.15), (1e5, 0.08)] {
        let b = b_integral(z, &p, 1e-10).unwrap();
        let scaled = z.powf(1.0 / 3.0) * b;
        let rel = (scaled - e).abs() / e;
        lines.push(format!("z={z:.0e}: |z|^(1/3) b = {scaled:.5} ({rel:.3} rel)"));
        assert!(rel < band, "z={z}: relative deviation {rel:.4} exceeds {band}");
    }
    println!(
        "acceptance 07 asymptotic coefficient: PASS (E = {e:.6} > 0, eta-route agrees to {cross_dev:.1e}; {})",
        lines.join("; ")
    );
}

#[test]
fn acceptance_08_detq_nonvanishing() {
    let ps = branches();
    let mut mins = Vec::new();
    for p in &ps {
        let scan = check_detq_nonzero(p, 200.0, 0.05).unwrap();
        assert!(!scan.violation, "n={}", p.n);
        assert!(scan.min_modulus > 0.0, "n={}", p.n);
        mins.push(format!("n={}: min |detQ| = {:.4} at z = {:.2}", p.n, scan.min_modulus, scan.z_at_min));
    }
    println!("acceptance 08 detQ non-vanishing: PASS ({})", mins.join("; "));
}

fn smooth_control(t_final: f64) -> impl Fn(f64) -> f64 + Send + Sync {
    move |t: f64| (5.0 * t).sin() * t * t * (t_final - t) * (t_final - t)
}

fn conservation_drift(p: &CriticalLengthParams<f64>, n_x: usize, dt: f64, phi_start: bool) -> f64 {
    let t_final = 1.0;
    let cfg = SimConfig { length: p.length, duration: t_final, dx: p.length / n_x as f64, dt };
    let y0: Vec<f64> = if phi_start {
        (0..=n_x)
            .map(|i| {
                let x = (p.length * i as f64 / n_x as f64).min(p.length);
                eval_profile(p, x, 0).unwrap()
            })
            .collect()
    } else {
        vec![0.0; n_x + 1]
    };
    let bc = if phi_start {
        BoundarySpec::zero(RightThirdKind::Neumann)
    } else {
        BoundarySpec::right_control(Box::new(smooth_control(t_final)))
    };
    let traj = simulate_linear_kdv(&cfg, &y0, &bc).unwrap();
    projection_drift(&traj, p).unwrap()
}

#[test]
fn acceptance_09_simulator_conservation() {
    let p = solve_branch::<f64>(0).unwrap();

    let t0 = Instant::now();
    let drift_phi = conservation_drift(&p, 400, 1e-4, true);
    let run1 = t0.elapsed().as_secs_f64();
    let t1 = Instant::now();
    let drift_u = conservation_drift(&p, 400, 1e-4, false);
    let run2 = t1.elapsed().as_secs_f64();

    // one (dx, dt) halving for the Richardson order on the smooth control
    let drift_u_fine = conservation_drift(&p, 800, 5e-5, false);
    let order_u = (drift_u / drift_u_fine).log2();
    // for reference only: the phi start is boundary-incompatible at t = 0
    // (phi_x(L) != 0), which caps its observable Richardson order
    let drift_phi_fine = conservation_drift(&p, 800, 5e-5, true);
    let order_phi = (drift_phi / drift_phi_fine).log2();

    let pass = drift_phi < 1e-3 && drift_u < 1e-3 && order_u >= 1.8 && run1 < 60.0 && run2 < 60.0;
    println!(
        "acceptance 09 simulator conservation: {} (drift[y0=phi] = {drift_phi:.2e}, drift[u=sin] = {drift_u:.2e}, refinement order {order_u:.2} (phi run: {order_phi:.2}), runtimes {run1:.1}s/{run2:.1}s)",
        if pass { "PASS" } else { "FAIL" }
    );
    assert!(run1 < 60.0 && run2 < 60.0, "runtime exceeded 60s per run");
    assert!(drift_phi < 1e-3, "phi-start drift {drift_phi:.3e}");
    assert!(drift_u < 1e-3, "control drift {drift_u:.3e}");
    assert!(order_u >= 1.8, "refinement order {order_u:.2} < 1.8");
}

#[test]
fn acceptance_10_eigen_growth() {
    let p = solve_branch::<f64>(0).unwrap();
    let rep = eigenmode_check(&p, 1.0, p.length / 400.0, 1e-4).unwrap();
    assert!(rep.rel_error < 0.02, "relative error {}", rep.rel_error);
    let rate_dev = (rep.growth_rate - p.q).abs() / p.q;
    assert!(rate_dev < 0.02, "growth rate {} vs q {}", rep.growth_rate, p.q);
    assert!(
        rep.max_left_slope < 1e-2 * rep.sup_phi_x,
        "left slope {} vs {}",
        rep.max_left_slope,
        rep.sup_phi_x
    );

    // observed order across a (dx, dt) halving
    let coarse = eigenmode_check(&p, 1.0, p.length / 100.0, 4e-4).unwrap();
    let fine = eigenmode_check(&p, 1.0, p.length / 200.0, 2e-4).unwrap();
    let order = (coarse.rel_error / fine.rel_error).log2();
    assert!((1.8..=2.2).contains(&order), "order {order:.2}");

    println!(
        "acceptance 10 eigen growth: PASS (rel error {:.2e} at default resolution, growth rate {:.6} vs q {:.6}, order {order:.2}, emergent y_x(.,0) bound {:.2e} of sup|phi_x|)",
        rep.rel_error,
        rep.growth_rate,
        p.q,
        rep.max_left_slope / rep.sup_phi_x
    );
}

#[test]
fn acceptance_11_manufactured_convergence() {
    let modes = vec![
        (1, Complex::new(0.7, 0.2)),
        (2, Complex::new(-0.3, 0.1)),
        (-1, Complex::new(0.15, -0.05)),
    ];
    // sanity anchors of the exact-solution machinery
    let single = kdvb_modal_propagator(&[(1, Complex::new(1.0, 0.0))], 0.3).unwrap();
    assert!((single[0].1.norm() - (-0.9f64).exp()).abs() < 1e-14);

    let l = 2.0 * std::f64::consts::PI;
    let t_final = 0.5;
    let mut errors = Vec::new();
    for (n_x, dt) in [(64usize, 2e-3), (128, 1e-3), (256, 5e-4)] {
        let dx = l / n_x as f64;
        let y0: Vec<f64> = (0..=n_x)
            .map(|i| manufactured_solution(&modes, 0.0, (i as f64 * dx).min(l)).unwrap())
            .collect();
        let (m1, m2, m3) = (modes.clone(), modes.clone(), modes.clone());
        let bc = BoundarySpec {
            left: Box::new(move |t| manufactured_solution(&m1, t, 0.0).unwrap()),
            right: Box::new(move |t| manufactured_solution(&m2, t, l).unwrap()),
            third_kind: RightThirdKind::Neumann,
            third: Box::new(move |t| manufactured_solution_dx(&m3, t, l, 1).unwrap()),
        };
        let cfg = SimConfig { length: l, duration: t_final, dx, dt };
        let traj = simulate_linear_kdv(&cfg, &y0, &bc).unwrap();
        let last = traj.frames.last().unwrap();
        let mut err = 0.0f64;
        for (i, x) in traj.x_grid().iter().enumerate() {
            err = err.max((last[i] - manufactured_solution(&modes, t_final, x.min(l)).unwrap()).abs());
        }
        errors.push(err);
    }
    let order01 = (errors[0] / errors[1]).log2();
    let order12 = (errors[1] / errors[2]).log2();
    let pass = (1.8..=2.2).contains(&order01) && (1.8..=2.2).contains(&order12);
    println!(
        "acceptance 11 manufactured solution: {} (sup errors {:.2e} / {:.2e} / {:.2e}, orders {order01:.2}, {order12:.2})",
        if pass { "PASS" } else { "FAIL" },
        errors[0],
        errors[1],
        errors[2]
    );
    assert!(pass, "orders {order01:.2}, {order12:.2} outside [1.8, 2.2]");
}
