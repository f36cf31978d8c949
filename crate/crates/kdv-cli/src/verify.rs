//! The `verify` subcommand: run every analytic invariant for one branch and
//! report PASS/FAIL per check.

use kdv_critical::branch::CriticalLengthParams;
use kdv_critical::omega::{
    asymptotic_e, asymptotic_e_from_eta, check_detq_nonzero, omega_at, transfer_numerator,
    transfer_quantities,
};
use kdv_critical::profile::{eta_triplet, eval_complex_profile, eval_profile, verify_profile};
use kdv_critical::roots::{asymptotic_roots, solve_depressed_cubic};
use kdv_critical::num_complex::Complex;

use crate::config::Settings;

pub struct CheckLine {
    pub name: &'static str,
    pub pass: bool,
    pub detail: String,
}

fn check(name: &'static str, pass: bool, detail: String, out: &mut Vec<CheckLine>) {
    out.push(CheckLine { name, pass, detail });
}

pub fn run_verify(params: &CriticalLengthParams<f64>, settings: &Settings) -> Vec<CheckLine> {
    let mut out = Vec::new();

    // branch identities
    match params.validate() {
        Ok(()) => {
            let r = params.residuals();
            check(
                "branch identities",
                true,
                format!("phase residual {:.2e}, sign condition {:+.3}", r.phase, r.sign_condition),
                &mut out,
            );
        }
        Err(e) => check("branch identities", false, e.to_string(), &mut out),
    }

    // profile ODE + boundary conditions
    match verify_profile(params, 1e-9) {
        Ok(rep) => check(
            "profile residuals",
            rep.pass,
            format!(
                "ODE {:.2e}, boundary {:.2e} (tol 1e-9)",
                rep.max_ode_residual, rep.max_boundary_residual
            ),
            &mut out,
        ),
        Err(e) => check("profile residuals", false, e.to_string(), &mut out),
    }

    // complex profile is -2i times the real one
    let sup_phi = (0..=1000)
        .map(|i| {
            eval_profile(params, params.length * i as f64 / 1000.0, 0)
                .unwrap_or(0.0)
                .abs()
        })
        .fold(0.0f64, f64::max);
    let mut worst = 0.0f64;
    for i in 0..=100 {
        let x = params.length * i as f64 / 100.0;
        if let (Ok(v), Ok(p)) = (eval_complex_profile(params, x), eval_profile(params, x, 0)) {
            worst = worst.max((v + Complex::new(0.0, 2.0) * p).norm());
        }
    }
    check(
        "complex profile scale",
        worst < 1e-10 * sup_phi,
        format!("max |varphi + 2i phi| = {worst:.2e} (tol {:.1e})", 1e-10 * sup_phi),
        &mut out,
    );

    // eta triplet identities
    let eta = eta_triplet(params);
    let [e1, e2, e3] = eta.elementary_symmetrics();
    let spread = eta.boundary_value_spread(params.length);
    let eta_ok = e1.norm() < 1e-12
        && (e2 - Complex::new(1.0, 0.0)).norm() < 1e-12
        && (e3 + Complex::new(params.q, 0.0)).norm() < 1e-12
        && spread < 1e-10;
    check(
        "eta triplet",
        eta_ok,
        format!("symmetric residuals {:.1e}/{:.1e}/{:.1e}, boundary-value spread {spread:.1e}",
            e1.norm(), (e2 - Complex::new(1.0, 0.0)).norm(), (e3 + Complex::new(params.q, 0.0)).norm()),
        &mut out,
    );

    // cubic solver spot checks on the shifted line and off it
    let mut worst_vieta = 0.0f64;
    for k in 0..200 {
        let z = Complex::new(
            (k as f64 - 100.0) * 37.3,
            params.q / 2.0 + (k as f64) * 0.11,
        );
        worst_vieta = worst_vieta.max(solve_depressed_cubic(z).vieta_residual());
    }
    check(
        "cubic Vieta residuals",
        worst_vieta < 1e-12,
        format!("worst scaled residual {worst_vieta:.2e} over 200 frequencies"),
        &mut out,
    );

    // asymptotic roots: scaled error bounded
    let mut scaled = Vec::new();
    for z in [1e2, 1e4, 1e6, 1e8] {
        let approx = asymptotic_roots::<f64>(z).unwrap();
        let exact = solve_depressed_cubic(Complex::new(z, 0.0));
        let mut err = 0.0f64;
        for a in approx {
            err = err.max(
                exact
                    .lambdas
                    .iter()
                    .map(|l| (l - a).norm())
                    .fold(f64::INFINITY, f64::min),
            );
        }
        scaled.push(err * z.powf(2.0 / 3.0));
    }
    let bound = scaled.iter().fold(0.0f64, |m, &s| m.max(s));
    check(
        "asymptotic roots",
        bound < 5e-4,
        format!("max err*z^(2/3) = {bound:.2e} over z = 1e2..1e8"),
        &mut out,
    );

    // detQ never vanishes on the scan line
    match check_detq_nonzero(params, settings.z_max, 0.05) {
        Ok(scan) => check(
            "detQ scan",
            !scan.violation && scan.min_modulus > 0.0,
            format!("min |detQ| = {:.4} at z = {:+.2}", scan.min_modulus, scan.z_at_min),
            &mut out,
        ),
        Err(e) => check("detQ scan", false, e.to_string(), &mut out),
    }

    // transfer identities at a few frequencies
    let mut transfer_ok = true;
    let mut transfer_detail = String::new();
    for z in [0.0, 1.0, 25.0] {
        match transfer_quantities(Complex::new(z, params.q / 2.0), params.length) {
            Ok(tq) => {
                let r1 = (tq.h * tq.xi - tq.det_q).norm() / tq.det_q.norm();
                let r2 = (tq.d_denominator - tq.det_q).norm() / tq.det_q.norm();
                if r1 > 1e-10 || r2 > 1e-10 {
                    transfer_ok = false;
                }
                transfer_detail = format!("H*Xi vs detQ {r1:.1e}, D vs detQ {r2:.1e} (z = {z})");
            }
            Err(e) => {
                transfer_ok = false;
                transfer_detail = e.to_string();
            }
        }
    }
    check("transfer identities", transfer_ok, transfer_detail, &mut out);

    // numerator telescopes at x = 0
    let telescoped = transfer_numerator(
        Complex::new(0.0, params.q / 2.0),
        0.0,
        params.length,
    )
    .norm();
    check(
        "numerator telescoping",
        telescoped < 1e-12,
        format!("|numerator(x=0)| = {telescoped:.2e}"),
        &mut out,
    );

    // large-z coefficient: closed form vs eta route
    let e = asymptotic_e(params);
    let cross = asymptotic_e_from_eta(params);
    let dev = ((cross.re - e).abs() + cross.im.abs()) / e;
    check(
        "asymptotic coefficient",
        e > 0.0 && dev < 1e-10,
        format!("E = {e:.6}, eta-route deviation {dev:.2e}"),
        &mut out,
    );

    // quadrature health at the origin of the scan line
    match omega_at(0.0, params, settings.quad_tol) {
        Ok(s) => check(
            "omega quadrature",
            s.quad_error.is_finite()
                && s.quad_error >= 0.0
                && s.quad_error <= settings.quad_tol * s.omega_value.abs().max(1.0),
            format!("Omega(iq/2) = {:+.7} (error estimate {:.1e})", s.omega_value, s.quad_error),
            &mut out,
        ),
        Err(e) => check("omega quadrature", false, e.to_string(), &mut out),
    }

    out
}
