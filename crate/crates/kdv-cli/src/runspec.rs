//! The `simulate` run specification (JSON) and trajectory artifact writers.

use std::fs;
use std::io::Write as _;
use std::path::Path;

use kdv_critical::branch::{is_critical, solve_branch};
use kdv_critical::profile::eval_profile;
use kdv_critical::sim::{
    simulate_linear_kdv, BoundarySpec, RightThirdKind, SimConfig, TimeFn, Trajectory,
};
use serde::Deserialize;

use crate::config::Settings;
use crate::output::fmt_f64_9;
use crate::CliError;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSpec {
    pub n: Option<usize>,
    #[serde(rename = "L")]
    pub length: Option<f64>,
    #[serde(rename = "T")]
    pub duration: f64,
    pub dx: Option<f64>,
    pub dt: Option<f64>,
    pub y0: Option<Y0Spec>,
    pub bc: Option<BcSpec>,
    /// Shorthand for `bc.right`: the Dirichlet control at `x = L`.
    pub control: Option<TimeFnSpec>,
    pub output: Option<OutputSpec>,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
pub enum Y0Spec {
    Named(String),
    Samples(Vec<f64>),
}

#[derive(Debug, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct BcSpec {
    pub left: Option<TimeFnSpec>,
    pub right: Option<TimeFnSpec>,
    pub third_kind: Option<String>,
    pub third: Option<TimeFnSpec>,
}

/// A scalar function of time: `"zero"`, an expression in `t`, an explicit
/// `{"expr": ...}`, or a two-column CSV `{"csv": path}` (linear
/// interpolation, clamped outside the tabulated range).
#[derive(Debug, Deserialize)]
#[serde(untagged)]
pub enum TimeFnSpec {
    Expression(String),
    Tagged(TaggedTimeFn),
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TaggedTimeFn {
    pub expr: Option<String>,
    pub csv: Option<String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    pub path: String,
    pub format: Option<String>,
}

fn compile_expr(text: &str) -> Result<TimeFn<f64>, CliError> {
    let expr: meval::Expr = text
        .parse()
        .map_err(|e| CliError::Config(format!("bad expression {text:?}: {e}")))?;
    let f = expr
        .bind("t")
        .map_err(|e| CliError::Config(format!("expression {text:?} must be a function of t: {e}")))?;
    Ok(Box::new(f))
}

fn load_csv_series(path: &Path) -> Result<TimeFn<f64>, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    let mut points: Vec<(f64, f64)> = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let mut cols = line.split(',').map(str::trim);
        let (a, b) = (cols.next().unwrap_or(""), cols.next().unwrap_or(""));
        match (a.parse::<f64>(), b.parse::<f64>()) {
            (Ok(t), Ok(v)) => points.push((t, v)),
            _ if lineno == 0 => continue, // header row
            _ => {
                return Err(CliError::Config(format!(
                    "{}:{}: expected 't,value'",
                    path.display(),
                    lineno + 1
                )))
            }
        }
    }
    if points.len() < 2 {
        return Err(CliError::Config(format!(
            "{}: need at least two samples",
            path.display()
        )));
    }
    points.sort_by(|x, y| x.0.partial_cmp(&y.0).unwrap());
    Ok(Box::new(move |t: f64| {
        let last = points.len() - 1;
        if t <= points[0].0 {
            return points[0].1;
        }
        if t >= points[last].0 {
            return points[last].1;
        }
        let k = points.partition_point(|p| p.0 <= t) - 1;
        let (t0, v0) = points[k];
        let (t1, v1) = points[k + 1];
        v0 + (v1 - v0) * (t - t0) / (t1 - t0)
    }))
}

fn compile_time_fn(spec: &TimeFnSpec, base: &Path) -> Result<TimeFn<f64>, CliError> {
    match spec {
        TimeFnSpec::Expression(s) if s == "zero" => Ok(Box::new(|_| 0.0)),
        TimeFnSpec::Expression(s) => compile_expr(s),
        TimeFnSpec::Tagged(tag) => match (&tag.expr, &tag.csv) {
            (Some(e), None) => compile_expr(e),
            (None, Some(p)) => load_csv_series(&base.join(p)),
            _ => Err(CliError::Config(
                "time function needs exactly one of {expr, csv}".into(),
            )),
        },
    }
}

pub struct PreparedRun {
    pub config: SimConfig<f64>,
    pub y0: Vec<f64>,
    pub bc: BoundarySpec<f64>,
    pub output: Option<(String, String)>,
}

pub fn prepare(spec: &RunSpec, settings: &Settings, base: &Path) -> Result<PreparedRun, CliError> {
    let params = match (spec.n, spec.length) {
        (Some(n), None) => Some(
            solve_branch::<f64>(n).map_err(CliError::Numerical)?,
        ),
        (None, Some(_)) => None,
        _ => {
            return Err(CliError::Config(
                "run spec needs exactly one of {n, L}".into(),
            ))
        }
    };
    let length = params.map(|p| p.length).or(spec.length).unwrap();
    if !(length > 0.0) || !(spec.duration > 0.0) {
        return Err(CliError::Config("L and T must be positive".into()));
    }

    let dx = spec.dx.unwrap_or(length / settings.sim_intervals as f64);
    let dt = spec.dt.unwrap_or(settings.sim_dt);
    let n_pts = (length / dx).round() as usize + 1;

    let y0 = match &spec.y0 {
        None => vec![0.0; n_pts],
        Some(Y0Spec::Named(name)) if name == "zero" => vec![0.0; n_pts],
        Some(Y0Spec::Named(name)) if name == "phi" => {
            let p = match params {
                Some(p) => p,
                None => {
                    let n = is_critical(length, 1e-6).ok_or_else(|| {
                        CliError::Config(format!(
                            "y0 = \"phi\" needs a critical length; L = {length} is not \
                             within 1e-6 of any (use `lengths` to list them)"
                        ))
                    })?;
                    solve_branch::<f64>(n).map_err(CliError::Numerical)?
                }
            };
            (0..n_pts)
                .map(|i| {
                    let x = (length * i as f64 / (n_pts - 1) as f64).min(p.length);
                    eval_profile(&p, x, 0).map_err(CliError::Numerical)
                })
                .collect::<Result<_, _>>()?
        }
        Some(Y0Spec::Named(other)) => {
            return Err(CliError::Config(format!(
                "unknown y0 {other:?} (expected \"phi\", \"zero\" or an array of samples)"
            )))
        }
        Some(Y0Spec::Samples(v)) => v.clone(),
    };

    let bc_spec = spec.bc.as_ref();
    let third_kind = match bc_spec.and_then(|b| b.third_kind.as_deref()) {
        None | Some("neumann") => RightThirdKind::Neumann,
        Some("second_derivative") => RightThirdKind::SecondDerivative,
        Some(other) => {
            return Err(CliError::Config(format!(
                "unknown third_kind {other:?} (expected \"neumann\" or \"second_derivative\")"
            )))
        }
    };
    let zero_fn = || -> TimeFn<f64> { Box::new(|_| 0.0) };
    let left = match bc_spec.and_then(|b| b.left.as_ref()) {
        Some(s) => compile_time_fn(s, base)?,
        None => zero_fn(),
    };
    if spec.control.is_some() && bc_spec.and_then(|b| b.right.as_ref()).is_some() {
        return Err(CliError::Config("give either control or bc.right, not both".into()));
    }
    let right = match spec.control.as_ref().or(bc_spec.and_then(|b| b.right.as_ref())) {
        Some(s) => compile_time_fn(s, base)?,
        None => zero_fn(),
    };
    let third = match bc_spec.and_then(|b| b.third.as_ref()) {
        Some(s) => compile_time_fn(s, base)?,
        None => zero_fn(),
    };

    Ok(PreparedRun {
        config: SimConfig { length, duration: spec.duration, dx, dt },
        y0,
        bc: BoundarySpec { left, right, third_kind, third },
        output: spec
            .output
            .as_ref()
            .map(|o| (o.path.clone(), o.format.clone().unwrap_or_else(|| "csv".into()))),
    })
}

pub fn run(prepared: &PreparedRun) -> Result<Trajectory<f64>, CliError> {
    simulate_linear_kdv(&prepared.config, &prepared.y0, &prepared.bc).map_err(CliError::Numerical)
}

/// CSV trajectory: header `t,x,y`, frame-major.
pub fn trajectory_csv(traj: &Trajectory<f64>) -> String {
    let xs = traj.x_grid();
    let mut out = String::from("t,x,y\n");
    for (k, frame) in traj.frames.iter().enumerate() {
        let t = traj.time(k);
        for (x, y) in xs.iter().zip(frame) {
            out.push_str(&fmt_f64_9(t));
            out.push(',');
            out.push_str(&fmt_f64_9(*x));
            out.push(',');
            out.push_str(&fmt_f64_9(*y));
            out.push('\n');
        }
    }
    out
}

/// Binary trajectory layout (all little-endian):
///
/// ```text
/// offset 0:  magic "KDV1" (4 bytes)
/// offset 4:  nx  (u32)  grid points per frame
/// offset 8:  nt  (u32)  frame count
/// offset 12: L   (f64)
/// offset 20: T   (f64)
/// offset 28: nt * nx f64 samples, frame-major (time outer, space inner)
/// ```
pub fn trajectory_binary(traj: &Trajectory<f64>) -> Vec<u8> {
    let nx = traj.grid_points() as u32;
    let nt = traj.frames.len() as u32;
    let mut out = Vec::with_capacity(28 + traj.frames.len() * traj.grid_points() * 8);
    out.extend_from_slice(b"KDV1");
    out.extend_from_slice(&nx.to_le_bytes());
    out.extend_from_slice(&nt.to_le_bytes());
    out.extend_from_slice(&traj.length.to_le_bytes());
    out.extend_from_slice(&traj.duration.to_le_bytes());
    for frame in &traj.frames {
        for v in frame {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    debug_assert_eq!(out.len(), 28 + (nt as usize) * (nx as usize) * 8);
    out
}

pub fn write_artifact(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let mut f = fs::File::create(path)
        .map_err(|e| CliError::Config(format!("cannot create {}: {e}", path.display())))?;
    f.write_all(bytes)
        .map_err(|e| CliError::Config(format!("cannot write {}: {e}", path.display())))
}
