//! `kdv`: critical lengths of the boundary-controlled linearized KdV
//! equation, the unreachable direction, the controllability criterion, and a
//! validating simulator — emitted as deterministic CSV/JSON artifacts.

// `!(x > 0)` is the NaN-rejecting form of a positivity check
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod config;
mod output;
mod runspec;
mod verify;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use kdv_critical::branch::{is_critical, solve_branch_with_tol, CriticalLengthParams};
use kdv_critical::error::Error as KdvError;
use kdv_critical::omega::{minimize_omega, scan_omega, ScanConfig};
use kdv_critical::profile::eval_profile;

use config::{FileConfig, Settings};
use output::{fmt_f64_9, Json};

#[derive(Debug)]
pub enum CliError {
    /// Unusable input: exits with status 2.
    Config(String),
    /// A numerical routine failed: exits with status 1.
    Numerical(KdvError),
}

impl From<KdvError> for CliError {
    fn from(e: KdvError) -> Self {
        CliError::Numerical(e)
    }
}

fn error_name(e: &KdvError) -> &'static str {
    match e {
        KdvError::InvalidArgument(_) => "InvalidArgument",
        KdvError::ConvergenceFailure { .. } => "ConvergenceFailure",
        KdvError::QuadratureFailure { .. } => "QuadratureFailure",
        KdvError::DegenerateRoots { .. } => "DegenerateRoots",
        KdvError::DegenerateDenominator { .. } => "DegenerateDenominator",
        KdvError::SingularMatrix => "SingularMatrix",
        KdvError::SingularStep { .. } => "SingularStep",
        KdvError::Instability { .. } => "Instability",
        KdvError::GridMismatch(_) => "GridMismatch",
    }
}

#[derive(Parser)]
#[command(
    name = "kdv",
    version,
    about = "Critical lengths and the controllability criterion of the boundary-controlled linearized KdV equation"
)]
struct Cli {
    /// JSON config file with default tolerances (flags win). Falls back to
    /// the KDV_CONFIG environment variable.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Write the artifact here instead of standard output.
    #[arg(long, short, global = true)]
    output: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct BranchSelect {
    /// Branch index of the critical length.
    #[arg(long, conflicts_with = "length")]
    n: Option<usize>,

    /// Explicit interval length; must match a critical length to 1e-6.
    #[arg(long = "L")]
    length: Option<f64>,
}

#[derive(Args, Clone)]
struct ScanArgs {
    /// Scan half-width: z runs over [-Z, Z].
    #[arg(long = "Z")]
    z_max: Option<f64>,

    /// Coarse scan step.
    #[arg(long)]
    step: Option<f64>,

    /// Golden-section refinement tolerance in z.
    #[arg(long)]
    refine_tol: Option<f64>,

    /// Quadrature tolerance for each Omega evaluation.
    #[arg(long)]
    quad_tol: Option<f64>,
}

#[derive(Subcommand)]
enum Command {
    /// Table of the first critical lengths: (n, a, b, L, q).
    Lengths {
        /// Largest branch index to include.
        #[arg(long)]
        max_n: usize,
        /// csv (default) or json.
        #[arg(long, default_value = "csv")]
        format: String,
    },
    /// Parameters of one critical length as JSON.
    Params {
        #[command(flatten)]
        select: BranchSelect,
    },
    /// CSV scan of Omega(z + iq/2) over the symmetric grid.
    OmegaScan {
        #[command(flatten)]
        select: BranchSelect,
        #[command(flatten)]
        scan: ScanArgs,
    },
    /// Minimize Omega over the shifted line and classify.
    OmegaMin {
        #[command(flatten)]
        select: BranchSelect,
        #[command(flatten)]
        scan: ScanArgs,
    },
    /// Alias of omega-min: classification by the sign of the minimum.
    Classify {
        #[command(flatten)]
        select: BranchSelect,
        #[command(flatten)]
        scan: ScanArgs,
    },
    /// CSV profile of the unreachable direction and its derivatives.
    Phi {
        #[command(flatten)]
        select: BranchSelect,
        /// Number of equally spaced samples on [0, L].
        #[arg(long, default_value_t = 401)]
        samples: usize,
    },
    /// Run the simulator from a JSON run spec.
    Simulate {
        /// Path to the run spec (see README for the schema).
        #[arg(long)]
        spec: PathBuf,
    },
    /// Run every analytic invariant for one branch; nonzero exit on failure.
    Verify {
        #[command(flatten)]
        select: BranchSelect,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => code,
        Err(CliError::Config(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Numerical(e)) => {
            eprintln!("error: {}: {e}", error_name(&e));
            ExitCode::from(1)
        }
    }
}

fn load_settings(cli: &Cli) -> Result<Settings, CliError> {
    let mut settings = Settings::default();
    let path = cli
        .config
        .clone()
        .or_else(|| std::env::var_os("KDV_CONFIG").map(PathBuf::from));
    if let Some(path) = path {
        let text = fs::read_to_string(&path)
            .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
        let file: FileConfig = serde_json::from_str(&text)
            .map_err(|e| CliError::Config(format!("bad config {}: {e}", path.display())))?;
        settings.apply_file(&file);
    }
    settings.validate().map_err(CliError::Config)?;
    Ok(settings)
}

fn resolve_branch(select: &BranchSelect, settings: &Settings) -> Result<CriticalLengthParams<f64>, CliError> {
    let n = match (select.n, select.length) {
        (Some(n), None) => n,
        (None, Some(l)) => is_critical(l, 1e-6).ok_or_else(|| {
            CliError::Config(format!(
                "L = {l} is not a critical length (no branch within 1e-6); run `kdv lengths` to list them"
            ))
        })?,
        _ => return Err(CliError::Config("give exactly one of --n or --L".into())),
    };
    solve(n, settings)
}

fn solve(n: usize, settings: &Settings) -> Result<CriticalLengthParams<f64>, CliError> {
    solve_branch_with_tol(n, settings.root_tol).map_err(CliError::Numerical)
}

fn scan_config(scan: &ScanArgs, settings: &Settings) -> ScanConfig<f64> {
    ScanConfig {
        half_width: scan.z_max.unwrap_or(settings.z_max),
        coarse_step: scan.step.unwrap_or(settings.step),
        refine_tol: scan.refine_tol.unwrap_or(settings.refine_tol),
        quad_tol: scan.quad_tol.unwrap_or(settings.quad_tol),
        max_intervals: 4000,
    }
}

fn emit(cli: &Cli, artifact: &[u8]) -> Result<ExitCode, CliError> {
    match &cli.output {
        Some(path) => runspec::write_artifact(path, artifact)?,
        None => {
            use std::io::Write as _;
            std::io::stdout()
                .write_all(artifact)
                .map_err(|e| CliError::Config(format!("cannot write to stdout: {e}")))?;
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn branch_fields(p: &CriticalLengthParams<f64>) -> Vec<(&'static str, Json)> {
    vec![
        ("n", Json::Int(p.n as i64)),
        ("L", Json::Num(p.length)),
        ("a", Json::Num(p.a)),
        ("b", Json::Num(p.b)),
        ("q", Json::Num(p.q)),
        ("alpha", Json::Num(p.alpha)),
        ("beta", Json::Num(p.beta)),
    ]
}

fn artifact_header(settings: &Settings) -> Vec<(&'static str, Json)> {
    vec![
        ("tool_version", Json::Str(env!("CARGO_PKG_VERSION").into())),
        ("config_echo", settings.echo()),
    ]
}

fn run(cli: &Cli) -> Result<ExitCode, CliError> {
    let settings = load_settings(cli)?;
    match &cli.command {
        Command::Lengths { max_n, format } => {
            let rows: Vec<CriticalLengthParams<f64>> = (0..=*max_n)
                .map(|n| solve(n, &settings))
                .collect::<Result<_, _>>()?;
            match format.as_str() {
                "csv" => {
                    let mut out = String::from("n,a,b,L,q\n");
                    for p in &rows {
                        out.push_str(&format!(
                            "{},{},{},{},{}\n",
                            p.n,
                            fmt_f64_9(p.a),
                            fmt_f64_9(p.b),
                            fmt_f64_9(p.length),
                            fmt_f64_9(p.q)
                        ));
                    }
                    emit(cli, out.as_bytes())
                }
                "json" => {
                    let mut fields = artifact_header(&settings);
                    fields.push((
                        "rows",
                        Json::Arr(rows.iter().map(|p| Json::Obj(branch_fields(p))).collect()),
                    ));
                    emit(cli, Json::Obj(fields).render().as_bytes())
                }
                other => Err(CliError::Config(format!(
                    "unknown format {other:?} (expected csv or json)"
                ))),
            }
        }

        Command::Params { select } => {
            let p = resolve_branch(select, &settings)?;
            let mut fields = artifact_header(&settings);
            fields.extend(branch_fields(&p));
            emit(cli, Json::Obj(fields).render().as_bytes())
        }

        Command::OmegaScan { select, scan } => {
            let p = resolve_branch(select, &settings)?;
            let config = scan_config(scan, &settings);
            let samples = scan_omega(&p, &config).map_err(CliError::Numerical)?;
            let mut out = String::from("z,omega_value,quad_error\n");
            for s in &samples {
                out.push_str(&format!(
                    "{},{},{}\n",
                    fmt_f64_9(s.z),
                    fmt_f64_9(s.omega_value),
                    fmt_f64_9(s.quad_error)
                ));
            }
            emit(cli, out.as_bytes())
        }

        Command::OmegaMin { select, scan } | Command::Classify { select, scan } => {
            let p = resolve_branch(select, &settings)?;
            let config = scan_config(scan, &settings);
            let r = minimize_omega(&p, &config).map_err(CliError::Numerical)?;
            let mut fields = artifact_header(&settings);
            fields.extend(vec![
                ("n", Json::Int(p.n as i64)),
                ("L", Json::Num(p.length)),
                ("a", Json::Num(p.a)),
                ("b", Json::Num(p.b)),
                ("q", Json::Num(p.q)),
                ("omega", Json::Num(r.omega)),
                ("z_star", Json::Num(r.z_star)),
                ("classification", Json::Str(r.classification.as_str().into())),
                (
                    "scan",
                    Json::Obj(vec![
                        ("Z", Json::Num(r.scan_half_width)),
                        ("step", Json::Num(r.grid_step)),
                    ]),
                ),
                ("boundary_warning", Json::Bool(r.boundary_warning)),
            ]);
            emit(cli, Json::Obj(fields).render().as_bytes())
        }

        Command::Phi { select, samples } => {
            if *samples < 2 {
                return Err(CliError::Config("need at least 2 samples".into()));
            }
            let p = resolve_branch(select, &settings)?;
            let mut out = String::from("x,phi,phi_x,phi_xx,phi_xxx\n");
            for i in 0..*samples {
                let x = (p.length * i as f64 / (*samples - 1) as f64).min(p.length);
                let mut row = vec![fmt_f64_9(x)];
                for order in 0..=3 {
                    row.push(fmt_f64_9(
                        eval_profile(&p, x, order).map_err(CliError::Numerical)?,
                    ));
                }
                out.push_str(&row.join(","));
                out.push('\n');
            }
            emit(cli, out.as_bytes())
        }

        Command::Simulate { spec } => {
            let text = fs::read_to_string(spec)
                .map_err(|e| CliError::Config(format!("cannot read {}: {e}", spec.display())))?;
            let parsed: runspec::RunSpec = serde_json::from_str(&text)
                .map_err(|e| CliError::Config(format!("bad run spec {}: {e}", spec.display())))?;
            let base = spec.parent().unwrap_or(Path::new(".")).to_path_buf();
            let prepared = runspec::prepare(&parsed, &settings, &base)?;
            let traj = runspec::run(&prepared)?;

            let (path, format) = match (&cli.output, &prepared.output) {
                (Some(p), spec_out) => (
                    p.clone(),
                    spec_out.as_ref().map(|(_, f)| f.clone()).unwrap_or_else(|| "csv".into()),
                ),
                (None, Some((p, f))) => (base.join(p), f.clone()),
                (None, None) => {
                    let out = runspec::trajectory_csv(&traj);
                    return emit(cli, out.as_bytes());
                }
            };
            let bytes = match format.as_str() {
                "csv" => runspec::trajectory_csv(&traj).into_bytes(),
                "binary" => runspec::trajectory_binary(&traj),
                other => {
                    return Err(CliError::Config(format!(
                        "unknown trajectory format {other:?} (expected csv or binary)"
                    )))
                }
            };
            runspec::write_artifact(&path, &bytes)?;
            Ok(ExitCode::SUCCESS)
        }

        Command::Verify { select } => {
            let p = resolve_branch(select, &settings)?;
            let checks = verify::run_verify(&p, &settings);
            let mut out = String::new();
            let mut all_pass = true;
            for c in &checks {
                all_pass &= c.pass;
                out.push_str(&format!(
                    "{:<24} {}  {}\n",
                    c.name,
                    if c.pass { "PASS" } else { "FAIL" },
                    c.detail
                ));
            }
            out.push_str(&format!(
                "verify n={}: {}\n",
                p.n,
                if all_pass { "all checks passed" } else { "FAILURES PRESENT" }
            ));
            emit(cli, out.as_bytes())?;
            Ok(if all_pass { ExitCode::SUCCESS } else { ExitCode::from(1) })
        }
    }
}
