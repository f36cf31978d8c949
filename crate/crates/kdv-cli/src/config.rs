//! Effective tool configuration: compiled-in defaults, optionally overlaid
//! by a JSON config file (`--config` flag or `KDV_CONFIG` environment
//! variable), overlaid in turn by command-line flags (flags win).

use serde::Deserialize;

use crate::output::Json;

#[derive(Debug, Clone, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub root_tol: Option<f64>,
    pub quad_tol: Option<f64>,
    pub scan: Option<FileScan>,
    pub sim: Option<FileSim>,
}

#[derive(Debug, Clone, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct FileScan {
    #[serde(rename = "Z")]
    pub z_max: Option<f64>,
    pub step: Option<f64>,
    pub refine_tol: Option<f64>,
}

#[derive(Debug, Clone, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct FileSim {
    /// Grid intervals per interval length (default 400).
    pub intervals: Option<usize>,
    pub dt: Option<f64>,
}

/// Fully resolved settings used by a command run.
#[derive(Debug, Clone, Copy)]
pub struct Settings {
    pub root_tol: f64,
    pub quad_tol: f64,
    pub z_max: f64,
    pub step: f64,
    pub refine_tol: f64,
    pub sim_intervals: usize,
    pub sim_dt: f64,
}

impl Default for Settings {
    fn default() -> Self {
        Settings {
            root_tol: 1e-13,
            quad_tol: 1e-10,
            z_max: 200.0,
            step: 0.1,
            refine_tol: 1e-8,
            sim_intervals: 400,
            sim_dt: 1e-4,
        }
    }
}

impl Settings {
    pub fn apply_file(&mut self, f: &FileConfig) {
        if let Some(v) = f.root_tol {
            self.root_tol = v;
        }
        if let Some(v) = f.quad_tol {
            self.quad_tol = v;
        }
        if let Some(scan) = &f.scan {
            if let Some(v) = scan.z_max {
                self.z_max = v;
            }
            if let Some(v) = scan.step {
                self.step = v;
            }
            if let Some(v) = scan.refine_tol {
                self.refine_tol = v;
            }
        }
        if let Some(sim) = &f.sim {
            if let Some(v) = sim.intervals {
                self.sim_intervals = v;
            }
            if let Some(v) = sim.dt {
                self.sim_dt = v;
            }
        }
    }

    pub fn validate(&self) -> Result<(), String> {
        for (name, v) in [
            ("root_tol", self.root_tol),
            ("quad_tol", self.quad_tol),
            ("scan.Z", self.z_max),
            ("scan.step", self.step),
            ("scan.refine_tol", self.refine_tol),
            ("sim.dt", self.sim_dt),
        ] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(format!("{name} must be positive and finite, got {v}"));
            }
        }
        if self.sim_intervals < 6 {
            return Err(format!("sim.intervals must be at least 6, got {}", self.sim_intervals));
        }
        Ok(())
    }

    /// The `config_echo` object embedded in every JSON artifact.
    pub fn echo(&self) -> Json {
        Json::Obj(vec![
            ("root_tol", Json::Num(self.root_tol)),
            ("quad_tol", Json::Num(self.quad_tol)),
            (
                "scan",
                Json::Obj(vec![
                    ("Z", Json::Num(self.z_max)),
                    ("step", Json::Num(self.step)),
                    ("refine_tol", Json::Num(self.refine_tol)),
                ]),
            ),
            (
                "sim",
                Json::Obj(vec![
                    ("intervals", Json::Int(self.sim_intervals as i64)),
                    ("dt", Json::Num(self.sim_dt)),
                ]),
            ),
        ])
    }
}
