//! Layered configuration: built-in defaults, then a preset, then a JSON
//! file, then command-line flags.

use std::path::{Path, PathBuf};

use entroprec::channels::Dynamics;
use entroprec::experiments::{Axis, TwoIonConfig};
use entroprec::reconstruct::{GridChoice, Method};
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

/// `fixed` is `[0, N]`; `scaled` is `[−κ/σ_max, κ/σ_max]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum GridKind {
    Fixed,
    Scaled,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "lowercase")]
pub enum Command {
    Simulate,
    Reconstruct,
    Verify,
    Sweep { axis: Axis, points: Vec<f64> },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Simulate => "simulate",
            Command::Reconstruct => "reconstruct",
            Command::Verify => "verify",
            Command::Sweep { .. } => "sweep",
        }
    }
}

/// Which command was requested, before sweep settings are resolved.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CommandKind {
    Simulate,
    Reconstruct,
    Verify,
    Sweep,
}

/// Every key accepted in a config file or on the command line.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Overrides {
    pub preset: Option<String>,
    pub phi: Option<f64>,
    pub gamma: Option<f64>,
    pub tau: Option<f64>,
    #[serde(rename = "N")]
    pub n: Option<usize>,
    pub dynamics: Option<Dynamics>,
    pub method: Option<Method>,
    pub dt: Option<f64>,
    pub rho0: Option<[f64; 4]>,
    pub grid: Option<GridKind>,
    pub kappa: Option<f64>,
    pub axis: Option<Axis>,
    pub points: Option<Vec<f64>>,
    pub out: Option<PathBuf>,
    pub format: Option<Format>,
}

impl Overrides {
    /// Fields set in `top` win.
    fn layered(self, top: Overrides) -> Overrides {
        Overrides {
            preset: top.preset.or(self.preset),
            phi: top.phi.or(self.phi),
            gamma: top.gamma.or(self.gamma),
            tau: top.tau.or(self.tau),
            n: top.n.or(self.n),
            dynamics: top.dynamics.or(self.dynamics),
            method: top.method.or(self.method),
            dt: top.dt.or(self.dt),
            rho0: top.rho0.or(self.rho0),
            grid: top.grid.or(self.grid),
            kappa: top.kappa.or(self.kappa),
            axis: top.axis.or(self.axis),
            points: top.points.or(self.points),
            out: top.out.or(self.out),
            format: top.format.or(self.format),
        }
    }
}

/// Fully resolved run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub command: Command,
    pub preset: Option<String>,
    pub config: TwoIonConfig,
    pub output_dir: PathBuf,
    pub format: Format,
}

impl RunConfig {
    /// The effective configuration as written at the top of every report.
    pub fn header(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("config serializes")
    }
}

fn read_file(path: &Path) -> Result<Overrides, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Config {
        key: path.display().to_string(),
        reason: e.to_string(),
    })?;
    serde_json::from_str(&text).map_err(|e| CliError::Config {
        key: path.display().to_string(),
        reason: e.to_string(),
    })
}

fn range_error(e: entroprec::Error) -> CliError {
    match e {
        entroprec::Error::InvalidParameter { name, reason } => CliError::Config {
            key: name.to_string(),
            reason,
        },
        other => CliError::Core(other),
    }
}

pub fn parse_config(kind: CommandKind, flags: Overrides, file: Option<&Path>) -> Result<RunConfig, CliError> {
    let from_file = file.map(read_file).transpose()?.unwrap_or_default();
    let o = from_file.layered(flags);
    let mut cfg = match &o.preset {
        Some(p) => TwoIonConfig::preset(p).map_err(range_error)?,
        None => TwoIonConfig::default(),
    };
    if let Some(v) = o.phi {
        cfg.phi = v;
    }
    if let Some(v) = o.gamma {
        cfg.gamma = v;
    }
    if let Some(v) = o.tau {
        cfg.tau = v;
    }
    if let Some(v) = o.n {
        cfg.n = v;
    }
    if let Some(v) = o.dynamics {
        cfg.dynamics = v;
    }
    if let Some(v) = o.method {
        cfg.method = v;
    }
    if o.dt.is_some() {
        cfg.dt = o.dt;
    }
    if let Some(v) = o.rho0 {
        cfg.rho0 = v;
    }
    match (o.grid, o.kappa) {
        (Some(GridKind::Fixed), Some(_)) => {
            return Err(CliError::Config {
                key: "kappa".into(),
                reason: "only applies to the scaled grid".into(),
            })
        }
        (Some(GridKind::Fixed), None) => cfg.grid = GridChoice::Fixed,
        (_, Some(kappa)) => cfg.grid = GridChoice::SupportScaled { kappa },
        (Some(GridKind::Scaled), None) => cfg.grid = GridChoice::default(),
        (None, None) => {}
    }
    if let GridChoice::SupportScaled { kappa } = cfg.grid {
        if !(kappa > 0.0) {
            return Err(CliError::Config {
                key: "kappa".into(),
                reason: format!("must be > 0, got {kappa}"),
            });
        }
    }
    cfg.validate().map_err(range_error)?;
    entroprec::linalg::DensityMatrix::from_diagonal(&cfg.rho0).map_err(|e| CliError::Config {
        key: "rho0".into(),
        reason: e.to_string(),
    })?;

    let command = match kind {
        CommandKind::Simulate => Command::Simulate,
        CommandKind::Reconstruct => Command::Reconstruct,
        CommandKind::Verify => Command::Verify,
        CommandKind::Sweep => {
            let axis = o.axis.ok_or_else(|| CliError::Config {
                key: "axis".into(),
                reason: "sweep needs an axis (phi, gamma or N)".into(),
            })?;
            let points = o.points.unwrap_or_else(|| axis.default_points());
            if points.is_empty() {
                return Err(CliError::Config {
                    key: "points".into(),
                    reason: "no sweep points".into(),
                });
            }
            Command::Sweep { axis, points }
        }
    };
    Ok(RunConfig {
        command,
        preset: o.preset,
        config: cfg,
        output_dir: o.out.unwrap_or_else(|| PathBuf::from("out")),
        format: o.format.unwrap_or_default(),
    })
}
