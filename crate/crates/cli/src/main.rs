use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use entroprec::channels::Dynamics;
use entroprec::experiments::Axis;
use entroprec::reconstruct::Method;
use entroprec_cli::config::{CommandKind, GridKind};
use entroprec_cli::{execute, parse_config, Format, Overrides};

/// Entropy-production statistics and their reconstruction for the
/// two-trapped-ion protocol.
#[derive(Parser)]
#[command(name = "entroprec", version)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Enumerate distributions, run all checks and both reconstructions.
    Simulate(Common),
    /// Recover distributions from sampled moment-generating functions.
    Reconstruct(Common),
    /// Run the fluctuation-theorem and entropy checks only.
    Verify(Common),
    /// Sweep one parameter and write one row per point.
    Sweep {
        #[arg(long, value_parser = parse_axis)]
        axis: Option<Axis>,
        /// Comma-separated sweep points (defaults depend on the axis).
        #[arg(long, value_delimiter = ',')]
        points: Option<Vec<f64>>,
        #[command(flatten)]
        common: Common,
    },
}

fn parse_axis(s: &str) -> Result<Axis, String> {
    s.parse().map_err(|e: entroprec::Error| e.to_string())
}

fn parse_dynamics(s: &str) -> Result<Dynamics, String> {
    s.parse().map_err(|e: entroprec::Error| e.to_string())
}

fn parse_method(s: &str) -> Result<Method, String> {
    s.parse().map_err(|e: entroprec::Error| e.to_string())
}

#[derive(Args)]
struct Common {
    /// fig3, fig4, fig5, fig6, fig9 or fig10.
    #[arg(long)]
    preset: Option<String>,
    /// JSON file with any of the flag keys.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, allow_negative_numbers = true)]
    phi: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    gamma: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    tau: Option<f64>,
    #[arg(long = "N")]
    n: Option<usize>,
    #[arg(long, value_parser = parse_dynamics)]
    dynamics: Option<Dynamics>,
    /// fourier or pinv.
    #[arg(long, value_parser = parse_method)]
    method: Option<Method>,
    /// RK4 step for Lindblad dynamics.
    #[arg(long)]
    dt: Option<f64>,
    #[arg(long, value_enum)]
    grid: Option<GridKind>,
    #[arg(long, allow_negative_numbers = true)]
    kappa: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
}

impl Common {
    fn overrides(self, axis: Option<Axis>, points: Option<Vec<f64>>) -> (Overrides, Option<PathBuf>) {
        (
            Overrides {
                preset: self.preset,
                phi: self.phi,
                gamma: self.gamma,
                tau: self.tau,
                n: self.n,
                dynamics: self.dynamics,
                method: self.method,
                dt: self.dt,
                rho0: None,
                grid: self.grid,
                kappa: self.kappa,
                axis,
                points,
                out: self.out,
                format: self.format,
            },
            self.config,
        )
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (kind, (flags, file)) = match cli.command {
        Cmd::Simulate(c) => (CommandKind::Simulate, c.overrides(None, None)),
        Cmd::Reconstruct(c) => (CommandKind::Reconstruct, c.overrides(None, None)),
        Cmd::Verify(c) => (CommandKind::Verify, c.overrides(None, None)),
        Cmd::Sweep { axis, points, common } => (CommandKind::Sweep, common.overrides(axis, points)),
    };
    let rc = match parse_config(kind, flags, file.as_deref()) {
        Ok(rc) => rc,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    println!("{}", rc.header());
    match execute(&rc) {
        Ok(out) => {
            for f in &out.files {
                println!("wrote {}", f.display());
            }
            if out.pass {
                ExitCode::SUCCESS
            } else {
                eprintln!("{}", serde_json::json!({ "pass": false, "failures": out.failures }));
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
