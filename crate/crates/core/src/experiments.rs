//! The two-trapped-ion scenario: configurations, per-configuration records
//! and sweeps over φ, Γ and N.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::channels::{kraus_from_lindblad_endpoint, ms_gate, Dynamics, LindbladModel, QuantumChannel};
use crate::charfunc::{measurement_budget, moment_generating, MeasurementBudget};
use crate::distribution::{convolution, EntropyDistribution, Label};
use crate::error::{Error, Result};
use crate::linalg::{DensityMatrix, Observable};
use crate::parallel::{par_map, Execution};
use crate::protocol::{
    backward_distribution, backward_joint, backward_joint_symbolic, bipartite_distributions,
    correlation_witness, crooks_deviation, entropy_samples, integral_ft_residual, theorem2_check,
    BipartiteDistributions, CorrelationWitness, LocalObservables, Theorem2Report, TwoTimeProtocol,
};
use crate::reconstruct::{
    fourier_reconstruct, moments_via_newton, moments_via_vandermonde, pseudoinverse_reconstruct,
    GridChoice, Method, MomentVector, ParameterGrid, ReconstructionResult,
};

pub const DEFAULT_RHO0: [f64; 4] = [6.0 / 25.0, 9.0 / 25.0, 4.0 / 25.0, 6.0 / 25.0];
pub const PRESETS: [&str; 6] = ["fig3", "fig4", "fig5", "fig6", "fig9", "fig10"];
/// Moments reported per label.
pub const K_MAX: u32 = 4;

/// One configuration of the two-ion experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TwoIonConfig {
    /// Gate phase (rad); the coupling is `ω = φ/τ`.
    pub phi: f64,
    /// Dephasing rate `Γ = Γ_A = Γ_B` (rad/s). Ignored for unitary dynamics.
    pub gamma: f64,
    pub tau: f64,
    /// Diagonal of `ρ0` in the computational basis.
    pub rho0: [f64; 4],
    #[serde(rename = "N")]
    pub n: usize,
    pub dynamics: Dynamics,
    /// RK4 step; `τ/5000` when absent.
    pub dt: Option<f64>,
    pub method: Method,
    pub grid: GridChoice,
}

impl Default for TwoIonConfig {
    fn default() -> Self {
        Self {
            phi: PI / 7.0,
            gamma: 0.0,
            tau: 50.0,
            rho0: DEFAULT_RHO0,
            n: 10,
            dynamics: Dynamics::Unitary,
            dt: None,
            method: Method::Pseudoinverse,
            grid: GridChoice::default(),
        }
    }
}

impl TwoIonConfig {
    pub fn preset(name: &str) -> Result<Self> {
        let base = Self::default();
        let noisy = Self {
            gamma: 0.2,
            dynamics: Dynamics::Lindblad,
            ..base.clone()
        };
        Ok(match name {
            "fig3" | "fig6" => base,
            "fig4" => Self {
                phi: 5.0 * PI / 6.0,
                ..noisy
            },
            "fig5" => noisy,
            "fig9" | "fig10" => Self {
                method: Method::Fourier,
                ..noisy
            },
            other => {
                return Err(Error::InvalidParameter {
                    name: "preset",
                    reason: format!("unknown preset `{other}`; expected one of {}", PRESETS.join(", ")),
                })
            }
        })
    }

    pub fn dt(&self) -> f64 {
        self.dt.unwrap_or(self.tau / 5000.0)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |name, reason: String| Err(Error::InvalidParameter { name, reason });
        if !self.phi.is_finite() {
            return bad("phi", format!("must be finite, got {}", self.phi));
        }
        if !(self.gamma >= 0.0) || !self.gamma.is_finite() {
            return bad("gamma", format!("must be ≥ 0, got {}", self.gamma));
        }
        if !(self.tau > 0.0) || !self.tau.is_finite() {
            return bad("tau", format!("must be > 0, got {}", self.tau));
        }
        if self.n < 1 {
            return bad("N", format!("must be ≥ 1, got {}", self.n));
        }
        if let Some(dt) = self.dt {
            if !(dt > 0.0) || dt > self.tau {
                return bad("dt", format!("must lie in (0, tau], got {dt}"));
            }
        }
        Ok(())
    }

    /// Channels built from the exact gate carry tolerance 1e-10; integrated
    /// ones 1e-7.
    pub fn tolerance(&self) -> f64 {
        match self.dynamics {
            Dynamics::Unitary => 1e-10,
            Dynamics::Lindblad => 1e-7,
        }
    }

    pub fn channel(&self) -> Result<QuantumChannel> {
        match self.dynamics {
            Dynamics::Unitary => Ok(ms_gate(self.phi)),
            Dynamics::Lindblad => {
                let model = LindbladModel::two_ion(self.phi, self.tau, self.gamma)?;
                kraus_from_lindblad_endpoint(&model, self.tau, self.dt())
            }
        }
    }

    /// Computational-basis measurements on each ion before and after.
    pub fn protocol(&self) -> Result<TwoTimeProtocol> {
        self.validate()?;
        let rho0 = DensityMatrix::from_diagonal(&self.rho0)?.with_partition(2, 2)?;
        let local = LocalObservables {
            a_in: Observable::computational(2),
            b_in: Observable::computational(2),
            a_fin: Observable::computational(2),
            b_fin: Observable::computational(2),
        };
        TwoTimeProtocol::bipartite(rho0, local, self.channel()?)
    }
}

/// `⟨σ^k⟩`, `k = 1..4`, for each label.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabelMoments {
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub ab: Vec<f64>,
    pub a_plus_b: Vec<f64>,
}

impl LabelMoments {
    pub fn of(d: &BipartiteDistributions) -> Self {
        Self {
            a: d.a.moments(K_MAX),
            b: d.b.moments(K_MAX),
            ab: d.ab.moments(K_MAX),
            a_plus_b: d.a_plus_b.moments(K_MAX),
        }
    }

    pub fn get(&self, label: Label) -> &[f64] {
        match label {
            Label::A => &self.a,
            Label::B => &self.b,
            Label::AB => &self.ab,
            Label::APlusB => &self.a_plus_b,
        }
    }
}

/// Identity and inequality checks for one configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Checks {
    pub tolerance: f64,
    /// `max |p(fin|in) − p(in|ref)|` from the explicit backward process.
    pub conditional_deviation: f64,
    /// Largest entry difference between explicit and symbolic backward tables.
    pub backward_paths_gap: f64,
    pub theorem2: Theorem2Report,
    pub ift_residual: f64,
    pub crooks_deviation: f64,
    pub subadditivity_gap: f64,
    pub theorem1_pass: bool,
    pub ift_pass: bool,
    pub crooks_pass: bool,
    pub subadditivity_pass: bool,
}

impl Checks {
    pub fn all_pass(&self) -> bool {
        self.theorem1_pass && self.theorem2.pass && self.ift_pass && self.crooks_pass && self.subadditivity_pass
    }

    /// Names of failing checks.
    pub fn failures(&self) -> Vec<&'static str> {
        [
            ("theorem1", self.theorem1_pass),
            ("theorem2", self.theorem2.pass),
            ("integral_ft", self.ift_pass),
            ("crooks", self.crooks_pass),
            ("subadditivity", self.subadditivity_pass),
        ]
        .into_iter()
        .filter(|(_, ok)| !ok)
        .map(|(n, _)| n)
        .collect()
    }
}

pub fn run_checks(proto: &TwoTimeProtocol, dists: &BipartiteDistributions, tol: f64) -> Result<Checks> {
    let explicit = backward_joint(proto)?;
    let symbolic = backward_joint_symbolic(proto)?;
    let conditional_deviation = explicit.conditional_deviation().unwrap_or(0.0);
    let backward_paths_gap = explicit
        .p_bwd
        .iter()
        .flatten()
        .zip(symbolic.p_bwd.iter().flatten())
        .flat_map(|(x, y)| x.iter().zip(y))
        .fold(0.0f64, |m, (x, y)| m.max((x - y).abs()));
    let theorem2 = theorem2_check(proto)?;
    let fwd = entropy_samples(&explicit)?.dist;
    let bwd = backward_distribution(&explicit)?;
    let crooks = crooks_deviation(&fwd, &bwd);
    let ift = integral_ft_residual(&dists.ab);
    let gap = dists.subadditivity_gap();
    Ok(Checks {
        tolerance: tol,
        conditional_deviation,
        backward_paths_gap,
        theorem2,
        ift_residual: ift,
        crooks_deviation: crooks,
        subadditivity_gap: gap,
        theorem1_pass: conditional_deviation <= 1e-10,
        ift_pass: ift <= tol,
        crooks_pass: crooks <= tol,
        subadditivity_pass: gap >= -1e-10,
    })
}

/// Vandermonde against Newton moment extraction, and both against the
/// enumerated moments `k = 1..min(4, N−1)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentPathCheck {
    pub label: Label,
    pub condition_number: f64,
    pub newton_gap: f64,
    pub vandermonde_error: f64,
    pub newton_error: f64,
}

/// Reconstructions of all four labels with one method.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReconstructionSet {
    pub method: Method,
    pub a: ReconstructionResult,
    pub b: ReconstructionResult,
    pub ab: ReconstructionResult,
    /// Convolution of the recovered `A` and `B` distributions.
    pub a_plus_b: ReconstructionResult,
}

impl ReconstructionSet {
    pub fn get(&self, label: Label) -> &ReconstructionResult {
        match label {
            Label::A => &self.a,
            Label::B => &self.b,
            Label::AB => &self.ab,
            Label::APlusB => &self.a_plus_b,
        }
    }
}

/// Samples of χ for one label on its grid.
#[derive(Debug, Clone)]
struct Sampled {
    grid: ParameterGrid,
    chi: Vec<f64>,
    moments: MomentVector,
}

fn sample(proto: &TwoTimeProtocol, label: Label, truth: &EntropyDistribution, cfg: &TwoIonConfig) -> Result<Sampled> {
    let grid = cfg.grid.grid(cfg.n, truth.max_abs_support())?;
    sample_on(proto, label, grid)
}

fn sample_on(proto: &TwoTimeProtocol, label: Label, grid: ParameterGrid) -> Result<Sampled> {
    let chi = grid
        .nodes
        .iter()
        .map(|&p| moment_generating(proto, label, p))
        .collect::<Result<Vec<f64>>>()?;
    let moments = moments_via_vandermonde(&grid, &chi)?;
    Ok(Sampled { grid, chi, moments })
}

fn recover(s: &Sampled, label: Label, support: &[f64], method: Method) -> Result<crate::reconstruct::Recovered> {
    match method {
        Method::Pseudoinverse => pseudoinverse_reconstruct(label, &s.moments, support),
        Method::Fourier => fourier_reconstruct(label, &s.moments, support, &Default::default()),
    }
}

pub fn reconstruct_all(
    proto: &TwoTimeProtocol,
    dists: &BipartiteDistributions,
    cfg: &TwoIonConfig,
    method: Method,
) -> Result<ReconstructionSet> {
    let mut done = Vec::with_capacity(3);
    let mut recovered = Vec::with_capacity(2);
    for label in [Label::A, Label::B, Label::AB] {
        let truth = dists.get(label);
        let s = sample(proto, label, truth, cfg)?;
        let r = recover(&s, label, &truth.support, method)?;
        if label != Label::AB {
            recovered.push(r.dist.clone());
        }
        done.push(ReconstructionResult::assess(s.grid, s.chi, s.moments, method, r, truth, K_MAX)?);
    }
    // A+B: χ_{A+B} = χ_A χ_B sampled on the A grid; masses from the
    // convolution of the local recoveries.
    let s = sample_on(proto, Label::APlusB, done[0].grid.clone())?;
    let conv = convolution(&recovered[0], &recovered[1]);
    let min_raw = done[0].min_raw_mass.min(done[1].min_raw_mass);
    let r = crate::reconstruct::Recovered {
        dist: conv,
        min_raw_mass: min_raw,
        limit: None,
        regularized: false,
    };
    let a_plus_b = ReconstructionResult::assess(s.grid, s.chi, s.moments, method, r, &dists.a_plus_b, K_MAX)?;
    let mut it = done.into_iter();
    Ok(ReconstructionSet {
        method,
        a: it.next().unwrap(),
        b: it.next().unwrap(),
        ab: it.next().unwrap(),
        a_plus_b,
    })
}

pub fn moment_paths(proto: &TwoTimeProtocol, dists: &BipartiteDistributions, cfg: &TwoIonConfig) -> Result<Vec<MomentPathCheck>> {
    let k = (K_MAX as usize).min(cfg.n.saturating_sub(1));
    [Label::A, Label::B, Label::AB, Label::APlusB]
        .into_iter()
        .map(|label| {
            let truth = dists.get(label);
            let s = sample(proto, label, truth, cfg)?;
            let newton = moments_via_newton(&s.grid, &s.chi)?;
            let exact = truth.moments(k as u32);
            let worst = |m: &MomentVector| {
                exact
                    .iter()
                    .zip(&m.moments[1..=k])
                    .fold(0.0f64, |w, (x, y)| w.max((x - y).abs()))
            };
            let newton_gap = s.moments.moments[1..=k]
                .iter()
                .zip(&newton.moments[1..=k])
                .fold(0.0f64, |w, (x, y)| w.max((x - y).abs()));
            Ok(MomentPathCheck {
                label,
                condition_number: s.moments.condition_number.unwrap_or(f64::NAN),
                newton_gap,
                vandermonde_error: worst(&s.moments),
                newton_error: worst(&newton),
            })
        })
        .collect()
}

/// Everything computed for one configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfigRecord {
    pub config: TwoIonConfig,
    pub distributions: BipartiteDistributions,
    pub moments: LabelMoments,
    pub witness: CorrelationWitness,
    pub checks: Checks,
    pub reconstruction: ReconstructionSet,
    /// The other recovery method; `None` with a reason when it failed.
    pub alternate: Option<ReconstructionSet>,
    pub alternate_error: Option<String>,
    pub moment_paths: Vec<MomentPathCheck>,
    pub budget: MeasurementBudget,
}

pub fn run_config(cfg: &TwoIonConfig) -> Result<ConfigRecord> {
    let proto = cfg.protocol()?;
    let dists = bipartite_distributions(&proto)?;
    let checks = run_checks(&proto, &dists, cfg.tolerance())?;
    let reconstruction = reconstruct_all(&proto, &dists, cfg, cfg.method)?;
    let other = match cfg.method {
        Method::Pseudoinverse => Method::Fourier,
        Method::Fourier => Method::Pseudoinverse,
    };
    let (alternate, alternate_error) = match reconstruct_all(&proto, &dists, cfg, other) {
        Ok(set) => (Some(set), None),
        Err(e) => (None, Some(e.to_string())),
    };
    Ok(ConfigRecord {
        config: cfg.clone(),
        moments: LabelMoments::of(&dists),
        witness: correlation_witness(&dists.ab, &dists.a_plus_b),
        checks,
        reconstruction,
        alternate,
        alternate_error,
        moment_paths: moment_paths(&proto, &dists, cfg)?,
        budget: measurement_budget(2, 2, cfg.n),
        distributions: dists,
    })
}

/// Sweep direction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Axis {
    #[serde(rename = "phi")]
    Phi,
    #[serde(rename = "gamma")]
    Gamma,
    #[serde(rename = "N")]
    N,
}

impl Axis {
    pub fn as_str(self) -> &'static str {
        match self {
            Axis::Phi => "phi",
            Axis::Gamma => "gamma",
            Axis::N => "N",
        }
    }

    /// 64 phases over `[0, 2π]`, 25 rates over `[0, 1.2]`, `N = 2..16`.
    pub fn default_points(self) -> Vec<f64> {
        let lin = |n: usize, hi: f64| (0..n).map(move |i| i as f64 * hi / (n - 1) as f64);
        match self {
            Axis::Phi => lin(64, 2.0 * PI).collect(),
            Axis::Gamma => lin(25, 1.2).collect(),
            Axis::N => (2..=16).map(|n| n as f64).collect(),
        }
    }

    fn apply(self, template: &TwoIonConfig, x: f64) -> Result<TwoIonConfig> {
        let mut cfg = template.clone();
        match self {
            Axis::Phi => cfg.phi = x,
            Axis::Gamma => cfg.gamma = x,
            Axis::N => {
                if x < 1.0 || x.fract() != 0.0 {
                    return Err(Error::InvalidParameter {
                        name: "N",
                        reason: format!("sweep points must be positive integers, got {x}"),
                    });
                }
                cfg.n = x as usize;
            }
        }
        Ok(cfg)
    }
}

impl std::str::FromStr for Axis {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "phi" => Ok(Axis::Phi),
            "gamma" => Ok(Axis::Gamma),
            "N" | "n" => Ok(Axis::N),
            other => Err(Error::InvalidParameter {
                name: "axis",
                reason: format!("expected phi, gamma or N, got `{other}`"),
            }),
        }
    }
}

/// One sweep point. RMSEs refer to the `A+B` reconstruction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub point: f64,
    pub moments: LabelMoments,
    pub rmse_moments: f64,
    pub rmse_probs: f64,
    pub witness_gaps: Vec<f64>,
    pub checks_pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub axis: Axis,
    pub template: TwoIonConfig,
    pub points: Vec<f64>,
    pub rows: Vec<SweepRow>,
}

/// Runs every point (in parallel when enabled); rows keep point order.
pub fn sweep(axis: Axis, points: &[f64], template: &TwoIonConfig, exec: Execution) -> Result<SweepReport> {
    let rows = par_map(points, exec, |&x| {
        let rec = run_config(&axis.apply(template, x)?)?;
        let r = &rec.reconstruction.a_plus_b;
        Ok(SweepRow {
            point: x,
            moments: rec.moments.clone(),
            rmse_moments: r.rmse_moments,
            rmse_probs: r.rmse_probs,
            witness_gaps: rec.witness.moment_gaps.clone(),
            checks_pass: rec.checks.all_pass(),
        })
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    Ok(SweepReport {
        axis,
        template: template.clone(),
        points: points.to_vec(),
        rows,
    })
}

pub fn sweep_phase(points: &[f64], template: &TwoIonConfig, exec: Execution) -> Result<SweepReport> {
    sweep(Axis::Phi, points, template, exec)
}

pub fn sweep_gamma(points: &[f64], template: &TwoIonConfig, exec: Execution) -> Result<SweepReport> {
    sweep(Axis::Gamma, points, template, exec)
}

pub fn sweep_n(points: &[usize], template: &TwoIonConfig, exec: Execution) -> Result<SweepReport> {
    let pts: Vec<f64> = points.iter().map(|&n| n as f64).collect();
    sweep(Axis::N, &pts, template, exec)
}
