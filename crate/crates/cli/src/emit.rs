//! Runs a resolved command and writes its CSV or JSON files.

use std::fs;
use std::path::{Path, PathBuf};

use entroprec::distribution::{EntropyDistribution, Label};
use entroprec::experiments::{
    run_checks, run_config, sweep, Axis, Checks, ConfigRecord, LabelMoments, MomentPathCheck,
    ReconstructionSet, SweepReport, K_MAX,
};
use entroprec::parallel::Execution;
use entroprec::protocol::{bipartite_distributions, correlation_witness, CorrelationWitness};
use serde::{Deserialize, Serialize};

use crate::config::{Command, Format, RunConfig};
use crate::CliError;

const LABELS: [Label; 4] = [Label::A, Label::B, Label::AB, Label::APlusB];

/// Shortest decimal that parses back to the same `f64`.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:?}")
}

fn file_tag(label: Label) -> &'static str {
    match label {
        Label::A => "A",
        Label::B => "B",
        Label::AB => "AB",
        Label::APlusB => "A_plus_B",
    }
}

/// Top-level JSON document: effective config, verdict and the report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Envelope<T> {
    pub run: RunConfig,
    pub pass: bool,
    pub failures: Vec<String>,
    pub report: T,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub checks: Checks,
    pub witness: CorrelationWitness,
    pub moments: LabelMoments,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReconstructReport {
    pub truth: Vec<EntropyDistribution>,
    pub reconstruction: ReconstructionSet,
    pub alternate: Option<ReconstructionSet>,
    pub alternate_error: Option<String>,
    pub moment_paths: Vec<MomentPathCheck>,
}

/// What a command produced.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Report {
    Simulate(Box<ConfigRecord>),
    Verify(VerifyReport),
    Reconstruct(Box<ReconstructReport>),
    Sweep(SweepReport),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub pass: bool,
    pub failures: Vec<String>,
    pub files: Vec<PathBuf>,
}

fn sweep_failures(rep: &SweepReport) -> Vec<String> {
    rep.rows
        .iter()
        .filter(|r| !r.checks_pass)
        .map(|r| format!("{}={}", rep.axis.as_str(), fmt_f64(r.point)))
        .collect()
}

/// Runs the command without touching the filesystem.
pub fn run(rc: &RunConfig) -> Result<(Report, Vec<String>), CliError> {
    let cfg = &rc.config;
    Ok(match &rc.command {
        Command::Simulate => {
            let rec = run_config(cfg)?;
            let f = rec.checks.failures().iter().map(|s| s.to_string()).collect();
            (Report::Simulate(Box::new(rec)), f)
        }
        Command::Verify => {
            let proto = cfg.protocol()?;
            let d = bipartite_distributions(&proto)?;
            let checks = run_checks(&proto, &d, cfg.tolerance())?;
            let f = checks.failures().iter().map(|s| s.to_string()).collect();
            let rep = VerifyReport {
                witness: correlation_witness(&d.ab, &d.a_plus_b),
                moments: LabelMoments::of(&d),
                checks,
            };
            (Report::Verify(rep), f)
        }
        Command::Reconstruct => {
            let rec = run_config(cfg)?;
            let f = rec.checks.failures().iter().map(|s| s.to_string()).collect();
            let rep = ReconstructReport {
                truth: LABELS.iter().map(|&l| rec.distributions.get(l).clone()).collect(),
                reconstruction: rec.reconstruction,
                alternate: rec.alternate,
                alternate_error: rec.alternate_error,
                moment_paths: rec.moment_paths,
            };
            (Report::Reconstruct(Box::new(rep)), f)
        }
        Command::Sweep { axis, points } => {
            let rep = sweep(*axis, points, cfg, Execution::default())?;
            let f = sweep_failures(&rep);
            (Report::Sweep(rep), f)
        }
    })
}

/// Runs the command and writes its files.
pub fn execute(rc: &RunConfig) -> Result<Outcome, CliError> {
    let (report, failures) = run(rc)?;
    let files = emit_report(&report, rc, &failures)?;
    Ok(Outcome {
        pass: failures.is_empty(),
        failures,
        files,
    })
}

struct Csv {
    path: PathBuf,
    w: csv::Writer<fs::File>,
}

impl Csv {
    fn create(dir: &Path, name: &str, header: &[String]) -> Result<Self, CliError> {
        let path = dir.join(name);
        let mut w = csv::Writer::from_path(&path).map_err(|e| CliError::Csv {
            path: path.clone(),
            source: e,
        })?;
        w.write_record(header).map_err(|e| CliError::Csv {
            path: path.clone(),
            source: e,
        })?;
        Ok(Self { path, w })
    }

    fn row(&mut self, fields: Vec<String>) -> Result<(), CliError> {
        self.w.write_record(&fields).map_err(|e| CliError::Csv {
            path: self.path.clone(),
            source: e,
        })
    }

    fn finish(mut self) -> Result<PathBuf, CliError> {
        self.w.flush().map_err(|e| CliError::Io {
            path: self.path.clone(),
            source: e,
        })?;
        Ok(self.path)
    }
}

fn strings(h: &[&str]) -> Vec<String> {
    h.iter().map(|s| s.to_string()).collect()
}

/// Fixed sweep CSV columns: axis value, `⟨σ^k⟩` for `A, B, A−B, A+B`, the
/// `A+B` reconstruction RMSEs, witness gaps, then the check verdict.
pub fn sweep_header(axis: Axis) -> Vec<String> {
    let mut h = vec![axis.as_str().to_string()];
    for l in LABELS {
        for k in 1..=K_MAX {
            h.push(format!("{}_m{k}", l.as_str()));
        }
    }
    h.push("rmse_moments".into());
    h.push("rmse_probs".into());
    for k in 1..=K_MAX {
        h.push(format!("gap_m{k}"));
    }
    h.push("checks_pass".into());
    h
}

fn write_distribution(dir: &Path, prefix: &str, d: &EntropyDistribution) -> Result<PathBuf, CliError> {
    let mut csv = Csv::create(dir, &format!("{prefix}_{}.csv", file_tag(d.label)), &strings(&["support", "prob"]))?;
    for (s, p) in d.pairs() {
        csv.row(vec![fmt_f64(s), fmt_f64(p)])?;
    }
    csv.finish()
}

fn write_moments(dir: &Path, m: &LabelMoments) -> Result<PathBuf, CliError> {
    let mut h = vec!["label".to_string()];
    h.extend((1..=K_MAX).map(|k| format!("m{k}")));
    let mut csv = Csv::create(dir, "moments.csv", &h)?;
    for l in LABELS {
        let mut row = vec![l.as_str().to_string()];
        row.extend(m.get(l).iter().map(|&x| fmt_f64(x)));
        csv.row(row)?;
    }
    csv.finish()
}

fn write_checks(dir: &Path, c: &Checks) -> Result<PathBuf, CliError> {
    let mut csv = Csv::create(dir, "checks.csv", &strings(&["check", "value", "tolerance", "pass"]))?;
    let t2 = &c.theorem2;
    let rows = [
        ("conditional_deviation", c.conditional_deviation, 1e-10, c.theorem1_pass),
        ("relative_entropy", t2.relative_entropy, -1e-10, t2.pass),
        ("mean_sigma_minus_relative_entropy", t2.mean_sigma - t2.relative_entropy, -1e-10, t2.pass),
        ("ift_residual", c.ift_residual, c.tolerance, c.ift_pass),
        ("crooks_deviation", c.crooks_deviation, c.tolerance, c.crooks_pass),
        ("subadditivity_gap", c.subadditivity_gap, -1e-10, c.subadditivity_pass),
    ];
    for (name, v, tol, ok) in rows {
        csv.row(vec![name.into(), fmt_f64(v), fmt_f64(tol), ok.to_string()])?;
    }
    csv.finish()
}

fn write_reconstruction(dir: &Path, truth: &[EntropyDistribution], set: &ReconstructionSet) -> Result<Vec<PathBuf>, CliError> {
    let mut h = strings(&["label", "method", "N", "rmse_moments", "rmse_probs", "min_raw_mass"]);
    h.extend((1..=K_MAX).map(|k| format!("m{k}")));
    let mut csv = Csv::create(dir, "reconstruction.csv", &h)?;
    let mut files = Vec::new();
    for (l, t) in LABELS.iter().zip(truth) {
        let r = set.get(*l);
        let mut row = vec![
            l.as_str().to_string(),
            serde_json::to_value(r.method)?.as_str().unwrap_or_default().to_string(),
            r.grid.n.to_string(),
            fmt_f64(r.rmse_moments),
            fmt_f64(r.rmse_probs),
            fmt_f64(r.min_raw_mass),
        ];
        row.extend(r.dist.moments(K_MAX).iter().map(|&x| fmt_f64(x)));
        csv.row(row)?;

        let mut d = Csv::create(
            dir,
            &format!("reconstructed_{}.csv", file_tag(*l)),
            &strings(&["support", "true_prob", "reconstructed_prob"]),
        )?;
        for ((s, p), (_, q)) in t.pairs().zip(r.dist.pairs()) {
            d.row(vec![fmt_f64(s), fmt_f64(p), fmt_f64(q)])?;
        }
        files.push(d.finish()?);
    }
    files.push(csv.finish()?);
    Ok(files)
}

fn write_sweep(dir: &Path, rep: &SweepReport) -> Result<PathBuf, CliError> {
    let mut csv = Csv::create(dir, &format!("sweep_{}.csv", rep.axis.as_str()), &sweep_header(rep.axis))?;
    for r in &rep.rows {
        let mut row = vec![fmt_f64(r.point)];
        for l in LABELS {
            row.extend(r.moments.get(l).iter().map(|&x| fmt_f64(x)));
        }
        row.push(fmt_f64(r.rmse_moments));
        row.push(fmt_f64(r.rmse_probs));
        row.extend(r.witness_gaps.iter().map(|&x| fmt_f64(x)));
        row.push(r.checks_pass.to_string());
        csv.row(row)?;
    }
    csv.finish()
}

fn write_json<T: Serialize>(path: PathBuf, value: &T) -> Result<PathBuf, CliError> {
    let text = serde_json::to_string_pretty(value)?;
    fs::write(&path, text).map_err(|e| CliError::Io {
        path: path.clone(),
        source: e,
    })?;
    Ok(path)
}

/// Writes `report` under `rc.output_dir`. CSV output comes with
/// `config.json`; JSON output is one `<command>.json` document.
pub fn emit_report(report: &Report, rc: &RunConfig, failures: &[String]) -> Result<Vec<PathBuf>, CliError> {
    let dir = rc.output_dir.as_path();
    fs::create_dir_all(dir).map_err(|e| CliError::Io {
        path: dir.to_path_buf(),
        source: e,
    })?;
    let pass = failures.is_empty();
    if rc.format == Format::Json {
        let name = match report {
            Report::Sweep(s) => format!("sweep_{}.json", s.axis.as_str()),
            _ => format!("{}.json", rc.command.name()),
        };
        let env = Envelope {
            run: rc.clone(),
            pass,
            failures: failures.to_vec(),
            report,
        };
        return Ok(vec![write_json(dir.join(name), &env)?]);
    }
    let header = serde_json::json!({ "run": rc.header(), "pass": pass, "failures": failures });
    let mut files = vec![write_json(dir.join("config.json"), &header)?];
    match report {
        Report::Simulate(rec) => {
            for l in LABELS {
                files.push(write_distribution(dir, "distribution", rec.distributions.get(l))?);
            }
            files.push(write_moments(dir, &rec.moments)?);
            files.push(write_checks(dir, &rec.checks)?);
        }
        Report::Verify(v) => {
            files.push(write_checks(dir, &v.checks)?);
            files.push(write_moments(dir, &v.moments)?);
        }
        Report::Reconstruct(r) => {
            files.extend(write_reconstruction(dir, &r.truth, &r.reconstruction)?);
        }
        Report::Sweep(s) => files.push(write_sweep(dir, s)?),
    }
    Ok(files)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shortest_round_trip_floats() {
        for x in [0.1, 1.0 / 3.0, 1e-300, -2.5e17, 0.0] {
            assert_eq!(fmt_f64(x).parse::<f64>().unwrap(), x);
        }
        assert_eq!(fmt_f64(0.1), "0.1");
    }

    #[test]
    fn sweep_header_is_fixed() {
        let h = sweep_header(Axis::Gamma);
        assert_eq!(h.len(), 1 + 16 + 2 + 4 + 1);
        assert_eq!(h[0], "gamma");
        assert_eq!(h[1], "A_m1");
        assert_eq!(h[9], "A-B_m1");
        assert_eq!(h[13], "A+B_m1");
        assert_eq!(h[17], "rmse_moments");
    }
}
