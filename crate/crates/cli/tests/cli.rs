use std::path::Path;
use std::process::Command;

use entroprec_cli::config::CommandKind;
use entroprec_cli::emit::{ReconstructReport, VerifyReport};
use entroprec_cli::{execute, parse_config, Envelope, Format, Overrides, Report};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_entroprec"))
}

fn read_json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn verify_fig3_json_schema() {
    let dir = tempfile::tempdir().unwrap();
    let status = bin()
        .args(["verify", "--preset", "fig3", "--format", "json", "--out"])
        .arg(dir.path())
        .status()
        .unwrap();
    assert!(status.success());
    let v = read_json(&dir.path().join("verify.json"));
    assert_eq!(v["pass"], true);
    let checks = &v["report"]["checks"];
    for key in ["theorem1_pass", "ift_pass", "crooks_pass", "subadditivity_pass"] {
        assert_eq!(checks[key], true, "{key}");
    }
    assert!(checks["crooks_deviation"].as_f64().unwrap() <= 1e-10);
    assert!(checks["theorem2"]["pass"].as_bool().unwrap());
    assert_eq!(v["run"]["preset"], "fig3");
}

#[test]
fn simulate_fig4_distribution_dump() {
    let dir = tempfile::tempdir().unwrap();
    let status = bin()
        .args(["simulate", "--preset", "fig4", "--out"])
        .arg(dir.path())
        .status()
        .unwrap();
    assert!(status.success());
    let mut r = csv::Reader::from_path(dir.path().join("distribution_AB.csv")).unwrap();
    assert_eq!(r.headers().unwrap(), vec!["support", "prob"]);
    let rows: Vec<(f64, f64)> = r
        .records()
        .map(|rec| {
            let rec = rec.unwrap();
            (rec[0].parse().unwrap(), rec[1].parse().unwrap())
        })
        .collect();
    assert!(!rows.is_empty() && rows.len() <= 16);
    assert!(rows.windows(2).all(|w| w[0].0 < w[1].0));
    let total: f64 = rows.iter().map(|r| r.1).sum();
    assert!((total - 1.0).abs() < 1e-12);
    let header = read_json(&dir.path().join("config.json"));
    assert_eq!(header["run"]["config"]["dynamics"], "lindblad");
}

#[test]
fn sweep_gamma_csv_has_25_rows() {
    let dir = tempfile::tempdir().unwrap();
    let status = bin()
        .args(["sweep", "--axis", "gamma", "--preset", "fig5", "--out"])
        .arg(dir.path())
        .status()
        .unwrap();
    assert!(status.success());
    let mut r = csv::Reader::from_path(dir.path().join("sweep_gamma.csv")).unwrap();
    let h = r.headers().unwrap().clone();
    assert_eq!(&h[0], "gamma");
    assert_eq!(&h[9], "A-B_m1");
    assert_eq!(&h[17], "rmse_moments");
    assert_eq!(&h[h.len() - 1], "checks_pass");
    assert_eq!(r.records().count(), 25);
}

#[test]
fn bad_values_exit_nonzero_naming_key() {
    let out = bin().args(["simulate", "--N", "0"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("N:"));

    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("cfg.json");
    std::fs::write(&file, r#"{"phi": 0.3, "colour": "red"}"#).unwrap();
    let out = bin().args(["verify", "--config"]).arg(&file).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("colour"));
}

#[test]
fn precedence_flag_over_file_over_preset() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("cfg.json");
    std::fs::write(&file, r#"{"preset": "fig4", "gamma": 0.5, "N": 12}"#).unwrap();
    let flags = Overrides {
        n: Some(8),
        ..Default::default()
    };
    let rc = parse_config(CommandKind::Simulate, flags, Some(&file)).unwrap();
    assert_eq!(rc.config.gamma, 0.5);
    assert_eq!(rc.config.n, 8);
    assert_eq!(rc.config.phi, 5.0 * std::f64::consts::PI / 6.0);
}

#[test]
fn json_reports_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    for (kind, flags) in [
        (CommandKind::Verify, Overrides { preset: Some("fig4".into()), ..Default::default() }),
        (CommandKind::Reconstruct, Overrides { preset: Some("fig3".into()), ..Default::default() }),
        (
            CommandKind::Sweep,
            Overrides {
                axis: Some(entroprec::experiments::Axis::Phi),
                points: Some(vec![0.1, 0.7, 2.9]),
                ..Default::default()
            },
        ),
    ] {
        let mut rc = parse_config(kind, flags, None).unwrap();
        rc.format = Format::Json;
        rc.output_dir = dir.path().to_path_buf();
        let (report, _) = entroprec_cli::run(&rc).unwrap();
        let out = execute(&rc).unwrap();
        assert!(out.pass, "{:?}", out.failures);
        let text = std::fs::read_to_string(&out.files[0]).unwrap();
        let back: Envelope<Report> = serde_json::from_str(&text).unwrap();
        assert_eq!(back.run, rc);
        assert_eq!(back.report, report);
        match back.report {
            Report::Verify(VerifyReport { checks, .. }) => assert!(checks.all_pass()),
            Report::Reconstruct(r) => {
                let ReconstructReport { reconstruction, .. } = *r;
                assert!(reconstruction.a_plus_b.rmse_probs <= 1e-6);
            }
            Report::Sweep(s) => assert_eq!(s.rows.len(), 3),
            Report::Simulate(_) => unreachable!(),
        }
    }
}

#[test]
fn reconstruct_csv_columns() {
    let dir = tempfile::tempdir().unwrap();
    let status = bin()
        .args(["reconstruct", "--preset", "fig3", "--method", "pinv", "--out"])
        .arg(dir.path())
        .status()
        .unwrap();
    assert!(status.success());
    let mut r = csv::Reader::from_path(dir.path().join("reconstruction.csv")).unwrap();
    assert_eq!(&r.headers().unwrap()[0], "label");
    let rows: Vec<csv::StringRecord> = r.records().map(|x| x.unwrap()).collect();
    assert_eq!(rows.len(), 4);
    assert_eq!(&rows[3][0], "A+B");
    assert_eq!(&rows[3][1], "pinv");
    assert!(rows[3][4].parse::<f64>().unwrap() <= 1e-6);
}
