use std::process::Command;

use sobolev_cli::{load_config, manifest_path, run_command, write_report_to, RunManifest};
use sobolev_core::pipeline::{PipelineConfig, PipelineReport, ReportRow};
use sobolev_core::Error;

const QUICK: &str = "m = 2\nk = 1\np = 1.5\ntarget = s1\ninput = hedgehog\neta = 0.25, 0.125, 0.0625\nresolution = 32\nsamples = 50\n";

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_sobolev-approx"))
}

#[test]
fn missing_config_is_an_io_error_naming_the_path() {
    let err = load_config(std::path::Path::new("/nonexistent/run.cfg")).unwrap_err();
    match err {
        Error::Io(msg) => assert!(msg.contains("/nonexistent/run.cfg"), "{msg}"),
        e => panic!("unexpected {e:?}"),
    }
}

#[test]
fn malformed_config_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.cfg");
    std::fs::write(&path, "m = 2\nk = three\n").unwrap();
    assert!(matches!(load_config(&path), Err(Error::Config(_))));
}

#[test]
fn report_csv_has_a_header_and_one_line_per_row() {
    let mut empty = Vec::new();
    write_report_to(&PipelineReport::default(), &mut empty).unwrap();
    let text = String::from_utf8(empty).unwrap();
    assert_eq!(text.lines().count(), 1);
    assert_eq!(text.lines().next().unwrap().split(',').count(), ReportRow::HEADER.len());

    let mut report = PipelineReport::default();
    report.push(ReportRow::empty("nontrivial", 0.25));
    report.push(ReportRow::empty("nontrivial", 0.125));
    let mut buf = Vec::new();
    write_report_to(&report, &mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    assert_eq!(text.lines().count(), 3);
    for line in text.lines() {
        assert_eq!(line.split(',').count(), ReportRow::HEADER.len());
    }
}

#[test]
fn manifest_round_trips() {
    let m = RunManifest {
        config: PipelineConfig::parse(QUICK).unwrap(),
        version: "0.1.0".into(),
        seed: 11,
        started: 1700000000.5,
        finished: 1700000003.25,
        wall_seconds: 2.75,
        outputs: vec!["out.csv".into(), "out.csv.manifest".into()],
    };
    assert_eq!(RunManifest::parse(&m.to_text()).unwrap(), m);
    assert!(RunManifest::parse("version = 1\n").is_err());
}

#[test]
fn unknown_subcommand_and_bad_flags_exit_nonzero() {
    assert_eq!(run_command(["sobolev-approx", "frobnicate"]), 2);
    assert_eq!(run_command(["sobolev-approx", "study"]), 2);
    assert_eq!(run_command(["sobolev-approx", "--help"]), 0);
    let status = bin().arg("frobnicate").output().unwrap().status;
    assert_eq!(status.code(), Some(2));
}

#[test]
fn check_suite_exits_zero() {
    let out = bin().args(["check", "--suite", "smoothmap"]).output().unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(run_command(["sobolev-approx", "check", "--suite", "nope"]), 2);
}

#[test]
fn study_writes_one_row_per_scale_and_reruns_identically() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("quick.cfg");
    std::fs::write(&cfg, QUICK).unwrap();
    let mut csvs = Vec::new();
    for name in ["a.csv", "b.csv"] {
        let out = dir.path().join(name);
        let o = bin().arg("study").arg("--config").arg(&cfg).arg("--out").arg(&out).args(["--threads", "1"]).output().unwrap();
        assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
        let manifest = RunManifest::parse(&std::fs::read_to_string(manifest_path(&out)).unwrap()).unwrap();
        assert_eq!(manifest.config, PipelineConfig::parse(QUICK).unwrap());
        assert_eq!(manifest.outputs[0], out);
        csvs.push(std::fs::read(&out).unwrap());
    }
    assert_eq!(csvs[0], csvs[1]);
    let text = String::from_utf8(csvs.remove(0)).unwrap();
    assert_eq!(text.lines().count(), 4);
}

#[test]
fn seed_override_is_recorded() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("quick.cfg");
    std::fs::write(&cfg, QUICK).unwrap();
    let out = dir.path().join("once.csv");
    let o = bin().arg("approx").arg("--config").arg(&cfg).arg("--out").arg(&out).args(["--seed", "9"]).output().unwrap();
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let manifest = RunManifest::parse(&std::fs::read_to_string(manifest_path(&out)).unwrap()).unwrap();
    assert_eq!(manifest.seed, 9);
    assert_eq!(std::fs::read_to_string(&out).unwrap().lines().count(), 2);
}
