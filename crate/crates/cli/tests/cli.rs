mod common;

use common::{run_bin, Fixture, FixtureOptions, PIPELINE};

fn stderr_record(out: &std::process::Output) -> serde_json::Value {
    let text = String::from_utf8_lossy(&out.stderr);
    let line = text.lines().last().expect("an error record");
    serde_json::from_str(line).unwrap_or_else(|_| panic!("not JSON: {text}"))
}

#[test]
fn unknown_subcommand_is_a_usage_error() {
    let out = run_bin(&["frobnicate"]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(stderr_record(&out)["error"], "usage");
}

#[test]
fn help_exits_zero() {
    let out = run_bin(&["--help"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stdout).contains("circle-test"));
}

#[test]
fn bad_config_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.toml");
    std::fs::write(&cfg, "seed = 1\nbogus = true\n").unwrap();
    let out = run_bin(&["-c", cfg.to_str().unwrap(), "ingest"]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(stderr_record(&out)["error"], "config");

    std::fs::write(&cfg, "seed = 1\n[paths]\ncorpus = \"missing.jsonl\"\n").unwrap();
    let out = run_bin(&["-c", cfg.to_str().unwrap(), "ingest"]);
    assert_eq!(out.status.code(), Some(1));

    let out = run_bin(&["-c", cfg.to_str().unwrap(), "--scale", "0", "ingest"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn stage_without_upstream_reports_missing_artifact() {
    let dir = tempfile::tempdir().unwrap();
    let fx = Fixture::new(dir.path(), &FixtureOptions::default());
    for stage in ["aggregate", "evaluate", "report"] {
        let out = fx.run(&[stage]);
        assert_eq!(out.status.code(), Some(2), "{stage}");
        let rec = stderr_record(&out);
        assert_eq!(rec["error"], "missing_artifact");
        assert_eq!(rec["exit_code"], 2);
    }
}

#[test]
fn held_lock_blocks_a_second_run() {
    let dir = tempfile::tempdir().unwrap();
    let fx = Fixture::new(dir.path(), &FixtureOptions::default());
    std::fs::create_dir_all(fx.out()).unwrap();
    std::fs::write(fx.out().join(".lock"), "").unwrap();
    let out = fx.run(&["ingest"]);
    assert_eq!(out.status.code(), Some(3));
    assert_eq!(stderr_record(&out)["error"], "locked");
    // The lock belongs to someone else and must survive.
    assert!(fx.out().join(".lock").exists());
}

#[test]
fn full_pipeline_writes_expected_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let fx = Fixture::new(dir.path(), &FixtureOptions::default());
    for stage in PIPELINE {
        let out = fx.run(&[stage]);
        assert!(out.status.success(), "{stage}: {}", String::from_utf8_lossy(&out.stderr));
    }
    let out = fx.out();
    assert!(!out.join(".lock").exists());

    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("ingest/summary.json")).unwrap()).unwrap();
    assert_eq!(summary["unmapped"], 1);
    assert_eq!(summary["invalid"], 1);

    let csv = std::fs::read_to_string(out.join("eval/cxg/eng-web.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("region,precision,recall,f1,support"));
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 4);
    for row in rows {
        let cols: Vec<&str> = row.split(',').collect();
        assert_eq!(cols.len(), 5);
        for v in &cols[1..4] {
            let v: f64 = v.parse().unwrap();
            assert!((0.0..=1.0).contains(&v));
        }
    }

    let split = std::fs::read_to_string(out.join("split/summary.csv")).unwrap();
    assert!(split.lines().skip(1).all(|l| l.contains(",2,25,5,")), "{split}");

    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("manifest.json")).unwrap()).unwrap();
    let artifacts = manifest["artifacts"].as_object().unwrap();
    assert!(artifacts.contains_key("report.md"));
    assert!(artifacts.contains_key("unmask/eng-web.csv"));
    assert!(artifacts.contains_key("circle/tests.csv"));
    assert_eq!(manifest["constants"]["dev_samples"], 2);

    let report = std::fs::read_to_string(out.join("report.md")).unwrap();
    for heading in ["## Classification", "## Uniqueness: cxg eng web", "## Inner vs outer circle", "## Unmasking"] {
        assert!(report.contains(heading), "missing {heading}");
    }
}

