use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use sandwich_cli::report::sha256_hex;
use serde_json::Value;

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name)
}

fn sandwich(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sandwich"))
        .args(args)
        .env("RUST_LOG", "off")
        .output()
        .expect("binary runs")
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn json_stdout(out: &Output) -> Value {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

/// Data lines of a CSV, skipping the provenance comment and the header.
fn csv_rows(text: &str) -> Vec<Vec<String>> {
    text.lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

#[test]
fn optimize_cpmm_half_rule() {
    let scenario = fixture("scenario_cpmm.json");
    let pool = fixture("pool_cpmm.json");
    let report = json_stdout(&sandwich(&["optimize", "--scenario", path(&scenario), "--pool", path(&pool)]));
    let result = &report["result"];
    assert_eq!(result["plan"]["frontrun_size"], 500.0);
    assert_eq!(result["plan"]["regime"], "in-tick");
    assert!(result["oracle_profit"].as_f64().unwrap() > 0.0);
    assert_eq!(result["ev"]["gross_profit"], 2.5);
    assert_eq!(report["inputs"][0]["sha256"], sha256_hex(&fs::read(&scenario).unwrap()));
}

#[test]
fn optimize_without_pool_uses_the_scenario_alone() {
    let report = json_stdout(&sandwich(&["optimize", "--config", path(&fixture("scenario_cpmm.json"))]));
    assert_eq!(report["result"]["plan"]["frontrun_size"], 500.0);
    assert!(report["result"]["oracle_profit"].is_null());
}

#[test]
fn optimize_thin_next_tick_crosses_the_gap() {
    let out = sandwich(&[
        "optimize",
        "--scenario",
        path(&fixture("scenario_clmm.json")),
        "--pool",
        path(&fixture("pool_clmm_thin.json")),
    ]);
    let report = json_stdout(&out);
    assert_eq!(report["result"]["pool_type"], "clmm");
    assert_eq!(report["result"]["plan"]["regime"], "gap-crossing");
}

#[test]
fn optimize_tolerance_sets_a_cap() {
    let out = sandwich(&[
        "optimize",
        "--scenario",
        path(&fixture("scenario_cpmm.json")),
        "--pool",
        path(&fixture("pool_cpmm.json")),
        "--tolerance",
        "0.005",
    ]);
    let report = json_stdout(&out);
    let cap = report["result"]["slippage_cap"]["cap"].as_f64().unwrap();
    assert!(cap > 0.0 && cap < 500.0);
    assert_eq!(report["result"]["plan"]["regime"], "capped");
    assert_eq!(report["result"]["plan"]["frontrun_size"].as_f64().unwrap(), cap);
}

#[test]
fn malformed_json_fails_without_output() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    fs::write(&bad, "{\"victim_input\": 1000,\n \"fee\": }").unwrap();
    let out = sandwich(&["optimize", "--scenario", path(&bad)]);
    assert_eq!(out.status.code(), Some(1));
    assert!(out.stdout.is_empty());
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 2"));

    let target = dir.path().join("out");
    let out = sandwich(&["optimize", "--scenario", path(&bad), "--out", path(&target)]);
    assert_eq!(out.status.code(), Some(1));
    assert!(!target.exists());
}

#[test]
fn exit_codes() {
    // validation: bad values, missing files, unknown arguments
    let dir = tempfile::tempdir().unwrap();
    let neg = dir.path().join("neg.json");
    fs::write(&neg, r#"{"victim_input": -1, "fee": 0.0005, "depth": 1e5}"#).unwrap();
    assert_eq!(sandwich(&["optimize", "--scenario", path(&neg)]).status.code(), Some(1));
    assert_eq!(sandwich(&["optimize", "--scenario", "/no/such/file"]).status.code(), Some(1));
    assert_eq!(sandwich(&["optimize", "--nope"]).status.code(), Some(1));
    assert_eq!(
        sandwich(&["optimize", "--scenario", path(&fixture("scenario_cpmm.json")), "--tolerance", "0.1"])
            .status
            .code(),
        Some(1)
    );

    // runtime: a victim larger than the pool can absorb
    let huge = dir.path().join("huge.json");
    fs::write(&huge, r#"{"victim_input": 1e9, "fee": 0.0005, "depth": 1e6}"#).unwrap();
    let out = sandwich(&["optimize", "--scenario", path(&huge), "--pool", path(&fixture("pool_clmm_thin.json"))]);
    assert_eq!(out.status.code(), Some(2));
    assert!(out.stdout.is_empty());

    assert_eq!(sandwich(&["--version"]).status.code(), Some(0));
}

#[test]
fn simulate_side_by_side() {
    let out = sandwich(&[
        "simulate",
        "--config",
        path(&fixture("sequencer_fcfs.json")),
        "--strategy",
        path(&fixture("strategy_fcfs.json")),
        "--trials",
        "20000",
        "--seed",
        "11",
    ]);
    let report = json_stdout(&out);
    assert_eq!(report["seed"], 11);
    let c = &report["result"]["comparison"];
    assert_eq!(c["analytic"]["method"], "analytic");
    assert_eq!(c["monte_carlo"]["method"], "monte-carlo");
    assert_eq!(c["monte_carlo"]["trials"], 20000);
    assert_eq!(c["agrees"], true);
    assert_eq!(report["inputs"].as_array().unwrap().len(), 2);
}

#[test]
fn simulate_without_competition_is_certain() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("config.json");
    let strategy = dir.path().join("strategy.json");
    fs::write(
        &config,
        r#"{"policy": "FCFS", "block_time": 0.25, "batch_window": 0.5, "latency_std": 0.05, "background_rate": 0}"#,
    )
    .unwrap();
    fs::write(&strategy, r#"{"delay": 0, "tip_front": 1, "tip_back": 1}"#).unwrap();
    let report = json_stdout(&sandwich(&[
        "simulate",
        "--config",
        path(&config),
        "--strategy",
        path(&strategy),
        "--trials",
        "1000",
    ]));
    let c = &report["result"]["comparison"];
    assert_eq!(c["analytic"]["p_co_inclusion"], 1.0);
    assert_eq!(c["monte_carlo"]["p_co_inclusion"], 1.0);
    assert_eq!(c["agrees"], true);
}

#[test]
fn simulate_preset_sweeps_stay_in_band_and_repeat_exactly() {
    let dir = tempfile::tempdir().unwrap();
    for preset in ["central-fcfs", "central-pga"] {
        let run = |name: &str| {
            let out_dir = dir.path().join(format!("{preset}-{name}"));
            let out = sandwich(&[
                "simulate", "--preset", preset, "--sweep", "--trials", "5000", "--seed", "42", "--out",
                path(&out_dir),
            ]);
            assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
            out_dir
        };
        let (a, b) = (run("a"), run("b"));
        for file in ["sweep.csv", "report.json"] {
            assert_eq!(fs::read(a.join(file)).unwrap(), fs::read(b.join(file)).unwrap(), "{preset} {file}");
        }
        let csv = fs::read_to_string(a.join("sweep.csv")).unwrap();
        assert!(csv.starts_with("# sandwich "));
        let rows = csv_rows(&csv);
        assert_eq!(rows.len(), 11);
        for row in rows {
            let p: f64 = row[5].parse().unwrap();
            assert!((0.05..=0.20).contains(&p), "{preset} T_s={} p={p}", row[0]);
        }
    }
}

#[test]
fn simulate_seed_changes_the_estimate() {
    let run = |seed: &str| {
        json_stdout(&sandwich(&["simulate", "--preset", "central-pga", "--trials", "5000", "--seed", seed]))
    };
    let (a, b) = (run("1"), run("2"));
    assert_eq!(
        a["result"]["comparison"]["analytic"],
        b["result"]["comparison"]["analytic"]
    );
    assert_ne!(
        a["result"]["comparison"]["monte_carlo"]["p_co_inclusion"],
        b["result"]["comparison"]["monte_carlo"]["p_co_inclusion"]
    );
}

fn detect_fixture(out_dir: &Path, registry: bool) -> Output {
    let events = fixture("block.jsonl");
    let registry_path = fixture("registry.json");
    let snapshots = fixture("snapshots.json");
    let counts = fixture("tx_counts.csv");
    let mut args = vec![
        "detect",
        "--events",
        path(&events),
        "--snapshots",
        path(&snapshots),
        "--tx-counts",
        path(&counts),
        "--out",
        path(out_dir),
    ];
    if registry {
        args.extend(["--registry", path(&registry_path)]);
    }
    sandwich(&args)
}

#[test]
fn detect_fixture_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let out = detect_fixture(dir.path(), true);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(!String::from_utf8_lossy(&out.stderr).contains("WARNING"));

    let triples = fs::read_to_string(dir.path().join("triples.jsonl")).unwrap();
    let lines: Vec<&str> = triples.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(lines.len(), 2);
    for line in lines {
        let t: Value = serde_json::from_str(line).unwrap();
        assert!(!t["victims"].as_array().unwrap().is_empty());
        assert!(t["metrics"]["pnl"]["net"].as_f64().unwrap() < 0.0);
    }

    let report = read_json(&dir.path().join("report.json"));
    assert_eq!(report["result"]["stats"]["triples"], 2);
    assert_eq!(report["result"]["stats"]["arbitrage_txs_removed"], 1);
    assert_eq!(report["result"]["ingestion"]["rows"], 12);
    assert_eq!(report["result"]["stats"]["registry_fallback"], false);

    let summary = csv_rows(&fs::read_to_string(dir.path().join("summary.csv")).unwrap());
    assert_eq!(summary.len(), 1);
    assert_eq!(summary[0][0..2], ["base".to_string(), "2".to_string()]);
    assert!(fs::read_to_string(dir.path().join("summary.md")).unwrap().contains("| base | 2 |"));
    let efficiency = fs::read_to_string(dir.path().join("efficiency.csv")).unwrap();
    assert!(efficiency.contains("0xb07a000000000000000000000000000000000001"));
}

#[test]
fn every_output_carries_the_input_digests() {
    let dir = tempfile::tempdir().unwrap();
    assert!(detect_fixture(dir.path(), true).status.success());
    let report = read_json(&dir.path().join("report.json"));
    let digests: Vec<String> = report["inputs"]
        .as_array()
        .unwrap()
        .iter()
        .map(|i| i["sha256"].as_str().unwrap().to_string())
        .collect();
    assert_eq!(digests.len(), 4);
    assert_eq!(digests[0], sha256_hex(&fs::read(fixture("block.jsonl")).unwrap()));
    for file in ["triples.jsonl", "summary.csv", "summary.md", "efficiency.csv"] {
        let first = fs::read_to_string(dir.path().join(file)).unwrap();
        let first = first.lines().next().unwrap().to_string();
        for d in &digests {
            assert!(first.contains(d.as_str()), "{file} lacks {d}");
        }
    }
}

#[test]
fn detect_is_reproducible() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    assert!(detect_fixture(a.path(), true).status.success());
    assert!(detect_fixture(b.path(), true).status.success());
    for file in ["triples.jsonl", "summary.csv", "summary.md", "efficiency.csv", "report.json"] {
        assert_eq!(fs::read(a.path().join(file)).unwrap(), fs::read(b.path().join(file)).unwrap());
    }
}

#[test]
fn detect_without_registry_warns_and_falls_back() {
    let dir = tempfile::tempdir().unwrap();
    let out = detect_fixture(dir.path(), false);
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("WARNING: no actor registry"));
    let report = read_json(&dir.path().join("report.json"));
    assert_eq!(report["result"]["stats"]["registry_fallback"], true);
    assert_eq!(report["result"]["stats"]["triples"], 3);
}

#[test]
fn detect_csv_matches_jsonl() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let registry = fixture("registry.json");
    for (events, dir) in [(fixture("block.jsonl"), a.path()), (fixture("block.csv"), b.path())] {
        let out = sandwich(&["detect", "--events", path(&events), "--registry", path(&registry), "--out", path(dir)]);
        assert!(out.status.success());
    }
    let body = |d: &Path| -> Vec<String> {
        fs::read_to_string(d.join("triples.jsonl"))
            .unwrap()
            .lines()
            .filter(|l| !l.starts_with('#'))
            .map(str::to_string)
            .collect()
    };
    assert_eq!(body(a.path()), body(b.path()));
}

#[test]
fn detect_empty_events() {
    let dir = tempfile::tempdir().unwrap();
    let events = dir.path().join("events.jsonl");
    fs::write(&events, "").unwrap();
    let out_dir = dir.path().join("out");
    let out = sandwich(&[
        "detect",
        "--events",
        path(&events),
        "--registry",
        path(&fixture("registry.json")),
        "--out",
        path(&out_dir),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let triples = fs::read_to_string(out_dir.join("triples.jsonl")).unwrap();
    assert_eq!(triples.lines().filter(|l| !l.starts_with('#')).count(), 0);
    assert!(csv_rows(&fs::read_to_string(out_dir.join("summary.csv")).unwrap()).is_empty());
    assert_eq!(read_json(&out_dir.join("report.json"))["result"]["stats"]["triples"], 0);
}

#[test]
fn detect_aborts_on_high_skip_rate() {
    let dir = tempfile::tempdir().unwrap();
    let mut text = fs::read_to_string(fixture("block.jsonl")).unwrap();
    text.push_str("{\"not\": \"a swap\"}\nnot json at all\n");
    let events = dir.path().join("events.jsonl");
    fs::write(&events, text).unwrap();
    let out_dir = dir.path().join("out");
    let out = sandwich(&["detect", "--events", path(&events), "--out", path(&out_dir)]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("unreadable"));
    assert!(!out_dir.exists());
}

#[test]
fn detect_tolerates_a_few_bad_rows() {
    let dir = tempfile::tempdir().unwrap();
    let mut text = fs::read_to_string(fixture("block.jsonl")).unwrap();
    text.push_str("not json at all\n");
    let events = dir.path().join("events.jsonl");
    fs::write(&events, text).unwrap();
    let out_dir = dir.path().join("out");
    let out = sandwich(&[
        "detect",
        "--events",
        path(&events),
        "--registry",
        path(&fixture("registry.json")),
        "--out",
        path(&out_dir),
    ]);
    assert!(out.status.success());
    let report = read_json(&out_dir.join("report.json"));
    assert_eq!(report["result"]["ingestion"]["skipped"], 1);
    assert_eq!(report["result"]["stats"]["triples"], 2);
}

#[test]
fn minsize_grid() {
    let out = sandwich(&["minsize", "--depth", "1e5", "--success-prob", "0,0.1", "--costs", "0,0.5"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("# sandwich "));
    let rows = csv_rows(&text);
    assert_eq!(rows.len(), 4);
    assert_eq!(rows[0][4], "infeasible");
    assert_eq!(rows[1][4], "infeasible");
    assert_eq!(rows[2][3], "0");
    let v: f64 = rows[3][3].parse().unwrap();
    assert!((v - 1414.21).abs() < 0.01);
}

#[test]
fn minsize_default_grid_brackets_the_band() {
    let dir = tempfile::tempdir().unwrap();
    let out = sandwich(&["minsize", "--out", path(dir.path())]);
    assert!(out.status.success());
    let rows = csv_rows(&fs::read_to_string(dir.path().join("minsize.csv")).unwrap());
    let values: Vec<f64> = rows.iter().map(|r| r[3].parse().unwrap()).collect();
    assert!(values.iter().any(|&v| v <= 1500.0));
    assert!(values.iter().any(|&v| v >= 3000.0));
    assert!(dir.path().join("report.json").exists());
}

#[test]
fn minsize_rejects_bad_values() {
    assert_eq!(sandwich(&["minsize", "--depth", "-5"]).status.code(), Some(1));
    assert_eq!(sandwich(&["minsize", "--success-prob", "2"]).status.code(), Some(1));
    assert_eq!(sandwich(&["minsize", "--costs", "abc"]).status.code(), Some(1));
}
