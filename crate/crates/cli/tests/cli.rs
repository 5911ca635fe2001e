use std::path::Path;
use std::process::{Command, Output};

fn cdsbound(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cdsbound"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

/// Data lines of a CSV file, without the comment and column header.
fn records(text: &str) -> Vec<Vec<String>> {
    text.lines()
        .skip(2)
        .map(|l| l.split(',').map(String::from).collect())
        .collect()
}

fn num(s: &str) -> f64 {
    s.parse().unwrap()
}

fn write_config(dir: &Path, text: &str) -> String {
    let path = dir.join("cfg.toml");
    std::fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn bounds_file_has_one_row_per_maturity() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "[curve]\nrate = 0.02\n");
    let out_path = dir.path().join("bounds.csv");
    let out = cdsbound(&[
        "bounds",
        "--config",
        &cfg,
        "--out",
        out_path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let text = std::fs::read_to_string(&out_path).unwrap();
    assert!(text.starts_with("# cdsbound bounds config_hash="));
    assert!(text.lines().next().unwrap().ends_with("seed=42"));
    assert_eq!(
        text.lines().nth(1).unwrap(),
        "m,opt_ask,opt_bid,van_ask,van_bid,interpolated"
    );
    let rows = records(&text);
    assert_eq!(rows.len(), 21);
    let m10 = &rows[9];
    assert!((num(&m10[1]) - 0.2050).abs() < 5e-4);
    assert!((num(&m10[3]) - 0.2161).abs() < 1e-4);
    assert_eq!(
        rows[3][5], "",
        "no interpolated value below the first quote"
    );
    for m in [5, 9, 13, 17, 21] {
        let r = &rows[m - 1];
        assert!(r[1..].iter().all(|v| v == &r[1]), "liquid row {m}: {r:?}");
    }
}

#[test]
fn study_is_byte_identical_under_a_fixed_seed() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str, seed: &str| {
        let path = dir.path().join(name);
        let rec = dir.path().join(format!("{name}.records"));
        let out = cdsbound(&[
            "study",
            "--variant",
            "all",
            "--trials",
            "40",
            "--seed",
            seed,
            "--out",
            path.to_str().unwrap(),
            "--records",
            rec.to_str().unwrap(),
        ]);
        assert!(out.status.success());
        (std::fs::read(path).unwrap(), std::fs::read(rec).unwrap())
    };
    let first = run("a.csv", "7");
    assert_eq!(first, run("b.csv", "7"));
    assert_ne!(first.0, run("c.csv", "8").0);
    let text = String::from_utf8(first.0).unwrap();
    assert!(text.lines().next().unwrap().ends_with("seed=7"));
    assert_eq!(records(&text).len(), 120);
    let rec = String::from_utf8(first.1).unwrap();
    assert_eq!(rec.lines().nth(1).unwrap().split(',').count(), 5 + 21);
}

#[test]
fn thousand_trial_study_matches_the_reference_mean() {
    let out = cdsbound(&[
        "study",
        "--variant",
        "a",
        "--trials",
        "1000",
        "--seed",
        "42",
    ]);
    assert!(out.status.success());
    let rows = records(&stdout(&out));
    assert_eq!(rows.len(), 1000);
    let mean = rows.iter().map(|r| num(&r[2])).sum::<f64>() / 1000.0;
    assert!((0.214..=0.274).contains(&mean), "mean {mean}");
    let summary = String::from_utf8(out.stderr).unwrap();
    assert!(summary.contains("variant a: 1000 trials"));
}

#[test]
fn hedged_density_of_the_example_has_its_atom_at_zero() {
    let out = cdsbound(&["density", "--portfolio", "paper-example", "--hedged"]);
    assert!(out.status.success());
    let rows = records(&stdout(&out));
    let atoms: Vec<_> = rows.iter().filter(|r| r[0] == "atom").collect();
    assert_eq!(atoms.len(), 1);
    assert!(num(&atoms[0][3]).abs() < 1e-12);
    assert!((num(&atoms[0][4]) - 0.1537).abs() < 1e-4);
    assert_eq!(rows.iter().filter(|r| r[0] == "bin").count(), 400);
    let total: f64 = rows.iter().map(|r| num(&r[4])).sum();
    assert!((total - 1.0).abs() < 1e-6);

    let out = cdsbound(&["density", "--unhedged", "--pnl"]);
    assert!(out.status.success());
    let rows = records(&stdout(&out));
    let lowest = rows
        .iter()
        .filter(|r| r[0] == "bin" && num(&r[4]) > 0.0)
        .map(|r| num(&r[1]))
        .next()
        .unwrap();
    assert!((lowest + 1.859).abs() < 0.02, "lowest bin edge {lowest}");
}

#[test]
fn json_output_and_value_command() {
    let out = cdsbound(&["value", "--format", "json"]);
    assert!(out.status.success());
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let field = |name: &str| {
        doc["rows"]
            .as_array()
            .unwrap()
            .iter()
            .find(|r| r["field"] == name)
            .unwrap()["value"]
            .clone()
    };
    assert_eq!(field("status"), "optimal");
    assert!((field("max_loss").as_f64().unwrap() - 0.4235).abs() < 1e-3);
    assert_eq!(doc["command"], "value");
}

#[test]
fn spectrum_needs_constant_recovery() {
    let refused = cdsbound(&["spectrum"]);
    assert_eq!(refused.status.code(), Some(1));
    let out = cdsbound(&["spectrum", "--recovery", "0.4", "--unhedged"]);
    assert!(out.status.success());
    let rows = records(&stdout(&out));
    assert_eq!(rows.len(), 22);
    let total: f64 = rows.iter().map(|r| num(&r[3])).sum();
    assert!((total - 1.0).abs() < 1e-12);
}

#[test]
fn single_contract_hedge_reproduces_the_ask_bound() {
    let out = cdsbound(&["hedge", "--portfolio", "single:14:-1"]);
    assert!(out.status.success());
    let rows = records(&stdout(&out));
    let cost = rows.iter().find(|r| r[0] == "cost").unwrap();
    assert!((num(&cost[1]) - 0.2370).abs() < 5e-4);
    let vanilla = records(&stdout(&cdsbound(&["vanilla"])));
    assert_eq!(vanilla[13][2], "17");
    assert_eq!(vanilla[13][4], "13");
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(
        cdsbound(&["bounds", "--no-such-flag"]).status.code(),
        Some(1)
    );
    assert_eq!(
        cdsbound(&["hedge", "--portfolio", "single:99:1"])
            .status
            .code(),
        Some(1)
    );
    let bad = write_config(dir.path(), "[measure]\npd1 = 2.0\n");
    assert_eq!(
        cdsbound(&["bounds", "--config", &bad]).status.code(),
        Some(1)
    );
    assert_eq!(
        cdsbound(&["bounds", "--config", "/no/such/file.toml"])
            .status
            .code(),
        Some(1)
    );
    assert!(cdsbound(&["--help"]).status.success());

    // A negative upfront is an arbitrage: the hedge reports it, the density cannot be built.
    let arbitrage = write_config(
        dir.path(),
        "[market]\nquotes = [[5, 5.25], [9, -50.0], [13, 18.08], [17, 21.56], [21, 24.05]]\n",
    );
    let out = cdsbound(&["hedge", "--config", &arbitrage]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("status,unbounded"));
    assert!(String::from_utf8(out.stderr).unwrap().contains("unbounded"));
    assert_eq!(
        cdsbound(&["density", "--config", &arbitrage]).status.code(),
        Some(2)
    );
}
