use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn josephus(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_josephus"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn read(dir: &Path, name: &str) -> Vec<u8> {
    fs::read(dir.join(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

#[test]
fn det_prints_one_line() {
    let o = josephus(&["det", "--n", "41"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "19\n");
    let o = josephus(&["det", "--n-min", "1", "--n-max", "6"]);
    assert_eq!(stdout(&o), "N,b_N\n1,1\n2,1\n3,3\n4,1\n5,3\n6,5\n");
}

#[test]
fn exit_codes() {
    assert_eq!(josephus(&["det", "--n", "0"]).status.code(), Some(2));
    assert_eq!(josephus(&["exact", "--rule", "r1", "--n", "2", "--p", "0.5"]).status.code(), Some(2));
    assert_eq!(josephus(&["exact", "--rule", "r1", "--n", "5", "--p", "1.5"]).status.code(), Some(2));
    assert_eq!(
        josephus(&["exact", "--rule", "r2", "--n", "5", "--p", "0.4", "--paper-literal"]).status.code(),
        Some(2)
    );
    assert_eq!(josephus(&["oracle", "--rule", "r3", "--n", "13", "--p-num", "1", "--p-den", "2", "--q-num", "1", "--q-den", "2"]).status.code(), Some(2));
    assert_eq!(josephus(&["decay", "--p", "0.2"]).status.code(), Some(2));
    assert_eq!(josephus(&["decay", "--unbiased", "--alpha", "1.2", "--n-max", "50"]).status.code(), Some(2));
    assert_eq!(josephus(&["decay", "--p", "0.5", "--n-max", "100"]).status.code(), Some(0));
}

#[test]
fn csv_schema() {
    let o = josephus(&["exact", "--rule", "r1", "--n", "4", "--p", "0.5"]);
    assert_eq!(stdout(&o), "n,prob\n0,0.5\n1,0.25\n2,0\n3,0.25\n");
    let o = josephus(&["oracle", "--rule", "r1", "--n", "4", "--p-num", "1", "--p-den", "2"]);
    assert_eq!(stdout(&o), "n,num,den\n0,1,2\n1,1,4\n2,0,1\n3,1,4\n");
    let o = josephus(&["simulate", "--rule", "deterministic", "--n", "41", "--samples", "3"]);
    let text = stdout(&o);
    assert!(text.starts_with("n,count,freq\n"));
    assert!(text.contains("\n18,3,1\n"));
    assert!(!text.contains('\r'));
}

#[test]
fn exact_outputs_are_byte_identical() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for dir in [a.path(), b.path()] {
        let o = josephus(&["figure", "r3", "--n", "300", "--out", dir.to_str().unwrap(), "--seed", "9"]);
        assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    }
    for name in ["figure_r3_p0.5_q0.75.csv", "figure.manifest.json", "figure.config.toml"] {
        assert_eq!(read(a.path(), name), read(b.path(), name), "{name}");
    }
}

#[test]
fn monte_carlo_counts_reproduce_across_thread_counts() {
    let base = ["simulate", "--rule", "r1", "--p", "0.5", "--n", "200", "--samples", "20000", "--seed", "77"];
    let one = josephus(&[&base[..], &["--threads", "1"]].concat());
    let four = josephus(&[&base[..], &["--threads", "4"]].concat());
    let again = josephus(&base);
    assert_eq!(one.status.code(), Some(0));
    assert_eq!(stdout(&one), stdout(&four));
    assert_eq!(stdout(&one), stdout(&again));
    let other = josephus(&["simulate", "--rule", "r1", "--p", "0.5", "--n", "200", "--samples", "20000", "--seed", "78"]);
    assert_ne!(stdout(&one), stdout(&other));
}

#[test]
fn embedded_config_reruns_to_the_same_bytes() {
    let first = tempfile::tempdir().unwrap();
    let second = tempfile::tempdir().unwrap();
    let o = josephus(&[
        "simulate", "--rule", "r3", "--p", "0.3", "--q", "0.7", "--n", "50", "--samples", "5000",
        "--seed", "123", "--format", "jsonl", "--out", first.path().to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let cfg = first.path().join("simulate.config.toml");
    let o = josephus(&["run", "--config", cfg.to_str().unwrap(), "--out", second.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    for name in ["simulate.jsonl", "simulate.manifest.json", "simulate.config.toml"] {
        assert_eq!(read(first.path(), name), read(second.path(), name), "{name}");
    }
}

#[test]
fn bad_config_is_a_domain_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("c.toml");
    fs::write(&path, "schema_version = 1\nseed = 1\n[command]\nname = \"det\"\nn = 5\ntypo = 1\n").unwrap();
    let o = josephus(&["run", "--config", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn clt_writes_records() {
    let dir = tempfile::tempdir().unwrap();
    let o = josephus(&[
        "clt", "--l-max", "200", "--trials", "1000", "--seed", "3", "--format", "jsonl",
        "--out", dir.path().to_str().unwrap(),
    ]);
    assert!(matches!(o.status.code(), Some(0) | Some(3)));
    let text = String::from_utf8(read(dir.path(), "clt.jsonl")).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 198 + 1);
    let last: serde_json::Value = serde_json::from_str(lines.last().unwrap()).unwrap();
    assert_eq!(last["record"], "ensemble");
    assert_eq!(last["normalized_sums"].as_array().unwrap().len(), 1000);
    // without --out, several files cannot go to stdout
    assert_eq!(josephus(&["clt", "--l-max", "50", "--trials", "1000"]).status.code(), Some(2));
}

#[test]
fn sweep_is_jsonl() {
    let o = josephus(&["sweep", "--p-grid", "0.5", "--n-values", "100,200", "--format", "jsonl"]);
    let text = stdout(&o);
    assert_eq!(text.lines().count(), 2);
    for line in text.lines() {
        let v: serde_json::Value = serde_json::from_str(line).unwrap();
        let (zero, half) = (v["mass_near_zero"].as_f64().unwrap(), v["mass_near_half"].as_f64().unwrap());
        assert!(half > 0.1 && zero < 1e-3, "{line}");
    }
}
