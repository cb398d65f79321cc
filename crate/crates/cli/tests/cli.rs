use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};

fn energylab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_energylab")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("energylab-cli-{}", std::process::id()));
    fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

#[test]
fn energy_of_truncated_log() {
    let o = energylab(&["energy", "--profile", "trunc:M=2", "--weight", "poly:p=2", "--n", "1"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).trim(), "1.4142136");
}

#[test]
fn capacity_energy_and_json_specs() {
    let o = energylab(&["jenergy", "--profile", r#"{"kind":"trunc","M":2}"#, "--weight", "poly:p=1"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).trim(), "1.4142136");
}

#[test]
fn kappa_for_polynomial_weight() {
    let out = scratch("kappa.json");
    let args = [
        "kappa", "--measure", "ma:trunc:M=2", "--weight", "poly:p=2", "--family", "trunc", "--budget", "200", "--out",
    ];
    let o = energylab(&[&args[..], &[out.to_str().unwrap()]].concat());
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(stdout(&o).trim(), "0.7071068");
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(&out).unwrap()).unwrap();
    assert!((v["best_ratio"].as_f64().unwrap() - 0.5f64.sqrt()).abs() < 1e-8);
    assert!(v["evaluations"].as_u64().unwrap() <= 200);
}

#[test]
fn verify_writes_one_line_per_check() {
    let out = scratch("report.jsonl");
    let csv = scratch("report.csv");
    let o = energylab(&[
        "verify", "--suite", "cap", "--n", "1", "--out", out.to_str().unwrap(), "--csv", csv.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let text = fs::read_to_string(&out).unwrap();
    let checks: usize = stdout(&o).lines().find_map(|l| l.strip_prefix("checks ")).unwrap().parse().unwrap();
    assert_eq!(text.lines().count(), checks);
    for line in text.lines() {
        let v: serde_json::Value = serde_json::from_str(line).unwrap();
        for field in ["name", "inputs", "lhs", "rhs", "margin", "pass", "diagnostics"] {
            assert!(v.get(field).is_some(), "{field} missing in {line}");
        }
    }
    let summary = fs::read_to_string(&csv).unwrap();
    assert!(summary.starts_with("name,lhs,rhs,margin,pass"));
    assert_eq!(summary.lines().count(), checks + 1);
}

#[test]
fn identical_runs_give_identical_files() {
    let a = scratch("fit-a.json");
    let b = scratch("fit-b.json");
    for path in [&a, &b] {
        let o = energylab(&[
            "fit", "--measure", "density:scale=2,rate=2", "--weight", "exp", "--family", "power", "--samples", "5", "--out",
            path.to_str().unwrap(),
        ]);
        assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    }
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
}

#[test]
fn solve_reads_a_measure_table() {
    let table = scratch("measure.csv");
    fs::write(&table, "s,m\n-2,0\n-2,1\n0,1\n").unwrap();
    let plot = scratch("solve.csv");
    let o = energylab(&[
        "solve", "--measure-file", table.to_str().unwrap(), "--weight", "poly:p=1", "--csv", plot.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    assert!(text.contains("lower_limit -2.0000000"), "{text}");
    assert!(text.contains("energy 2.0000000"), "{text}");
    assert!(fs::read_to_string(&plot).unwrap().starts_with("x,y,series"));
}

#[test]
fn subextension_slope() {
    let o = energylab(&["subext", "--profile", "trunc:M=2", "--log-r", "1", "--weight", "poly:p=1"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.contains("slope 0.6666667") && text.contains("subextension_energy 1.3333333"), "{text}");
}

#[test]
fn bedford_reports_both_branches() {
    let o = energylab(&["bedford", "--profile", "trunc:M=2"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).lines().filter(|l| l.starts_with("energy ")).count(), 4);
    let o = energylab(&["bedford", "--profile", "iterlog:k=1"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).lines().filter(|l| l.starts_with("probe ")).all(|l| l.ends_with("exceeded=true")));
}

#[test]
fn input_errors_exit_2_with_json_diagnostics() {
    for args in [
        &["energy", "--profile", "trunc:M=-1", "--weight", "poly:p=1"][..],
        &["energy", "--profile", "nonsense:", "--weight", "poly:p=1"][..],
        &["energy", "--profile", "trunc:M=2", "--weight", "poly:p=0.5"][..],
        &["energy", "--profile", "trunc:M=2", "--weight", "poly:p=1", "--n", "0"][..],
        &["verify", "--suite", "nope"][..],
        &["kappa", "--weight", "exp", "--family", "trunc"][..],
        &["solve", "--measure-file", "/nonexistent/measure.csv"][..],
        &["energy", "--profile", "trunc:M=2"][..],
    ] {
        let o = energylab(args);
        assert_eq!(o.status.code(), Some(2), "{args:?}");
        let err = String::from_utf8_lossy(&o.stderr);
        let v: serde_json::Value = serde_json::from_str(err.lines().last().unwrap()).unwrap();
        assert_eq!(v["exit_code"], 2);
        assert_eq!(v["error"], "input_error");
    }
}

#[test]
fn infinite_energy_prints_inf() {
    let o = energylab(&["energy", "--profile", "log", "--weight", "poly:p=1"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).trim(), "inf");
}

#[test]
fn quadrature_tolerance_is_validated() {
    let o = energylab(&["energy", "--profile", "trunc:M=2", "--weight", "exp", "--quad-rel-tol", "-1"]);
    assert_eq!(o.status.code(), Some(2));
    let o = energylab(&["energy", "--profile", "trunc:M=2", "--weight", "exp", "--quad-rel-tol", "1e-8"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).trim(), "2.8853901");
}
