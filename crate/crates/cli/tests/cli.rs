use std::path::Path;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_symrestore")).args(args).output().expect("binary runs")
}

fn rows(out: &Output) -> Vec<(usize, String, f64)> {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let mut reader = csv::Reader::from_reader(out.stdout.as_slice());
    assert_eq!(reader.headers().unwrap(), vec!["step", "sector", "value"]);
    reader
        .records()
        .map(|r| {
            let r = r.unwrap();
            (r[0].parse().unwrap(), r[1].to_string(), r[2].parse().unwrap())
        })
        .collect()
}

#[test]
fn fig5_reaches_one_at_step_six() {
    let data = rows(&run(&["fig5", "--seed", "7"]));
    assert_eq!(data.len(), 31);
    let theta = std::f64::consts::PI / 26.0;
    for (n, _, p) in &data {
        assert!((p - ((2 * n + 1) as f64 * theta).sin().powi(2)).abs() < 1e-10);
    }
    assert!((data[6].2 - 1.0).abs() < 1e-10);
}

#[test]
fn fig6_ladder_shape() {
    let data = rows(&run(&["fig6"]));
    for (step, sector, p) in &data {
        let k: i64 = sector.parse().unwrap();
        if *step == 1 && k % 2 == 1 {
            assert_eq!(*p, 0.0, "sector {k}");
        }
        if *step == 4 {
            if k == 8 {
                assert!((p - 1.0).abs() < 1e-12);
            } else {
                assert!(*p < 1e-24, "sector {k}: {p:e}");
            }
        }
    }
    let amps = rows(&run(&["fig6", "--quantity", "amplitude"]));
    for ((_, _, p), (_, _, a)) in data.iter().zip(&amps) {
        assert!((a * a - p).abs() < 1e-15);
    }
}

#[test]
fn equivalence_sweep_is_tight() {
    let data = rows(&run(&["equivalence", "--qubits", "5", "--trials", "20"]));
    assert_eq!(data.iter().map(|r| r.0).max(), Some(19));
    assert!(data.iter().all(|(_, _, d)| *d < 1e-10));
    let parity = rows(&run(&["equivalence", "--kind", "parity", "--trials", "3"]));
    assert!(parity.iter().any(|(_, form, _)| form == "parity_closed"));
}

#[test]
fn outputs_are_reproducible() {
    for args in [&["bcs", "--seed", "3"][..], &["equivalence", "--seed", "9", "--trials", "4"], &["compare"]] {
        let a = run(args);
        let b = run(args);
        assert!(a.status.success());
        assert_eq!(a.stdout, b.stdout, "{args:?}");
    }
    assert_ne!(run(&["bcs", "--seed", "3"]).stdout, run(&["bcs", "--seed", "4"]).stdout);
}

#[test]
fn compare_reports_closed_forms() {
    let out = run(&["compare", "--qubits", "16"]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let by = |m: &str| v.as_array().unwrap().iter().find(|r| r["method"] == m).unwrap().clone();
    assert_eq!(by("qpe")["n_ancilla"], 4);
    assert_eq!(by("lcu")["n_ancilla"], 5);
    assert_eq!(by("postproc")["gives_projected_state"], false);
    assert_eq!(by("grover")["retained_probability"], "deterministic");
    let csv_rows = rows(&run(&["compare", "--format", "csv"]));
    assert!(csv_rows.iter().any(|(_, k, v)| k == "lcu.n_ancilla" && *v == 5.0));
}

#[test]
fn bcs_runs_every_method() {
    for method in ["postproc", "lcu", "grover", "hoyer", "qpe", "iqpe", "hadamard-oracle"] {
        let data = rows(&run(&["bcs", "--method", method, "--qubits", "6", "--target", "2"]));
        if method == "postproc" {
            let n = data.iter().find(|r| r.1 == "expectation_n").unwrap().2;
            assert!((n - 2.0).abs() < 1e-9);
            continue;
        }
        let after: Vec<_> = data.iter().filter(|r| r.0 == 1 && r.1.parse::<u32>().is_ok()).collect();
        assert_eq!(after.len(), 7);
        if method != "grover" {
            let inside = after.iter().find(|r| r.1 == "2").unwrap().2;
            assert!((inside - 1.0).abs() < 1e-10, "{method}: {inside}");
        }
    }
}

#[test]
fn config_file_and_flag_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(&cfg, r#"{"experiment": "fig5", "n_qubits": 8, "target": 4, "steps": 3, "seed": 7}"#).unwrap();
    let cfg_s = cfg.to_str().unwrap();
    assert_eq!(rows(&run(&["fig5", "--config", cfg_s])).len(), 4);
    assert_eq!(rows(&run(&["fig5", "--config", cfg_s, "--steps", "5"])).len(), 6);

    let out_path = dir.path().join("out.json");
    let out = run(&["fig5", "--config", cfg_s, "--format", "json", "--out", out_path.to_str().unwrap()]);
    assert!(out.status.success() && out.stdout.is_empty());
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(Path::new(&out_path)).unwrap()).unwrap();
    assert_eq!(v.as_array().unwrap().len(), 4);
    assert_eq!(v[0]["sector"], "4");
}

#[test]
fn bad_configs_exit_with_code_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(&cfg, r#"{"n_qubits": 4, "colour": "blue"}"#).unwrap();
    let cases: Vec<Vec<&str>> = vec![
        vec!["fig5", "--config", cfg.to_str().unwrap()],
        vec!["fig6", "--qubits", "0"],
        vec!["bcs", "--qubits", "5"],
        vec!["bcs", "--method", "teleport"],
        vec!["fig6", "--target", "40"],
        vec!["equivalence", "--kind", "s2"],
        vec!["bcs", "--method", "grover", "--mode", "sometimes"],
    ];
    for args in cases {
        let out = run(&args);
        assert_eq!(out.status.code(), Some(2), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
        assert!(!out.stderr.is_empty());
    }
    std::fs::write(&cfg, r#"{"experiment": "fig6"}"#).unwrap();
    assert_eq!(run(&["fig5", "--config", cfg.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn empty_sector_exits_with_code_three() {
    // Two-qubit-per-pair BCS states only hold even particle numbers.
    for method in ["lcu", "qpe", "iqpe", "hoyer", "hadamard-oracle", "postproc"] {
        let out = run(&["bcs", "--qubits", "6", "--target", "3", "--method", method]);
        assert_eq!(out.status.code(), Some(3), "{method}: {}", String::from_utf8_lossy(&out.stderr));
    }
}
