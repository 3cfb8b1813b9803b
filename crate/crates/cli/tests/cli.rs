use std::path::Path;
use std::process::{Command, Output};

fn pxp(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pxp"))
        .args(args)
        .env_remove("PXP_CACHE_DIR")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn read(dir: &Path, name: &str) -> String {
    std::fs::read_to_string(dir.join(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

fn rows(csv: &str) -> Vec<Vec<String>> {
    csv.lines().map(|l| l.split(',').map(str::to_string).collect()).collect()
}

#[test]
fn dims_prints_table_values() {
    let o = pxp(&["dims", "--legs", "2", "--L", "10"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o).trim(), "N=20 dim=6727 k0=1351");
}

#[test]
fn quench_trace_starts_with_unit_fidelity() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = pxp(&["quench", "--L", "8", "--delta", "1", "--init", "Z2", "--tmax", "100", "--out", out]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = read(dir.path(), "quench_N16_delta1_Z2.csv");
    let rows = rows(&csv);
    assert!(rows[0].starts_with(&["t".into(), "fidelity".into(), "shannon".into(), "mz_density".into()]));
    assert_eq!(rows[1][0], "0");
    assert_eq!(rows[1][1], "1");
    assert_eq!(rows.len(), 2 + 2000);
    let sidecar: serde_json::Value = serde_json::from_str(&read(dir.path(), "quench_N16_delta1_Z2.csv.json")).unwrap();
    assert_eq!(sidecar["command"], "quench");
    assert_eq!(sidecar["config_hash"].as_str().unwrap().len(), 64);
    assert!(sidecar["diagnostics"]["diagnostics"]["rk4"]["max_norm_deviation"].as_f64().unwrap() < 1e-6);
}

#[test]
fn sweep_vanishes_at_zero_detuning() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = pxp(&["imbalance-sweep", "--L", "8", "--delta", "0:1:0.1", "--out", out]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = read(dir.path(), "imbalance_sweep_N16.csv");
    let rows = rows(&csv);
    assert_eq!(rows[0].join(","), "N,delta,operator,initial_state,total,nonzero_part,zero_part");
    assert_eq!(rows.len(), 1 + 3 * 11);
    let at_zero: Vec<f64> = rows[1..]
        .iter()
        .filter(|r| r[1] == "0")
        .map(|r| r[4].parse().unwrap())
        .collect();
    assert_eq!(at_zero.len(), 3);
    // Both Ix totals vanish at Δ=0. The Iz total keeps a finite-size
    // zero-energy remainder of about 6.5e-5 at N=16, so only its
    // nonzero-mode part is held to the bound.
    for (r, v) in rows[1..].iter().filter(|r| r[1] == "0").zip(&at_zero) {
        if r[2] == "Iz_Z2" {
            let nonzero: f64 = r[5].parse().unwrap();
            assert!(nonzero.abs() < 1e-6, "{r:?}");
            assert!(v.abs() < 1e-4, "{r:?}");
        } else {
            assert!(v.abs() < 1e-6, "{r:?}");
        }
    }
}

#[test]
fn reruns_are_byte_identical() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for dir in [&a, &b] {
        let o = pxp(&["quench", "--L", "4", "--delta", "0.5", "--init", "vac", "--tmax", "3", "--out", dir.path().to_str().unwrap()]);
        assert!(o.status.success());
    }
    for name in ["quench_N8_delta0.5_vac.csv", "quench_N8_delta0.5_vac.csv.json"] {
        assert_eq!(read(a.path(), name), read(b.path(), name));
    }
}

#[test]
fn flags_override_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    std::fs::write(&cfg, r#"{"L": 6, "delta": "0.3", "init": "vac", "tmax": 1.0}"#).unwrap();
    let out = dir.path().to_str().unwrap();
    let o = pxp(&["quench", "--config", cfg.to_str().unwrap(), "--L", "4", "--out", out]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = read(dir.path(), "quench_N8_delta0.3_vac.csv");
    assert_eq!(csv.lines().count(), 1 + 21);
}

#[test]
fn exit_codes() {
    let o = pxp(&["dims", "--L", "3"]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert_eq!(err.lines().count(), 1);
    assert!(err.starts_with("error: code=2 kind=config"));

    assert_eq!(pxp(&["quench", "--L", "4", "--init", "nonsense"]).status.code(), Some(2));
    assert_eq!(pxp(&["quench", "--L", "4", "--dt", "-1"]).status.code(), Some(2));
    assert_eq!(pxp(&["imbalance-sweep", "--L", "4", "--delta", "1:0:0.1"]).status.code(), Some(2));
    assert_eq!(pxp(&["bogus"]).status.code(), Some(2));

    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.json");
    std::fs::write(&cfg, r#"{"L": 4, "unknown": 1}"#).unwrap();
    assert_eq!(pxp(&["dims", "--config", cfg.to_str().unwrap()]).status.code(), Some(2));

    // Dense diagonalization of N=32 exceeds the cap.
    let o = pxp(&["spectrum", "--L", "16", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("kind=capacity"));
}

#[test]
fn plaquette_tables() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = pxp(&["plaquette", "--r", "0.5", "--tmax", "1", "--out", out]);
    assert!(o.status.success());
    let steady = rows(&read(dir.path(), "plaquette_steady.csv"));
    assert_eq!(steady[0].join(","), "r,iz_z2,ix_z2,ix_vac");
    assert_eq!(steady[1], vec!["0.5", "1.2", "0.284444444444", "0.32"]);
    let coeffs = rows(&read(dir.path(), "plaquette_coefficients_Z2.csv"));
    assert_eq!(coeffs[0].join(","), "t,c0,c1,c2,c3,c4,c5,c6");
    let first: Vec<f64> = coeffs[1].iter().map(|x| x.parse().unwrap()).collect();
    for (k, v) in first.iter().enumerate() {
        // Column 0 is t; c5 sits in column 6.
        let expect = if k == 6 { 1.0 } else { 0.0 };
        assert!((v - expect).abs() < 1e-15, "column {k}: {v}");
    }
    let vac = rows(&read(dir.path(), "plaquette_coefficients_vac.csv"));
    assert_eq!(vac[1][1], "1");
}

#[test]
fn spectrum_uses_cache() {
    let dir = tempfile::tempdir().unwrap();
    let cache = dir.path().join("cache");
    let out = dir.path().join("out");
    let run = || {
        Command::new(env!("CARGO_BIN_EXE_pxp"))
            .args(["spectrum", "--L", "4", "--delta", "0.5", "--out", out.to_str().unwrap()])
            .env("PXP_CACHE_DIR", &cache)
            .output()
            .unwrap()
    };
    assert!(run().status.success());
    let first = read(&out, "spectrum_N8_delta0.5.csv");
    assert_eq!(std::fs::read_dir(&cache).unwrap().count(), 1);
    assert!(run().status.success());
    assert_eq!(read(&out, "spectrum_N8_delta0.5.csv"), first);
    let rows = rows(&first);
    assert_eq!(rows[0].join(","), "index,energy,shannon");
    assert_eq!(rows.len(), 1 + 35);
}

#[test]
fn zero_modes_towers_and_entanglement() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = pxp(&["zero-modes", "--L", "6", "--out", out]);
    assert!(o.status.success());
    assert_eq!(stdout(&o).trim(), "N=12 zero_modes=6");
    let o = pxp(&["towers", "--L", "8", "--delta", "1", "--init", "vac", "--out", out]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("E*=2.91"), "{}", stdout(&o));
    let o = pxp(&["entanglement", "--L", "4", "--delta", "1", "--out", out]);
    assert!(o.status.success());
    assert_eq!(read(dir.path(), "entanglement_N8_delta1.csv").lines().count(), 1 + 35);
}
