use std::path::Path;
use std::process::{Command, Output};

use bbm_core::io::{read_table, read_wave};

fn bbm(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bbm")).args(args).output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn table(p: &Path) -> bbm_core::io::Table {
    read_table(std::fs::File::open(p).unwrap()).unwrap()
}

#[test]
fn converge_writes_rows_rates_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("c");
    let o = bbm(&[
        "converge",
        "--bc",
        "reflective",
        "--scheme",
        "standard",
        "--r",
        "3",
        "--dx",
        "0.1,0.05",
        "--T",
        "1",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let t = table(&out.join("convergence.csv"));
    assert_eq!(t.header.len(), 13);
    assert_eq!(t.header[0], "dx");
    assert_eq!(t.rows.len(), 2);
    assert!(t.rows[0][2].is_nan());
    assert!((t.rows[1][2] - 4.0).abs() < 0.1);
    let m: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(out.join("run.json")).unwrap()).unwrap();
    assert_eq!(m["config"]["scheme"], "standard");
    assert_eq!(m["config"]["r"], 3);
    assert!(m["wall_time_s"].as_f64().unwrap() >= 0.0);
    assert!(out.join("schema.txt").exists() && out.join("convergence.gp").exists());
}

#[test]
fn petviashvili_then_seeded_solitary_run() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("p");
    let o = bbm(&[
        "petviashvili",
        "--cs",
        "sqrt1.6",
        "--domain",
        "-20:20",
        "--r",
        "2",
        "--out",
        p.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let res = table(&p.join("residuals.csv"));
    assert!(*res.column("residual").unwrap().last().unwrap() < 1e-10);
    let wave = p.join("wave.csv");
    let w = read_wave(&std::fs::read_to_string(&wave).unwrap()).unwrap();
    assert_eq!(w.c_s, 1.6f64.sqrt());

    let s = dir.path().join("s");
    let o = bbm(&[
        "solitary",
        "--seed-wave",
        wave.to_str().unwrap(),
        "--r",
        "2",
        "--T",
        "2",
        "--out",
        s.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let inv = table(&s.join("invariants.csv"));
    assert_eq!(inv.header, ["t", "mass", "momentum", "impulse", "energy", "gamma"]);
    let e = inv.column("energy").unwrap();
    assert!(e.iter().all(|v| (v - e[0]).abs() < 1e-13));
    assert!(*inv.column("t").unwrap().last().unwrap() >= 2.0 - 1e-9);
    let o = bbm(&[
        "check",
        "--read",
        s.join("track.csv").to_str().unwrap(),
        wave.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0);
}

#[test]
fn config_file_and_flag_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "# coarse run\nr = 1\ndx = 0.2,0.1\nbc = periodic\n").unwrap();
    let out = dir.path().join("o");
    let o = bbm(&[
        "converge",
        "--config",
        cfg.to_str().unwrap(),
        "--r",
        "2",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let m: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(out.join("run.json")).unwrap()).unwrap();
    assert_eq!(m["config"]["r"], 2);
    assert_eq!(m["config"]["bc"], "periodic");
    assert_eq!(table(&out.join("convergence.csv")).rows.len(), 2);
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(code(&bbm(&["solitary", "--bogus", "1"])), 1);
    assert_eq!(code(&bbm(&["converge", "--cs", "2"])), 1);
    assert_eq!(code(&bbm(&["converge", "--r", "7"])), 1);
    assert_eq!(code(&bbm(&["converge", "--dx", "0.3"])), 1);
    assert_eq!(code(&bbm(&["converge", "--dt", "0.01"])), 1);
    assert_eq!(code(&bbm(&["frobnicate"])), 1);
    assert_eq!(code(&bbm(&["--help"])), 0);
}

#[test]
fn numerical_and_io_failures_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let o = bbm(&[
        "solitary",
        "--dt",
        "2.5",
        "--T",
        "20",
        "--out",
        dir.path().join("u").to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("relaxation"));
    let blocker = dir.path().join("file");
    std::fs::write(&blocker, "x").unwrap();
    let o = bbm(&["reflect", "--T", "1", "--out", blocker.join("sub").to_str().unwrap()]);
    assert_eq!(code(&o), 2);
    let bad = dir.path().join("bad.csv");
    std::fs::write(&bad, "a,b\n1,zz\n").unwrap();
    assert_eq!(code(&bbm(&["check", "--read", bad.to_str().unwrap()])), 1);
}
