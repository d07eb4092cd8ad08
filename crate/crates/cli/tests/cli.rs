use std::path::PathBuf;
use std::process::{Command, Output};

fn root() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn spec(name: &str) -> String {
    root().join("specs").join(name).to_string_lossy().into_owned()
}

fn data(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(name).to_string_lossy().into_owned()
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_voronoi")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn roundtrip_desk_instance_exhaustive() {
    let o = run(&["roundtrip", "--spec", &spec("desk-e8.spec"), "--exhaustive"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).contains("65536/65536 ok"));
}

#[test]
fn roundtrip_two_dim_system() {
    let o = run(&["roundtrip", "--spec", &spec("rep2.spec")]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("8/8 ok"));
}

#[test]
fn roundtrip_rejects_non_nested_chain() {
    let o = run(&["roundtrip", "--spec", &data("bad-nesting.spec")]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("C_0 is not contained in C_1"), "{}", stderr(&o));
}

#[test]
fn builtin_specs_are_accepted() {
    let o = run(&["roundtrip", "--spec", "builtin:desk-cubic", "--trials", "500"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("500/500 ok"));
    let o = run(&["roundtrip", "--spec", "builtin:nope"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn shaping_gain_of_the_cube_is_zero() {
    let o = run(&["shaping-gain", "Zn(4)", "--trials", "20000", "--seed", "5"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    let row = out.lines().last().unwrap();
    let fields: Vec<&str> = row.split(',').collect();
    assert_eq!(fields[0], "Zn(4)");
    let gain: f64 = fields[4].parse().unwrap();
    let se: f64 = fields[5].parse().unwrap();
    assert!(gain.abs() < 4.0 * se + 1e-3, "{gain} +- {se}");
    assert!(out.contains("# samples: 20000, seed: 5"));
}

#[test]
fn shaping_gain_of_e8_is_positive() {
    let o = run(&["shaping-gain", "E8_int", "--trials", "50000"]);
    assert_eq!(o.status.code(), Some(0));
    let gain: f64 = stdout(&o).lines().last().unwrap().split(',').nth(4).unwrap().parse().unwrap();
    assert!((gain - 0.65).abs() < 0.05, "{gain}");
}

#[test]
fn shaping_gain_is_deterministic() {
    let a = run(&["shaping-gain", "Dn(4)", "--trials", "5000", "--seed", "9"]);
    let b = run(&["shaping-gain", "Dn(4)", "--trials", "5000", "--seed", "9"]);
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn wer_curve_is_monotone_and_reproducible() {
    let args = ["wer", "--spec", &spec("rep2.spec"), "--sweep", "0:12:3", "--trials", "4000", "--seed", "3"];
    let o = run(&args);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out = stdout(&o);
    assert!(out.contains("es_n0_db,wer,errors,trials,ci_low,ci_high"));
    let wers: Vec<f64> = out
        .lines()
        .filter(|l| !l.starts_with('#') && !l.starts_with("es_n0_db"))
        .map(|l| l.split(',').nth(1).unwrap().parse().unwrap())
        .collect();
    assert_eq!(wers.len(), 5);
    assert!(wers.windows(2).all(|w| w[1] <= w[0]), "{wers:?}");
    assert_eq!(run(&args).stdout, o.stdout);
}

#[test]
fn wer_paired_run_echoes_both_specs() {
    let o = run(&[
        "wer", "--spec", &spec("desk-cubic.spec"), "--spec", &spec("desk-e8.spec"), "--sweep", "8:10:2", "--trials", "1000",
        "--mode", "multistage",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out = stdout(&o);
    assert!(out.contains("desk-cubic.spec") && out.contains("desk-e8.spec"));
    assert_eq!(out.matches("seed: 1,").count(), 2);
}

#[test]
fn wer_rejects_empty_sweep() {
    let o = run(&["wer", "--spec", &spec("rep2.spec"), "--sweep", "5:1:1"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("empty sweep"));
    let o = run(&["wer", "--spec", &spec("rep2.spec"), "--sweep", "1:5"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn enumerate_small_systems() {
    let o = run(&["enumerate", "--spec", &spec("rep2.spec")]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.contains("# M = 8"));
    assert!(out.contains("# R = 1.5 bits/dim"));
    assert_eq!(out.lines().filter(|l| !l.starts_with('#')).count(), 8);
    let o = run(&["enumerate", "--spec", &spec("z2.spec"), "--oracle"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).lines().filter(|l| !l.starts_with('#')).count(), 4);
}

#[test]
fn enumerate_refuses_oversize_spec() {
    let o = run(&["enumerate", "--spec", &data("huge.spec")]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("above the limit"));
}

#[test]
fn bench_reports_matching_outputs() {
    let o = run(&["bench", "--spec", &spec("desk-e8.spec"), "--copies", "1,4", "--trials", "50"]);
    let out = stdout(&o);
    let rows: Vec<&str> = out.lines().filter(|l| !l.starts_with('#') && !l.starts_with("n,")).collect();
    assert_eq!(rows.len(), 2);
    assert!(rows.iter().all(|r| r.ends_with(",true")));
    assert!(rows[1].starts_with("32,"));
}

#[test]
fn usage_errors_exit_with_one() {
    assert_eq!(run(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(run(&["roundtrip"]).status.code(), Some(1));
    assert_eq!(run(&["--help"]).status.code(), Some(0));
}
