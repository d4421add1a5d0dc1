use std::path::Path;
use std::process::{Command, Output};

use proptest::prelude::*;
use serde_json::Value;
use torus_sr_cli::{ExperimentConfig, EXIT_FAILED, EXIT_OK, EXIT_USAGE};

fn bin(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_torus-sr"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn stdout_json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).expect("json on stdout")
}

fn read_json(p: &Path) -> Value {
    serde_json::from_slice(&std::fs::read(p).unwrap()).unwrap()
}

fn clause<'a>(v: &'a Value, name: &str) -> &'a Value {
    v["result"]["clauses"]
        .as_array()
        .unwrap()
        .iter()
        .find(|c| c["name"] == name)
        .unwrap_or_else(|| panic!("no clause {name}"))
}

#[test]
fn verify_grid_pair() {
    let o = bin(&["verify", "--construction", "grid", "--d", "2", "--epsilon", "0.1"]);
    assert_eq!(code(&o), EXIT_OK);
    let v = stdout_json(&o);
    assert!(clause(&v, "max_fourier_diff")["measured"].as_f64().unwrap() <= 1e-10);
    assert!(clause(&v, "wasserstein")["measured"].as_f64().unwrap() >= 0.1 - 1e-9);
    assert_eq!(v["result"]["passed"], true);
}

#[test]
fn unknown_flag_is_usage_error() {
    assert_eq!(code(&bin(&["gen", "--construction", "grid", "--epsilon", "0.1", "--bogus"])), EXIT_USAGE);
    assert_eq!(code(&bin(&["frobnicate"])), EXIT_USAGE);
    assert_eq!(code(&bin(&["gen", "--construction", "grid"])), EXIT_USAGE);
    let o = bin(&["gen", "--construction", "grid", "--epsilon", "0.1", "--bogus"]);
    assert!(String::from_utf8_lossy(&o.stderr).contains("--bogus"));
}

#[test]
fn help_exits_cleanly() {
    assert_eq!(code(&bin(&["--help"])), EXIT_OK);
}

#[test]
fn bad_parameter_value_is_usage_error() {
    assert_eq!(code(&bin(&["gen", "--construction", "onedim", "--epsilon", "0.3"])), EXIT_USAGE);
    assert_eq!(code(&bin(&["gen", "--construction", "cube", "--d", "30", "--epsilon", "0.1"])), EXIT_USAGE);
    assert_eq!(
        code(&bin(&["--format", "csv", "gen", "--construction", "grid", "--epsilon", "0.1"])),
        EXIT_USAGE
    );
}

#[test]
fn onedim_files_give_epsilon() {
    let dir = tempfile::tempdir().unwrap();
    let pair = dir.path().join("pair.json");
    let p = pair.to_str().unwrap();
    let o = bin(&["--output", p, "gen", "--construction", "onedim", "--epsilon", "0.1"]);
    assert_eq!(code(&o), EXIT_OK);
    assert!(dir.path().join("pair.json.meta.json").exists());

    let o = bin(&["distance", "--metric", "wasserstein", "--input", p]);
    assert_eq!(code(&o), EXIT_OK);
    assert!((stdout_json(&o)["result"]["value"].as_f64().unwrap() - 0.1).abs() < 1e-9);

    let o = bin(&["distance", "--metric", "hh", "--input", p, "--eps-dist", "0.49"]);
    let v = stdout_json(&o);
    assert!((v["result"]["interval"]["lower"].as_f64().unwrap() - 0.2).abs() < 1e-6);
    assert!((v["result"]["interval"]["upper"].as_f64().unwrap() - 0.2).abs() < 1e-6);

    let o = bin(&["verify", "--construction", "onedim", "--epsilon", "0.1", "--input", p]);
    assert_eq!(code(&o), EXIT_OK);
    let o = bin(&["verify", "--construction", "grid", "--epsilon", "0.1", "--input", p]);
    assert_eq!(code(&o), EXIT_USAGE);
}

#[test]
fn separate_comb_files() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    std::fs::write(&a, r#"{"dim":1,"points":[[0.0]],"weights":[1.0]}"#).unwrap();
    std::fs::write(&b, r#"{"dim":1,"points":[[0.25]],"weights":[1.0]}"#).unwrap();
    let o = bin(&[
        "distance",
        "--metric",
        "wasserstein",
        "--first",
        a.to_str().unwrap(),
        "--second",
        b.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), EXIT_OK);
    assert!((stdout_json(&o)["result"]["value"].as_f64().unwrap() - 0.25).abs() < 1e-9);
}

#[test]
fn same_seed_same_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("pair.json");
    let run = |seed: &str| {
        let o = bin(&[
            "--seed", seed, "--output", path.to_str().unwrap(), "gen", "--construction", "random",
            "--d", "2", "--epsilon", "0.01", "--m", "4", "--n", "2", "--kappa", "2.5",
        ]);
        assert_eq!(code(&o), EXIT_OK, "{}", String::from_utf8_lossy(&o.stderr));
        std::fs::read(&path).unwrap()
    };
    let a = run("5");
    let b = run("5");
    let c = run("6");
    assert_eq!(a, b);
    assert_ne!(a, c);
}

#[test]
fn reports_embed_effective_parameters() {
    let o = bin(&["bump", "--d", "4", "--epsilon", "0.25"]);
    assert_eq!(code(&o), EXIT_OK);
    let v = stdout_json(&o);
    let cmd = &v["config"]["command"];
    assert_eq!(cmd["name"], "bump");
    assert_eq!(cmd["eps_dist"], 0.49);
    assert_eq!(cmd["regime"], "far");
    assert_eq!(cmd["samples"], 10000);
    assert_eq!(v["config"]["seed"], 0);
    assert_eq!(v["result"]["k"], 85);
}

#[test]
fn bump_verification() {
    let o = bin(&["bump", "--d", "4", "--epsilon", "0.25", "--verify", "--samples", "2000"]);
    assert_eq!(code(&o), EXIT_OK);
    let v = stdout_json(&o);
    let checks = v["result"]["checks"].as_array().unwrap();
    assert_eq!(checks.len(), 3);
    assert!(checks.iter().all(|c| c["passed"] == true));
    assert!(v["result"]["achieved_error"].as_f64().unwrap() < 1.0 / 3.0 + 1e-9);
}

#[test]
fn failed_construction_exits_one() {
    let o = bin(&[
        "verify", "--construction", "random", "--d", "1", "--epsilon", "0.05", "--m", "64", "--n",
        "8", "--kappa", "0.5", "--retries", "3",
    ]);
    assert_eq!(code(&o), EXIT_FAILED);
    assert!(String::from_utf8_lossy(&o.stderr).contains("separation"));
}

#[test]
fn cube_pair_round_trip_through_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("cube.json");
    let p = path.to_str().unwrap();
    let o = bin(&["--output", p, "gen", "--construction", "cube", "--d", "10", "--epsilon", "0.01", "--k", "2"]);
    assert_eq!(code(&o), EXIT_OK);
    let stored = read_json(&path);
    assert_eq!(stored["result"]["first"]["points"].as_array().unwrap().len(), 1024);
    let o = bin(&["verify", "--construction", "cube", "--epsilon", "0.01", "--input", p]);
    assert_eq!(code(&o), EXIT_OK, "{}", String::from_utf8_lossy(&o.stderr));
    let v = stdout_json(&o);
    assert!(clause(&v, "embedding_identity_error")["measured"].as_f64().unwrap() <= 1e-10);
}

#[test]
fn csv_sweep() {
    let o = bin(&[
        "--format", "csv", "report", "--kind", "grid", "--d-values", "1,2", "--eps-values", "0.1,0.2",
    ]);
    assert_eq!(code(&o), EXIT_OK);
    let text = String::from_utf8(o.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "d,epsilon,side,atoms,max_fourier_diff,min_cross_distance,wasserstein,pass");
    assert_eq!(lines.len(), 5);
    assert!(lines[3].starts_with("2,0.1,7,49,"));
    assert!(lines[1..].iter().all(|l| l.ends_with(",true")));
}

#[test]
fn reconstruct_random_signal() {
    let o = bin(&[
        "--seed", "4", "reconstruct", "--epsilon", "0.25", "--bandlimit", "24", "--jackson-n", "4",
        "--grid-k", "64", "--kappa", "0.01", "--noise-level", "0.00125",
    ]);
    assert_eq!(code(&o), EXIT_OK, "{}", String::from_utf8_lossy(&o.stderr));
    let v = stdout_json(&o);
    assert!(v["result"]["wasserstein_to_input"].as_f64().unwrap() <= 1.0);
    let over = v["result"]["params"]["overridden"].as_array().unwrap();
    assert_eq!(over.len(), 4);
}

#[test]
fn config_round_trip_examples() {
    let argvs: &[&[&str]] = &[
        &["torus-sr", "gen", "--construction", "cube", "--d", "30", "--epsilon", "0.005"],
        &["torus-sr", "--seed", "9", "reconstruct", "--epsilon", "0.25", "--mode", "distribution"],
        &["torus-sr", "distance", "--metric", "hh", "--first", "a", "--second", "b"],
        &["torus-sr", "--format", "csv", "report", "--kind", "bump", "--d-values", "4,16", "--eps-values", "0.25"],
        &["torus-sr", "verify", "--construction", "grid", "--epsilon", "0.1", "--input", "p.json"],
    ];
    for argv in argvs {
        let c = ExperimentConfig::parse_from(*argv).unwrap();
        let s = serde_json::to_string(&c).unwrap();
        let back: ExperimentConfig = serde_json::from_str(&s).unwrap();
        assert_eq!(back, c);
    }
}

proptest! {
    #[test]
    fn config_round_trips(seed in any::<u64>(), eps in 1e-9f64..0.5, d in 1usize..64, kappa in proptest::option::of(1e-12f64..1.0)) {
        let mut argv = vec![
            "torus-sr".to_string(), "--seed".into(), seed.to_string(), "bump".into(),
            "--d".into(), d.to_string(), "--epsilon".into(), format!("{eps:e}"),
        ];
        let c = ExperimentConfig::parse_from(&argv).unwrap();
        let back: ExperimentConfig = serde_json::from_str(&serde_json::to_string(&c).unwrap()).unwrap();
        prop_assert_eq!(back, c);

        argv.truncate(3);
        argv.extend(["reconstruct".into(), "--epsilon".into(), format!("{eps:e}")]);
        if let Some(k) = kappa {
            argv.extend(["--kappa".into(), format!("{k:e}")]);
        }
        let c = ExperimentConfig::parse_from(&argv).unwrap();
        let back: ExperimentConfig = serde_json::from_str(&serde_json::to_string(&c).unwrap()).unwrap();
        prop_assert_eq!(back, c);
    }
}
