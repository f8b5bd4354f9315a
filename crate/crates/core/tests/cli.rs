use std::process::Command;

use besq_core::cli::{read_path_csv, write_path_csv};
use besq_core::sde::{simulate_particles, simulate_polys, RngSpec, SimulationGrid};
use besq_core::sympoly::elementary_all;
use besq_core::{ParticleConfig, SystemParams};

fn besq(args: &[&str]) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_besq")).args(args).output().unwrap();
    (
        out.status.code().unwrap(),
        String::from_utf8(out.stdout).unwrap(),
        String::from_utf8(out.stderr).unwrap(),
    )
}

#[test]
fn classify_prints_report() {
    let (code, out, _) = besq(&["classify", "--p", "3", "--alpha", "1", "--x0", "1,2,3"]);
    assert_eq!(code, 0);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["unique_strong"], true);
    for key in ["n_star", "rk_plus", "rk_minus", "rk", "nonneg_exists", "structure_n", "hits_zero", "goes_negative"] {
        assert!(v.get(key).is_some(), "{key}");
    }

    let (code, out, _) = besq(&["classify", "--p", "3", "--alpha", "1", "--x0", "0,0,1"]);
    assert_eq!(code, 0);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["unique_strong"], false);
    assert_eq!(v["n_star"], 2);
}

#[test]
fn zero_noise_simulation_ends_at_six() {
    let (code, out, _) = besq(&[
        "simulate", "--model", "particles", "--p", "1", "--alpha", "2", "--x0", "4", "--dt", "0.1", "--horizon", "1",
        "--seed", "0", "--zero-noise",
    ]);
    assert_eq!(code, 0);
    let (header, times, states) = read_path_csv(out.as_bytes()).unwrap();
    assert_eq!(header, vec!["t", "X1"]);
    assert_eq!(*times.last().unwrap(), 1.0);
    assert!((states.last().unwrap()[0] - 6.0).abs() < 1e-12);
}

#[test]
fn exit_codes() {
    assert_eq!(besq(&["verify", "--suite", "identities", "--p-max", "8", "--cases", "500", "--seed", "7"]).0, 0);
    let (code, _, err) = besq(&["classify", "--p", "3", "--alpha", "1", "--x0", "0,1"]);
    assert_eq!(code, 2);
    assert!(err.contains("x0 length 2 ≠ p 3"), "{err}");
    assert_eq!(besq(&["classify", "--p", "3", "--alpha", "1", "--x0", "0,1,2", "--frobnicate"]).0, 2);
    assert_eq!(besq(&["classify", "--p", "three", "--alpha", "1", "--x0", "0,1,2"]).0, 2);
    assert_eq!(besq(&["simulate", "--p", "2", "--alpha", "1", "--x0", "1,2"]).0, 2);
    // a start that is not non-negative is a precondition failure of the polynomial model
    assert_eq!(
        besq(&["simulate", "--model", "polys", "--p", "2", "--alpha", "3", "--x0", "-1,2", "--dt", "0.1", "--horizon", "1"]).0,
        2
    );
    assert_eq!(besq(&["--help"]).0, 0);
}

#[test]
fn numerical_abort_exits_three() {
    // a substep cap of one lets the huge drift overflow the state
    let (code, _, err) = besq(&[
        "simulate", "--p", "2", "--alpha", "1e305", "--x0", "1,2", "--dt", "1e10", "--horizon", "1e12", "--zero-noise",
    ]);
    assert_eq!(code, 3, "{err}");
}

#[test]
fn config_file_and_flag_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(
        &cfg,
        "command = simulate\nmodel = particles\np = 1\nalpha = 2\nx0 = 4\ndt = 0.5\nhorizon = 1\nzero-noise = true\n",
    )
    .unwrap();
    let (code, out, _) = besq(&["--config", cfg.to_str().unwrap(), "--dt", "0.25"]);
    assert_eq!(code, 0);
    let (_, times, _) = read_path_csv(out.as_bytes()).unwrap();
    assert_eq!(times, vec![0.0, 0.25, 0.5, 0.75, 1.0]);

    std::fs::write(&cfg, "command = classify\nwhatever = 3\n").unwrap();
    let (code, _, err) = besq(&["--config", cfg.to_str().unwrap()]);
    assert_eq!(code, 2);
    assert!(err.contains("whatever"));
}

#[test]
fn csv_output_and_events_sidecar() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("path.csv");
    let (code, _, _) = besq(&[
        "simulate", "--model", "non-unique", "--p", "3", "--alpha", "1", "--x0", "0,0,1", "--dt", "0.01", "--horizon",
        "0.2", "--seed", "3", "--output", file.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    let (header, times, states) = read_path_csv(std::fs::File::open(&file).unwrap()).unwrap();
    assert_eq!(header, vec!["t", "X1", "X2", "X3"]);
    assert_eq!(times.len(), 21);
    assert!(states.iter().all(|s| s[0] == 0.0 && s[1] == 0.0));
    let events: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("path.csv.events.json")).unwrap()).unwrap();
    assert_eq!(events["events"][0]["kind"], "hit_zero");
    assert_eq!(events["completed"], true);
    assert!((events["event_time_bias_max"].as_f64().unwrap() - 0.01).abs() < 1e-12);
}

#[test]
fn mc_is_thread_count_independent() {
    let base = ["mc", "--p", "2", "--alpha", "3", "--x0", "1,2", "--dt", "0.01", "--horizon", "0.2", "--reps", "40", "--stat", "e2"];
    let one = besq(&[&base[..], &["--threads", "1"]].concat());
    let four = besq(&[&base[..], &["--threads", "4"]].concat());
    assert_eq!(one.0, 0);
    assert_eq!(one.1, four.1);
    let v: serde_json::Value = serde_json::from_str(&one.1).unwrap();
    for key in ["estimate", "std_error", "ci95", "n_reps", "completion_rate"] {
        assert!(v.get(key).is_some(), "{key}");
    }
}

#[test]
fn csv_round_trip_is_exact() {
    let params = SystemParams::new(3, 2.5).unwrap();
    let x0 = ParticleConfig::new(vec![0.1, 1.0 / 3.0, 2.0]).unwrap();
    let grid = SimulationGrid::new(0.05, 1e-3).unwrap();
    for path in [
        simulate_particles(&params, &x0, &grid, &RngSpec::new(5, 0, 1)).unwrap(),
        simulate_polys(&params, &elementary_all(&x0), &grid, &RngSpec::new(5, 0, 3)).unwrap(),
    ] {
        let mut buf = Vec::new();
        write_path_csv(&path, &mut buf).unwrap();
        let (_, times, states) = read_path_csv(buf.as_slice()).unwrap();
        assert_eq!(times, path.times);
        assert_eq!(states, path.states);
    }
}
