//! Binary-level tests: exit codes, output files, and seed handling.

use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_chanbench"));
    cmd.env_remove("WORKBENCH_SEED");
    cmd
}

fn run(args: &[&str]) -> Output {
    let mut cmd = bin();
    cmd.args(args);
    cmd.output().unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn write_decay_file(cal_dir: &Path) {
    std::fs::create_dir_all(cal_dir).unwrap();
    let decay = serde_json::json!({
        "band_ghz": 142.0,
        "condition": "los",
        "mode": "omnidirectional",
        "target_mu_ds_ns": 3.0,
        "calibration_drops": 0,
        "calibration_seed": 1,
        "decay": { "cluster_decay_ns": 9.0, "intra_decay_ns": 2.25, "void_mean_ns": 30.0 }
    });
    std::fs::write(
        cal_dir.join("decay.142.los.omnidirectional.json"),
        serde_json::to_string_pretty(&decay).unwrap(),
    )
    .unwrap();
}

#[test]
fn unknown_flag_exits_1() {
    let out = run(&["fit", "--no-such-flag"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn help_exits_0() {
    let out = run(&["--help"]);
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn fit_missing_input_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("fit.json");
    let out = run(&[
        "fit",
        "--input",
        "/nonexistent/file.csv",
        "--model",
        "ci",
        "--out",
        out_path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn fit_malformed_rows_exit_2_and_name_rows() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("meas.csv");
    std::fs::write(
        &csv,
        "f_ghz,d3d_m,pt_dbm,gt_dbi,gr_dbi,pr_dbm,gsym_db,condition,mode\n\
         142.0,10.0,0.0,0.0,0.0,-92.85,0.0,los,omnidirectional\n\
         142.0,not_a_number,0.0,0.0,0.0,-92.85,0.0,los,omnidirectional\n",
    )
    .unwrap();
    let out_path = dir.path().join("fit.json");
    let out = run(&[
        "fit",
        "--input",
        csv.to_str().unwrap(),
        "--model",
        "ci",
        "--out",
        out_path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("row 2"), "{}", stderr(&out));
}

#[test]
fn fit_recovers_noiseless_exponent() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("meas.csv");
    // Noiseless CI data at 142 GHz with n = 1.74: PL = 75.45 + 17.4 log10(d).
    let mut body =
        String::from("f_ghz,d3d_m,pt_dbm,gt_dbi,gr_dbi,pr_dbm,gsym_db,condition,mode\n");
    for i in 0..50 {
        let d = 2.0 + i as f64 * 0.7;
        let pl = 32.4 + 20.0 * 142f64.log10() + 17.4 * d.log10();
        body.push_str(&format!("142.0,{d:.4},0.0,0.0,0.0,{:.6},0.0,los,omnidirectional\n", -pl));
    }
    std::fs::write(&csv, body).unwrap();
    let out_path = dir.path().join("fit.json");
    let out = run(&[
        "fit",
        "--input",
        csv.to_str().unwrap(),
        "--model",
        "ci",
        "--out",
        out_path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let fit: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&out_path).unwrap()).unwrap();
    assert!((fit["n"].as_f64().unwrap() - 1.74).abs() < 1e-6);
    assert!(fit["sigma_db"].as_f64().unwrap() < 1e-6);
    assert!(out_path.with_extension("residuals.csv").exists());
}

#[test]
fn simulate_without_calibration_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&[
        "simulate",
        "--band",
        "142",
        "--condition",
        "los",
        "--mode",
        "omnidirectional",
        "--drops",
        "4",
        "--out-dir",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(3));
    assert!(stderr(&out).contains("calibrate"), "{}", stderr(&out));
}

#[test]
fn simulate_unknown_band_exits_1() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&[
        "simulate",
        "--band",
        "60",
        "--condition",
        "los",
        "--mode",
        "omnidirectional",
        "--drops",
        "4",
        "--out-dir",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn simulate_then_analyze_round_trip() {
    let root = tempfile::tempdir().unwrap();
    let cal = root.path().join("cal");
    let sim = root.path().join("sim");
    let ana = root.path().join("ana");
    write_decay_file(&cal);
    let out = run(&[
        "--seed",
        "5",
        "simulate",
        "--band",
        "142",
        "--condition",
        "los",
        "--mode",
        "omnidirectional",
        "--drops",
        "32",
        "--out-dir",
        sim.to_str().unwrap(),
        "--cal-dir",
        cal.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert!(sim.join("drop_000000.csv").exists());
    assert!(sim.join("drop_000000.json").exists());
    assert!(sim.join("drop_000000.truth.json").exists());

    // A stray malformed CSV is skipped with a warning, not fatal.
    std::fs::write(sim.join("drop_zzz.csv"), "delay_ns,power_dbm\n0.0,oops\n").unwrap();

    let out = run(&[
        "analyze",
        "--input-dir",
        sim.to_str().unwrap(),
        "--out-dir",
        ana.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert!(stderr(&out).contains("skipping drop_zzz.csv"), "{}", stderr(&out));
    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(ana.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["analyzed"], 32);
    assert_eq!(summary["skipped"].as_array().unwrap().len(), 1);
    // Detected ensemble statistics track the generator's own summary.
    let sim_summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(sim.join("summary.json")).unwrap()).unwrap();
    let detected = summary["ensemble"]["mean_num_clusters"].as_f64().unwrap();
    let truth = sim_summary["mean_num_clusters"].as_f64().unwrap();
    assert!((detected - truth).abs() < 1e-9, "{detected} vs {truth}");
}

#[test]
fn seed_env_var_and_flag_precedence() {
    let root = tempfile::tempdir().unwrap();
    let cal = root.path().join("cal");
    write_decay_file(&cal);
    let simulate = |out_dir: &Path, seed_flag: Option<&str>, seed_env: Option<&str>| {
        let mut cmd = bin();
        if let Some(s) = seed_flag {
            cmd.args(["--seed", s]);
        }
        if let Some(s) = seed_env {
            cmd.env("WORKBENCH_SEED", s);
        }
        cmd.args([
            "simulate",
            "--band",
            "142",
            "--condition",
            "los",
            "--mode",
            "omnidirectional",
            "--drops",
            "8",
        ])
        .arg("--out-dir")
        .arg(out_dir)
        .arg("--cal-dir")
        .arg(&cal);
        assert!(cmd.status().unwrap().success());
        std::fs::read(out_dir.join("summary.json")).unwrap()
    };
    let flag_wins = simulate(&root.path().join("a"), Some("11"), Some("99"));
    let flag_only = simulate(&root.path().join("b"), Some("11"), None);
    let env_only = simulate(&root.path().join("c"), None, Some("99"));
    assert_eq!(flag_wins, flag_only);
    assert_ne!(flag_only, env_only);
}

#[test]
fn compare_3gpp_writes_text_and_json() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("report.json");
    let out = run(&["compare-3gpp", "--condition", "nlos", "--out", out_path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("n_multi"), "{text}");
    assert!(text.contains("3.19"), "{text}");
    assert_eq!(
        std::fs::read_to_string(out_path.with_extension("txt")).unwrap(),
        text
    );
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&out_path).unwrap()).unwrap();
    assert!(report["rows"].as_array().unwrap().len() > 10);
}

#[test]
fn plotdata_pathloss_and_ds_cdf() {
    let dir = tempfile::tempdir().unwrap();
    let pl_path = dir.path().join("pathloss.csv");
    let out = run(&[
        "plotdata",
        "--kind",
        "pathloss",
        "--condition",
        "los",
        "--mode",
        "omnidirectional",
        "--out",
        pl_path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let body = std::fs::read_to_string(&pl_path).unwrap();
    assert!(body.starts_with("band_ghz,model,d_m,pl_db\n"));
    // 3 bands x 2 models x 79 distances + header
    assert_eq!(body.lines().count(), 3 * 2 * 79 + 1);

    let stats = dir.path().join("stats.csv");
    std::fs::write(&stats, "file,rms_ds_ns,num_clusters,total_mpcs\na,3.0,1,2\nb,,,\nc,1.0,1,1\n")
        .unwrap();
    let cdf_path = dir.path().join("cdf.csv");
    let out = run(&[
        "plotdata",
        "--kind",
        "ds-cdf",
        "--stats",
        stats.to_str().unwrap(),
        "--out",
        cdf_path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let body = std::fs::read_to_string(&cdf_path).unwrap();
    assert_eq!(body, "ds_ns,prob\n1.000000,0.500000\n3.000000,1.000000\n");

    // ds-cdf without --stats is a usage error.
    let out = run(&["plotdata", "--kind", "ds-cdf", "--out", cdf_path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
}
