//! End-to-end acceptance gate. Each test covers one numbered criterion and
//! prints a `criterion N: PASS` line on success (visible with
//! `cargo test --test acceptance -- --nocapture`).

use chanbench::fitting;
use chanbench::pathloss::{
    self, AntennaMode, CIFParams, CIParams, FrequencyGHz, LinkCondition, MeasurementRecord,
};
use chanbench::pdp::{self, ChannelStats, DelayAlignment, DirectionalPdp, MultipathComponent};
use chanbench::synthesis::{CalibrationOptions, ChannelGenerator, SynthesisConfig};
use chanbench::tables::{self, Band, FitScope, PathLossModel};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use std::collections::HashMap;
use std::path::Path;
use std::process::Command;

fn f(ghz: f64) -> FrequencyGHz {
    FrequencyGHz::new(ghz).unwrap()
}

/// All (band, condition, mode) cells with tabulated channel statistics:
/// nine directional plus six omnidirectional.
fn all_stat_cells() -> Vec<(Band, LinkCondition, AntennaMode)> {
    let mut cells = Vec::new();
    for mode in [AntennaMode::Directional, AntennaMode::Omnidirectional] {
        for condition in [LinkCondition::Los, LinkCondition::NlosBest, LinkCondition::Nlos] {
            for band in Band::ALL {
                if tables::lookup_stats(band, condition, mode).is_ok() {
                    cells.push((band, condition, mode));
                }
            }
        }
    }
    assert_eq!(cells.len(), 15);
    cells
}

#[test]
fn criterion_1_fspl_constants() {
    for (ghz, expected) in [(1.0, 32.40), (28.0, 61.34), (73.0, 69.67), (142.0, 75.45)] {
        let got = pathloss::fspl_1m(f(ghz));
        assert!(
            (got - expected).abs() <= 0.01,
            "FSPL({ghz} GHz) = {got}, expected {expected}"
        );
    }
    println!("criterion 1: PASS");
}

#[test]
fn criterion_2_cif_degeneracy() {
    let mut rng = ChaCha12Rng::seed_from_u64(2);
    for _ in 0..10_000 {
        let ghz = rng.gen_range(0.5..200.0);
        let d = rng.gen_range(1.0..100.0);
        let n = rng.gen_range(1.0..5.0);

        let ci = CIParams::new(n, 0.0).unwrap();
        let cif_b0 = CIFParams::new(n, 0.0, 81.0, 0.0).unwrap();
        let a = pathloss::ci_path_loss(&ci, f(ghz), d, 0.0).unwrap();
        let b = pathloss::cif_path_loss(&cif_b0, f(ghz), d, 0.0).unwrap();
        assert!((a - b).abs() <= 1e-9, "b=0 mismatch {a} vs {b}");

        let slope = rng.gen_range(-1.0..1.0);
        let cif = CIFParams::new(n, slope, ghz, 0.0).unwrap();
        let at_f0 = pathloss::cif_path_loss(&cif, f(ghz), d, 0.0).unwrap();
        let ci_at_f0 = pathloss::ci_path_loss(&ci, f(ghz), d, 0.0).unwrap();
        assert!((at_f0 - ci_at_f0).abs() <= 1e-9, "f=f0 mismatch");
    }
    println!("criterion 2: PASS");
}

/// Synthetic record whose measured path loss equals `pl_db` exactly.
fn record(ghz: f64, d: f64, pl_db: f64, condition: LinkCondition, mode: AntennaMode) -> MeasurementRecord {
    MeasurementRecord {
        f_ghz: f(ghz),
        d3d_m: d,
        pt_dbm: 0.0,
        gt_dbi: 0.0,
        gr_dbi: 0.0,
        pr_dbm: -pl_db,
        gsym_db: 0.0,
        condition,
        mode,
    }
}

#[test]
fn criterion_3_fit_recovery() {
    let mut rng = ChaCha12Rng::seed_from_u64(3);

    // Single-band CI cells from both parameter tables.
    for mode in [AntennaMode::Directional, AntennaMode::Omnidirectional] {
        for condition in [LinkCondition::Los, LinkCondition::NlosBest, LinkCondition::Nlos] {
            for band in Band::ALL {
                let params = match tables::lookup_params(
                    band,
                    condition,
                    mode,
                    PathLossModel::Ci,
                    FitScope::SingleBand,
                ) {
                    Ok(p) => p.as_ci().unwrap(),
                    Err(_) => continue,
                };
                let noise = Normal::new(0.0, params.sigma_db).unwrap();
                let records: Vec<MeasurementRecord> = (0..10_000)
                    .map(|_| {
                        let d = 10f64.powf(rng.gen_range(2f64.log10()..40f64.log10()));
                        let pl = pathloss::ci_path_loss(
                            &params,
                            band.frequency(),
                            d,
                            noise.sample(&mut rng),
                        )
                        .unwrap();
                        record(band.ghz(), d, pl, condition, mode)
                    })
                    .collect();
                let fit = fitting::fit_ci(&records).unwrap();
                assert!(
                    (fit.params.n - params.n).abs() <= 0.05,
                    "{band} {condition} {mode}: n {} vs {}",
                    fit.params.n,
                    params.n
                );
                assert!(
                    (fit.params.sigma_db - params.sigma_db).abs() <= 0.2,
                    "{band} {condition} {mode}: sigma {} vs {}",
                    fit.params.sigma_db,
                    params.sigma_db
                );
            }
        }
    }

    // Multi-band CIF cells (omnidirectional table).
    for condition in [LinkCondition::Los, LinkCondition::Nlos] {
        let truth = tables::lookup_params(
            Band::G28,
            condition,
            AntennaMode::Omnidirectional,
            PathLossModel::Cif,
            FitScope::MultiBand,
        )
        .unwrap()
        .as_cif()
        .unwrap();
        let noise = Normal::new(0.0, truth.sigma_db).unwrap();
        let records: Vec<MeasurementRecord> = (0..10_000)
            .map(|i| {
                let band = Band::ALL[i % 3];
                let d = 10f64.powf(rng.gen_range(2f64.log10()..40f64.log10()));
                let pl = pathloss::cif_path_loss(
                    &truth,
                    band.frequency(),
                    d,
                    noise.sample(&mut rng),
                )
                .unwrap();
                record(band.ghz(), d, pl, condition, AntennaMode::Omnidirectional)
            })
            .collect();
        let fit = fitting::fit_cif(&records).unwrap();
        assert!(
            (fit.params.n - truth.n).abs() <= 0.05,
            "{condition}: n {} vs {}",
            fit.params.n,
            truth.n
        );
        assert!(
            (fit.params.b - truth.b).abs() <= 0.05,
            "{condition}: b {} vs {}",
            fit.params.b,
            truth.b
        );
    }
    println!("criterion 3: PASS");
}

#[test]
fn criterion_4_weighted_center_frequency() {
    let records: Vec<MeasurementRecord> = (0..300)
        .map(|i| {
            let band = Band::ALL[i % 3];
            record(band.ghz(), 10.0, 80.0, LinkCondition::Los, AntennaMode::Omnidirectional)
        })
        .collect();
    let f0 = fitting::weighted_center_frequency(&records).unwrap();
    assert_eq!(f0.ghz(), 81.0);
    println!("criterion 4: PASS");
}

#[test]
fn criterion_5_excess_loss_deltas() {
    let n_at = |band: Band| {
        tables::lookup_params(
            band,
            LinkCondition::Los,
            AntennaMode::Directional,
            PathLossModel::Ci,
            FitScope::SingleBand,
        )
        .unwrap()
        .as_ci()
        .unwrap()
        .n
    };
    let n28 = n_at(Band::G28);
    let n73 = n_at(Band::G73);
    let n142 = n_at(Band::G142);
    let excess = |n: f64, d: f64| 10.0 * n * d.log10();

    let d10_vs_28 = excess(n142, 10.0) - excess(n28, 10.0);
    let d10_vs_73 = excess(n142, 10.0) - excess(n73, 10.0);
    let d40_vs_28 = excess(n142, 40.0) - excess(n28, 40.0);
    let d40_vs_73 = excess(n142, 40.0) - excess(n73, 40.0);
    assert!((d10_vs_28 - 1.5).abs() <= 0.05, "{d10_vs_28}");
    assert!((d10_vs_73 - 4.2).abs() <= 0.05, "{d10_vs_73}");
    assert!((d40_vs_28 - 2.4).abs() <= 0.05, "{d40_vs_28}");
    assert!((d40_vs_73 - 6.7).abs() <= 0.05, "{d40_vs_73}");
    // The four deltas stay inside the published excess-loss windows
    // (1.5-4.2 dB at 10 m, 2.4-6.7 dB at 40 m), up to rounding slack.
    for d in [d10_vs_28, d10_vs_73] {
        assert!((1.5 - 0.05..=4.2 + 0.05).contains(&d), "{d}");
    }
    for d in [d40_vs_28, d40_vs_73] {
        assert!((2.4 - 0.05..=6.7 + 0.05).contains(&d), "{d}");
    }

    let n142_omni = tables::lookup_params(
        Band::G142,
        LinkCondition::Los,
        AntennaMode::Omnidirectional,
        PathLossModel::Ci,
        FitScope::SingleBand,
    )
    .unwrap()
    .as_ci()
    .unwrap()
    .n;
    let omni_10 = excess(n142, 10.0) - excess(n142_omni, 10.0);
    let omni_40 = excess(n142, 40.0) - excess(n142_omni, 40.0);
    assert!((omni_10 - 3.1).abs() <= 0.05, "{omni_10}");
    assert!((omni_40 - 5.0).abs() <= 0.05, "{omni_40}");
    println!("criterion 5: PASS");
}

#[test]
fn criterion_6_compare_3gpp_goldens() {
    for (condition, golden) in [
        (LinkCondition::Los, include_str!("golden/compare_3gpp_los.txt")),
        (LinkCondition::Nlos, include_str!("golden/compare_3gpp_nlos.txt")),
    ] {
        let report = chanbench::report::compare_3gpp(condition, &Default::default()).unwrap();
        assert_eq!(report.render_text(), golden, "{condition} table drifted");
    }

    // Spot-check the reference constants behind the golden files.
    let los = tables::three_gpp_reference(LinkCondition::Los).unwrap();
    assert_eq!((los.n, los.sigma_db), (1.73, 3.00));
    assert_eq!((los.mu_ds_28_ns, los.mu_ds_73_ns), (20.40, 20.21));
    assert_eq!((los.num_clusters, los.mpcs_per_cluster), (15, 20));
    let nlos = tables::three_gpp_reference(LinkCondition::Nlos).unwrap();
    assert_eq!((nlos.n, nlos.sigma_db), (3.19, 8.29));
    assert_eq!((nlos.mu_ds_28_ns, nlos.mu_ds_73_ns), (27.40, 21.52));
    assert_eq!((nlos.num_clusters, nlos.mpcs_per_cluster), (19, 20));
    println!("criterion 6: PASS");
}

#[test]
fn criterion_7_synthesis_ensembles() {
    let cells = all_stat_cells();
    let results: Vec<(Band, LinkCondition, AntennaMode, f64, f64, f64)> = cells
        .par_iter()
        .map(|&(band, condition, mode)| {
            let stats = tables::lookup_stats(band, condition, mode).unwrap();
            let options = CalibrationOptions { drops: 4000, seed: 7, ..Default::default() };
            let decay =
                chanbench::synthesis::calibrate_decay(band, condition, mode, &options).unwrap();
            let generator = ChannelGenerator::new(SynthesisConfig::new(
                band, condition, mode, 424_242, decay,
            ))
            .unwrap();
            let drops: u64 = 100_000;
            let mut sum_nc = 0.0f64;
            let mut sum_ds = 0.0f64;
            let mut sum_mpc = 0usize;
            let mut num_clusters = 0usize;
            for i in 0..drops {
                let truth = generator.sample_truth(i, 10.0).unwrap();
                sum_nc += truth.num_clusters as f64;
                sum_ds += truth.rms_ds_ns;
                sum_mpc += truth.total_mpcs();
                num_clusters += truth.num_clusters;
            }
            let mean_nc = sum_nc / drops as f64;
            let mean_mpc = sum_mpc as f64 / num_clusters as f64;
            let mean_ds = sum_ds / drops as f64;
            assert!(
                (mean_nc - stats.mu_nc).abs() / stats.mu_nc <= 0.03,
                "{band} {condition} {mode}: NC {mean_nc} vs {}",
                stats.mu_nc
            );
            assert!(
                (mean_mpc - stats.mu_mpc).abs() / stats.mu_mpc <= 0.05,
                "{band} {condition} {mode}: MPC {mean_mpc} vs {}",
                stats.mu_mpc
            );
            assert!(
                (mean_ds - stats.mu_ds_ns).abs() / stats.mu_ds_ns <= 0.10,
                "{band} {condition} {mode}: DS {mean_ds} vs {}",
                stats.mu_ds_ns
            );
            (band, condition, mode, mean_nc, mean_mpc, mean_ds)
        })
        .collect();

    // Mean delay spread must fall with frequency within every condition.
    for mode in [AntennaMode::Directional, AntennaMode::Omnidirectional] {
        for condition in [LinkCondition::Los, LinkCondition::NlosBest, LinkCondition::Nlos] {
            let ds: Vec<f64> = Band::ALL
                .iter()
                .filter_map(|&band| {
                    results
                        .iter()
                        .find(|r| (r.0, r.1, r.2) == (band, condition, mode))
                        .map(|r| r.5)
                })
                .collect();
            for w in ds.windows(2) {
                assert!(w[1] < w[0], "{condition} {mode}: DS not decreasing {ds:?}");
            }
        }
    }
    println!("criterion 7: PASS");
}

#[test]
fn criterion_8_structural_properties() {
    let cells = all_stat_cells();
    let generators: Vec<ChannelGenerator> = cells
        .iter()
        .map(|&(band, condition, mode)| {
            let decay = chanbench::synthesis::CalibratedDecay {
                cluster_decay_ns: 25.0,
                intra_decay_ns: 6.0,
                void_mean_ns: 40.0,
            };
            ChannelGenerator::new(SynthesisConfig::new(band, condition, mode, 8, decay)).unwrap()
        })
        .collect();

    for i in 0..10_000u64 {
        let g = &generators[(i as usize) % generators.len()];
        let mti = g.config().mti_ns;
        let res = g.config().resolution_ns;
        let drop = g.generate_drop(i, 12.0).unwrap();
        let floor = drop.pdp.noise_floor_dbm().unwrap();
        let mpcs = pdp::detect_mpcs(&drop.pdp, floor, pdp::DEFAULT_THRESHOLD_DB);
        assert!(!mpcs.is_empty());

        // Peak invariants: threshold clearance and minimum spacing.
        for m in &mpcs {
            assert!(m.power_dbm >= floor + pdp::DEFAULT_THRESHOLD_DB);
        }
        for w in mpcs.windows(2) {
            assert!(w[1].delay_ns - w[0].delay_ns > res);
        }

        // Clustering gap invariants.
        let clusters = pdp::partition_clusters(&mpcs, mti).unwrap();
        let mut prev_last: Option<f64> = None;
        for c in &clusters {
            if let Some(prev) = prev_last {
                assert!(c.mpcs[0].delay_ns - prev > mti);
            }
            for w in c.mpcs.windows(2) {
                assert!(w[1].delay_ns - w[0].delay_ns <= mti);
            }
            prev_last = Some(c.mpcs.last().unwrap().delay_ns);
        }

        // RMS delay spread: translation and power-scale invariance.
        let ds = pdp::rms_delay_spread(&mpcs).unwrap();
        let shifted: Vec<MultipathComponent> = mpcs
            .iter()
            .map(|m| MultipathComponent { delay_ns: m.delay_ns + 137.5, power_dbm: m.power_dbm })
            .collect();
        assert!((pdp::rms_delay_spread(&shifted).unwrap() - ds).abs() <= 1e-9);
        let scaled: Vec<MultipathComponent> = mpcs
            .iter()
            .map(|m| MultipathComponent { delay_ns: m.delay_ns, power_dbm: m.power_dbm + 17.0 })
            .collect();
        assert!((pdp::rms_delay_spread(&scaled).unwrap() - ds).abs() <= 1e-9);

        // Omnidirectional synthesis equals an independent linear sum.
        if i % 10 == 0 {
            let other = g.generate_drop(i + 1_000_000, 12.0).unwrap();
            let traces = vec![
                DirectionalPdp {
                    azimuth_deg: 0.0,
                    elevation_deg: 0.0,
                    gt_dbi: 19.0,
                    gr_dbi: 19.0,
                    pdp: drop.pdp.clone(),
                },
                DirectionalPdp {
                    azimuth_deg: 90.0,
                    elevation_deg: 0.0,
                    gt_dbi: 19.0,
                    gr_dbi: 19.0,
                    pdp: other.pdp.clone(),
                },
            ];
            let omni = pdp::synthesize_omni(&traces, DelayAlignment::Absolute).unwrap();
            let mut expected: HashMap<i64, f64> = HashMap::new();
            for t in &traces {
                for s in t.pdp.samples() {
                    *expected.entry((s.delay_ns / res).round() as i64).or_insert(0.0) +=
                        pdp::dbm_to_mw(s.power_dbm - t.gt_dbi - t.gr_dbi);
                }
            }
            for s in omni.samples() {
                let bin = (s.delay_ns / res).round() as i64;
                let want = expected
                    .get(&bin)
                    .map(|&mw| pdp::mw_to_dbm(mw))
                    .unwrap_or(pdp::EMPTY_BIN_DBM);
                assert!((s.power_dbm - want).abs() <= 1e-9, "bin {bin}");
            }
        }
    }
    println!("criterion 8: PASS");
}

/// Snapshot of a directory tree as (relative name, bytes) pairs.
fn tree_bytes(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut entries: Vec<(String, Vec<u8>)> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().to_string_lossy().into_owned(), std::fs::read(e.path()).unwrap())
        })
        .collect();
    entries.sort_by(|a, b| a.0.cmp(&b.0));
    entries
}

#[test]
fn criterion_9_determinism() {
    let bin = env!("CARGO_BIN_EXE_chanbench");
    let root = tempfile::tempdir().unwrap();
    let cal_dir = root.path().join("cal");
    std::fs::create_dir_all(&cal_dir).unwrap();
    // Fixed decay constants keep this about output determinism, not
    // calibration runtime.
    let decay_file = serde_json::json!({
        "band_ghz": 142.0,
        "condition": "los",
        "mode": "omnidirectional",
        "target_mu_ds_ns": 3.0,
        "calibration_drops": 0,
        "calibration_seed": 11,
        "decay": { "cluster_decay_ns": 9.0, "intra_decay_ns": 2.25, "void_mean_ns": 30.0 }
    });
    std::fs::write(
        cal_dir.join("decay.142.los.omnidirectional.json"),
        serde_json::to_string_pretty(&decay_file).unwrap(),
    )
    .unwrap();

    let simulate = |out: &Path, serial: bool| {
        let mut cmd = Command::new(bin);
        cmd.args([
            "--seed",
            "11",
            "simulate",
            "--band",
            "142",
            "--condition",
            "los",
            "--mode",
            "omnidirectional",
            "--drops",
            "64",
        ])
        .arg("--out-dir")
        .arg(out)
        .arg("--cal-dir")
        .arg(&cal_dir);
        if serial {
            cmd.arg("--serial");
        }
        let status = cmd.status().unwrap();
        assert!(status.success());
    };

    let run_a = root.path().join("a");
    let run_b = root.path().join("b");
    let run_serial = root.path().join("serial");
    simulate(&run_a, false);
    simulate(&run_b, false);
    simulate(&run_serial, true);

    let a = tree_bytes(&run_a);
    assert_eq!(a.len(), 64 * 3 + 1, "expected csv+sidecar+truth per drop plus summary");
    assert_eq!(a, tree_bytes(&run_b), "repeated runs differ");
    assert_eq!(a, tree_bytes(&run_serial), "serial and parallel runs differ");
    println!("criterion 9: PASS");
}
