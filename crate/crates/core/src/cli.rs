//! Command-line front end.
//!
//! Subcommands: `fit`, `calibrate`, `simulate`, `analyze`, `compare-3gpp`,
//! `plotdata`. Exit codes: 0 success, 1 usage error, 2 data error,
//! 3 calibration failure.
//!
//! All randomness flows from one seed: `--seed` wins, then the
//! `WORKBENCH_SEED` environment variable, then a fixed default, so runs
//! without flags are still deterministic.

use crate::fitting;
use crate::io::{self, DecayFile, IoError, PdpSidecar};
use crate::pathloss::{AntennaMode, LinkCondition};
use crate::pdp::{self, ChannelStats};
use crate::report;
use crate::synthesis::{self, CalibrationOptions, ChannelGenerator, SynthesisConfig};
use crate::tables::{self, Band};
use clap::{Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rayon::prelude::*;
use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

/// Seed used when neither `--seed` nor `WORKBENCH_SEED` is given.
pub const DEFAULT_SEED: u64 = 142_073_028;

pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DATA: i32 = 2;
pub const EXIT_CALIBRATION: i32 = 3;

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Data(String),
    Calibration(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Data(_) => EXIT_DATA,
            CliError::Calibration(_) => EXIT_CALIBRATION,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            CliError::Usage(m) | CliError::Data(m) | CliError::Calibration(m) => m,
        }
    }
}

impl From<IoError> for CliError {
    fn from(e: IoError) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<tables::TableError> for CliError {
    fn from(e: tables::TableError) -> Self {
        CliError::Usage(e.to_string())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModelArg {
    Ci,
    Cif,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ConditionArg {
    Los,
    NlosBest,
    Nlos,
}

impl From<ConditionArg> for LinkCondition {
    fn from(c: ConditionArg) -> Self {
        match c {
            ConditionArg::Los => LinkCondition::Los,
            ConditionArg::NlosBest => LinkCondition::NlosBest,
            ConditionArg::Nlos => LinkCondition::Nlos,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Directional,
    Omnidirectional,
}

impl From<ModeArg> for AntennaMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Directional => AntennaMode::Directional,
            ModeArg::Omnidirectional => AntennaMode::Omnidirectional,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PlotKind {
    Pathloss,
    DsCdf,
}

#[derive(Debug, Parser)]
#[command(name = "chanbench", version, about = "Indoor mmWave / sub-THz channel model workbench")]
pub struct Cli {
    /// RNG seed; overrides WORKBENCH_SEED.
    #[arg(long, global = true)]
    pub seed: Option<u64>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit CI or CIF path loss parameters to a measurement CSV.
    Fit {
        /// Measurement CSV (f_ghz,d3d_m,pt_dbm,gt_dbi,gr_dbi,pr_dbm,gsym_db,condition,mode).
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_enum)]
        model: ModelArg,
        /// Output JSON path; residuals go next to it as <out>.residuals.csv.
        #[arg(long)]
        out: PathBuf,
    },
    /// Calibrate generator decay constants for one table cell.
    Calibrate {
        #[arg(long)]
        band: f64,
        #[arg(long, value_enum)]
        condition: ConditionArg,
        #[arg(long, value_enum)]
        mode: ModeArg,
        /// Directory receiving decay.<band>.<condition>.<mode>.json.
        #[arg(long)]
        out_dir: PathBuf,
        /// Monte Carlo drops per calibration probe.
        #[arg(long, default_value_t = 10_000)]
        drops: usize,
    },
    /// Generate synthetic drops for one table cell.
    Simulate {
        #[arg(long)]
        band: f64,
        #[arg(long, value_enum)]
        condition: ConditionArg,
        #[arg(long, value_enum)]
        mode: ModeArg,
        #[arg(long)]
        drops: u64,
        #[arg(long)]
        out_dir: PathBuf,
        /// Directory holding calibration files (defaults to out_dir).
        #[arg(long)]
        cal_dir: Option<PathBuf>,
        /// Calibrate in-process if the calibration file is missing.
        #[arg(long)]
        calibrate: bool,
        /// Fixed TX-RX distance in meters; omitted = log-uniform in [2, 40].
        #[arg(long)]
        distance: Option<f64>,
        /// Generate drops serially instead of in parallel.
        #[arg(long)]
        serial: bool,
    },
    /// Compute per-PDP statistics and an ensemble summary for a directory.
    Analyze {
        #[arg(long)]
        input_dir: PathBuf,
        #[arg(long)]
        out_dir: PathBuf,
        #[arg(long, default_value_t = pdp::DEFAULT_MTI_NS)]
        mti_ns: f64,
        #[arg(long, default_value_t = pdp::DEFAULT_THRESHOLD_DB)]
        threshold_db: f64,
    },
    /// Emit the NYU-vs-3GPP comparison table (JSON + fixed-width text).
    #[command(name = "compare-3gpp")]
    Compare3gpp {
        #[arg(long, value_enum)]
        condition: ConditionArg,
        /// Simulated summary JSON per band, as BAND=PATH (repeatable).
        #[arg(long = "simulated", value_parser = parse_band_path)]
        simulated: Vec<(f64, PathBuf)>,
        /// Output JSON path; the text table goes to stdout and <out>.txt.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Emit plot-ready CSV series.
    Plotdata {
        #[arg(long, value_enum)]
        kind: PlotKind,
        #[arg(long, value_enum, default_value_t = ConditionArg::Los)]
        condition: ConditionArg,
        #[arg(long, value_enum, default_value_t = ModeArg::Omnidirectional)]
        mode: ModeArg,
        /// Stats CSV from `analyze` (required for ds-cdf).
        #[arg(long)]
        stats: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
}

fn parse_band_path(s: &str) -> Result<(f64, PathBuf), String> {
    let (band, path) = s.split_once('=').ok_or("expected BAND=PATH")?;
    let band: f64 = band.parse().map_err(|_| format!("bad band {band:?}"))?;
    Ok((band, PathBuf::from(path)))
}

/// Parses argv and runs; returns a process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            // clap handles --help/--version via "error" kinds that should
            // still exit 0.
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => EXIT_USAGE,
            };
            let _ = e.print();
            return code;
        }
    };
    let seed = cli
        .seed
        .or_else(|| std::env::var("WORKBENCH_SEED").ok().and_then(|s| s.parse().ok()))
        .unwrap_or(DEFAULT_SEED);
    match execute(cli.command, seed) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {}", e.message());
            e.exit_code()
        }
    }
}

pub fn execute(command: Command, seed: u64) -> Result<(), CliError> {
    match command {
        Command::Fit { input, model, out } => cmd_fit(&input, model, &out),
        Command::Calibrate { band, condition, mode, out_dir, drops } => {
            cmd_calibrate(band, condition.into(), mode.into(), &out_dir, drops, seed)
        }
        Command::Simulate {
            band,
            condition,
            mode,
            drops,
            out_dir,
            cal_dir,
            calibrate,
            distance,
            serial,
        } => cmd_simulate(SimulateArgs {
            band,
            condition: condition.into(),
            mode: mode.into(),
            drops,
            out_dir,
            cal_dir,
            calibrate,
            distance,
            serial,
            seed,
        }),
        Command::Analyze { input_dir, out_dir, mti_ns, threshold_db } => {
            cmd_analyze(&input_dir, &out_dir, mti_ns, threshold_db)
        }
        Command::Compare3gpp { condition, simulated, out } => {
            cmd_compare_3gpp(condition.into(), &simulated, out.as_deref())
        }
        Command::Plotdata { kind, condition, mode, stats, out } => {
            cmd_plotdata(kind, condition.into(), mode.into(), stats.as_deref(), &out)
        }
    }
}

#[derive(Debug, serde::Serialize, serde::Deserialize)]
struct FitOutput {
    model: String,
    n: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    b: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    f0_ghz: Option<f64>,
    sigma_db: f64,
    rmse_db: f64,
    num_records: usize,
}

fn cmd_fit(input: &Path, model: ModelArg, out: &Path) -> Result<(), CliError> {
    let parsed = io::read_measurement_csv(input)?;
    if !parsed.row_errors.is_empty() {
        let mut msg = format!("{} invalid rows in {}:", parsed.row_errors.len(), input.display());
        for (line, err) in &parsed.row_errors {
            let _ = write!(msg, "\n  row {line}: {err}");
        }
        return Err(CliError::Data(msg));
    }
    let (output, residuals) = match model {
        ModelArg::Ci => {
            let fit = fitting::fit_ci(&parsed.records).map_err(|e| CliError::Data(e.to_string()))?;
            (
                FitOutput {
                    model: "ci".into(),
                    n: fit.params.n,
                    b: None,
                    f0_ghz: None,
                    sigma_db: fit.params.sigma_db,
                    rmse_db: fit.rmse_db,
                    num_records: parsed.records.len(),
                },
                fit.residuals_db,
            )
        }
        ModelArg::Cif => {
            let fit = fitting::fit_cif(&parsed.records).map_err(|e| CliError::Data(e.to_string()))?;
            (
                FitOutput {
                    model: "cif".into(),
                    n: fit.params.n,
                    b: Some(fit.params.b),
                    f0_ghz: Some(fit.params.f0_ghz),
                    sigma_db: fit.params.sigma_db,
                    rmse_db: fit.rmse_db,
                    num_records: parsed.records.len(),
                },
                fit.residuals_db,
            )
        }
    };
    io::write_json(out, &output)?;
    let mut csv_body = String::from("record,residual_db\n");
    for (i, r) in residuals.iter().enumerate() {
        let _ = writeln!(csv_body, "{i},{r:.6}");
    }
    let residual_path = out.with_extension("residuals.csv");
    io::atomic_write(&residual_path, csv_body.as_bytes())?;
    println!("wrote {} and {}", out.display(), residual_path.display());
    Ok(())
}

fn cmd_calibrate(
    band_ghz: f64,
    condition: LinkCondition,
    mode: AntennaMode,
    out_dir: &Path,
    drops: usize,
    seed: u64,
) -> Result<(), CliError> {
    let band = Band::from_ghz(band_ghz)?;
    let stats = tables::lookup_stats(band, condition, mode)?;
    let options = CalibrationOptions { drops, seed, ..Default::default() };
    let decay = synthesis::calibrate_decay(band, condition, mode, &options)
        .map_err(|e| CliError::Calibration(e.to_string()))?;
    std::fs::create_dir_all(out_dir)
        .map_err(|e| CliError::Data(format!("{}: {e}", out_dir.display())))?;
    let path = out_dir.join(io::decay_file_name(band, condition, mode));
    io::write_json(
        &path,
        &DecayFile {
            band_ghz,
            condition,
            mode,
            target_mu_ds_ns: stats.mu_ds_ns,
            calibration_drops: drops,
            calibration_seed: seed,
            decay,
        },
    )?;
    println!(
        "calibrated {band} GHz {condition} {mode}: cluster_decay {:.4} ns, intra_decay {:.4} ns, void_mean {:.1} ns -> {}",
        decay.cluster_decay_ns,
        decay.intra_decay_ns,
        decay.void_mean_ns,
        path.display()
    );
    Ok(())
}

struct SimulateArgs {
    band: f64,
    condition: LinkCondition,
    mode: AntennaMode,
    drops: u64,
    out_dir: PathBuf,
    cal_dir: Option<PathBuf>,
    calibrate: bool,
    distance: Option<f64>,
    serial: bool,
    seed: u64,
}

fn cmd_simulate(args: SimulateArgs) -> Result<(), CliError> {
    let band = Band::from_ghz(args.band)?;
    let cal_dir = args.cal_dir.clone().unwrap_or_else(|| args.out_dir.clone());
    let decay_path = cal_dir.join(io::decay_file_name(band, args.condition, args.mode));
    let decay = if decay_path.exists() {
        let file: DecayFile = io::read_json(&decay_path)?;
        file.decay
    } else if args.calibrate {
        let options = CalibrationOptions { seed: args.seed, ..Default::default() };
        synthesis::calibrate_decay(band, args.condition, args.mode, &options)
            .map_err(|e| CliError::Calibration(e.to_string()))?
    } else {
        return Err(CliError::Calibration(format!(
            "no calibration file at {}; run `chanbench calibrate --band {} --condition {} --mode {}` or pass --calibrate",
            decay_path.display(),
            band,
            args.condition.as_str(),
            args.mode.as_str()
        )));
    };

    let config = SynthesisConfig::new(band, args.condition, args.mode, args.seed, decay);
    let generator =
        ChannelGenerator::new(config).map_err(|e| CliError::Usage(e.to_string()))?;
    std::fs::create_dir_all(&args.out_dir)
        .map_err(|e| CliError::Data(format!("{}: {e}", args.out_dir.display())))?;

    let gains = match args.mode {
        AntennaMode::Directional => tables::sounder(band).antenna_gain_dbi,
        AntennaMode::Omnidirectional => 0.0,
    };
    let make_drop = |i: u64| -> Result<(u64, synthesis::GeneratedDrop), String> {
        let d = drop_distance(args.seed, i, args.distance);
        generator.generate_drop(i, d).map(|drop| (i, drop)).map_err(|e| e.to_string())
    };
    let drops: Vec<(u64, synthesis::GeneratedDrop)> = if args.serial {
        (0..args.drops).map(make_drop).collect::<Result<_, _>>()
    } else {
        (0..args.drops).into_par_iter().map(make_drop).collect::<Result<_, _>>()
    }
    .map_err(CliError::Data)?;

    let mut stats = Vec::with_capacity(drops.len());
    for (i, drop) in &drops {
        let csv_path = args.out_dir.join(format!("drop_{i:06}.csv"));
        io::write_pdp_csv(&csv_path, &drop.pdp)?;
        io::write_json(
            &io::sidecar_path(&csv_path),
            &PdpSidecar {
                resolution_ns: drop.pdp.resolution_ns(),
                gt_dbi: gains,
                gr_dbi: gains,
                azimuth_deg: 0.0,
                elevation_deg: 0.0,
                band_ghz: band.ghz(),
                condition: args.condition,
                mode: args.mode,
                noise_floor_dbm: drop.pdp.noise_floor_dbm(),
            },
        )?;
        io::write_truth(&io::truth_path(&csv_path), &drop.truth)?;
        stats.push(ChannelStats {
            rms_ds_ns: drop.truth.rms_ds_ns,
            num_clusters: drop.truth.num_clusters,
            mpcs_per_cluster: drop.truth.mpcs_per_cluster.clone(),
        });
    }
    let summary = pdp::ensemble_summary(&stats).map_err(|e| CliError::Data(e.to_string()))?;
    io::write_json(&args.out_dir.join("summary.json"), &summary)?;
    println!(
        "simulated {} drops at {band} GHz {} {}: mean DS {:.3} ns, mean clusters {:.3}, mean MPC/cluster {:.3}",
        drops.len(),
        args.condition.as_str(),
        args.mode.as_str(),
        summary.mean_ds_ns,
        summary.mean_num_clusters,
        summary.mean_mpcs_per_cluster
    );
    Ok(())
}

/// Distance for drop `i`: fixed when given, else log-uniform in [2, 40] m
/// from a dedicated substream so PDP generation draws are untouched.
fn drop_distance(seed: u64, index: u64, fixed: Option<f64>) -> f64 {
    match fixed {
        Some(d) => d,
        None => {
            let mut key = [0u8; 32];
            key[..8].copy_from_slice(&seed.to_le_bytes());
            key[8..16].copy_from_slice(&index.to_le_bytes());
            key[16] = 0xd1; // distance stream tag
            let mut rng = ChaCha12Rng::from_seed(key);
            let lo = 2f64.log10();
            let hi = 40f64.log10();
            10f64.powf(rng.gen_range(lo..hi))
        }
    }
}

#[derive(Debug, serde::Serialize, serde::Deserialize)]
struct AnalyzeSummary {
    analyzed: usize,
    absent: usize,
    skipped: Vec<String>,
    ensemble: Option<pdp::EnsembleSummary>,
}

fn cmd_analyze(
    input_dir: &Path,
    out_dir: &Path,
    mti_ns: f64,
    threshold_db: f64,
) -> Result<(), CliError> {
    let mut pdp_files: Vec<PathBuf> = std::fs::read_dir(input_dir)
        .map_err(|e| CliError::Data(format!("{}: {e}", input_dir.display())))?
        .filter_map(|entry| entry.ok().map(|e| e.path()))
        .filter(|p| {
            p.extension().is_some_and(|ext| ext == "csv")
                && !p.to_string_lossy().ends_with(".residuals.csv")
        })
        .collect();
    pdp_files.sort();
    if pdp_files.is_empty() {
        return Err(CliError::Data(format!("no PDP CSV files in {}", input_dir.display())));
    }
    std::fs::create_dir_all(out_dir)
        .map_err(|e| CliError::Data(format!("{}: {e}", out_dir.display())))?;

    let mut rows = String::from("file,rms_ds_ns,num_clusters,total_mpcs\n");
    let mut stats: Vec<ChannelStats> = Vec::new();
    let mut skipped: Vec<String> = Vec::new();
    let mut absent = 0usize;
    for path in &pdp_files {
        let name = path.file_name().unwrap().to_string_lossy().into_owned();
        let (pdp_trace, _sidecar) = match io::read_pdp(path) {
            Ok(x) => x,
            Err(e) => {
                eprintln!("warning: skipping {name}: {e}");
                skipped.push(name);
                continue;
            }
        };
        match pdp::channel_stats(&pdp_trace, mti_ns, threshold_db) {
            Ok(Some(s)) => {
                let _ = writeln!(
                    rows,
                    "{name},{:.6},{},{}",
                    s.rms_ds_ns,
                    s.num_clusters,
                    s.total_mpcs()
                );
                stats.push(s);
            }
            Ok(None) => {
                let _ = writeln!(rows, "{name},,,");
                absent += 1;
            }
            Err(e) => {
                eprintln!("warning: skipping {name}: {e}");
                skipped.push(name);
            }
        }
    }
    io::atomic_write(&out_dir.join("stats.csv"), rows.as_bytes())?;
    let summary = AnalyzeSummary {
        analyzed: stats.len(),
        absent,
        skipped,
        ensemble: pdp::ensemble_summary(&stats).ok(),
    };
    io::write_json(&out_dir.join("summary.json"), &summary)?;
    println!(
        "analyzed {} PDPs ({} empty, {} skipped) -> {}",
        summary.analyzed,
        summary.absent,
        summary.skipped.len(),
        out_dir.display()
    );
    Ok(())
}

fn cmd_compare_3gpp(
    condition: LinkCondition,
    simulated: &[(f64, PathBuf)],
    out: Option<&Path>,
) -> Result<(), CliError> {
    let mut summaries = BTreeMap::new();
    for (band_ghz, path) in simulated {
        let band = Band::from_ghz(*band_ghz)?;
        let summary: pdp::EnsembleSummary = io::read_json(path)?;
        summaries.insert(band, summary);
    }
    let report = report::compare_3gpp(condition, &summaries)?;
    let text = report.render_text();
    print!("{text}");
    if let Some(out) = out {
        io::write_json(out, &report)?;
        io::atomic_write(&out.with_extension("txt"), text.as_bytes())?;
    }
    Ok(())
}

fn cmd_plotdata(
    kind: PlotKind,
    condition: LinkCondition,
    mode: AntennaMode,
    stats: Option<&Path>,
    out: &Path,
) -> Result<(), CliError> {
    match kind {
        PlotKind::Pathloss => {
            let points = report::pathloss_series(condition, mode)?;
            let mut body = String::from("band_ghz,model,d_m,pl_db\n");
            for p in points {
                let _ = writeln!(body, "{},{},{:.1},{:.6}", p.band_ghz, p.model, p.d_m, p.pl_db);
            }
            io::atomic_write(out, body.as_bytes())?;
        }
        PlotKind::DsCdf => {
            let stats_path = stats.ok_or_else(|| {
                CliError::Usage("--stats <stats.csv> is required for ds-cdf".to_string())
            })?;
            let ds_values = read_stats_ds(stats_path)?;
            let cdf = report::ds_cdf_series(&ds_values);
            let mut body = String::from("ds_ns,prob\n");
            for p in cdf {
                let _ = writeln!(body, "{:.6},{:.6}", p.ds_ns, p.prob);
            }
            io::atomic_write(out, body.as_bytes())?;
        }
    }
    println!("wrote {}", out.display());
    Ok(())
}

/// Reads the `rms_ds_ns` column from an `analyze` stats CSV, skipping
/// absent (empty) rows.
fn read_stats_ds(path: &Path) -> Result<Vec<f64>, CliError> {
    let mut reader = csv::Reader::from_path(path)
        .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
    let headers = reader
        .headers()
        .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
    let ds_idx = headers
        .iter()
        .position(|h| h == "rms_ds_ns")
        .ok_or_else(|| CliError::Data(format!("{}: missing column rms_ds_ns", path.display())))?;
    let mut values = Vec::new();
    for row in reader.records() {
        let row = row.map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
        if let Some(field) = row.get(ds_idx) {
            if field.is_empty() {
                continue;
            }
            let v: f64 = field
                .parse()
                .map_err(|e| CliError::Data(format!("{}: bad rms_ds_ns {field:?}: {e}", path.display())))?;
            values.push(v);
        }
    }
    Ok(values)
}
