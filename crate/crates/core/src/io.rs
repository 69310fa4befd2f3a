//! File formats and persistence.
//!
//! - Measurement CSV: `f_ghz,d3d_m,pt_dbm,gt_dbi,gr_dbi,pr_dbm,gsym_db,condition,mode`
//! - PDP CSV: `delay_ns,power_dbm` with a JSON sidecar carrying the
//!   resolution, antenna gains, pointing angles, band, and condition
//! - Per-drop ground truth JSON and per-cell calibration JSON
//!
//! All writes go through a temp-then-rename so interrupted runs never
//! leave partial files that parse. Floats are emitted at fixed precision
//! so emit -> parse -> emit is byte-stable.

use crate::pathloss::{AntennaMode, LinkCondition, MeasurementRecord};
use crate::pdp::{PdpSample, PowerDelayProfile};
use crate::synthesis::{CalibratedDecay, DropTruth};
use crate::tables::Band;
use serde::{Deserialize, Serialize};
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum IoError {
    #[error("{path}: {source}")]
    File {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {message}")]
    Format { path: PathBuf, message: String },
    #[error("{path}: missing column {column:?}")]
    MissingColumn { path: PathBuf, column: String },
}

fn file_err(path: &Path) -> impl FnOnce(std::io::Error) -> IoError + '_ {
    move |source| IoError::File { path: path.to_path_buf(), source }
}

/// Writes `contents` via a sibling temp file and an atomic rename.
pub fn atomic_write(path: &Path, contents: &[u8]) -> Result<(), IoError> {
    let file_name = path
        .file_name()
        .ok_or_else(|| IoError::Format { path: path.to_path_buf(), message: "no file name".into() })?;
    let tmp = path.with_file_name(format!(".{}.tmp", file_name.to_string_lossy()));
    {
        let mut f = fs::File::create(&tmp).map_err(file_err(&tmp))?;
        f.write_all(contents).map_err(file_err(&tmp))?;
        f.sync_all().map_err(file_err(&tmp))?;
    }
    fs::rename(&tmp, path).map_err(file_err(path))
}

pub const MEASUREMENT_COLUMNS: [&str; 9] = [
    "f_ghz", "d3d_m", "pt_dbm", "gt_dbi", "gr_dbi", "pr_dbm", "gsym_db", "condition", "mode",
];

/// Parse outcome: valid records plus per-row errors (1-based data row
/// numbers, header excluded).
#[derive(Debug)]
pub struct MeasurementParse {
    pub records: Vec<MeasurementRecord>,
    pub row_errors: Vec<(usize, String)>,
}

/// Reads a measurement CSV, checking the header schema first.
pub fn read_measurement_csv(path: &Path) -> Result<MeasurementParse, IoError> {
    let mut reader = csv::Reader::from_path(path).map_err(|e| IoError::Format {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    let headers = reader
        .headers()
        .map_err(|e| IoError::Format { path: path.to_path_buf(), message: e.to_string() })?
        .clone();
    for column in MEASUREMENT_COLUMNS {
        if !headers.iter().any(|h| h == column) {
            return Err(IoError::MissingColumn { path: path.to_path_buf(), column: column.into() });
        }
    }
    let mut records = Vec::new();
    let mut row_errors = Vec::new();
    for (i, row) in reader.deserialize::<MeasurementRecord>().enumerate() {
        match row {
            Ok(r) => match r.validate() {
                Ok(()) => records.push(r),
                Err(e) => row_errors.push((i + 1, e.to_string())),
            },
            Err(e) => row_errors.push((i + 1, e.to_string())),
        }
    }
    Ok(MeasurementParse { records, row_errors })
}

/// Writes a measurement CSV in canonical column order at fixed precision.
pub fn write_measurement_csv(path: &Path, records: &[MeasurementRecord]) -> Result<(), IoError> {
    let mut out = String::new();
    out.push_str(&MEASUREMENT_COLUMNS.join(","));
    out.push('\n');
    for r in records {
        out.push_str(&format!(
            "{},{:.4},{:.4},{:.4},{:.4},{:.4},{:.4},{},{}\n",
            r.f_ghz.ghz(),
            r.d3d_m,
            r.pt_dbm,
            r.gt_dbi,
            r.gr_dbi,
            r.pr_dbm,
            r.gsym_db,
            r.condition,
            r.mode
        ));
    }
    atomic_write(path, out.as_bytes())
}

/// JSON sidecar of one PDP file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PdpSidecar {
    pub resolution_ns: f64,
    pub gt_dbi: f64,
    pub gr_dbi: f64,
    pub azimuth_deg: f64,
    pub elevation_deg: f64,
    pub band_ghz: f64,
    pub condition: LinkCondition,
    pub mode: AntennaMode,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub noise_floor_dbm: Option<f64>,
}

/// Sidecar path for a PDP CSV: same stem, `.json` extension.
pub fn sidecar_path(pdp_csv: &Path) -> PathBuf {
    pdp_csv.with_extension("json")
}

/// Truth path for a PDP CSV: same stem, `.truth.json` extension.
pub fn truth_path(pdp_csv: &Path) -> PathBuf {
    pdp_csv.with_extension("truth.json")
}

pub fn write_pdp_csv(path: &Path, pdp: &PowerDelayProfile) -> Result<(), IoError> {
    let mut out = String::from("delay_ns,power_dbm\n");
    for s in pdp.samples() {
        out.push_str(&format!("{:.4},{:.6}\n", s.delay_ns, s.power_dbm));
    }
    atomic_write(path, out.as_bytes())
}

/// Reads a PDP CSV plus its sidecar; the sidecar supplies the resolution
/// and cached noise floor.
pub fn read_pdp(path: &Path) -> Result<(PowerDelayProfile, PdpSidecar), IoError> {
    let sidecar: PdpSidecar = read_json(&sidecar_path(path))?;
    let mut reader = csv::Reader::from_path(path).map_err(|e| IoError::Format {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    let mut samples: Vec<PdpSample> = Vec::new();
    for row in reader.deserialize::<PdpSample>() {
        samples.push(row.map_err(|e| IoError::Format {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?);
    }
    let mut pdp = PowerDelayProfile::new(sidecar.resolution_ns, samples).map_err(|e| {
        IoError::Format { path: path.to_path_buf(), message: e.to_string() }
    })?;
    if let Some(floor) = sidecar.noise_floor_dbm {
        pdp.set_noise_floor(floor);
    }
    Ok((pdp, sidecar))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), IoError> {
    let mut body = serde_json::to_string_pretty(value).map_err(|e| IoError::Format {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    body.push('\n');
    atomic_write(path, body.as_bytes())
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, IoError> {
    let body = fs::read_to_string(path).map_err(file_err(path))?;
    serde_json::from_str(&body)
        .map_err(|e| IoError::Format { path: path.to_path_buf(), message: e.to_string() })
}

/// Persisted calibration result for one table cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayFile {
    pub band_ghz: f64,
    pub condition: LinkCondition,
    pub mode: AntennaMode,
    pub target_mu_ds_ns: f64,
    pub calibration_drops: usize,
    pub calibration_seed: u64,
    pub decay: CalibratedDecay,
}

/// `decay.<band>.<condition>.<mode>.json`
pub fn decay_file_name(band: Band, condition: LinkCondition, mode: AntennaMode) -> String {
    format!("decay.{}.{}.{}.json", band, condition, mode)
}

pub fn write_truth(path: &Path, truth: &DropTruth) -> Result<(), IoError> {
    write_json(path, truth)
}
