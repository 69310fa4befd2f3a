//! Least-squares estimation of CI and CIF path loss parameters.
//!
//! Both fits work on the excess loss `A_i = PL_i - FSPL(f_i, 1 m)` against
//! the log-distance regressor `B_i = 10 log10(d_i)`:
//!
//! - CI: through-the-origin MMSE, `n = sum(A B) / sum(B^2)`.
//! - CIF: two-parameter linear least squares in `(a, c)` with regressors
//!   `x1 = B` and `x2 = B (f - f0)/f0`, then `n = a`, `b = c / a`. The
//!   reference `f0` is fixed at the measurement-count weighted average
//!   frequency, not re-optimized.
//!
//! The shadow fading std is the divide-by-N RMS of the fit residuals
//! (biased estimator), so `sigma_db == rmse_db` in every result.

use crate::pathloss::{self, CIFParams, CIParams, FrequencyGHz, MeasurementRecord};
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum FitError {
    #[error("empty record list")]
    EmptyRecords,
    #[error("need at least {needed} records, got {got}")]
    TooFewRecords { needed: usize, got: usize },
    #[error("record {index}: {source}")]
    InvalidRecord {
        index: usize,
        source: pathloss::PathLossError,
    },
    #[error("degenerate design: all records at the 1 m reference distance")]
    DegenerateDesign,
    #[error("CIF slope is unidentifiable from a single frequency band")]
    SingleBand,
    #[error("ill-conditioned CIF fit (n estimate {n})")]
    IllConditioned { n: f64 },
}

/// Fit output: estimated parameters plus per-record residuals.
///
/// `sigma_db` inside `params` always equals `rmse_db`.
#[derive(Debug, Clone, PartialEq)]
pub struct FitResult<P> {
    pub params: P,
    pub residuals_db: Vec<f64>,
    pub rmse_db: f64,
}

fn validate_records(records: &[MeasurementRecord]) -> Result<(), FitError> {
    if records.is_empty() {
        return Err(FitError::EmptyRecords);
    }
    for (index, r) in records.iter().enumerate() {
        r.validate().map_err(|source| FitError::InvalidRecord { index, source })?;
    }
    Ok(())
}

/// Measurement-count weighted average frequency over the distinct bands.
pub fn weighted_center_frequency(
    records: &[MeasurementRecord],
) -> Result<FrequencyGHz, FitError> {
    if records.is_empty() {
        return Err(FitError::EmptyRecords);
    }
    let sum: f64 = records.iter().map(|r| r.f_ghz.ghz()).sum();
    let f0 = sum / records.len() as f64;
    FrequencyGHz::new(f0).map_err(|_| FitError::EmptyRecords)
}

fn excess_loss_and_log_distance(records: &[MeasurementRecord]) -> (Vec<f64>, Vec<f64>) {
    let a = records
        .iter()
        .map(|r| pathloss::measured_path_loss(r) - pathloss::fspl_1m(r.f_ghz))
        .collect();
    let b = records.iter().map(|r| 10.0 * r.d3d_m.log10()).collect();
    (a, b)
}

fn rms(residuals: &[f64]) -> f64 {
    let mean_sq = residuals.iter().map(|r| r * r).sum::<f64>() / residuals.len() as f64;
    mean_sq.sqrt()
}

/// Fits the single-parameter CI model.
pub fn fit_ci(records: &[MeasurementRecord]) -> Result<FitResult<CIParams>, FitError> {
    validate_records(records)?;
    if records.len() < 2 {
        return Err(FitError::TooFewRecords { needed: 2, got: records.len() });
    }
    let (a, b) = excess_loss_and_log_distance(records);
    let sum_bb: f64 = b.iter().map(|x| x * x).sum();
    if sum_bb <= 0.0 {
        return Err(FitError::DegenerateDesign);
    }
    let sum_ab: f64 = a.iter().zip(&b).map(|(x, y)| x * y).sum();
    let n = sum_ab / sum_bb;
    let residuals: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x - n * y).collect();
    let rmse = rms(&residuals);
    Ok(FitResult {
        params: CIParams { n, sigma_db: rmse },
        residuals_db: residuals,
        rmse_db: rmse,
    })
}

/// Fits the CIF model with `f0` fixed at the weighted average frequency.
pub fn fit_cif(records: &[MeasurementRecord]) -> Result<FitResult<CIFParams>, FitError> {
    validate_records(records)?;
    if records.len() < 2 {
        return Err(FitError::TooFewRecords { needed: 2, got: records.len() });
    }
    let mut bands: BTreeMap<u64, usize> = BTreeMap::new();
    for r in records {
        *bands.entry(r.f_ghz.ghz().to_bits()).or_default() += 1;
    }
    if bands.len() < 2 {
        return Err(FitError::SingleBand);
    }
    let f0 = weighted_center_frequency(records)?.ghz();

    let (y, x1) = excess_loss_and_log_distance(records);
    let x2: Vec<f64> = records
        .iter()
        .zip(&x1)
        .map(|(r, b)| b * (r.f_ghz.ghz() - f0) / f0)
        .collect();

    // Normal equations of the 2-parameter linear system.
    let s11: f64 = x1.iter().map(|v| v * v).sum();
    let s22: f64 = x2.iter().map(|v| v * v).sum();
    let s12: f64 = x1.iter().zip(&x2).map(|(u, v)| u * v).sum();
    let t1: f64 = x1.iter().zip(&y).map(|(u, v)| u * v).sum();
    let t2: f64 = x2.iter().zip(&y).map(|(u, v)| u * v).sum();
    let det = s11 * s22 - s12 * s12;
    if s11 <= 0.0 {
        return Err(FitError::DegenerateDesign);
    }
    if det.abs() < 1e-12 * s11 * s11 {
        // x2 proportional to x1 happens when distances and frequencies are
        // perfectly confounded.
        return Err(FitError::SingleBand);
    }
    let a = (t1 * s22 - t2 * s12) / det;
    let c = (t2 * s11 - t1 * s12) / det;
    if !(a > 1e-9) {
        return Err(FitError::IllConditioned { n: a });
    }
    let b_slope = c / a;
    let residuals: Vec<f64> = y
        .iter()
        .zip(x1.iter().zip(&x2))
        .map(|(yi, (u, v))| yi - a * u - c * v)
        .collect();
    let rmse = rms(&residuals);
    Ok(FitResult {
        params: CIFParams { n: a, b: b_slope, f0_ghz: f0, sigma_db: rmse },
        residuals_db: residuals,
        rmse_db: rmse,
    })
}
