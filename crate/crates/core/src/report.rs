//! Comparison reports and plot-ready series.
//!
//! `compare_3gpp` lines up the measured omnidirectional InH parameters
//! against the 3GPP InH-Office reference (and optionally against
//! simulated ensembles), band by band. 3GPP specifies nothing above
//! 100 GHz, so every 142 GHz reference cell renders as `N/A`.

use crate::pathloss::{self, AntennaMode, CIFParams, CIParams, LinkCondition};
use crate::pdp::EnsembleSummary;
use crate::tables::{self, Band, FitScope, PathLossModel, TableError};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt::Write as _;

/// One report row. `band_ghz` is `None` for multi-band rows; value cells
/// are `None` where the source table has no entry. `delta` is always
/// `nyu - three_gpp`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub metric: String,
    pub band_ghz: Option<f64>,
    pub nyu: Option<f64>,
    pub three_gpp: Option<f64>,
    pub simulated: Option<f64>,
    pub delta: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub condition: LinkCondition,
    pub mode: AntennaMode,
    pub rows: Vec<ComparisonRow>,
}

fn row(
    metric: &str,
    band_ghz: Option<f64>,
    nyu: Option<f64>,
    three_gpp: Option<f64>,
    simulated: Option<f64>,
) -> ComparisonRow {
    let delta = match (nyu, three_gpp) {
        (Some(a), Some(b)) => Some(a - b),
        _ => None,
    };
    ComparisonRow { metric: metric.to_string(), band_ghz, nyu, three_gpp, simulated, delta }
}

/// Builds the omnidirectional NYU-vs-3GPP comparison for one condition.
/// `simulated` maps bands to ensemble summaries from `simulate` output.
pub fn compare_3gpp(
    condition: LinkCondition,
    simulated: &BTreeMap<Band, EnsembleSummary>,
) -> Result<ComparisonReport, TableError> {
    let mode = AntennaMode::Omnidirectional;
    let reference = tables::three_gpp_reference(condition)?;
    let mut rows = Vec::new();

    for band in Band::ALL {
        let ci: CIParams = tables::lookup_params(band, condition, mode, PathLossModel::Ci, FitScope::SingleBand)?
            .as_ci()
            .expect("single-band CI");
        rows.push(row("n_single", Some(band.ghz()), Some(ci.n), None, None));
        rows.push(row("sigma_single_db", Some(band.ghz()), Some(ci.sigma_db), None, None));
    }

    let ci_multi: CIParams =
        tables::lookup_params(Band::G28, condition, mode, PathLossModel::Ci, FitScope::MultiBand)?
            .as_ci()
            .expect("multi-band CI");
    rows.push(row("n_multi", None, Some(ci_multi.n), Some(reference.n), None));
    rows.push(row("sigma_multi_db", None, Some(ci_multi.sigma_db), Some(reference.sigma_db), None));

    let cif: CIFParams =
        tables::lookup_params(Band::G28, condition, mode, PathLossModel::Cif, FitScope::MultiBand)?
            .as_cif()
            .expect("multi-band CIF");
    rows.push(row("n_cif", None, Some(cif.n), None, None));
    rows.push(row("b_cif", None, Some(cif.b), None, None));
    rows.push(row("f0_cif_ghz", None, Some(cif.f0_ghz), None, None));
    rows.push(row("sigma_cif_db", None, Some(cif.sigma_db), None, None));

    for band in Band::ALL {
        let stats = tables::lookup_stats(band, condition, mode)?;
        let sim = simulated.get(&band);
        rows.push(row(
            "mu_ds_ns",
            Some(band.ghz()),
            Some(stats.mu_ds_ns),
            reference.mu_ds_ns(band),
            sim.map(|s| s.mean_ds_ns),
        ));
        rows.push(row(
            "mu_nc",
            Some(band.ghz()),
            Some(stats.mu_nc),
            reference.mu_ds_ns(band).map(|_| reference.num_clusters as f64),
            sim.map(|s| s.mean_num_clusters),
        ));
        rows.push(row(
            "mu_mpc",
            Some(band.ghz()),
            Some(stats.mu_mpc),
            reference.mu_ds_ns(band).map(|_| reference.mpcs_per_cluster as f64),
            sim.map(|s| s.mean_mpcs_per_cluster),
        ));
    }
    Ok(ComparisonReport { condition, mode, rows })
}

fn cell(value: Option<f64>) -> String {
    match value {
        Some(v) => format!("{v:.2}"),
        None => "N/A".to_string(),
    }
}

impl ComparisonReport {
    /// Fixed-width ASCII rendering (stable for golden-file tests).
    pub fn render_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "InH-Office {} omnidirectional: NYU vs 3GPP", self.condition);
        let _ = writeln!(
            out,
            "{:<16} {:>8} {:>10} {:>10} {:>10} {:>10}",
            "metric", "band_ghz", "nyu", "3gpp", "delta", "simulated"
        );
        let _ = writeln!(out, "{}", "-".repeat(69));
        for r in &self.rows {
            let band = match r.band_ghz {
                Some(b) => format!("{b:.0}"),
                None => "all".to_string(),
            };
            let _ = writeln!(
                out,
                "{:<16} {:>8} {:>10} {:>10} {:>10} {:>10}",
                r.metric,
                band,
                cell(r.nyu),
                cell(r.three_gpp),
                cell(r.delta),
                cell(r.simulated)
            );
        }
        out
    }
}

/// One point of a path loss model curve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathLossPoint {
    pub band_ghz: f64,
    pub model: String,
    pub d_m: f64,
    pub pl_db: f64,
}

/// Multi-band CI and CIF mean path loss curves versus distance for one
/// (condition, mode), over 1-40 m.
pub fn pathloss_series(
    condition: LinkCondition,
    mode: AntennaMode,
) -> Result<Vec<PathLossPoint>, TableError> {
    let ci = tables::lookup_params(Band::G28, condition, mode, PathLossModel::Ci, FitScope::MultiBand)?
        .as_ci()
        .expect("multi-band CI");
    let cif = tables::lookup_params(Band::G28, condition, mode, PathLossModel::Cif, FitScope::MultiBand)?
        .as_cif()
        .expect("multi-band CIF");
    let mut points = Vec::new();
    for band in Band::ALL {
        let f = band.frequency();
        let mut d = 1.0;
        while d <= 40.0 + 1e-9 {
            points.push(PathLossPoint {
                band_ghz: band.ghz(),
                model: "ci".to_string(),
                d_m: d,
                pl_db: pathloss::ci_path_loss(&ci, f, d, 0.0).expect("d >= 1"),
            });
            points.push(PathLossPoint {
                band_ghz: band.ghz(),
                model: "cif".to_string(),
                d_m: d,
                pl_db: pathloss::cif_path_loss(&cif, f, d, 0.0).expect("d >= 1"),
            });
            d += 0.5;
        }
    }
    Ok(points)
}

/// One empirical CDF point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CdfPoint {
    pub ds_ns: f64,
    pub prob: f64,
}

/// Empirical CDF of RMS delay spread values.
pub fn ds_cdf_series(ds_values: &[f64]) -> Vec<CdfPoint> {
    let mut sorted: Vec<f64> = ds_values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = sorted.len();
    sorted
        .into_iter()
        .enumerate()
        .map(|(i, ds_ns)| CdfPoint { ds_ns, prob: (i + 1) as f64 / n as f64 })
        .collect()
}
