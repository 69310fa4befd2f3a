//! Embedded InH-Office parameter registry at 28, 73, and 142 GHz.
//!
//! Holds the published directional and omnidirectional channel parameters
//! (CI / CIF path loss fits, RMS delay spread, cluster and MPC-per-cluster
//! counts), the 3GPP InH-Office reference values, and the channel sounder
//! constants per band. Values are stored exactly as printed (two decimal
//! places); nothing is re-derived here.

use crate::pathloss::{AntennaMode, CIFParams, CIParams, FrequencyGHz, LinkCondition};
use serde::{Deserialize, Serialize};
use std::fmt;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum TableError {
    #[error("no table entry for {0}")]
    NotAvailable(String),
    #[error("{0} GHz is not a canonical measurement band (28, 73, 142)")]
    NotABand(f64),
}

/// Canonical measurement band.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Band {
    G28,
    G73,
    G142,
}

impl Band {
    pub const ALL: [Band; 3] = [Band::G28, Band::G73, Band::G142];

    pub fn ghz(self) -> f64 {
        match self {
            Band::G28 => 28.0,
            Band::G73 => 73.0,
            Band::G142 => 142.0,
        }
    }

    pub fn frequency(self) -> FrequencyGHz {
        FrequencyGHz::new(self.ghz()).expect("canonical band is positive")
    }

    /// Exact match against the canonical band frequencies.
    pub fn from_ghz(ghz: f64) -> Result<Band, TableError> {
        match ghz {
            x if x == 28.0 => Ok(Band::G28),
            x if x == 73.0 => Ok(Band::G73),
            x if x == 142.0 => Ok(Band::G142),
            other => Err(TableError::NotABand(other)),
        }
    }
}

impl fmt::Display for Band {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.ghz() as i64)
    }
}

/// Channel sounder constants per band.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SounderInfo {
    pub bandwidth_ghz: f64,
    pub hpbw_deg: f64,
    pub antenna_gain_dbi: f64,
    /// Probe time resolution used as the PDP sample spacing.
    pub resolution_ns: f64,
}

pub fn sounder(band: Band) -> SounderInfo {
    match band {
        Band::G28 => SounderInfo { bandwidth_ghz: 0.8, hpbw_deg: 30.0, antenna_gain_dbi: 15.0, resolution_ns: 2.5 },
        Band::G73 => SounderInfo { bandwidth_ghz: 0.8, hpbw_deg: 15.0, antenna_gain_dbi: 20.0, resolution_ns: 2.5 },
        Band::G142 => SounderInfo { bandwidth_ghz: 1.0, hpbw_deg: 8.0, antenna_gain_dbi: 27.0, resolution_ns: 2.0 },
    }
}

/// Weighted reference frequency shared by every multi-band CIF fit.
pub const CIF_REFERENCE_F0_GHZ: f64 = 81.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PathLossModel {
    Ci,
    Cif,
}

/// Single-band fits are per canonical band; multi-band fits pool all three.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FitScope {
    SingleBand,
    MultiBand,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ModelParams {
    Ci(CIParams),
    Cif(CIFParams),
}

impl ModelParams {
    pub fn as_ci(&self) -> Option<CIParams> {
        match self {
            ModelParams::Ci(p) => Some(*p),
            ModelParams::Cif(_) => None,
        }
    }

    pub fn as_cif(&self) -> Option<CIFParams> {
        match self {
            ModelParams::Cif(p) => Some(*p),
            ModelParams::Ci(_) => None,
        }
    }
}

fn ci(n: f64, sigma_db: f64) -> ModelParams {
    ModelParams::Ci(CIParams { n, sigma_db })
}

fn cif(n: f64, b: f64, sigma_db: f64) -> ModelParams {
    ModelParams::Cif(CIFParams { n, b, f0_ghz: CIF_REFERENCE_F0_GHZ, sigma_db })
}

fn cell_name(band: Band, condition: LinkCondition, mode: AntennaMode, extra: &str) -> String {
    format!("{} GHz {} {} {}", band, condition, mode, extra)
}

/// Returns the printed CI or CIF parameters for one table cell.
///
/// `band` selects the column for single-band fits and is ignored for
/// multi-band fits (which pool 28/73/142). CIF fits exist only as
/// multi-band; omnidirectional tables have no `NlosBest` column.
pub fn lookup_params(
    band: Band,
    condition: LinkCondition,
    mode: AntennaMode,
    model: PathLossModel,
    scope: FitScope,
) -> Result<ModelParams, TableError> {
    use AntennaMode::*;
    use Band::*;
    use LinkCondition::*;

    if mode == Omnidirectional && condition == NlosBest {
        return Err(TableError::NotAvailable(cell_name(band, condition, mode, "(no NLOS-best omni column)")));
    }
    match (model, scope) {
        (PathLossModel::Cif, FitScope::SingleBand) => {
            Err(TableError::NotAvailable(cell_name(band, condition, mode, "CIF single-band (CIF is multi-band only)")))
        }
        (PathLossModel::Ci, FitScope::SingleBand) => Ok(match (mode, condition, band) {
            (Directional, Los, G28) => ci(1.90, 3.38),
            (Directional, Los, G73) => ci(1.63, 3.06),
            (Directional, Los, G142) => ci(2.05, 2.89),
            (Directional, NlosBest, G28) => ci(2.75, 7.00),
            (Directional, NlosBest, G73) => ci(3.30, 8.76),
            (Directional, NlosBest, G142) => ci(3.21, 6.03),
            (Directional, Nlos, G28) => ci(4.39, 7.30),
            (Directional, Nlos, G73) => ci(5.51, 8.94),
            (Directional, Nlos, G142) => ci(4.60, 13.80),
            (Omnidirectional, Los, G28) => ci(1.17, 2.72),
            (Omnidirectional, Los, G73) => ci(1.36, 2.30),
            (Omnidirectional, Los, G142) => ci(1.74, 3.62),
            (Omnidirectional, Nlos, G28) => ci(2.37, 7.22),
            (Omnidirectional, Nlos, G73) => ci(2.81, 8.71),
            (Omnidirectional, Nlos, G142) => ci(2.83, 6.07),
            (Omnidirectional, NlosBest, _) => unreachable!("rejected above"),
        }),
        (PathLossModel::Ci, FitScope::MultiBand) => Ok(match (mode, condition) {
            (Directional, Los) => ci(1.86, 3.45),
            (Directional, NlosBest) => ci(3.07, 7.67),
            (Directional, Nlos) => ci(5.02, 13.97),
            (Omnidirectional, Los) => ci(1.42, 3.71),
            (Omnidirectional, Nlos) => ci(2.66, 7.82),
            (Omnidirectional, NlosBest) => unreachable!("rejected above"),
        }),
        (PathLossModel::Cif, FitScope::MultiBand) => Ok(match (mode, condition) {
            (Directional, Los) => cif(1.86, 0.07, 3.45),
            (Directional, NlosBest) => cif(3.07, 0.05, 7.67),
            (Directional, Nlos) => cif(5.02, 0.03, 13.85),
            (Omnidirectional, Los) => cif(1.42, 0.29, 2.94),
            (Omnidirectional, Nlos) => cif(2.66, 0.11, 7.53),
            (Omnidirectional, NlosBest) => unreachable!("rejected above"),
        }),
    }
}

/// Multipath statistics of one table cell: RMS delay spread extremes and
/// mean, time cluster count moments, and MPC-per-cluster moments.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TableStats {
    pub min_ds_ns: f64,
    pub max_ds_ns: f64,
    pub mu_ds_ns: f64,
    pub mu_nc: f64,
    pub sigma_nc: f64,
    pub mu_mpc: f64,
    pub sigma_mpc: f64,
}

fn stats(
    min_ds_ns: f64,
    max_ds_ns: f64,
    mu_ds_ns: f64,
    mu_nc: f64,
    sigma_nc: f64,
    mu_mpc: f64,
    sigma_mpc: f64,
) -> TableStats {
    TableStats { min_ds_ns, max_ds_ns, mu_ds_ns, mu_nc, sigma_nc, mu_mpc, sigma_mpc }
}

/// Returns the printed multipath statistics for one (band, condition, mode).
pub fn lookup_stats(
    band: Band,
    condition: LinkCondition,
    mode: AntennaMode,
) -> Result<TableStats, TableError> {
    use AntennaMode::*;
    use Band::*;
    use LinkCondition::*;

    match (mode, condition, band) {
        (Directional, Los, G28) => Ok(stats(0.87, 5.50, 3.85, 1.41, 0.85, 2.45, 2.19)),
        (Directional, Los, G73) => Ok(stats(0.76, 5.34, 3.53, 1.32, 0.96, 2.53, 2.27)),
        (Directional, Los, G142) => Ok(stats(0.69, 11.94, 2.71, 1.25, 0.94, 2.11, 1.43)),
        (Directional, NlosBest, G28) => Ok(stats(0.92, 44.49, 10.23, 1.65, 0.78, 2.56, 1.54)),
        (Directional, NlosBest, G73) => Ok(stats(3.74, 31.37, 7.39, 1.48, 0.89, 2.44, 2.18)),
        (Directional, NlosBest, G142) => Ok(stats(0.60, 10.76, 5.65, 1.16, 0.69, 1.98, 2.26)),
        (Directional, Nlos, G28) => Ok(stats(0.57, 198.55, 17.64, 3.41, 1.96, 3.16, 4.56)),
        (Directional, Nlos, G73) => Ok(stats(0.51, 141.97, 12.50, 2.60, 1.70, 2.80, 5.20)),
        (Directional, Nlos, G142) => Ok(stats(0.28, 92.45, 8.86, 2.39, 1.48, 1.18, 2.21)),
        (Omnidirectional, Los, G28) => Ok(stats(0.70, 134.40, 10.80, 4.60, 1.94, 4.70, 3.65)),
        (Omnidirectional, Los, G73) => Ok(stats(0.60, 101.90, 6.24, 2.76, 2.32, 3.43, 2.86)),
        (Omnidirectional, Los, G142) => Ok(stats(0.71, 11.94, 3.00, 1.90, 1.30, 2.40, 2.20)),
        (Omnidirectional, Nlos, G28) => Ok(stats(0.60, 198.50, 17.10, 5.40, 1.96, 6.40, 4.58)),
        (Omnidirectional, Nlos, G73) => Ok(stats(0.50, 142.00, 12.30, 3.20, 1.70, 3.20, 5.20)),
        (Omnidirectional, Nlos, G142) => Ok(stats(0.60, 60.87, 9.20, 2.80, 1.65, 2.20, 2.47)),
        (Omnidirectional, NlosBest, _) => Err(TableError::NotAvailable(cell_name(
            band,
            condition,
            mode,
            "(no NLOS-best omni column)",
        ))),
    }
}

/// 3GPP InH-Office reference values. No entry exists above 100 GHz.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThreeGppReference {
    pub condition: LinkCondition,
    pub n: f64,
    pub sigma_db: f64,
    pub mu_ds_28_ns: f64,
    pub mu_ds_73_ns: f64,
    pub num_clusters: u32,
    pub mpcs_per_cluster: u32,
}

impl ThreeGppReference {
    /// Mean RMS delay spread at a band; `None` at 142 GHz (unspecified
    /// above 100 GHz).
    pub fn mu_ds_ns(&self, band: Band) -> Option<f64> {
        match band {
            Band::G28 => Some(self.mu_ds_28_ns),
            Band::G73 => Some(self.mu_ds_73_ns),
            Band::G142 => None,
        }
    }
}

pub fn three_gpp_reference(condition: LinkCondition) -> Result<ThreeGppReference, TableError> {
    match condition {
        LinkCondition::Los => Ok(ThreeGppReference {
            condition,
            n: 1.73,
            sigma_db: 3.00,
            mu_ds_28_ns: 20.40,
            mu_ds_73_ns: 20.21,
            num_clusters: 15,
            mpcs_per_cluster: 20,
        }),
        LinkCondition::Nlos => Ok(ThreeGppReference {
            condition,
            n: 3.19,
            sigma_db: 8.29,
            mu_ds_28_ns: 27.40,
            mu_ds_73_ns: 21.52,
            num_clusters: 19,
            mpcs_per_cluster: 20,
        }),
        LinkCondition::NlosBest => Err(TableError::NotAvailable(
            "3GPP InH-Office has no NLOS-best column".to_string(),
        )),
    }
}

/// Every (condition, mode) pair with table columns, in table order.
pub fn cells_for_mode(mode: AntennaMode) -> &'static [LinkCondition] {
    match mode {
        AntennaMode::Directional => {
            &[LinkCondition::Los, LinkCondition::NlosBest, LinkCondition::Nlos]
        }
        AntennaMode::Omnidirectional => &[LinkCondition::Los, LinkCondition::Nlos],
    }
}
