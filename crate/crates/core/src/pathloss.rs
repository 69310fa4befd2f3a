//! CI / CIF large-scale path loss models with a 1 m free space reference.
//!
//! The measured path loss of one link is
//! `PL [dB] = Pt + Gt + Gr - Pr + Gsym`.
//!
//! The CI model predicts mean path loss as
//! `FSPL(f, 1 m) + 10 n log10(d)` with `FSPL(f, 1 m) = 32.4 + 20 log10(f_GHz)`,
//! and the CIF model replaces the path loss exponent by the
//! frequency-weighted `n (1 + b (f - f0) / f0)`.
//!
//! Shadow fading is always an explicit caller-supplied term so that
//! mean-path-loss evaluation (`shadow_db = 0`) and stochastic evaluation
//! share one code path.

use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum PathLossError {
    #[error("frequency must be positive and finite, got {0} GHz")]
    NonPositiveFrequency(f64),
    #[error("distance {0} m is below the 1 m close-in reference")]
    DistanceBelowReference(f64),
    #[error("field {field} must be finite, got {value}")]
    NonFinite { field: &'static str, value: f64 },
    #[error("parameter {field} out of range: {value}")]
    InvalidParameter { field: &'static str, value: f64 },
    #[error("unknown link condition {0:?}")]
    UnknownCondition(String),
    #[error("unknown antenna mode {0:?}")]
    UnknownMode(String),
}

/// Carrier frequency in GHz. Always positive and finite.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct FrequencyGHz(f64);

impl FrequencyGHz {
    pub fn new(ghz: f64) -> Result<Self, PathLossError> {
        if ghz.is_finite() && ghz > 0.0 {
            Ok(Self(ghz))
        } else {
            Err(PathLossError::NonPositiveFrequency(ghz))
        }
    }

    pub fn ghz(self) -> f64 {
        self.0
    }
}

impl TryFrom<f64> for FrequencyGHz {
    type Error = PathLossError;
    fn try_from(v: f64) -> Result<Self, Self::Error> {
        Self::new(v)
    }
}

impl From<FrequencyGHz> for f64 {
    fn from(f: FrequencyGHz) -> f64 {
        f.0
    }
}

impl fmt::Display for FrequencyGHz {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} GHz", self.0)
    }
}

/// Link condition. `NlosBest` is the best TX/RX pointing pair at an NLOS
/// location and exists only for directional antennas.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LinkCondition {
    Los,
    NlosBest,
    Nlos,
}

impl LinkCondition {
    pub fn as_str(self) -> &'static str {
        match self {
            LinkCondition::Los => "los",
            LinkCondition::NlosBest => "nlos_best",
            LinkCondition::Nlos => "nlos",
        }
    }
}

impl fmt::Display for LinkCondition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for LinkCondition {
    type Err = PathLossError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "los" => Ok(LinkCondition::Los),
            "nlos_best" => Ok(LinkCondition::NlosBest),
            "nlos" => Ok(LinkCondition::Nlos),
            other => Err(PathLossError::UnknownCondition(other.to_string())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AntennaMode {
    Directional,
    Omnidirectional,
}

impl AntennaMode {
    pub fn as_str(self) -> &'static str {
        match self {
            AntennaMode::Directional => "directional",
            AntennaMode::Omnidirectional => "omnidirectional",
        }
    }
}

impl fmt::Display for AntennaMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for AntennaMode {
    type Err = PathLossError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "directional" => Ok(AntennaMode::Directional),
            "omnidirectional" | "omni" => Ok(AntennaMode::Omnidirectional),
            other => Err(PathLossError::UnknownMode(other.to_string())),
        }
    }
}

/// CI model parameters: path loss exponent `n` and shadow fading std.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CIParams {
    pub n: f64,
    pub sigma_db: f64,
}

impl CIParams {
    pub fn new(n: f64, sigma_db: f64) -> Result<Self, PathLossError> {
        if !(n.is_finite() && n > 0.0) {
            return Err(PathLossError::InvalidParameter { field: "n", value: n });
        }
        if !(sigma_db.is_finite() && sigma_db >= 0.0) {
            return Err(PathLossError::InvalidParameter {
                field: "sigma_db",
                value: sigma_db,
            });
        }
        Ok(Self { n, sigma_db })
    }
}

/// CIF model parameters: PLE `n` at the weighted reference frequency
/// `f0_ghz`, frequency slope `b`, and shadow fading std.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CIFParams {
    pub n: f64,
    pub b: f64,
    pub f0_ghz: f64,
    pub sigma_db: f64,
}

impl CIFParams {
    pub fn new(n: f64, b: f64, f0_ghz: f64, sigma_db: f64) -> Result<Self, PathLossError> {
        if !(n.is_finite() && n > 0.0) {
            return Err(PathLossError::InvalidParameter { field: "n", value: n });
        }
        if !b.is_finite() {
            return Err(PathLossError::InvalidParameter { field: "b", value: b });
        }
        if !(f0_ghz.is_finite() && f0_ghz > 0.0) {
            return Err(PathLossError::InvalidParameter {
                field: "f0_ghz",
                value: f0_ghz,
            });
        }
        if !(sigma_db.is_finite() && sigma_db >= 0.0) {
            return Err(PathLossError::InvalidParameter {
                field: "sigma_db",
                value: sigma_db,
            });
        }
        Ok(Self { n, b, f0_ghz, sigma_db })
    }
}

/// One TX-RX link observation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeasurementRecord {
    pub f_ghz: FrequencyGHz,
    pub d3d_m: f64,
    pub pt_dbm: f64,
    pub gt_dbi: f64,
    pub gr_dbi: f64,
    pub pr_dbm: f64,
    pub gsym_db: f64,
    pub condition: LinkCondition,
    pub mode: AntennaMode,
}

impl MeasurementRecord {
    /// Checks the CI reference-distance bound and field finiteness.
    pub fn validate(&self) -> Result<(), PathLossError> {
        if !self.d3d_m.is_finite() || self.d3d_m < 1.0 {
            return Err(PathLossError::DistanceBelowReference(self.d3d_m));
        }
        for (field, value) in [
            ("pt_dbm", self.pt_dbm),
            ("gt_dbi", self.gt_dbi),
            ("gr_dbi", self.gr_dbi),
            ("pr_dbm", self.pr_dbm),
            ("gsym_db", self.gsym_db),
        ] {
            if !value.is_finite() {
                return Err(PathLossError::NonFinite { field, value });
            }
        }
        Ok(())
    }
}

/// Free space path loss at 1 m: `32.4 + 20 log10(f_GHz)` dB.
pub fn fspl_1m(f: FrequencyGHz) -> f64 {
    32.4 + 20.0 * f.ghz().log10()
}

fn check_distance(d3d_m: f64) -> Result<(), PathLossError> {
    if d3d_m.is_finite() && d3d_m >= 1.0 {
        Ok(())
    } else {
        Err(PathLossError::DistanceBelowReference(d3d_m))
    }
}

/// CI path loss: `FSPL(f, 1 m) + 10 n log10(d) + shadow`.
///
/// `shadow_db` is 0 for mean path loss or a sampled zero-mean Gaussian.
pub fn ci_path_loss(
    p: &CIParams,
    f: FrequencyGHz,
    d3d_m: f64,
    shadow_db: f64,
) -> Result<f64, PathLossError> {
    check_distance(d3d_m)?;
    Ok(fspl_1m(f) + 10.0 * p.n * d3d_m.log10() + shadow_db)
}

/// CIF path loss: `FSPL(f, 1 m) + 10 n (1 + b (f - f0)/f0) log10(d) + shadow`.
pub fn cif_path_loss(
    p: &CIFParams,
    f: FrequencyGHz,
    d3d_m: f64,
    shadow_db: f64,
) -> Result<f64, PathLossError> {
    check_distance(d3d_m)?;
    let ple = p.n * (1.0 + p.b * (f.ghz() - p.f0_ghz) / p.f0_ghz);
    Ok(fspl_1m(f) + 10.0 * ple * d3d_m.log10() + shadow_db)
}

/// Measured path loss of one link: `Pt + Gt + Gr - Pr + Gsym`.
pub fn measured_path_loss(r: &MeasurementRecord) -> f64 {
    r.pt_dbm + r.gt_dbi + r.gr_dbi - r.pr_dbm + r.gsym_db
}
