//! Power delay profile processing: noise floor, multipath component (MPC)
//! detection, time clustering, RMS delay spread, and omnidirectional
//! synthesis from directional traces.
//!
//! An MPC is a local PDP maximum at least `threshold_db` above the mean
//! noise floor whose spacing from any stronger retained peak exceeds the
//! sounder time resolution. Time clusters are maximal runs of MPCs whose
//! consecutive delay gaps stay within the minimum inter-cluster time void
//! interval (MTI).

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Default noise estimation tail fraction.
pub const DEFAULT_TAIL_FRACTION: f64 = 0.2;
/// Default MPC detection threshold above the mean noise floor, dB.
pub const DEFAULT_THRESHOLD_DB: f64 = 5.0;
/// Default minimum inter-cluster time void interval, ns.
pub const DEFAULT_MTI_NS: f64 = 6.0;
/// Power written into delay bins with no contribution during synthesis.
pub const EMPTY_BIN_DBM: f64 = -330.0;

#[derive(Debug, Error, PartialEq)]
pub enum PdpError {
    #[error("empty power delay profile")]
    EmptyProfile,
    #[error("sample spacing must be positive, got {0} ns")]
    InvalidResolution(f64),
    #[error("delays must be strictly increasing and uniformly spaced (sample {index})")]
    NonUniformSpacing { index: usize },
    #[error("tail fraction must be in (0, 0.5], got {0}")]
    InvalidTailFraction(f64),
    #[error("empty multipath component list")]
    EmptyMpcList,
    #[error("MPC list must be sorted by delay (index {index})")]
    UnsortedMpcs { index: usize },
    #[error("MTI must be positive, got {0} ns")]
    InvalidMti(f64),
    #[error("no directional traces given")]
    NoTraces,
    #[error("mismatched resolutions: {a} ns vs {b} ns")]
    MismatchedResolution { a: f64, b: f64 },
    #[error("empty ensemble")]
    EmptyEnsemble,
}

pub fn dbm_to_mw(dbm: f64) -> f64 {
    10f64.powf(dbm / 10.0)
}

pub fn mw_to_dbm(mw: f64) -> f64 {
    10.0 * mw.log10()
}

/// One uniformly spaced delay-power sample.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PdpSample {
    pub delay_ns: f64,
    pub power_dbm: f64,
}

/// Uniformly sampled delay-power trace.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerDelayProfile {
    resolution_ns: f64,
    samples: Vec<PdpSample>,
    noise_floor_dbm: Option<f64>,
}

impl PowerDelayProfile {
    /// Validates positive resolution and uniform, strictly increasing
    /// delays (to within 1e-6 ns).
    pub fn new(resolution_ns: f64, samples: Vec<PdpSample>) -> Result<Self, PdpError> {
        if !(resolution_ns.is_finite() && resolution_ns > 0.0) {
            return Err(PdpError::InvalidResolution(resolution_ns));
        }
        if samples.is_empty() {
            return Err(PdpError::EmptyProfile);
        }
        for i in 1..samples.len() {
            let gap = samples[i].delay_ns - samples[i - 1].delay_ns;
            if (gap - resolution_ns).abs() > 1e-6 {
                return Err(PdpError::NonUniformSpacing { index: i });
            }
        }
        Ok(Self { resolution_ns, samples, noise_floor_dbm: None })
    }

    pub fn resolution_ns(&self) -> f64 {
        self.resolution_ns
    }

    pub fn samples(&self) -> &[PdpSample] {
        &self.samples
    }

    pub fn noise_floor_dbm(&self) -> Option<f64> {
        self.noise_floor_dbm
    }

    pub fn set_noise_floor(&mut self, floor_dbm: f64) {
        self.noise_floor_dbm = Some(floor_dbm);
    }
}

/// One detected peak.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MultipathComponent {
    pub delay_ns: f64,
    pub power_dbm: f64,
}

/// Nonempty run of MPCs with consecutive gaps within the MTI.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeCluster {
    pub mpcs: Vec<MultipathComponent>,
}

impl TimeCluster {
    pub fn len(&self) -> usize {
        self.mpcs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mpcs.is_empty()
    }
}

/// Per-drop channel summary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelStats {
    pub rms_ds_ns: f64,
    pub num_clusters: usize,
    pub mpcs_per_cluster: Vec<usize>,
}

impl ChannelStats {
    pub fn total_mpcs(&self) -> usize {
        self.mpcs_per_cluster.iter().sum()
    }
}

/// Mean thermal noise floor: linear-domain mean over the trailing
/// `tail_fraction` of samples, in dBm.
pub fn estimate_noise_floor(pdp: &PowerDelayProfile, tail_fraction: f64) -> Result<f64, PdpError> {
    if !(tail_fraction > 0.0 && tail_fraction <= 0.5) {
        return Err(PdpError::InvalidTailFraction(tail_fraction));
    }
    let n = pdp.samples.len();
    let tail = ((n as f64 * tail_fraction).ceil() as usize).clamp(1, n);
    let sum: f64 = pdp.samples[n - tail..].iter().map(|s| dbm_to_mw(s.power_dbm)).sum();
    Ok(mw_to_dbm(sum / tail as f64))
}

/// Detects MPCs using the profile's own sample spacing as the minimum
/// peak separation.
pub fn detect_mpcs(
    pdp: &PowerDelayProfile,
    noise_floor_dbm: f64,
    threshold_db: f64,
) -> Vec<MultipathComponent> {
    detect_mpcs_with_spacing(pdp, noise_floor_dbm, threshold_db, pdp.resolution_ns)
}

/// Detects MPCs with an explicit minimum peak separation, for profiles
/// sampled finer than the sounder time resolution.
///
/// Local maxima at or above `noise_floor_dbm + threshold_db` are retained
/// strongest-first; a candidate within `min_spacing_ns` of an already
/// retained (stronger) peak is dropped.
pub fn detect_mpcs_with_spacing(
    pdp: &PowerDelayProfile,
    noise_floor_dbm: f64,
    threshold_db: f64,
    min_spacing_ns: f64,
) -> Vec<MultipathComponent> {
    let s = &pdp.samples;
    let cutoff = noise_floor_dbm + threshold_db;
    let mut candidates: Vec<usize> = Vec::new();
    for i in 0..s.len() {
        if s[i].power_dbm < cutoff {
            continue;
        }
        let rises = i == 0 || s[i].power_dbm >= s[i - 1].power_dbm;
        let falls = i + 1 == s.len() || s[i].power_dbm > s[i + 1].power_dbm;
        if rises && falls {
            candidates.push(i);
        }
    }
    // Strongest first; ties broken by earlier delay so thinning is
    // deterministic.
    candidates.sort_by(|&a, &b| {
        s[b].power_dbm
            .partial_cmp(&s[a].power_dbm)
            .unwrap()
            .then(s[a].delay_ns.partial_cmp(&s[b].delay_ns).unwrap())
    });
    let mut kept: Vec<usize> = Vec::new();
    for &i in &candidates {
        let clear = kept
            .iter()
            .all(|&j| (s[i].delay_ns - s[j].delay_ns).abs() > min_spacing_ns);
        if clear {
            kept.push(i);
        }
    }
    kept.sort_unstable();
    kept.iter()
        .map(|&i| MultipathComponent { delay_ns: s[i].delay_ns, power_dbm: s[i].power_dbm })
        .collect()
}

/// Power-weighted RMS spread of MPC delays, ns.
pub fn rms_delay_spread(mpcs: &[MultipathComponent]) -> Result<f64, PdpError> {
    if mpcs.is_empty() {
        return Err(PdpError::EmptyMpcList);
    }
    // Shift delays to the first arrival; the statistic is
    // translation-invariant and this bounds cancellation error.
    let t0 = mpcs[0].delay_ns;
    let mut wsum = 0.0;
    let mut m1 = 0.0;
    let mut m2 = 0.0;
    for mpc in mpcs {
        let w = dbm_to_mw(mpc.power_dbm);
        let t = mpc.delay_ns - t0;
        wsum += w;
        m1 += w * t;
        m2 += w * t * t;
    }
    let mean = m1 / wsum;
    let var = m2 / wsum - mean * mean;
    Ok(var.max(0.0).sqrt())
}

/// Greedy left-to-right MTI partition of delay-sorted MPCs.
pub fn partition_clusters(
    mpcs: &[MultipathComponent],
    mti_ns: f64,
) -> Result<Vec<TimeCluster>, PdpError> {
    if !(mti_ns.is_finite() && mti_ns > 0.0) {
        return Err(PdpError::InvalidMti(mti_ns));
    }
    for i in 1..mpcs.len() {
        if mpcs[i].delay_ns < mpcs[i - 1].delay_ns {
            return Err(PdpError::UnsortedMpcs { index: i });
        }
    }
    let mut clusters: Vec<TimeCluster> = Vec::new();
    for &mpc in mpcs {
        let start_new = match clusters.last() {
            Some(c) => mpc.delay_ns - c.mpcs.last().unwrap().delay_ns > mti_ns,
            None => true,
        };
        if start_new {
            clusters.push(TimeCluster { mpcs: vec![mpc] });
        } else {
            clusters.last_mut().unwrap().mpcs.push(mpc);
        }
    }
    Ok(clusters)
}

/// Full PDP pipeline: floor -> detect -> cluster -> summarize.
///
/// Returns `Ok(None)` when no MPC clears the threshold (empty channel),
/// never a zeroed summary.
pub fn channel_stats(
    pdp: &PowerDelayProfile,
    mti_ns: f64,
    threshold_db: f64,
) -> Result<Option<ChannelStats>, PdpError> {
    let floor = match pdp.noise_floor_dbm {
        Some(f) => f,
        None => estimate_noise_floor(pdp, DEFAULT_TAIL_FRACTION)?,
    };
    let mpcs = detect_mpcs(pdp, floor, threshold_db);
    if mpcs.is_empty() {
        return Ok(None);
    }
    let clusters = partition_clusters(&mpcs, mti_ns)?;
    Ok(Some(ChannelStats {
        rms_ds_ns: rms_delay_spread(&mpcs)?,
        num_clusters: clusters.len(),
        mpcs_per_cluster: clusters.iter().map(TimeCluster::len).collect(),
    }))
}

/// One directional trace with its pointing direction and antenna gains.
#[derive(Debug, Clone, PartialEq)]
pub struct DirectionalPdp {
    pub azimuth_deg: f64,
    pub elevation_deg: f64,
    pub gt_dbi: f64,
    pub gr_dbi: f64,
    pub pdp: PowerDelayProfile,
}

/// Delay axis handling during omnidirectional synthesis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DelayAlignment {
    /// Delay axes are absolute propagation delay; bins line up as-is.
    Absolute,
    /// Each trace is re-zeroed to its own first sample before binning.
    FirstArrival,
}

/// Synthesizes an omnidirectional PDP from directional traces: strips the
/// antenna gains from each trace, aligns delay axes, and sums linear power
/// per delay bin across unique pointing directions. Duplicate pointing
/// directions contribute once (first trace wins). Bins covered by no trace
/// are filled with [`EMPTY_BIN_DBM`].
pub fn synthesize_omni(
    traces: &[DirectionalPdp],
    alignment: DelayAlignment,
) -> Result<PowerDelayProfile, PdpError> {
    if traces.is_empty() {
        return Err(PdpError::NoTraces);
    }
    let res = traces[0].pdp.resolution_ns;
    for t in &traces[1..] {
        if (t.pdp.resolution_ns - res).abs() > 1e-9 {
            return Err(PdpError::MismatchedResolution { a: res, b: t.pdp.resolution_ns });
        }
    }
    let mut seen_directions: Vec<(f64, f64)> = Vec::new();
    let mut bins: std::collections::BTreeMap<i64, f64> = std::collections::BTreeMap::new();
    for t in traces {
        let dir = (t.azimuth_deg, t.elevation_deg);
        if seen_directions.contains(&dir) {
            continue;
        }
        seen_directions.push(dir);
        let offset = match alignment {
            DelayAlignment::Absolute => 0.0,
            DelayAlignment::FirstArrival => -t.pdp.samples[0].delay_ns,
        };
        for s in &t.pdp.samples {
            let bin = ((s.delay_ns + offset) / res).round() as i64;
            *bins.entry(bin).or_insert(0.0) += dbm_to_mw(s.power_dbm - t.gt_dbi - t.gr_dbi);
        }
    }
    let (&lo, _) = bins.first_key_value().unwrap();
    let (&hi, _) = bins.last_key_value().unwrap();
    let samples: Vec<PdpSample> = (lo..=hi)
        .map(|bin| PdpSample {
            delay_ns: bin as f64 * res,
            power_dbm: bins.get(&bin).map(|&mw| mw_to_dbm(mw)).unwrap_or(EMPTY_BIN_DBM),
        })
        .collect();
    PowerDelayProfile::new(res, samples)
}

/// Ensemble summary over per-drop channel statistics.
///
/// Delay spread percentile uses the nearest-rank definition; spreads are
/// population (divide-by-N) standard deviations. MPC-per-cluster moments
/// pool every cluster of every drop.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleSummary {
    pub num_drops: usize,
    pub min_ds_ns: f64,
    pub max_ds_ns: f64,
    pub mean_ds_ns: f64,
    pub std_ds_ns: f64,
    pub p90_ds_ns: f64,
    pub mean_num_clusters: f64,
    pub std_num_clusters: f64,
    pub mean_mpcs_per_cluster: f64,
    pub std_mpcs_per_cluster: f64,
}

fn mean_std(values: impl Iterator<Item = f64> + Clone) -> (f64, f64, usize) {
    let n = values.clone().count();
    if n == 0 {
        return (f64::NAN, f64::NAN, 0);
    }
    let mean = values.clone().sum::<f64>() / n as f64;
    let var = values.map(|v| (v - mean) * (v - mean)).sum::<f64>() / n as f64;
    (mean, var.max(0.0).sqrt(), n)
}

pub fn ensemble_summary(stats: &[ChannelStats]) -> Result<EnsembleSummary, PdpError> {
    if stats.is_empty() {
        return Err(PdpError::EmptyEnsemble);
    }
    let mut ds: Vec<f64> = stats.iter().map(|s| s.rms_ds_ns).collect();
    ds.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let (mean_ds, std_ds, n) = mean_std(stats.iter().map(|s| s.rms_ds_ns));
    let p90 = ds[((0.9 * n as f64).ceil() as usize).clamp(1, n) - 1];
    let (mean_nc, std_nc, _) = mean_std(stats.iter().map(|s| s.num_clusters as f64));
    let per_cluster: Vec<f64> = stats
        .iter()
        .flat_map(|s| s.mpcs_per_cluster.iter().map(|&c| c as f64))
        .collect();
    let (mean_mpc, std_mpc, _) = mean_std(per_cluster.iter().copied());
    Ok(EnsembleSummary {
        num_drops: stats.len(),
        min_ds_ns: ds[0],
        max_ds_ns: ds[n - 1],
        mean_ds_ns: mean_ds,
        std_ds_ns: std_ds,
        p90_ds_ns: p90,
        mean_num_clusters: mean_nc,
        std_num_clusters: std_nc,
        mean_mpcs_per_cluster: mean_mpc,
        std_mpcs_per_cluster: std_mpc,
    })
}
