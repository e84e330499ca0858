//! Dissipation factor, efficiency, Q, resonance and low-impedance bandwidth
//! of a capacitor impedance profile.

use crate::error::{Error, Result};
use crate::rf::ImpedanceProfile;

pub const DEFAULT_REACTANCE_EPSILON_OHM: f64 = 1e-3;
pub const DEFAULT_Z_THRESHOLD_OHM: f64 = 3.0;
pub const DEFAULT_DF_THRESHOLD: f64 = 0.02;

/// Pointwise loss figures. `df`, `efficiency` and `q` are fractions
/// (0.01 = 1 %); `None` marks points at a resonance or extraction
/// singularity.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct LossProfile {
    pub frequencies_hz: Vec<f64>,
    pub esr_ohm: Vec<Option<f64>>,
    pub reactance_ohm: Vec<Option<f64>>,
    pub df: Vec<Option<f64>>,
    pub efficiency: Vec<Option<f64>>,
    pub q: Vec<Option<f64>>,
}

/// Dissipation factor R/|X| at every point with |X| >= `reactance_epsilon`.
pub fn dissipation_factor_profile(
    profile: &ImpedanceProfile,
    reactance_epsilon: f64,
) -> Result<LossProfile> {
    if !(reactance_epsilon > 0.0) {
        return Err(Error::input(format!(
            "reactance epsilon must be positive, got {reactance_epsilon}"
        )));
    }
    let n = profile.len();
    let mut out = LossProfile {
        frequencies_hz: profile.frequencies_hz().to_vec(),
        esr_ohm: profile.resistance(),
        reactance_ohm: profile.reactance(),
        df: Vec::with_capacity(n),
        efficiency: Vec::with_capacity(n),
        q: Vec::with_capacity(n),
    };
    for z in profile.points() {
        let df = z.and_then(|z| (z.im.abs() >= reactance_epsilon).then(|| z.re / z.im.abs()));
        out.df.push(df);
        out.efficiency.push(df.map(|d| 1.0 - d));
        out.q.push(df.map(|d| 1.0 / d));
    }
    Ok(out)
}

/// Two independent resonance estimates.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ResonanceEstimate {
    /// Lowest-frequency sign change of the reactance, linearly interpolated.
    pub crossing_hz: Option<f64>,
    /// Sample frequency of the smallest |Z|, when it is interior to the sweep.
    pub min_impedance_hz: Option<f64>,
    pub warnings: Vec<String>,
}

impl ResonanceEstimate {
    /// Prefers the interpolated crossing.
    pub fn best(&self) -> Option<f64> {
        self.crossing_hz.or(self.min_impedance_hz)
    }
}

pub fn resonant_frequency(profile: &ImpedanceProfile) -> Result<ResonanceEstimate> {
    if profile.len() < 2 {
        return Err(Error::InsufficientData(
            "resonance search needs at least 2 points".into(),
        ));
    }
    let freqs = profile.frequencies_hz();
    let pts = profile.points();
    let mut crossings = Vec::new();
    for i in 0..pts.len() - 1 {
        let (Some(a), Some(b)) = (pts[i], pts[i + 1]) else {
            continue;
        };
        let (xa, xb) = (a.im, b.im);
        if xa == 0.0 {
            if crossings.last() != Some(&freqs[i]) {
                crossings.push(freqs[i]);
            }
        } else if xb == 0.0 {
            crossings.push(freqs[i + 1]);
        } else if (xa < 0.0) != (xb < 0.0) {
            let t = xa / (xa - xb);
            crossings.push(freqs[i] + t * (freqs[i + 1] - freqs[i]));
        }
    }
    let mut est = ResonanceEstimate {
        crossing_hz: crossings.first().copied(),
        ..Default::default()
    };
    if crossings.len() > 1 {
        est.warnings.push(format!(
            "{} reactance zero-crossings found; reporting the lowest at {} Hz",
            crossings.len(),
            crossings[0]
        ));
    }

    let min = pts
        .iter()
        .enumerate()
        .filter_map(|(i, z)| z.map(|z| (i, z.norm())))
        .fold(None, |best: Option<(usize, f64)>, (i, m)| match best {
            Some((_, bm)) if bm <= m => best,
            _ => Some((i, m)),
        });
    if let Some((i, _)) = min {
        if i > 0 && i < pts.len() - 1 {
            est.min_impedance_hz = Some(freqs[i]);
        }
    }
    Ok(est)
}

/// A closed frequency interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrequencyInterval {
    pub start_hz: f64,
    pub stop_hz: f64,
}

impl FrequencyInterval {
    pub fn width_hz(&self) -> f64 {
        self.stop_hz - self.start_hz
    }

    pub fn contains(&self, other: &FrequencyInterval) -> bool {
        self.start_hz <= other.start_hz && other.stop_hz <= self.stop_hz
    }
}

/// The contiguous band around the |Z| minimum where |Z| <= `z_threshold`,
/// with edges interpolated between samples. `None` when no point qualifies.
pub fn low_impedance_bandwidth(
    profile: &ImpedanceProfile,
    z_threshold: f64,
) -> Result<Option<FrequencyInterval>> {
    if !(z_threshold > 0.0) {
        return Err(Error::input(format!(
            "impedance threshold must be positive, got {z_threshold}"
        )));
    }
    let freqs = profile.frequencies_hz();
    let mags = profile.magnitude();
    let Some((imin, mmin)) = mags
        .iter()
        .enumerate()
        .filter_map(|(i, m)| m.map(|m| (i, m)))
        .fold(None, |best: Option<(usize, f64)>, (i, m)| match best {
            Some((_, bm)) if bm <= m => best,
            _ => Some((i, m)),
        })
    else {
        return Ok(None);
    };
    if mmin > z_threshold {
        return Ok(None);
    }
    let inside = |i: usize| matches!(mags[i], Some(m) if m <= z_threshold);
    let edge = |inner: usize, outer: usize| -> f64 {
        match (mags[inner], mags[outer]) {
            (Some(mi), Some(mo)) => {
                let t = (z_threshold - mi) / (mo - mi);
                freqs[inner] + t * (freqs[outer] - freqs[inner])
            }
            _ => freqs[inner],
        }
    };

    let mut lo = imin;
    while lo > 0 && inside(lo - 1) {
        lo -= 1;
    }
    let mut hi = imin;
    while hi + 1 < mags.len() && inside(hi + 1) {
        hi += 1;
    }
    let start_hz = if lo == 0 { freqs[0] } else { edge(lo, lo - 1) };
    let stop_hz = if hi + 1 == mags.len() {
        freqs[hi]
    } else {
        edge(hi, hi + 1)
    };
    Ok(Some(FrequencyInterval { start_hz, stop_hz }))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricThresholds {
    pub reactance_epsilon_ohm: f64,
    pub z_threshold_ohm: f64,
    /// Dissipation factor (fraction) used for the fraction-of-band statistic.
    pub df_threshold: f64,
}

impl Default for MetricThresholds {
    fn default() -> Self {
        Self {
            reactance_epsilon_ohm: DEFAULT_REACTANCE_EPSILON_OHM,
            z_threshold_ohm: DEFAULT_Z_THRESHOLD_OHM,
            df_threshold: DEFAULT_DF_THRESHOLD,
        }
    }
}

/// The full figure-of-merit record for one impedance profile.
#[derive(Debug, Clone, PartialEq)]
pub struct CapacitorMetrics {
    pub loss: LossProfile,
    pub resonance: ResonanceEstimate,
    pub bandwidth: Option<FrequencyInterval>,
    pub thresholds: MetricThresholds,
    /// Fraction of sweep points whose DF is defined and below the threshold.
    pub fraction_below_df_threshold: f64,
    /// Fraction of sweep points with undefined DF.
    pub fraction_undefined: f64,
    pub max_df: Option<f64>,
    pub warnings: Vec<String>,
}

pub fn metrics_report(
    profile: &ImpedanceProfile,
    thresholds: MetricThresholds,
) -> Result<CapacitorMetrics> {
    let loss = dissipation_factor_profile(profile, thresholds.reactance_epsilon_ohm)?;
    let resonance = if profile.len() >= 2 {
        resonant_frequency(profile)?
    } else {
        ResonanceEstimate::default()
    };
    let bandwidth = low_impedance_bandwidth(profile, thresholds.z_threshold_ohm)?;
    let n = loss.df.len() as f64;
    let below = loss
        .df
        .iter()
        .filter(|d| matches!(d, Some(d) if *d < thresholds.df_threshold))
        .count();
    let undefined = loss.df.iter().filter(|d| d.is_none()).count();
    let max_df = loss
        .df
        .iter()
        .flatten()
        .copied()
        .fold(None, |acc: Option<f64>, d| {
            Some(acc.map_or(d, |a| a.max(d)))
        });
    let mut warnings = resonance.warnings.clone();
    warnings.extend(profile.negative_resistance_warnings());
    if undefined == loss.df.len() {
        warnings.push("dissipation factor undefined at every sweep point".into());
    }
    Ok(CapacitorMetrics {
        loss,
        resonance,
        bandwidth,
        thresholds,
        fraction_below_df_threshold: below as f64 / n,
        fraction_undefined: undefined as f64 / n,
        max_df,
        warnings,
    })
}
