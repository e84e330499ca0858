//! Impedance extraction from scattering data and lumped-model synthesis.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::touchstone::{check_sweep, NetworkData};

/// Measurement configuration used to de-embed a component from S-parameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FixtureMode {
    /// One-port: the component terminates port 1, Z from S11.
    Reflection,
    /// Two-port: the component sits in series between the ports, Z from S21.
    #[default]
    SeriesThrough,
    /// Two-port: the component shunts the through line to ground, Z from S21.
    ShuntThrough,
}

impl FixtureMode {
    pub fn name(self) -> &'static str {
        match self {
            Self::Reflection => "reflection",
            Self::SeriesThrough => "series-through",
            Self::ShuntThrough => "shunt-through",
        }
    }

    pub fn required_ports(self) -> usize {
        match self {
            Self::Reflection => 1,
            Self::SeriesThrough | Self::ShuntThrough => 2,
        }
    }
}

impl fmt::Display for FixtureMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FixtureMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "reflection" => Ok(Self::Reflection),
            "series-through" | "series" => Ok(Self::SeriesThrough),
            "shunt-through" | "shunt" => Ok(Self::ShuntThrough),
            _ => Err(Error::input(format!(
                "unknown fixture mode '{s}' (expected reflection, series-through or shunt-through)"
            ))),
        }
    }
}

/// Z = z0·(1+Γ)/(1−Γ).
pub fn impedance_from_s11(s11: Complex64, z0: f64) -> Result<Complex64> {
    let den = Complex64::new(1.0, 0.0) - s11;
    if den == Complex64::new(0.0, 0.0) {
        return Err(Error::Singularity("S11 = 1 (open circuit)"));
    }
    Ok(z0 * (1.0 + s11) / den)
}

/// Z = 2·z0·(1−S21)/S21 for a series element between two z0 ports.
pub fn series_impedance_from_s21(s21: Complex64, z0: f64) -> Result<Complex64> {
    if s21 == Complex64::new(0.0, 0.0) {
        return Err(Error::Singularity("S21 = 0 (open series element)"));
    }
    Ok(2.0 * z0 * (1.0 - s21) / s21)
}

/// Z = (z0/2)·S21/(1−S21) for a shunt element across a z0 through line.
pub fn shunt_impedance_from_s21(s21: Complex64, z0: f64) -> Result<Complex64> {
    let den = Complex64::new(1.0, 0.0) - s21;
    if den == Complex64::new(0.0, 0.0) {
        return Err(Error::Singularity("S21 = 1 (open shunt element)"));
    }
    Ok(0.5 * z0 * s21 / den)
}

/// Γ = (Z − z0)/(Z + z0).
pub fn reflection_coefficient(z: Complex64, z0: f64) -> Result<Complex64> {
    let den = z + z0;
    if den == Complex64::new(0.0, 0.0) {
        return Err(Error::Singularity("Z = -z0"));
    }
    Ok((z - z0) / den)
}

/// Scattering entries `[S11, S21, S12, S22]` of a series element `z`.
pub fn series_element_s(z: Complex64, z0: f64) -> [Complex64; 4] {
    let den = z + 2.0 * z0;
    let s11 = z / den;
    let s21 = 2.0 * z0 / den;
    [s11, s21, s21, s11]
}

/// Scattering entries `[S11, S21, S12, S22]` of a shunt element `z`.
pub fn shunt_element_s(z: Complex64, z0: f64) -> [Complex64; 4] {
    let den = 2.0 * z + z0;
    let s11 = -z0 / den;
    let s21 = 2.0 * z / den;
    [s11, s21, s21, s11]
}

/// Impedance versus frequency. Points whose extraction hit a singularity
/// are stored as `None`.
#[derive(Debug, Clone, PartialEq)]
pub struct ImpedanceProfile {
    frequencies_hz: Vec<f64>,
    z: Vec<Option<Complex64>>,
}

impl ImpedanceProfile {
    pub fn new(frequencies_hz: Vec<f64>, z: Vec<Complex64>) -> Result<Self> {
        Self::from_points(frequencies_hz, z.into_iter().map(Some).collect())
    }

    pub fn from_points(frequencies_hz: Vec<f64>, z: Vec<Option<Complex64>>) -> Result<Self> {
        if frequencies_hz.len() != z.len() {
            return Err(Error::input(format!(
                "{} impedance points for {} frequencies",
                z.len(),
                frequencies_hz.len()
            )));
        }
        if frequencies_hz.is_empty() {
            return Err(Error::input("empty impedance profile"));
        }
        check_sweep(&frequencies_hz).map_err(Error::InvalidInput)?;
        Ok(Self { frequencies_hz, z })
    }

    pub fn frequencies_hz(&self) -> &[f64] {
        &self.frequencies_hz
    }

    pub fn points(&self) -> &[Option<Complex64>] {
        &self.z
    }

    pub fn len(&self) -> usize {
        self.z.len()
    }

    pub fn is_empty(&self) -> bool {
        self.z.is_empty()
    }

    pub fn resistance(&self) -> Vec<Option<f64>> {
        self.z.iter().map(|z| z.map(|z| z.re)).collect()
    }

    pub fn reactance(&self) -> Vec<Option<f64>> {
        self.z.iter().map(|z| z.map(|z| z.im)).collect()
    }

    pub fn magnitude(&self) -> Vec<Option<f64>> {
        self.z.iter().map(|z| z.map(|z| z.norm())).collect()
    }

    /// Indices of singular (flagged) points.
    pub fn flagged(&self) -> Vec<usize> {
        self.z
            .iter()
            .enumerate()
            .filter_map(|(i, z)| z.is_none().then_some(i))
            .collect()
    }

    /// Frequencies where the extracted resistance is negative, which passive
    /// data should never produce.
    pub fn negative_resistance_warnings(&self) -> Vec<String> {
        self.frequencies_hz
            .iter()
            .zip(&self.z)
            .filter_map(|(f, z)| match z {
                Some(z) if z.re < 0.0 => {
                    Some(format!("negative resistance {} ohm at {f} Hz", z.re))
                }
                _ => None,
            })
            .collect()
    }

    /// Linear interpolation of the impedance at `f`, which must lie within
    /// the sweep. Returns `None` when a bracketing point is flagged.
    pub fn interpolate(&self, f: f64) -> Result<Option<Complex64>> {
        let freqs = &self.frequencies_hz;
        let (first, last) = (freqs[0], freqs[freqs.len() - 1]);
        if !(f >= first && f <= last) {
            return Err(Error::input(format!(
                "frequency {f} Hz outside the sweep [{first}, {last}] Hz"
            )));
        }
        let hi = freqs.partition_point(|&x| x < f);
        if freqs[hi] == f {
            return Ok(self.z[hi]);
        }
        let lo = hi - 1;
        let (Some(a), Some(b)) = (self.z[lo], self.z[hi]) else {
            return Ok(None);
        };
        let t = (f - freqs[lo]) / (freqs[hi] - freqs[lo]);
        Ok(Some(a + (b - a) * t))
    }

    pub(crate) fn map_points<F>(&self, f: F) -> ImpedanceProfile
    where
        F: Fn(f64, Complex64) -> Option<Complex64>,
    {
        ImpedanceProfile {
            frequencies_hz: self.frequencies_hz.clone(),
            z: self
                .frequencies_hz
                .iter()
                .zip(&self.z)
                .map(|(&freq, z)| z.and_then(|z| f(freq, z)))
                .collect(),
        }
    }
}

/// Extracts the component impedance at each sweep point.
pub fn impedance_profile(net: &NetworkData, mode: FixtureMode) -> Result<ImpedanceProfile> {
    if net.ports() < mode.required_ports() {
        return Err(Error::input(format!(
            "{mode} extraction needs 2-port data, got {}-port",
            net.ports()
        )));
    }
    let z0 = net.z0_ohm();
    let z = (0..net.len())
        .map(|i| {
            let z = match mode {
                FixtureMode::Reflection => impedance_from_s11(net.s11(i), z0),
                FixtureMode::SeriesThrough => series_impedance_from_s21(net.s21(i).unwrap(), z0),
                FixtureMode::ShuntThrough => shunt_impedance_from_s21(net.s21(i).unwrap(), z0),
            };
            z.ok()
        })
        .collect();
    ImpedanceProfile::from_points(net.frequencies_hz().to_vec(), z)
}

/// Series R-L-C equivalent circuit of a capacitor; `r_ohm` is the ESR.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesRlcModel {
    pub r_ohm: f64,
    pub l_h: f64,
    pub c_f: f64,
}

impl SeriesRlcModel {
    pub fn new(r_ohm: f64, l_h: f64, c_f: f64) -> Result<Self> {
        if !(r_ohm >= 0.0 && r_ohm.is_finite()) {
            return Err(Error::input(format!("ESR must be >= 0, got {r_ohm}")));
        }
        if !(l_h > 0.0 && l_h.is_finite()) || !(c_f > 0.0 && c_f.is_finite()) {
            return Err(Error::input(format!(
                "inductance and capacitance must be positive, got L={l_h}, C={c_f}"
            )));
        }
        Ok(Self { r_ohm, l_h, c_f })
    }

    pub fn resonant_frequency_hz(&self) -> f64 {
        1.0 / (2.0 * PI * (self.l_h * self.c_f).sqrt())
    }

    pub fn reactance(&self, f: f64) -> f64 {
        let w = 2.0 * PI * f;
        w * self.l_h - 1.0 / (w * self.c_f)
    }

    pub fn impedance(&self, f: f64) -> Complex64 {
        Complex64::new(self.r_ohm, self.reactance(f))
    }
}

/// Builds the network a fixture of type `mode` would measure for a
/// component with impedance `z(f)`.
pub fn synthesize_from_impedance<F>(
    sweep: &[f64],
    z0: f64,
    mode: FixtureMode,
    z: F,
) -> Result<NetworkData>
where
    F: Fn(f64) -> Complex64,
{
    let s = sweep
        .iter()
        .map(|&f| {
            let z = z(f);
            match mode {
                FixtureMode::Reflection => reflection_coefficient(z, z0).map(|g| vec![g]),
                FixtureMode::SeriesThrough => Ok(series_element_s(z, z0).to_vec()),
                FixtureMode::ShuntThrough => Ok(shunt_element_s(z, z0).to_vec()),
            }
        })
        .collect::<Result<Vec<_>>>()?;
    NetworkData::new(sweep.to_vec(), mode.required_ports(), s, z0)
}

pub fn synthesize_series_rlc(
    model: &SeriesRlcModel,
    sweep: &[f64],
    z0: f64,
    mode: FixtureMode,
) -> Result<NetworkData> {
    synthesize_from_impedance(sweep, z0, mode, |f| model.impedance(f))
}

/// `points` frequencies evenly spaced from `start` to `stop` inclusive.
pub fn linear_sweep(start: f64, stop: f64, points: usize) -> Result<Vec<f64>> {
    if points < 2 || !(start > 0.0) || !(stop > start) || !stop.is_finite() {
        return Err(Error::input(format!(
            "sweep needs 0 < start < stop and >= 2 points, got {start}:{stop}:{points}"
        )));
    }
    let step = (stop - start) / (points - 1) as f64;
    let mut v: Vec<f64> = (0..points).map(|i| start + step * i as f64).collect();
    v[points - 1] = stop;
    Ok(v)
}
