//! Touchstone v1 reader and writer for 1- and 2-port scattering data.
//!
//! Option line: `# <unit> S <RI|MA|DB> R <z0>`. Tokens may appear in any
//! order and are case-insensitive; missing tokens take the Touchstone
//! defaults (GHz, MA, R 50). Two-port rows are ordered S11 S21 S12 S22.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::numfmt;

/// Tolerance above unit magnitude before an entry counts as active.
pub const PASSIVITY_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FrequencyUnit {
    Hz,
    KHz,
    MHz,
    #[default]
    GHz,
}

impl FrequencyUnit {
    pub const ALL: [FrequencyUnit; 4] = [Self::Hz, Self::KHz, Self::MHz, Self::GHz];

    pub fn scale(self) -> f64 {
        match self {
            Self::Hz => 1.0,
            Self::KHz => 1e3,
            Self::MHz => 1e6,
            Self::GHz => 1e9,
        }
    }

    fn token(self) -> &'static str {
        match self {
            Self::Hz => "HZ",
            Self::KHz => "KHZ",
            Self::MHz => "MHZ",
            Self::GHz => "GHZ",
        }
    }
}

impl FromStr for FrequencyUnit {
    type Err = ();

    fn from_str(s: &str) -> std::result::Result<Self, ()> {
        match s.to_ascii_uppercase().as_str() {
            "HZ" => Ok(Self::Hz),
            "KHZ" => Ok(Self::KHz),
            "MHZ" => Ok(Self::MHz),
            "GHZ" => Ok(Self::GHz),
            _ => Err(()),
        }
    }
}

/// How each complex entry is written on a data row. Angles are in degrees.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Encoding {
    RealImaginary,
    #[default]
    MagnitudeAngle,
    DbAngle,
}

impl Encoding {
    pub const ALL: [Encoding; 3] = [Self::RealImaginary, Self::MagnitudeAngle, Self::DbAngle];

    fn token(self) -> &'static str {
        match self {
            Self::RealImaginary => "RI",
            Self::MagnitudeAngle => "MA",
            Self::DbAngle => "DB",
        }
    }

    fn decode(self, a: f64, b: f64) -> Complex64 {
        match self {
            Self::RealImaginary => Complex64::new(a, b),
            Self::MagnitudeAngle => Complex64::from_polar(a, b.to_radians()),
            Self::DbAngle => Complex64::from_polar(10f64.powf(a / 20.0), b.to_radians()),
        }
    }

    fn encode(self, z: Complex64) -> (f64, f64) {
        match self {
            Self::RealImaginary => (z.re, z.im),
            Self::MagnitudeAngle => (z.norm(), angle_deg(z)),
            Self::DbAngle => (20.0 * z.norm().log10(), angle_deg(z)),
        }
    }
}

fn angle_deg(z: Complex64) -> f64 {
    if z == Complex64::new(0.0, 0.0) {
        0.0
    } else {
        z.arg().to_degrees()
    }
}

impl FromStr for Encoding {
    type Err = ();

    fn from_str(s: &str) -> std::result::Result<Self, ()> {
        match s.to_ascii_uppercase().as_str() {
            "RI" => Ok(Self::RealImaginary),
            "MA" => Ok(Self::MagnitudeAngle),
            "DB" => Ok(Self::DbAngle),
            _ => Err(()),
        }
    }
}

/// Output options for [`write_touchstone`]. Only scattering parameters are
/// supported, so the parameter kind is implicit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct TouchstoneFormat {
    pub unit: FrequencyUnit,
    pub encoding: Encoding,
}

impl TouchstoneFormat {
    pub fn new(unit: FrequencyUnit, encoding: Encoding) -> Self {
        Self { unit, encoding }
    }
}

impl fmt::Display for TouchstoneFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} S {}", self.unit.token(), self.encoding.token())
    }
}

/// A frequency sweep of 1- or 2-port scattering matrices.
///
/// Each matrix is stored in Touchstone row order: `[S11]` for one port,
/// `[S11, S21, S12, S22]` for two ports.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkData {
    frequencies_hz: Vec<f64>,
    ports: usize,
    s: Vec<Vec<Complex64>>,
    z0_ohm: f64,
}

impl NetworkData {
    pub fn new(
        frequencies_hz: Vec<f64>,
        ports: usize,
        s: Vec<Vec<Complex64>>,
        z0_ohm: f64,
    ) -> Result<Self> {
        if ports != 1 && ports != 2 {
            return Err(Error::InvalidNetwork(format!(
                "{ports} ports requested, only 1 or 2 supported"
            )));
        }
        if !(z0_ohm > 0.0 && z0_ohm.is_finite()) {
            return Err(Error::InvalidNetwork(format!(
                "reference impedance must be positive, got {z0_ohm}"
            )));
        }
        if frequencies_hz.is_empty() {
            return Err(Error::InvalidNetwork("empty frequency sweep".into()));
        }
        if s.len() != frequencies_hz.len() {
            return Err(Error::InvalidNetwork(format!(
                "{} matrices for {} frequencies",
                s.len(),
                frequencies_hz.len()
            )));
        }
        check_sweep(&frequencies_hz).map_err(Error::InvalidNetwork)?;
        for (i, m) in s.iter().enumerate() {
            if m.len() != ports * ports {
                return Err(Error::InvalidNetwork(format!(
                    "matrix {i} has {} entries, expected {}",
                    m.len(),
                    ports * ports
                )));
            }
            if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
                return Err(Error::InvalidNetwork(format!(
                    "matrix {i} has a non-finite entry"
                )));
            }
        }
        Ok(Self {
            frequencies_hz,
            ports,
            s,
            z0_ohm,
        })
    }

    pub fn frequencies_hz(&self) -> &[f64] {
        &self.frequencies_hz
    }

    pub fn ports(&self) -> usize {
        self.ports
    }

    pub fn z0_ohm(&self) -> f64 {
        self.z0_ohm
    }

    pub fn matrices(&self) -> &[Vec<Complex64>] {
        &self.s
    }

    pub fn len(&self) -> usize {
        self.frequencies_hz.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frequencies_hz.is_empty()
    }

    pub fn s11(&self, i: usize) -> Complex64 {
        self.s[i][0]
    }

    /// Forward transmission; `None` for a 1-port network.
    pub fn s21(&self, i: usize) -> Option<Complex64> {
        (self.ports == 2).then(|| self.s[i][1])
    }

    /// Largest relative deviation between corresponding entries and
    /// frequencies of two networks with the same shape.
    pub fn max_relative_difference(&self, other: &NetworkData) -> Option<f64> {
        if self.ports != other.ports || self.len() != other.len() {
            return None;
        }
        let mut worst = rel_diff_real(self.z0_ohm, other.z0_ohm);
        for (a, b) in self.frequencies_hz.iter().zip(&other.frequencies_hz) {
            worst = worst.max(rel_diff_real(*a, *b));
        }
        for (ma, mb) in self.s.iter().zip(&other.s) {
            for (a, b) in ma.iter().zip(mb) {
                worst = worst.max(rel_diff_complex(*a, *b));
            }
        }
        Some(worst)
    }
}

fn rel_diff_real(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).abs() / scale
    }
}

fn rel_diff_complex(a: Complex64, b: Complex64) -> f64 {
    let scale = a.norm().max(b.norm());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).norm() / scale
    }
}

pub(crate) fn check_sweep(freqs: &[f64]) -> std::result::Result<(), String> {
    for (i, &f) in freqs.iter().enumerate() {
        if !(f > 0.0 && f.is_finite()) {
            return Err(format!("frequency {f} at index {i} is not positive"));
        }
        if i > 0 && f <= freqs[i - 1] {
            return Err(format!(
                "frequencies not strictly increasing at index {i} ({} then {f})",
                freqs[i - 1]
            ));
        }
    }
    Ok(())
}

#[derive(Debug, Clone, Copy)]
struct OptionLine {
    unit: FrequencyUnit,
    encoding: Encoding,
    z0: f64,
}

impl Default for OptionLine {
    fn default() -> Self {
        Self {
            unit: FrequencyUnit::GHz,
            encoding: Encoding::MagnitudeAngle,
            z0: 50.0,
        }
    }
}

fn parse_option_line(line_no: usize, body: &str) -> Result<OptionLine> {
    let mut opt = OptionLine::default();
    let mut seen = [false; 4];
    let mut once = |slot: usize, tok: &str| {
        if std::mem::replace(&mut seen[slot], true) {
            Err(Error::parse(
                line_no,
                format!("option line: repeated field at '{tok}'"),
            ))
        } else {
            Ok(())
        }
    };
    let mut tokens = body.split_whitespace();
    while let Some(tok) = tokens.next() {
        if let Ok(unit) = tok.parse::<FrequencyUnit>() {
            once(0, tok)?;
            opt.unit = unit;
        } else if let Ok(enc) = tok.parse::<Encoding>() {
            once(1, tok)?;
            opt.encoding = enc;
        } else {
            match tok.to_ascii_uppercase().as_str() {
                "S" => once(2, tok)?,
                "Y" | "Z" | "H" | "G" => {
                    return Err(Error::parse(
                        line_no,
                        format!("parameter kind '{tok}' not supported, only S"),
                    ))
                }
                "R" => {
                    once(3, tok)?;
                    let value = tokens.next().ok_or_else(|| {
                        Error::parse(line_no, "option line: 'R' without a reference impedance")
                    })?;
                    let z0: f64 = value.parse().map_err(|_| {
                        Error::parse(
                            line_no,
                            format!("option line: invalid reference impedance '{value}'"),
                        )
                    })?;
                    if !(z0 > 0.0 && z0.is_finite()) {
                        return Err(Error::parse(
                            line_no,
                            format!(
                                "option line: reference impedance must be positive, got {value}"
                            ),
                        ));
                    }
                    opt.z0 = z0;
                }
                _ => {
                    return Err(Error::parse(
                        line_no,
                        format!("option line: unknown token '{tok}'"),
                    ))
                }
            }
        }
    }
    Ok(opt)
}

/// Parses a Touchstone v1 document, inferring the port count from the
/// column count of the first data row.
pub fn parse_touchstone(text: &str) -> Result<NetworkData> {
    parse_touchstone_ports(text, None)
}

/// Parses a Touchstone v1 document. When `ports` is given (e.g. from a
/// `.s1p`/`.s2p` extension) every data row must match it.
pub fn parse_touchstone_ports(text: &str, ports: Option<usize>) -> Result<NetworkData> {
    if let Some(p) = ports {
        if p != 1 && p != 2 {
            return Err(Error::parse(0, format!("{p}-port data not supported")));
        }
    }
    let mut option: Option<OptionLine> = None;
    let mut ports = ports;
    let mut freqs = Vec::new();
    let mut mats = Vec::new();
    let mut last_line = 0;

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        last_line = line_no;
        let content = match raw.find('!') {
            Some(pos) => &raw[..pos],
            None => raw,
        };
        let content = content.trim();
        if content.is_empty() {
            continue;
        }
        if content.starts_with('[') {
            return Err(Error::parse(
                line_no,
                format!(
                    "Touchstone v2 keyword '{}' not supported (v1 files only)",
                    content.split_whitespace().next().unwrap_or(content)
                ),
            ));
        }
        if let Some(body) = content.strip_prefix('#') {
            if option.is_some() {
                return Err(Error::parse(line_no, "duplicate option line"));
            }
            if !freqs.is_empty() {
                return Err(Error::parse(line_no, "option line after data rows"));
            }
            option = Some(parse_option_line(line_no, body)?);
            continue;
        }

        let opt = *option.get_or_insert_with(OptionLine::default);
        let values = content
            .split_whitespace()
            .enumerate()
            .map(|(col, tok)| parse_number(line_no, col, tok, opt.encoding))
            .collect::<Result<Vec<f64>>>()?;
        let expected_ports = match ports {
            Some(p) => p,
            None => {
                let p = match values.len() {
                    3 => 1,
                    9 => 2,
                    n => {
                        return Err(Error::parse(
                            line_no,
                            format!("{n} columns; expected 3 (1-port) or 9 (2-port)"),
                        ))
                    }
                };
                ports = Some(p);
                p
            }
        };
        let want = 1 + 2 * expected_ports * expected_ports;
        if values.len() != want {
            return Err(Error::parse(
                line_no,
                format!(
                    "{} columns; expected {want} for {expected_ports}-port data",
                    values.len()
                ),
            ));
        }
        let f = values[0] * opt.unit.scale();
        if !(f > 0.0 && f.is_finite()) {
            return Err(Error::parse(
                line_no,
                format!("frequency must be positive, got {}", values[0]),
            ));
        }
        if let Some(&prev) = freqs.last() {
            if f <= prev {
                return Err(Error::parse(
                    line_no,
                    format!("non-monotone frequency: {f} Hz follows {prev} Hz"),
                ));
            }
        }
        let m: Vec<Complex64> = values[1..]
            .chunks_exact(2)
            .map(|pair| opt.encoding.decode(pair[0], pair[1]))
            .collect();
        freqs.push(f);
        mats.push(m);
    }

    if freqs.is_empty() {
        return Err(Error::parse(last_line.max(1), "empty data section"));
    }
    let opt = option.unwrap_or_default();
    NetworkData::new(freqs, ports.unwrap_or(1), mats, opt.z0)
        .map_err(|e| Error::parse(last_line, e.to_string()))
}

fn parse_number(line_no: usize, col: usize, tok: &str, enc: Encoding) -> Result<f64> {
    let v: f64 = tok.parse().map_err(|_| {
        Error::parse(
            line_no,
            format!("column {}: '{tok}' is not a number", col + 1),
        )
    })?;
    // -inf dB is the exact encoding of a zero entry.
    let db_magnitude = enc == Encoding::DbAngle && col > 0 && col % 2 == 1;
    if v.is_finite() || (db_magnitude && v == f64::NEG_INFINITY) {
        Ok(v)
    } else {
        Err(Error::parse(
            line_no,
            format!("column {}: non-finite value '{tok}'", col + 1),
        ))
    }
}

/// Reads a Touchstone file, taking the port count from an `.sNp` extension
/// when present.
pub fn read_touchstone(path: &Path) -> Result<NetworkData> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::input(format!("{}: {e}", path.display())))?;
    let ports = path
        .extension()
        .and_then(|e| e.to_str())
        .map(|e| e.to_ascii_lowercase())
        .and_then(|e| match e.as_str() {
            "s1p" => Some(1),
            "s2p" => Some(2),
            _ => None,
        });
    parse_touchstone_ports(&text, ports).map_err(|e| match e {
        Error::Parse { line, msg } => Error::Parse {
            line,
            msg: format!("{}: {msg}", path.display()),
        },
        other => other,
    })
}

/// Renders `net` as a Touchstone v1 document. Values are written with the
/// shortest decimal form that parses back to the same `f64`.
pub fn write_touchstone(net: &NetworkData, fmt: TouchstoneFormat) -> String {
    let mut out = String::new();
    out.push_str(&format!("! {}-port scattering parameters\n", net.ports()));
    out.push_str(&format!("# {fmt} R {}\n", numfmt::exact(net.z0_ohm())));
    if net.ports() == 2 {
        out.push_str("! freq S11 S21 S12 S22\n");
    }
    let scale = fmt.unit.scale();
    for (f, m) in net.frequencies_hz().iter().zip(net.matrices()) {
        out.push_str(&numfmt::exact(f / scale));
        for z in m {
            let (a, b) = fmt.encoding.encode(*z);
            out.push(' ');
            out.push_str(&numfmt::exact(a));
            out.push(' ');
            out.push_str(&numfmt::exact(b));
        }
        out.push('\n');
    }
    out
}

/// A frequency where some scattering entry exceeds unit magnitude.
#[derive(Debug, Clone, PartialEq)]
pub struct PassivityWarning {
    pub frequency_hz: f64,
    pub max_magnitude: f64,
}

impl fmt::Display for PassivityWarning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "non-passive data at {} Hz: |S| = {}",
            self.frequency_hz, self.max_magnitude
        )
    }
}

pub fn validate_passivity(net: &NetworkData) -> Vec<PassivityWarning> {
    net.frequencies_hz()
        .iter()
        .zip(net.matrices())
        .filter_map(|(&f, m)| {
            let max = m.iter().map(|z| z.norm()).fold(0.0, f64::max);
            (max > 1.0 + PASSIVITY_TOLERANCE).then_some(PassivityWarning {
                frequency_hz: f,
                max_magnitude: max,
            })
        })
        .collect()
}
