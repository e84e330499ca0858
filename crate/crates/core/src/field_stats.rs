//! Modem signal-quality logs and two-antenna statistical comparison.
//!
//! Log lines look like `2024-01-05T10:00:00Z +CSQ: 20,0`. RSSI is the GSM
//! CSQ index 0..=31 (99 = not known), mapped to dBm by −113 + 2·rssi.

use std::fmt;
use std::path::Path;

use chrono::{DateTime, FixedOffset};

use crate::error::{Error, Result};

pub const RSSI_UNKNOWN: u8 = 99;
pub const BER_UNKNOWN: u8 = 99;
/// Values of p below this are displayed as "< 0.001".
pub const P_DISPLAY_FLOOR: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq)]
pub struct RssiSample {
    pub timestamp: DateTime<FixedOffset>,
    pub rssi: u8,
    pub ber: u8,
}

impl RssiSample {
    pub fn new(timestamp: DateTime<FixedOffset>, rssi: u8, ber: u8) -> Result<Self> {
        if rssi > 31 && rssi != RSSI_UNKNOWN {
            return Err(Error::input(format!("rssi {rssi} outside 0..=31 (or 99)")));
        }
        if ber > 7 && ber != BER_UNKNOWN {
            return Err(Error::input(format!("ber {ber} outside 0..=7 (or 99)")));
        }
        Ok(Self {
            timestamp,
            rssi,
            ber,
        })
    }

    pub fn is_known(&self) -> bool {
        self.rssi != RSSI_UNKNOWN
    }

    pub fn dbm(&self) -> Option<f64> {
        rssi_to_dbm(self.rssi).ok()
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct RssiDataset {
    pub samples: Vec<RssiSample>,
    pub environment: String,
    pub antenna: String,
}

impl RssiDataset {
    pub fn known_values(&self) -> Vec<f64> {
        self.samples
            .iter()
            .filter(|s| s.is_known())
            .map(|s| f64::from(s.rssi))
            .collect()
    }

    pub fn unknown_count(&self) -> usize {
        self.samples.iter().filter(|s| !s.is_known()).count()
    }

    pub fn with_labels(mut self, environment: &str, antenna: &str) -> Self {
        self.environment = environment.to_string();
        self.antenna = antenna.to_string();
        self
    }
}

fn parse_timestamp(line_no: usize, tok: &str) -> Result<DateTime<FixedOffset>> {
    DateTime::parse_from_rfc3339(tok)
        .map_err(|e| Error::parse(line_no, format!("invalid ISO-8601 timestamp '{tok}': {e}")))
}

fn parse_field(line_no: usize, name: &str, tok: &str) -> Result<u8> {
    let tok = tok.trim();
    let v: u32 = tok
        .parse()
        .map_err(|_| Error::parse(line_no, format!("{name} '{tok}' is not an integer")))?;
    u8::try_from(v).map_err(|_| Error::parse(line_no, format!("{name} {v} out of range")))
}

fn parse_csq(line_no: usize, body: &str) -> Result<(u8, u8)> {
    let (rssi, ber) = body
        .split_once(',')
        .ok_or_else(|| Error::parse(line_no, "expected '+CSQ: <rssi>,<ber>'"))?;
    let rssi = parse_field(line_no, "rssi", rssi)?;
    let ber = parse_field(line_no, "ber", ber)?;
    if rssi > 31 && rssi != RSSI_UNKNOWN {
        return Err(Error::parse(
            line_no,
            format!("rssi {rssi} out of range (0..=31 or 99)"),
        ));
    }
    if ber > 7 && ber != BER_UNKNOWN {
        return Err(Error::parse(
            line_no,
            format!("ber {ber} out of range (0..=7 or 99)"),
        ));
    }
    Ok((rssi, ber))
}

/// Parses an AT+CSQ response log. Blank lines and `#` comments are skipped.
pub fn parse_at_csq_log(text: &str) -> Result<RssiDataset> {
    let mut samples = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some(pos) = line.find("+CSQ:") else {
            return Err(Error::parse(
                line_no,
                format!("no '+CSQ:' response in '{line}'"),
            ));
        };
        let (stamp, rest) = line.split_at(pos);
        let (rssi, ber) = parse_csq(line_no, &rest["+CSQ:".len()..])?;
        let stamp = stamp.trim();
        if stamp.is_empty() {
            return Err(Error::parse(line_no, "missing timestamp before '+CSQ:'"));
        }
        let timestamp = parse_timestamp(line_no, stamp)?;
        samples.push(RssiSample {
            timestamp,
            rssi,
            ber,
        });
    }
    Ok(RssiDataset {
        samples,
        ..Default::default()
    })
}

/// Parses the CSV alternative with header `timestamp,rssi,ber`.
pub fn parse_rssi_csv(text: &str) -> Result<RssiDataset> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    let header = reader
        .headers()
        .map_err(|e| Error::parse(1, e.to_string()))?
        .clone();
    if header.iter().collect::<Vec<_>>() != ["timestamp", "rssi", "ber"] {
        return Err(Error::parse(1, "expected header 'timestamp,rssi,ber'"));
    }
    let mut samples = Vec::new();
    for rec in reader.records() {
        let rec = rec.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line() as usize);
            Error::parse(line, e.to_string())
        })?;
        let line_no = rec.position().map_or(0, |p| p.line() as usize);
        if rec.len() != 3 {
            return Err(Error::parse(
                line_no,
                format!("{} fields, expected 3", rec.len()),
            ));
        }
        let timestamp = parse_timestamp(line_no, &rec[0])?;
        let (rssi, ber) = parse_csq(line_no, &format!("{},{}", &rec[1], &rec[2]))?;
        samples.push(RssiSample {
            timestamp,
            rssi,
            ber,
        });
    }
    Ok(RssiDataset {
        samples,
        ..Default::default()
    })
}

/// Reads a log file, choosing the CSV reader for `.csv` files.
pub fn read_rssi_file(path: &Path) -> Result<RssiDataset> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::input(format!("{}: {e}", path.display())))?;
    let is_csv = path
        .extension()
        .and_then(|e| e.to_str())
        .is_some_and(|e| e.eq_ignore_ascii_case("csv"));
    let parsed = if is_csv {
        parse_rssi_csv(&text)
    } else {
        parse_at_csq_log(&text)
    };
    parsed.map_err(|e| match e {
        Error::Parse { line, msg } => Error::Parse {
            line,
            msg: format!("{}: {msg}", path.display()),
        },
        other => other,
    })
}

pub fn rssi_to_dbm(rssi: u8) -> Result<f64> {
    match rssi {
        0..=31 => Ok(-113.0 + 2.0 * f64::from(rssi)),
        RSSI_UNKNOWN => Err(Error::input("rssi 99: signal strength not known")),
        _ => Err(Error::input(format!("rssi {rssi} out of range"))),
    }
}

/// Inverse of [`rssi_to_dbm`] for values on the mapping grid.
pub fn dbm_to_rssi(dbm: f64) -> Result<u8> {
    let r = (dbm + 113.0) / 2.0;
    if (r - r.round()).abs() > 1e-9 || !(0.0..=31.0).contains(&r.round()) {
        return Err(Error::input(format!("{dbm} dBm is not a CSQ level")));
    }
    Ok(r.round() as u8)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WelchResult {
    pub t: f64,
    pub df: f64,
    /// Two-sided.
    pub p: f64,
}

fn mean_var(x: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mean = x.iter().sum::<f64>() / n;
    let ss = x.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>();
    (mean, ss / (n - 1.0))
}

/// Welch's unequal-variance t-test with Welch–Satterthwaite degrees of
/// freedom and a two-sided p-value.
pub fn welch_t_test(a: &[f64], b: &[f64]) -> Result<WelchResult> {
    if a.len() < 2 || b.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "welch test needs >= 2 values per set, got {} and {}",
            a.len(),
            b.len()
        )));
    }
    let (ma, va) = mean_var(a);
    let (mb, vb) = mean_var(b);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (sa, sb) = (va / na, vb / nb);
    let se2 = sa + sb;
    if se2 == 0.0 {
        if ma == mb {
            return Ok(WelchResult {
                t: 0.0,
                df: na + nb - 2.0,
                p: 1.0,
            });
        }
        return Err(Error::InsufficientData(
            "both sets have zero variance and different means".into(),
        ));
    }
    let t = (ma - mb) / se2.sqrt();
    let df = se2 * se2 / (sa * sa / (na - 1.0) + sb * sb / (nb - 1.0));
    let p = student_t_two_sided_p(t, df)?;
    Ok(WelchResult { t, df, p })
}

/// Two-sided tail probability P(|T| >= |t|) of Student's t with `df`
/// degrees of freedom.
///
/// With x = √ν·tan φ the density becomes proportional to cos^(ν−1) φ on
/// [0, π/2), so p = ∫_Φ^{π/2} cos^(ν−1) / ∫_0^{π/2} cos^(ν−1) with
/// Φ = atan(|t|/√ν). Both integrals are bounded for ν >= 1 and are
/// evaluated by adaptive Simpson quadrature.
pub fn student_t_two_sided_p(t: f64, df: f64) -> Result<f64> {
    if !(df >= 1.0) || !df.is_finite() {
        return Err(Error::input(format!(
            "degrees of freedom must be >= 1, got {df}"
        )));
    }
    if t.is_nan() {
        return Err(Error::input("t statistic is NaN"));
    }
    if t == 0.0 {
        return Ok(1.0);
    }
    let half_pi = 0.5 * std::f64::consts::PI;
    let phi = (t.abs() / df.sqrt()).atan();
    let kernel = |x: f64| {
        let c = x.cos();
        if c <= 0.0 {
            if df == 1.0 {
                1.0
            } else {
                0.0
            }
        } else {
            c.powf(df - 1.0)
        }
    };
    let total = adaptive_simpson(&kernel, 0.0, half_pi, 1e-14);
    let tail = adaptive_simpson(&kernel, phi, half_pi, 1e-14 * total);
    Ok((tail / total).clamp(f64::MIN_POSITIVE, 1.0))
}

fn adaptive_simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    if b <= a {
        return 0.0;
    }
    // Split into panels first so narrow peaks (large ν) are not missed.
    const PANELS: usize = 64;
    let h = (b - a) / PANELS as f64;
    (0..PANELS)
        .map(|i| {
            let (x0, x1) = (a + h * i as f64, a + h * (i + 1) as f64);
            let (f0, f1) = (f(x0), f(x1));
            let fm = f(0.5 * (x0 + x1));
            let whole = (x1 - x0) / 6.0 * (f0 + 4.0 * fm + f1);
            simpson_step(f, x0, x1, f0, fm, f1, whole, tol / PANELS as f64, 48)
        })
        .sum()
}

#[allow(clippy::too_many_arguments)]
fn simpson_step<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
    let (flm, frm) = (f(lm), f(rm));
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
        + simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
}

/// Formats a p-value, flooring tiny values to "< 0.001".
pub fn format_p(p: f64) -> String {
    if p < P_DISPLAY_FLOOR {
        "< 0.001".to_string()
    } else {
        format!("{p:.4}")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DatasetSummary {
    pub environment: String,
    pub antenna: String,
    pub count: usize,
    pub unknown_count: usize,
    pub mean_rssi: f64,
    pub sd_rssi: f64,
    pub mean_dbm: f64,
}

fn summarize(ds: &RssiDataset) -> Result<DatasetSummary> {
    let values = ds.known_values();
    if values.is_empty() {
        return Err(Error::InsufficientData(format!(
            "dataset '{}' has no known-valued samples",
            ds.antenna
        )));
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let sd = if values.len() > 1 {
        mean_var(&values).1.sqrt()
    } else {
        0.0
    };
    let mean_dbm = ds.samples.iter().filter_map(|s| s.dbm()).sum::<f64>() / n;
    Ok(DatasetSummary {
        environment: ds.environment.clone(),
        antenna: ds.antenna.clone(),
        count: values.len(),
        unknown_count: ds.unknown_count(),
        mean_rssi: mean,
        sd_rssi: sd,
        mean_dbm,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonReport {
    pub novel: DatasetSummary,
    pub baseline: DatasetSummary,
    /// (baseline − novel)/baseline × 100 on RSSI means.
    pub percent_difference: f64,
    /// novel/baseline × 100 on RSSI means.
    pub performance_ratio_rssi: f64,
    /// novel/baseline × 100 on dBm means.
    pub performance_ratio_dbm: f64,
    /// `None` when either set has fewer than two known samples.
    pub welch: Option<WelchResult>,
    /// baseline area / novel area.
    pub footprint_ratio: f64,
    pub notes: Vec<String>,
}

pub fn compare_datasets(
    novel: &RssiDataset,
    baseline: &RssiDataset,
    novel_area_mm2: f64,
    baseline_area_mm2: f64,
) -> Result<ComparisonReport> {
    if !(novel_area_mm2 > 0.0) || !(baseline_area_mm2 > 0.0) {
        return Err(Error::input("antenna areas must be positive"));
    }
    let n = summarize(novel)?;
    let b = summarize(baseline)?;
    let mut notes = Vec::new();
    let welch = match welch_t_test(&novel.known_values(), &baseline.known_values()) {
        Ok(w) => Some(w),
        Err(e) => {
            notes.push(format!("welch test skipped: {e}"));
            None
        }
    };
    for s in [&n, &b] {
        if s.unknown_count > 0 {
            notes.push(format!(
                "{} unknown (99) samples excluded from '{}'",
                s.unknown_count, s.antenna
            ));
        }
    }
    let percent_difference = if b.mean_rssi == 0.0 {
        notes.push("baseline mean RSSI is 0; percent difference undefined".into());
        f64::NAN
    } else {
        (b.mean_rssi - n.mean_rssi) / b.mean_rssi * 100.0
    };
    let performance_ratio_rssi = n.mean_rssi / b.mean_rssi * 100.0;
    let performance_ratio_dbm = n.mean_dbm / b.mean_dbm * 100.0;
    Ok(ComparisonReport {
        novel: n,
        baseline: b,
        percent_difference,
        performance_ratio_rssi,
        performance_ratio_dbm,
        welch,
        footprint_ratio: baseline_area_mm2 / novel_area_mm2,
        notes,
    })
}

/// A published (rssi, approximate dBm) reading checked against the mapping.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReadingCheck {
    pub rssi: u8,
    pub reported_dbm: f64,
    pub mapped_dbm: f64,
    pub consistent: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConversionAudit {
    pub checks: Vec<ReadingCheck>,
    /// Whether any affine rssi → dBm mapping reproduces every reading.
    pub affine_consistent: bool,
    /// Index pairs that share a reported dBm but not an RSSI, which no
    /// increasing mapping can satisfy.
    pub conflicting_pairs: Vec<(usize, usize)>,
}

impl ConversionAudit {
    pub fn inconsistent(&self) -> impl Iterator<Item = &ReadingCheck> {
        self.checks.iter().filter(|c| !c.consistent)
    }
}

/// Checks reported (rssi, dBm) readings against −113 + 2·rssi and against
/// affine mappings in general. Readings match within 0.5 dB.
pub fn audit_reported_readings(readings: &[(u8, f64)]) -> Result<ConversionAudit> {
    let checks = readings
        .iter()
        .map(|&(rssi, reported_dbm)| {
            let mapped_dbm = rssi_to_dbm(rssi)?;
            Ok(ReadingCheck {
                rssi,
                reported_dbm,
                mapped_dbm,
                consistent: (mapped_dbm - reported_dbm).abs() <= 0.5,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let mut conflicting_pairs = Vec::new();
    for i in 0..readings.len() {
        for j in i + 1..readings.len() {
            let (ri, di) = readings[i];
            let (rj, dj) = readings[j];
            if (ri == rj) != (di == dj) {
                conflicting_pairs.push((i, j));
            }
        }
    }
    Ok(ConversionAudit {
        checks,
        affine_consistent: affine_fit_exists(readings),
        conflicting_pairs,
    })
}

fn affine_fit_exists(readings: &[(u8, f64)]) -> bool {
    let pts: Vec<(f64, f64)> = readings.iter().map(|&(r, d)| (f64::from(r), d)).collect();
    let Some(&(x0, y0)) = pts.first() else {
        return true;
    };
    let Some(&(x1, y1)) = pts.iter().find(|(x, _)| *x != x0) else {
        return pts.iter().all(|(_, y)| *y == y0);
    };
    let slope = (y1 - y0) / (x1 - x0);
    pts.iter()
        .all(|&(x, y)| (y0 + slope * (x - x0) - y).abs() <= 1e-9 * (1.0 + y.abs()))
}

impl fmt::Display for ConversionAudit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            writeln!(
                f,
                "reading rssi={} reported_dbm={} mapped_dbm={} {}",
                c.rssi,
                c.reported_dbm,
                c.mapped_dbm,
                if c.consistent {
                    "consistent"
                } else {
                    "INCONSISTENT"
                }
            )?;
        }
        writeln!(
            f,
            "affine_mapping_possible = {}",
            if self.affine_consistent { "yes" } else { "no" }
        )?;
        for (i, j) in &self.conflicting_pairs {
            writeln!(
                f,
                "conflict: rssi {} and rssi {} both reported as {} dBm",
                self.checks[*i].rssi, self.checks[*j].rssi, self.checks[*i].reported_dbm
            )?;
        }
        Ok(())
    }
}
