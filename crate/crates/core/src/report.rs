//! CSV tables and key-value text reports for pipeline outputs.

use std::fmt::Write as _;
use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};
use crate::field_stats::{format_p, ComparisonReport, ConversionAudit, RssiDataset};
use crate::matching::{PowerSplit, VswrProfile};
use crate::metrics::CapacitorMetrics;
use crate::numfmt;
use crate::radiation::{LobeClass, LobeReport, PolarCut, RadiationPattern};
use crate::rf::ImpedanceProfile;

pub const SIG_DIGITS: usize = 9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CsvSchema {
    Impedance,
    Metrics,
    Vswr,
    Pattern,
    Cut,
    Rssi,
    Power,
    Lobes,
    KeyValue,
}

impl CsvSchema {
    pub fn header(self) -> &'static [&'static str] {
        match self {
            Self::Impedance => &["freq_hz", "re_z_ohm", "im_z_ohm", "mag_z_ohm"],
            Self::Metrics => &[
                "freq_hz",
                "esr_ohm",
                "reactance_ohm",
                "df",
                "efficiency",
                "q",
            ],
            Self::Vswr => &["freq_hz", "re_gamma", "im_gamma", "mag_gamma", "vswr"],
            Self::Pattern => &["theta_deg", "phi_deg", "u", "u_db"],
            Self::Cut => &["theta_deg", "u_db"],
            Self::Rssi => &["timestamp", "rssi", "dbm"],
            Self::Power => &[
                "freq_hz",
                "antenna_fraction",
                "resistor_fraction",
                "mismatch_factor",
            ],
            Self::Lobes => &["angle_deg", "level_db", "class"],
            Self::KeyValue => &["key", "value"],
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Text(String),
    /// Undefined value (singular or unknown point).
    Empty,
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Num(v) => numfmt::sig(*v, SIG_DIGITS),
            Cell::Text(s) => s.clone(),
            Cell::Empty => String::new(),
        }
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

impl From<Option<f64>> for Cell {
    fn from(v: Option<f64>) -> Self {
        v.map_or(Cell::Empty, Cell::Num)
    }
}

/// Rows under a fixed schema, in frequency or grid order.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvTable {
    pub schema: CsvSchema,
    pub rows: Vec<Vec<Cell>>,
}

impl CsvTable {
    pub fn write_to<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let io = |e: csv::Error| Error::input(format!("csv write failed: {e}"));
        w.write_record(self.schema.header()).map_err(io)?;
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::render)).map_err(io)?;
        }
        w.flush()
            .map_err(|e| Error::input(format!("csv write failed: {e}")))
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_to(&mut buf).expect("in-memory write");
        String::from_utf8(buf).expect("utf-8 csv")
    }

    pub fn write_file(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path)
            .map_err(|e| Error::input(format!("cannot write {}: {e}", path.display())))?;
        self.write_to(std::io::BufWriter::new(file))
    }
}

pub fn impedance_table(p: &ImpedanceProfile) -> CsvTable {
    let rows = p
        .frequencies_hz()
        .iter()
        .zip(p.points())
        .map(|(f, z)| match z {
            Some(z) => vec![Cell::Num(*f), z.re.into(), z.im.into(), z.norm().into()],
            None => vec![Cell::Num(*f), Cell::Empty, Cell::Empty, Cell::Empty],
        })
        .collect();
    CsvTable {
        schema: CsvSchema::Impedance,
        rows,
    }
}

pub fn metrics_table(m: &CapacitorMetrics) -> CsvTable {
    let l = &m.loss;
    let rows = (0..l.frequencies_hz.len())
        .map(|i| {
            vec![
                Cell::Num(l.frequencies_hz[i]),
                l.esr_ohm[i].into(),
                l.reactance_ohm[i].into(),
                l.df[i].into(),
                l.efficiency[i].into(),
                l.q[i].into(),
            ]
        })
        .collect();
    CsvTable {
        schema: CsvSchema::Metrics,
        rows,
    }
}

pub fn vswr_table(v: &VswrProfile) -> CsvTable {
    let rows = (0..v.frequencies_hz.len())
        .map(|i| match v.gamma[i] {
            Some(g) => vec![
                Cell::Num(v.frequencies_hz[i]),
                g.re.into(),
                g.im.into(),
                g.norm().into(),
                v.vswr[i].into(),
            ],
            None => {
                let mut r = vec![Cell::Num(v.frequencies_hz[i])];
                r.extend(std::iter::repeat_n(Cell::Empty, 4));
                r
            }
        })
        .collect();
    CsvTable {
        schema: CsvSchema::Vswr,
        rows,
    }
}

pub fn power_table(split: &[Option<PowerSplit>], freqs: &[f64]) -> CsvTable {
    let rows = freqs
        .iter()
        .zip(split)
        .map(|(f, s)| match s {
            Some(s) => vec![
                Cell::Num(*f),
                s.antenna_fraction.into(),
                s.resistor_fraction.into(),
                s.mismatch_factor.into(),
            ],
            None => vec![Cell::Num(*f), Cell::Empty, Cell::Empty, Cell::Empty],
        })
        .collect();
    CsvTable {
        schema: CsvSchema::Power,
        rows,
    }
}

fn to_db(u: f64, peak: f64) -> f64 {
    10.0 * (u / peak).log10()
}

pub fn pattern_table(p: &RadiationPattern) -> CsvTable {
    let peak = p.max_intensity();
    let mut rows = Vec::with_capacity(p.intensity().len());
    for (i, t) in p.theta().iter().enumerate() {
        for (j, ph) in p.phi().iter().enumerate() {
            let u = p.at(i, j);
            rows.push(vec![
                Cell::Num(t.to_degrees()),
                Cell::Num(ph.to_degrees()),
                Cell::Num(u),
                Cell::Num(to_db(u, peak)),
            ]);
        }
    }
    CsvTable {
        schema: CsvSchema::Pattern,
        rows,
    }
}

/// Polar cut; `theta_deg` runs over [0, 360).
pub fn cut_table(cut: &PolarCut) -> CsvTable {
    let peak = cut.u.iter().copied().fold(0.0, f64::max);
    let rows = cut
        .angle_rad
        .iter()
        .zip(&cut.u)
        .map(|(a, u)| vec![Cell::Num(a.to_degrees()), Cell::Num(to_db(*u, peak))])
        .collect();
    CsvTable {
        schema: CsvSchema::Cut,
        rows,
    }
}

pub fn lobes_table(rep: &LobeReport) -> CsvTable {
    let rows = rep
        .lobes
        .iter()
        .map(|l| {
            let class = match (rep.degenerate, l.class) {
                (true, _) => "degenerate",
                (false, LobeClass::Main) => "main",
                (false, LobeClass::Minor) => "minor",
            };
            vec![
                Cell::Num(l.angle_rad.to_degrees()),
                Cell::Num(l.level_db),
                Cell::Text(class.into()),
            ]
        })
        .collect();
    CsvTable {
        schema: CsvSchema::Lobes,
        rows,
    }
}

pub fn rssi_table(ds: &RssiDataset) -> CsvTable {
    let rows = ds
        .samples
        .iter()
        .map(|s| {
            vec![
                Cell::Text(s.timestamp.to_rfc3339()),
                Cell::Text(s.rssi.to_string()),
                s.dbm().into(),
            ]
        })
        .collect();
    CsvTable {
        schema: CsvSchema::Rssi,
        rows,
    }
}

/// Ordered key-value pairs, rendered as `key = value` text or as CSV.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct KeyValueReport {
    pub entries: Vec<(String, String)>,
}

impl KeyValueReport {
    pub fn push(&mut self, key: &str, value: impl Into<String>) {
        self.entries.push((key.to_string(), value.into()));
    }

    pub fn num(&mut self, key: &str, value: f64) {
        self.push(key, numfmt::sig(value, SIG_DIGITS));
    }

    pub fn opt(&mut self, key: &str, value: Option<f64>) {
        self.push(
            key,
            value.map_or_else(|| "none".to_string(), |v| numfmt::sig(v, SIG_DIGITS)),
        );
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for (k, v) in &self.entries {
            let _ = writeln!(s, "{k} = {v}");
        }
        s
    }

    pub fn to_table(&self) -> CsvTable {
        CsvTable {
            schema: CsvSchema::KeyValue,
            rows: self
                .entries
                .iter()
                .map(|(k, v)| vec![Cell::Text(k.clone()), Cell::Text(v.clone())])
                .collect(),
        }
    }
}

pub fn metrics_summary(m: &CapacitorMetrics) -> KeyValueReport {
    let mut r = KeyValueReport::default();
    r.opt("resonance_crossing_hz", m.resonance.crossing_hz);
    r.opt("resonance_min_impedance_hz", m.resonance.min_impedance_hz);
    r.num("z_threshold_ohm", m.thresholds.z_threshold_ohm);
    r.opt("bandwidth_start_hz", m.bandwidth.map(|b| b.start_hz));
    r.opt("bandwidth_stop_hz", m.bandwidth.map(|b| b.stop_hz));
    r.num("df_threshold", m.thresholds.df_threshold);
    r.num("fraction_below_df_threshold", m.fraction_below_df_threshold);
    r.num("fraction_df_undefined", m.fraction_undefined);
    r.opt("max_df", m.max_df);
    for w in &m.warnings {
        r.push("warning", w.clone());
    }
    r
}

pub fn comparison_summary(
    rep: &ComparisonReport,
    audit: Option<&ConversionAudit>,
) -> KeyValueReport {
    let mut r = KeyValueReport::default();
    for (prefix, s) in [("novel", &rep.novel), ("baseline", &rep.baseline)] {
        r.push(&format!("{prefix}_antenna"), s.antenna.clone());
        r.push(&format!("{prefix}_environment"), s.environment.clone());
        r.push(&format!("{prefix}_count"), s.count.to_string());
        r.push(
            &format!("{prefix}_unknown_count"),
            s.unknown_count.to_string(),
        );
        r.num(&format!("{prefix}_mean_rssi"), s.mean_rssi);
        r.num(&format!("{prefix}_sd_rssi"), s.sd_rssi);
        r.num(&format!("{prefix}_mean_dbm"), s.mean_dbm);
    }
    r.num("percent_difference", rep.percent_difference);
    r.num("performance_ratio_rssi", rep.performance_ratio_rssi);
    r.num("performance_ratio_dbm", rep.performance_ratio_dbm);
    match rep.welch {
        Some(w) => {
            r.num("t_statistic", w.t);
            r.num("degrees_of_freedom", w.df);
            r.num("p_value", w.p);
            r.push("p_value_display", format_p(w.p));
        }
        None => r.push("t_statistic", "none"),
    }
    r.num("footprint_ratio", rep.footprint_ratio);
    for n in &rep.notes {
        r.push("note", n.clone());
    }
    if let Some(a) = audit {
        for c in &a.checks {
            r.push(
                &format!("reading_rssi_{}", c.rssi),
                format!(
                    "reported {} dBm, mapped {} dBm, {}",
                    c.reported_dbm,
                    c.mapped_dbm,
                    if c.consistent {
                        "consistent"
                    } else {
                        "INCONSISTENT"
                    }
                ),
            );
        }
        r.push(
            "affine_mapping_possible",
            if a.affine_consistent { "yes" } else { "no" },
        );
        for (i, j) in &a.conflicting_pairs {
            r.push(
                "reading_conflict",
                format!(
                    "rssi {} and {} both reported as {} dBm",
                    a.checks[*i].rssi, a.checks[*j].rssi, a.checks[*i].reported_dbm
                ),
            );
        }
    }
    r
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    #[test]
    fn headers_are_fixed() {
        let p = ImpedanceProfile::new(vec![1e9], vec![Complex64::new(1.0, -2.0)]).unwrap();
        let csv = impedance_table(&p).to_csv_string();
        assert_eq!(
            csv.lines().next().unwrap(),
            "freq_hz,re_z_ohm,im_z_ohm,mag_z_ohm"
        );
        assert_eq!(csv.lines().nth(1).unwrap(), "1e9,1,-2,2.23606798");
        assert_eq!(
            CsvSchema::Metrics.header().join(","),
            "freq_hz,esr_ohm,reactance_ohm,df,efficiency,q"
        );
        assert_eq!(
            CsvSchema::Vswr.header().join(","),
            "freq_hz,re_gamma,im_gamma,mag_gamma,vswr"
        );
        assert_eq!(
            CsvSchema::Pattern.header().join(","),
            "theta_deg,phi_deg,u,u_db"
        );
        assert_eq!(CsvSchema::Cut.header().join(","), "theta_deg,u_db");
        assert_eq!(CsvSchema::Rssi.header().join(","), "timestamp,rssi,dbm");
    }

    #[test]
    fn undefined_cells_are_empty() {
        let p = ImpedanceProfile::from_points(vec![1e9], vec![None]).unwrap();
        assert_eq!(
            impedance_table(&p).to_csv_string().lines().nth(1).unwrap(),
            "1e9,,,"
        );
    }

    #[test]
    fn text_cells_are_quoted_when_needed() {
        let mut kv = KeyValueReport::default();
        kv.push("note", "a, b");
        assert_eq!(kv.to_table().to_csv_string(), "key,value\nnote,\"a, b\"\n");
        assert_eq!(kv.to_text(), "note = a, b\n");
    }
}
