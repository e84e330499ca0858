//! Batch command-line front end.
//!
//! Every subcommand reads its inputs, runs one pipeline stage and writes
//! CSV (and optionally SVG) files into the output directory. Exit codes:
//! 0 success, 1 numeric or output failure, 2 input or usage error.

use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use num_complex::Complex64;

use crate::error::Error;
use crate::field_stats::{self, audit_reported_readings, compare_datasets};
use crate::matching::{self, MatchingNetwork};
use crate::metrics::{self, MetricThresholds};
use crate::radiation::{self, ArrayLayout, ElementModel};
use crate::report::{self, CsvTable, KeyValueReport};
use crate::rf::{self, FixtureMode, SeriesRlcModel};
use crate::svg;
use crate::touchstone::{self, Encoding, FrequencyUnit, TouchstoneFormat};

/// Settings shared by all subcommands. Precedence: defaults, then the
/// config file, then command-line flags.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub z0_ohm: f64,
    pub fixture: FixtureMode,
    pub grid_step_deg: f64,
    pub reactance_epsilon_ohm: f64,
    pub z_threshold_ohm: f64,
    pub df_threshold: f64,
    pub lobe_threshold_db: f64,
    pub output_dir: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            z0_ohm: 50.0,
            fixture: FixtureMode::SeriesThrough,
            grid_step_deg: radiation::DEFAULT_GRID_STEP_DEG,
            reactance_epsilon_ohm: metrics::DEFAULT_REACTANCE_EPSILON_OHM,
            z_threshold_ohm: metrics::DEFAULT_Z_THRESHOLD_OHM,
            df_threshold: metrics::DEFAULT_DF_THRESHOLD,
            lobe_threshold_db: radiation::DEFAULT_MAIN_LOBE_THRESHOLD_DB,
            output_dir: PathBuf::from("."),
        }
    }
}

impl RunConfig {
    /// Applies `key = value` lines on top of the current settings.
    /// Unknown keys are rejected.
    pub fn apply_text(&mut self, text: &str) -> crate::Result<()> {
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::parse(line_no, format!("expected 'key = value', got '{line}'"))
            })?;
            let (key, value) = (key.trim(), value.trim());
            let num = || -> crate::Result<f64> {
                value
                    .parse::<f64>()
                    .map_err(|_| Error::parse(line_no, format!("{key}: '{value}' is not a number")))
            };
            match key {
                "z0_ohm" => self.z0_ohm = num()?,
                "fixture" => {
                    self.fixture = value
                        .parse()
                        .map_err(|e: Error| Error::parse(line_no, e.to_string()))?
                }
                "grid_step_deg" => self.grid_step_deg = num()?,
                "reactance_epsilon_ohm" => self.reactance_epsilon_ohm = num()?,
                "z_threshold_ohm" => self.z_threshold_ohm = num()?,
                "df_threshold" => self.df_threshold = num()?,
                "lobe_threshold_db" => self.lobe_threshold_db = num()?,
                "output_dir" => self.output_dir = PathBuf::from(value),
                _ => return Err(Error::parse(line_no, format!("unknown config key '{key}'"))),
            }
        }
        Ok(())
    }

    pub fn validate(&self) -> crate::Result<()> {
        let positive = [
            ("z0_ohm", self.z0_ohm),
            ("grid_step_deg", self.grid_step_deg),
            ("reactance_epsilon_ohm", self.reactance_epsilon_ohm),
            ("z_threshold_ohm", self.z_threshold_ohm),
            ("df_threshold", self.df_threshold),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::input(format!("{name} must be positive, got {v}")));
            }
        }
        // dB thresholds are relative to the peak, so their magnitude must be positive.
        if !(self.lobe_threshold_db < 0.0 && self.lobe_threshold_db.is_finite()) {
            return Err(Error::input(format!(
                "lobe_threshold_db must be a negative dB level, got {}",
                self.lobe_threshold_db
            )));
        }
        Ok(())
    }

    pub fn thresholds(&self) -> MetricThresholds {
        MetricThresholds {
            reactance_epsilon_ohm: self.reactance_epsilon_ohm,
            z_threshold_ohm: self.z_threshold_ohm,
            df_threshold: self.df_threshold,
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "rfcap",
    version,
    about = "Network-parameter analysis for capacitor antenna elements"
)]
pub struct Cli {
    /// Key-value config file.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Reference impedance (ohm).
    #[arg(long, global = true)]
    pub z0: Option<f64>,
    /// De-embedding fixture: reflection, series-through or shunt-through.
    #[arg(long, global = true)]
    pub fixture: Option<String>,
    /// Also write SVG plots next to the CSV files.
    #[arg(long, global = true)]
    pub svg: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Topology {
    SeriesR,
    LSection,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Variant {
    LowPass,
    HighPass,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum EncodingArg {
    Ri,
    Ma,
    Db,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum UnitArg {
    Hz,
    Khz,
    Mhz,
    Ghz,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Impedance and dissipation-factor metrics of a Touchstone file.
    Analyze {
        file: PathBuf,
        #[arg(long)]
        z_threshold: Option<f64>,
        #[arg(long)]
        df_threshold: Option<f64>,
        #[arg(long)]
        reactance_epsilon: Option<f64>,
    },
    /// Design a matching network and sweep VSWR.
    Match {
        file: PathBuf,
        #[arg(long)]
        f_design: f64,
        #[arg(long, value_enum, default_value = "series-r")]
        topology: Topology,
        /// L-section variant used for the sweep files.
        #[arg(long, value_enum, default_value = "low-pass")]
        variant: Variant,
    },
    /// Radiation pattern, polar cut, lobes and directivity of an array layout.
    Pattern {
        #[arg(long)]
        layout: PathBuf,
        #[arg(long)]
        grid_step_deg: Option<f64>,
        #[arg(long)]
        lobe_threshold_db: Option<f64>,
        /// Radiation efficiency (0..=1) for the gain figure.
        #[arg(long)]
        efficiency: Option<f64>,
    },
    /// Compare two AT+CSQ logs (or timestamp,rssi,ber CSV files).
    Rssi {
        novel: PathBuf,
        baseline: PathBuf,
        #[arg(long, default_value_t = 0.3969)]
        novel_area_mm2: f64,
        #[arg(long, default_value_t = 245.0)]
        baseline_area_mm2: f64,
        #[arg(long, default_value = "unspecified")]
        environment: String,
        /// Reported readings to audit, as comma-separated rssi:dbm pairs.
        #[arg(long)]
        reported: Option<String>,
    },
    /// Write the Touchstone file of a series R-L-C element.
    Synth {
        #[arg(long)]
        r: f64,
        #[arg(long)]
        l: f64,
        #[arg(long)]
        c: f64,
        /// start:stop:points in Hz.
        #[arg(long)]
        sweep: String,
        /// Output file (default: synth.s2p, or synth.s1p in reflection mode).
        #[arg(long)]
        output: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "ri")]
        format: EncodingArg,
        #[arg(long, value_enum, default_value = "ghz")]
        unit: UnitArg,
    },
}

/// A failed run: exit code plus diagnostic.
#[derive(Debug, Clone, PartialEq)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    fn input(message: impl Into<String>) -> Self {
        Self {
            code: 2,
            message: message.into(),
        }
    }

    fn output(message: impl Into<String>) -> Self {
        Self {
            code: 1,
            message: message.into(),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Parse { .. } | Error::InvalidInput(_) | Error::InvalidNetwork(_) => 2,
            Error::Singularity(_) | Error::InsufficientData(_) => 1,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

/// Files written by a successful run, in write order.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Outcome {
    pub files: Vec<PathBuf>,
    pub summary: String,
}

struct Writer<'a> {
    dir: &'a Path,
    svg: bool,
    outcome: Outcome,
}

impl Writer<'_> {
    fn csv(&mut self, name: &str, table: &CsvTable) -> Result<(), CliError> {
        let path = self.dir.join(name);
        table
            .write_file(&path)
            .map_err(|e| CliError::output(e.to_string()))?;
        self.outcome.files.push(path);
        Ok(())
    }

    fn text(&mut self, name: &str, body: &str) -> Result<(), CliError> {
        let path = self.dir.join(name);
        std::fs::write(&path, body)
            .map_err(|e| CliError::output(format!("cannot write {}: {e}", path.display())))?;
        self.outcome.files.push(path);
        Ok(())
    }

    fn plot(&mut self, name: &str, body: impl FnOnce() -> String) -> Result<(), CliError> {
        if self.svg {
            self.text(name, &body())?;
        }
        Ok(())
    }
}

/// Parses `argv` (including the program name) and runs the subcommand.
pub fn run_command<I, T>(argv: I) -> Result<Outcome, CliError>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = Cli::try_parse_from(argv).map_err(|e| CliError {
        code: if e.use_stderr() { 2 } else { 0 },
        message: e.to_string(),
    })?;
    run(cli)
}

pub fn run(cli: Cli) -> Result<Outcome, CliError> {
    let mut cfg = RunConfig::default();
    if let Some(path) = &cli.config {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::input(format!("{}: {e}", path.display())))?;
        cfg.apply_text(&text)
            .map_err(|e| CliError::input(format!("{}: {e}", path.display())))?;
    }
    if let Some(z0) = cli.z0 {
        cfg.z0_ohm = z0;
    }
    if let Some(f) = &cli.fixture {
        cfg.fixture = f.parse()?;
    }
    if let Some(out) = &cli.out {
        cfg.output_dir = out.clone();
    }
    match &cli.command {
        Command::Analyze {
            z_threshold,
            df_threshold,
            reactance_epsilon,
            ..
        } => {
            cfg.z_threshold_ohm = z_threshold.unwrap_or(cfg.z_threshold_ohm);
            cfg.df_threshold = df_threshold.unwrap_or(cfg.df_threshold);
            cfg.reactance_epsilon_ohm = reactance_epsilon.unwrap_or(cfg.reactance_epsilon_ohm);
        }
        Command::Pattern {
            grid_step_deg,
            lobe_threshold_db,
            ..
        } => {
            cfg.grid_step_deg = grid_step_deg.unwrap_or(cfg.grid_step_deg);
            cfg.lobe_threshold_db = lobe_threshold_db.unwrap_or(cfg.lobe_threshold_db);
        }
        _ => {}
    }
    cfg.validate()?;
    std::fs::create_dir_all(&cfg.output_dir).map_err(|e| {
        CliError::output(format!("cannot create {}: {e}", cfg.output_dir.display()))
    })?;
    let mut w = Writer {
        dir: &cfg.output_dir,
        svg: cli.svg,
        outcome: Outcome::default(),
    };

    let summary = match &cli.command {
        Command::Analyze { file, .. } => analyze(&cfg, &mut w, file)?,
        Command::Match {
            file,
            f_design,
            topology,
            variant,
        } => match_cmd(&cfg, &mut w, file, *f_design, *topology, *variant)?,
        Command::Pattern {
            layout, efficiency, ..
        } => pattern(&cfg, &mut w, layout, *efficiency)?,
        Command::Rssi {
            novel,
            baseline,
            novel_area_mm2,
            baseline_area_mm2,
            environment,
            reported,
        } => rssi(
            &mut w,
            novel,
            baseline,
            *novel_area_mm2,
            *baseline_area_mm2,
            environment,
            reported.as_deref(),
        )?,
        Command::Synth {
            r,
            l,
            c,
            sweep,
            output,
            format,
            unit,
        } => synth(
            &cfg,
            &mut w,
            (*r, *l, *c),
            sweep,
            output.as_deref(),
            *format,
            *unit,
        )?,
    };
    let mut outcome = w.outcome;
    outcome.summary = summary;
    Ok(outcome)
}

fn read_network(file: &Path) -> Result<touchstone::NetworkData, CliError> {
    if !file.exists() {
        return Err(CliError::input(format!("{}: no such file", file.display())));
    }
    Ok(touchstone::read_touchstone(file)?)
}

fn analyze(cfg: &RunConfig, w: &mut Writer, file: &Path) -> Result<String, CliError> {
    let net = read_network(file)?;
    let profile = rf::impedance_profile(&net, cfg.fixture)?;
    let m = metrics::metrics_report(&profile, cfg.thresholds())?;
    w.csv("impedance.csv", &report::impedance_table(&profile))?;
    w.csv("metrics.csv", &report::metrics_table(&m))?;

    let mut kv = KeyValueReport::default();
    kv.push("input", file.display().to_string());
    kv.push("fixture", cfg.fixture.name());
    kv.num("z0_ohm", net.z0_ohm());
    kv.push("points", net.len().to_string());
    kv.push("flagged_points", profile.flagged().len().to_string());
    for warn in touchstone::validate_passivity(&net) {
        kv.push("warning", warn.to_string());
    }
    kv.entries.extend(report::metrics_summary(&m).entries);
    let text = kv.to_text();
    w.text("analyze_report.txt", &text)?;

    w.plot("impedance.svg", || {
        let f = profile.frequencies_hz();
        let series = |label, v: Vec<Option<f64>>| svg::Series {
            label,
            points: f
                .iter()
                .zip(v)
                .map(|(f, v)| (*f, v.unwrap_or(f64::NAN)))
                .collect(),
        };
        svg::line_plot(
            "Impedance",
            "frequency (Hz)",
            "ohm",
            &[
                series("|Z|", profile.magnitude()),
                series("R", profile.resistance()),
                series("X", profile.reactance()),
            ],
        )
    })?;
    w.plot("df.svg", || {
        let points = m
            .loss
            .frequencies_hz
            .iter()
            .zip(&m.loss.df)
            .map(|(f, d)| (*f, d.map_or(f64::NAN, |d| 100.0 * d)))
            .collect();
        svg::line_plot(
            "Dissipation factor",
            "frequency (Hz)",
            "DF (%)",
            &[svg::Series {
                label: "DF",
                points,
            }],
        )
    })?;
    Ok(text)
}

fn match_cmd(
    cfg: &RunConfig,
    w: &mut Writer,
    file: &Path,
    f_design: f64,
    topology: Topology,
    variant: Variant,
) -> Result<String, CliError> {
    let net = read_network(file)?;
    let profile = rf::impedance_profile(&net, cfg.fixture)?;
    let z0 = cfg.z0_ohm;
    let mut kv = KeyValueReport::default();
    kv.push("input", file.display().to_string());
    kv.push("fixture", cfg.fixture.name());
    kv.num("z0_ohm", z0);
    kv.num("f_design_hz", f_design);

    let z_design = profile
        .interpolate(f_design)?
        .ok_or_else(|| CliError::input(format!("impedance undefined at {f_design} Hz")))?;
    kv.num("antenna_re_z_ohm", z_design.re);
    kv.num("antenna_im_z_ohm", z_design.im);

    let network = match topology {
        Topology::SeriesR => {
            let d = matching::design_series_resistive_match(&profile, z0, f_design)?;
            kv.push("topology", "series-resistor");
            if let MatchingNetwork::SeriesResistor { series_r_ohm, .. } = d.network {
                kv.num("series_r_ohm", series_r_ohm);
            }
            for warn in &d.warnings {
                kv.push("warning", warn.clone());
            }
            d.network
        }
        Topology::LSection => {
            let d = matching::design_l_section(z_design, z0, f_design)?;
            kv.push("topology", "l-section");
            kv.num("q", d.q);
            for (name, n) in [("low_pass", &d.low_pass), ("high_pass", &d.high_pass)] {
                if let MatchingNetwork::LSection {
                    series_x_ohm,
                    shunt_x_ohm,
                    series,
                    shunt,
                    order,
                    ..
                } = n
                {
                    kv.push(&format!("{name}_order"), format!("{order:?}"));
                    kv.num(&format!("{name}_series_x_ohm"), *series_x_ohm);
                    kv.push(&format!("{name}_series_element"), series.to_string());
                    kv.num(&format!("{name}_shunt_x_ohm"), *shunt_x_ohm);
                    kv.push(&format!("{name}_shunt_element"), shunt.to_string());
                }
            }
            match variant {
                Variant::LowPass => d.low_pass,
                Variant::HighPass => d.high_pass,
            }
        }
    };

    let matched = matching::apply_match(&profile, &network);
    let unmatched_vswr = matching::vswr_profile(&profile, z0);
    let matched_vswr = matching::vswr_profile(&matched, z0);
    w.csv("matched_impedance.csv", &report::impedance_table(&matched))?;
    w.csv("vswr_unmatched.csv", &report::vswr_table(&unmatched_vswr))?;
    w.csv("vswr_matched.csv", &report::vswr_table(&matched_vswr))?;
    let split = matching::power_split_report(&profile, &network, z0);
    w.csv(
        "power.csv",
        &report::power_table(&split, profile.frequencies_hz()),
    )?;

    let at_design = |z: Complex64| {
        rf::reflection_coefficient(z, z0)
            .map(|g| matching::vswr_from_gamma(g.norm()))
            .ok()
    };
    kv.opt("unmatched_vswr_at_design", at_design(z_design));
    kv.opt(
        "matched_vswr_at_design",
        network
            .input_impedance(z_design, f_design)
            .and_then(at_design),
    );
    kv.opt("max_unmatched_vswr", unmatched_vswr.max_vswr());
    kv.opt("max_matched_vswr", matched_vswr.max_vswr());
    let over = matched_vswr
        .vswr
        .iter()
        .flatten()
        .filter(|v| **v >= 2.0)
        .count();
    kv.push("matched_points_vswr_ge_2", over.to_string());
    if let MatchingNetwork::SeriesResistor { series_r_ohm, .. } = network {
        let total = series_r_ohm + z_design.re;
        if total > 0.0 {
            kv.num("antenna_power_fraction_at_design", z_design.re / total);
        }
    }
    let text = kv.to_text();
    w.text("match_report.txt", &text)?;

    w.plot("matched_impedance.svg", || {
        let pts = |v: Vec<Option<f64>>| {
            matched
                .frequencies_hz()
                .iter()
                .zip(v)
                .map(|(f, v)| (*f, v.unwrap_or(f64::NAN)))
                .collect()
        };
        svg::line_plot(
            "Matched input impedance",
            "frequency (Hz)",
            "ohm",
            &[
                svg::Series {
                    label: "|Z_in|",
                    points: pts(matched.magnitude()),
                },
                svg::Series {
                    label: "R_in",
                    points: pts(matched.resistance()),
                },
            ],
        )
    })?;
    w.plot("vswr.svg", || {
        let pts = |v: &matching::VswrProfile| {
            v.frequencies_hz
                .iter()
                .zip(&v.vswr)
                .map(|(f, s)| (*f, s.unwrap_or(f64::NAN)))
                .collect()
        };
        svg::line_plot(
            "VSWR",
            "frequency (Hz)",
            "VSWR",
            &[svg::Series {
                label: "matched",
                points: pts(&matched_vswr),
            }],
        )
    })?;
    Ok(text)
}

/// Parsed `pattern --layout` file.
#[derive(Debug, Clone, PartialEq)]
pub struct LayoutFile {
    pub layout: ArrayLayout,
    pub element: ElementModel,
    pub phi_cut_deg: f64,
}

/// Parses a layout file:
///
/// ```text
/// frequency_hz 1e9
/// units wavelengths          # or meters (default)
/// element dipole 0 0 1       # or: element isotropic
/// phi_cut_deg 0
/// feed 0 0 0                 # x y z [weight_re weight_im]
/// feed 0 0 1
/// ```
pub fn parse_layout(text: &str) -> crate::Result<LayoutFile> {
    let mut freq = None;
    let mut wavelengths = false;
    let mut element = ElementModel::isotropic();
    let mut phi_cut_deg = 0.0;
    let mut feeds: Vec<([f64; 3], Complex64, usize)> = Vec::new();
    let mut last_line = 0;
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        last_line = line_no;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let mut toks = line.split_whitespace();
        let key = toks.next().unwrap_or_default();
        let nums = toks.clone().map(|t| {
            t.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| Error::parse(line_no, format!("'{t}' is not a finite number")))
        });
        match key {
            "frequency_hz" => {
                let v: Vec<f64> = nums.collect::<crate::Result<_>>()?;
                if v.len() != 1 {
                    return Err(Error::parse(line_no, "frequency_hz takes one value"));
                }
                freq = Some(v[0]);
            }
            "phi_cut_deg" => {
                let v: Vec<f64> = nums.collect::<crate::Result<_>>()?;
                if v.len() != 1 {
                    return Err(Error::parse(line_no, "phi_cut_deg takes one value"));
                }
                phi_cut_deg = v[0];
            }
            "units" => match toks.next() {
                Some("meters") => wavelengths = false,
                Some("wavelengths") => wavelengths = true,
                other => {
                    return Err(Error::parse(
                        line_no,
                        format!("units must be meters or wavelengths, got {other:?}"),
                    ))
                }
            },
            "element" => match toks.next() {
                Some("isotropic") => element = ElementModel::isotropic(),
                Some("dipole") => {
                    let v: Vec<f64> = toks
                        .map(|t| {
                            t.parse::<f64>().map_err(|_| {
                                Error::parse(line_no, format!("'{t}' is not a number"))
                            })
                        })
                        .collect::<crate::Result<_>>()?;
                    let axis = match v.as_slice() {
                        [] => [0.0, 0.0, 1.0],
                        [x, y, z] => [*x, *y, *z],
                        _ => return Err(Error::parse(line_no, "dipole axis needs 3 components")),
                    };
                    element = ElementModel::dipole(axis)
                        .map_err(|e| Error::parse(line_no, e.to_string()))?;
                }
                other => {
                    return Err(Error::parse(
                        line_no,
                        format!("element must be isotropic or dipole, got {other:?}"),
                    ))
                }
            },
            "feed" => {
                let v: Vec<f64> = nums.collect::<crate::Result<_>>()?;
                let (pos, weight) = match v.as_slice() {
                    [x, y, z] => ([*x, *y, *z], Complex64::new(1.0, 0.0)),
                    [x, y, z, re, im] => ([*x, *y, *z], Complex64::new(*re, *im)),
                    _ => {
                        return Err(Error::parse(
                            line_no,
                            "feed takes x y z [weight_re weight_im]",
                        ))
                    }
                };
                feeds.push((pos, weight, line_no));
            }
            other => {
                return Err(Error::parse(
                    line_no,
                    format!("unknown layout key '{other}'"),
                ))
            }
        }
    }
    let freq = freq.ok_or_else(|| Error::parse(last_line.max(1), "missing frequency_hz"))?;
    if !(freq > 0.0) {
        return Err(Error::parse(
            last_line.max(1),
            "frequency_hz must be positive",
        ));
    }
    if feeds.is_empty() {
        feeds.push(([0.0; 3], Complex64::new(1.0, 0.0), 0));
    }
    let scale = if wavelengths {
        radiation::SPEED_OF_LIGHT_M_PER_S / freq
    } else {
        1.0
    };
    let positions = feeds
        .iter()
        .map(|(p, _, _)| [p[0] * scale, p[1] * scale, p[2] * scale])
        .collect();
    let weights = feeds.iter().map(|(_, w, _)| *w).collect();
    let layout = ArrayLayout::new(positions, weights, freq)
        .map_err(|e| Error::parse(last_line.max(1), e.to_string()))?;
    Ok(LayoutFile {
        layout,
        element,
        phi_cut_deg,
    })
}

fn pattern(
    cfg: &RunConfig,
    w: &mut Writer,
    layout_path: &Path,
    efficiency: Option<f64>,
) -> Result<String, CliError> {
    let text = std::fs::read_to_string(layout_path)
        .map_err(|e| CliError::input(format!("{}: {e}", layout_path.display())))?;
    let parsed = parse_layout(&text)
        .map_err(|e| CliError::input(format!("{}: {e}", layout_path.display())))?;
    let (theta, phi) = radiation::uniform_grid(cfg.grid_step_deg)?;
    let pat = radiation::evaluate_pattern(&parsed.layout, &parsed.element, &theta, &phi)?;
    let d = radiation::directivity(&pat).map_err(|e| CliError::output(e.to_string()))?;
    let phi_cut = parsed.phi_cut_deg.to_radians();
    let cut = radiation::polar_cut(&pat, phi_cut)?;
    let lobes = radiation::find_lobes(&pat, phi_cut, cfg.lobe_threshold_db)?;

    w.csv("pattern.csv", &report::pattern_table(&pat))?;
    let cut_table = report::cut_table(&cut);
    w.csv("cut.csv", &cut_table)?;
    w.csv("lobes.csv", &report::lobes_table(&lobes))?;

    let mut kv = KeyValueReport::default();
    kv.push("layout", layout_path.display().to_string());
    kv.num("frequency_hz", parsed.layout.frequency_hz());
    kv.push("elements", parsed.layout.positions_m().len().to_string());
    kv.num("grid_step_deg", cfg.grid_step_deg);
    kv.num("directivity", d.linear);
    kv.num("directivity_dbi", d.dbi);
    if let Some(eff) = efficiency {
        let g = radiation::gain(d.linear, eff)?;
        kv.num("efficiency", eff);
        kv.num("gain", g);
        kv.num("gain_dbi", 10.0 * g.log10());
    }
    kv.num("phi_cut_deg", parsed.phi_cut_deg);
    kv.num("lobe_threshold_db", cfg.lobe_threshold_db);
    kv.push(
        "degenerate_cut",
        if lobes.degenerate { "yes" } else { "no" },
    );
    kv.push("main_lobes", lobes.main_count().to_string());
    kv.push(
        "minor_lobes",
        (lobes.lobes.len() - lobes.main_count()).to_string(),
    );
    for warn in &d.warnings {
        kv.push("warning", warn.clone());
    }
    let text = kv.to_text();
    w.text("pattern_report.txt", &text)?;
    w.plot("cut.svg", || {
        let peak = cut.u.iter().copied().fold(0.0, f64::max);
        let db: Vec<f64> = cut.u.iter().map(|u| 10.0 * (u / peak).log10()).collect();
        svg::polar_plot("Polar cut (dB)", &cut.angle_rad, &db, -40.0)
    })?;
    Ok(text)
}

/// Parses `rssi:dbm,rssi:dbm,...`.
pub fn parse_reported(list: &str) -> crate::Result<Vec<(u8, f64)>> {
    list.split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|item| {
            let (r, d) = item
                .split_once(':')
                .ok_or_else(|| Error::input(format!("reading '{item}' is not rssi:dbm")))?;
            let r = r
                .trim()
                .parse::<u8>()
                .map_err(|_| Error::input(format!("bad rssi in '{item}'")))?;
            let d = d
                .trim()
                .parse::<f64>()
                .map_err(|_| Error::input(format!("bad dBm in '{item}'")))?;
            Ok((r, d))
        })
        .collect()
}

fn rssi(
    w: &mut Writer,
    novel: &Path,
    baseline: &Path,
    novel_area: f64,
    baseline_area: f64,
    environment: &str,
    reported: Option<&str>,
) -> Result<String, CliError> {
    let n = field_stats::read_rssi_file(novel)?.with_labels(environment, "novel");
    let b = field_stats::read_rssi_file(baseline)?.with_labels(environment, "baseline");
    let rep = compare_datasets(&n, &b, novel_area, baseline_area)?;
    let audit = match reported {
        Some(list) => Some(audit_reported_readings(&parse_reported(list)?)?),
        None => None,
    };
    w.csv("rssi_novel.csv", &report::rssi_table(&n))?;
    w.csv("rssi_baseline.csv", &report::rssi_table(&b))?;
    let kv = report::comparison_summary(&rep, audit.as_ref());
    w.csv("comparison.csv", &kv.to_table())?;
    let text = kv.to_text();
    w.text("comparison.txt", &text)?;
    w.plot("rssi.svg", || {
        let series = |label, ds: &field_stats::RssiDataset| {
            let t0 = ds.samples.first().map_or(0, |s| s.timestamp.timestamp());
            svg::Series {
                label,
                points: ds
                    .samples
                    .iter()
                    .map(|s| {
                        (
                            (s.timestamp.timestamp() - t0) as f64,
                            s.dbm().unwrap_or(f64::NAN),
                        )
                    })
                    .collect(),
            }
        };
        svg::line_plot(
            "Signal strength",
            "time (s)",
            "dBm",
            &[series("baseline", &b), series("novel", &n)],
        )
    })?;
    Ok(text)
}

/// Parses `start:stop:points`.
pub fn parse_sweep(s: &str) -> crate::Result<Vec<f64>> {
    let parts: Vec<&str> = s.split(':').collect();
    let [start, stop, points] = parts.as_slice() else {
        return Err(Error::input(format!(
            "sweep '{s}' is not start:stop:points"
        )));
    };
    let start: f64 = start
        .parse()
        .map_err(|_| Error::input(format!("bad sweep start '{start}'")))?;
    let stop: f64 = stop
        .parse()
        .map_err(|_| Error::input(format!("bad sweep stop '{stop}'")))?;
    let points: usize = points
        .parse()
        .map_err(|_| Error::input(format!("bad sweep points '{points}'")))?;
    rf::linear_sweep(start, stop, points)
}

fn synth(
    cfg: &RunConfig,
    w: &mut Writer,
    (r, l, c): (f64, f64, f64),
    sweep: &str,
    output: Option<&Path>,
    format: EncodingArg,
    unit: UnitArg,
) -> Result<String, CliError> {
    let model = SeriesRlcModel::new(r, l, c)?;
    let freqs = parse_sweep(sweep)?;
    let net = rf::synthesize_series_rlc(&model, &freqs, cfg.z0_ohm, cfg.fixture)?;
    let fmt = TouchstoneFormat::new(
        match unit {
            UnitArg::Hz => FrequencyUnit::Hz,
            UnitArg::Khz => FrequencyUnit::KHz,
            UnitArg::Mhz => FrequencyUnit::MHz,
            UnitArg::Ghz => FrequencyUnit::GHz,
        },
        match format {
            EncodingArg::Ri => Encoding::RealImaginary,
            EncodingArg::Ma => Encoding::MagnitudeAngle,
            EncodingArg::Db => Encoding::DbAngle,
        },
    );
    let default_name = if net.ports() == 1 {
        "synth.s1p"
    } else {
        "synth.s2p"
    };
    let path = match output {
        Some(p) if p.is_absolute() || p.parent().is_some_and(|d| !d.as_os_str().is_empty()) => {
            p.to_path_buf()
        }
        Some(p) => w.dir.join(p),
        None => w.dir.join(default_name),
    };
    let doc = touchstone::write_touchstone(&net, fmt);
    std::fs::write(&path, doc)
        .map_err(|e| CliError::output(format!("cannot write {}: {e}", path.display())))?;
    w.outcome.files.push(path.clone());
    let mut kv = KeyValueReport::default();
    kv.push("output", path.display().to_string());
    kv.push("fixture", cfg.fixture.name());
    kv.num("resonant_frequency_hz", model.resonant_frequency_hz());
    kv.push("points", freqs.len().to_string());
    Ok(kv.to_text())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_rejects_unknown_keys() {
        let mut cfg = RunConfig::default();
        cfg.apply_text("z0_ohm = 75\n# note\nfixture = shunt-through\n")
            .unwrap();
        assert_eq!(cfg.z0_ohm, 75.0);
        assert_eq!(cfg.fixture, FixtureMode::ShuntThrough);
        let err = RunConfig::default().apply_text("z0 = 50\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }));
        assert!(RunConfig::default()
            .apply_text("grid_step_deg = fine")
            .is_err());
        let bad = RunConfig {
            df_threshold: -1.0,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn sweep_and_reported_parsing() {
        let s = parse_sweep("1e8:2e10:1000").unwrap();
        assert_eq!((s.len(), s[0], s[999]), (1000, 1e8, 2e10));
        assert!(parse_sweep("1e8:2e10").is_err());
        assert!(parse_sweep("2e10:1e8:10").is_err());
        assert_eq!(
            parse_reported("20:-73, 11:-89").unwrap(),
            vec![(20, -73.0), (11, -89.0)]
        );
        assert!(parse_reported("20=-73").is_err());
    }

    #[test]
    fn layout_file() {
        let parsed = parse_layout(
            "frequency_hz 1e9\nunits wavelengths\nelement dipole 0 0 1\nfeed 0 0 0\nfeed 0 0 0.5 1 0\n",
        )
        .unwrap();
        assert_eq!(parsed.layout.positions_m().len(), 2);
        let lambda = radiation::SPEED_OF_LIGHT_M_PER_S / 1e9;
        assert!((parsed.layout.positions_m()[1][2] - 0.5 * lambda).abs() < 1e-12);
        for bad in [
            "feed 0 0 0\n",
            "frequency_hz 1e9\nfeed 0 0\n",
            "frequency_hz 1e9\nelement horn\n",
            "frequency_hz x\n",
            "frequency_hz 1e9\nspin 3\n",
        ] {
            assert!(
                matches!(parse_layout(bad), Err(Error::Parse { .. })),
                "{bad}"
            );
        }
    }
}
