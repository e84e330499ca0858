//! Python bindings for the `rfcap` analysis pipeline.
//!
//! Complex values cross the boundary as Python `complex`; undefined
//! impedance points are `None`.

use num_complex::Complex64;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;

use rfcap::field_stats;
use rfcap::matching::{self, MatchingNetwork};
use rfcap::metrics::{self, MetricThresholds};
use rfcap::radiation::{self, ArrayLayout, ElementModel};
use rfcap::rf::{self, FixtureMode};
use rfcap::touchstone::{self, Encoding, FrequencyUnit, TouchstoneFormat};

fn err(e: rfcap::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn fixture(name: &str) -> PyResult<FixtureMode> {
    name.parse().map_err(err)
}

/// Touchstone scattering data.
#[pyclass(name = "Network", module = "rfcap", frozen)]
pub struct PyNetwork {
    inner: touchstone::NetworkData,
}

#[pymethods]
impl PyNetwork {
    #[new]
    #[pyo3(signature = (frequencies_hz, ports, s, z0_ohm=50.0))]
    fn new(
        frequencies_hz: Vec<f64>,
        ports: usize,
        s: Vec<Vec<Complex64>>,
        z0_ohm: f64,
    ) -> PyResult<Self> {
        let inner = touchstone::NetworkData::new(frequencies_hz, ports, s, z0_ohm).map_err(err)?;
        Ok(Self { inner })
    }

    #[getter]
    fn frequencies_hz(&self) -> Vec<f64> {
        self.inner.frequencies_hz().to_vec()
    }

    #[getter]
    fn ports(&self) -> usize {
        self.inner.ports()
    }

    #[getter]
    fn z0_ohm(&self) -> f64 {
        self.inner.z0_ohm()
    }

    /// Matrices in Touchstone row order (S11 S21 S12 S22 for two ports).
    #[getter]
    fn s(&self) -> Vec<Vec<Complex64>> {
        self.inner.matrices().to_vec()
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    /// Serialises with a unit (`HZ`, `KHZ`, `MHZ`, `GHZ`) and encoding (`RI`, `MA`, `DB`).
    #[pyo3(signature = (unit="GHZ", encoding="RI"))]
    fn to_touchstone(&self, unit: &str, encoding: &str) -> PyResult<String> {
        let unit: FrequencyUnit = unit
            .parse()
            .map_err(|_| PyValueError::new_err(format!("unknown frequency unit '{unit}'")))?;
        let encoding: Encoding = encoding
            .parse()
            .map_err(|_| PyValueError::new_err(format!("unknown encoding '{encoding}'")))?;
        Ok(touchstone::write_touchstone(
            &self.inner,
            TouchstoneFormat::new(unit, encoding),
        ))
    }

    fn __repr__(&self) -> String {
        format!(
            "Network(ports={}, points={}, z0_ohm={})",
            self.inner.ports(),
            self.inner.len(),
            self.inner.z0_ohm()
        )
    }
}

/// Complex impedance per frequency.
#[pyclass(name = "ImpedanceProfile", module = "rfcap", frozen)]
pub struct PyImpedanceProfile {
    inner: rf::ImpedanceProfile,
}

#[pymethods]
impl PyImpedanceProfile {
    #[new]
    fn new(frequencies_hz: Vec<f64>, z: Vec<Option<Complex64>>) -> PyResult<Self> {
        let inner = rf::ImpedanceProfile::from_points(frequencies_hz, z).map_err(err)?;
        Ok(Self { inner })
    }

    #[getter]
    fn frequencies_hz(&self) -> Vec<f64> {
        self.inner.frequencies_hz().to_vec()
    }

    #[getter]
    fn z(&self) -> Vec<Option<Complex64>> {
        self.inner.points().to_vec()
    }

    fn interpolate(&self, f_hz: f64) -> PyResult<Option<Complex64>> {
        self.inner.interpolate(f_hz).map_err(err)
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }
}

#[pyfunction]
fn parse_touchstone(text: &str) -> PyResult<PyNetwork> {
    Ok(PyNetwork {
        inner: touchstone::parse_touchstone(text).map_err(err)?,
    })
}

#[pyfunction]
fn read_touchstone(path: std::path::PathBuf) -> PyResult<PyNetwork> {
    Ok(PyNetwork {
        inner: touchstone::read_touchstone(&path).map_err(err)?,
    })
}

#[pyfunction]
#[pyo3(signature = (network, fixture_mode="series-through"))]
fn impedance_profile(network: &PyNetwork, fixture_mode: &str) -> PyResult<PyImpedanceProfile> {
    Ok(PyImpedanceProfile {
        inner: rf::impedance_profile(&network.inner, fixture(fixture_mode)?).map_err(err)?,
    })
}

#[pyfunction]
#[pyo3(signature = (r_ohm, l_h, c_f, frequencies_hz, z0_ohm=50.0, fixture_mode="series-through"))]
fn synthesize_series_rlc(
    r_ohm: f64,
    l_h: f64,
    c_f: f64,
    frequencies_hz: Vec<f64>,
    z0_ohm: f64,
    fixture_mode: &str,
) -> PyResult<PyNetwork> {
    let model = rf::SeriesRlcModel::new(r_ohm, l_h, c_f).map_err(err)?;
    let inner = rf::synthesize_series_rlc(&model, &frequencies_hz, z0_ohm, fixture(fixture_mode)?)
        .map_err(err)?;
    Ok(PyNetwork { inner })
}

#[pyfunction]
fn reflection_coefficient(z: Complex64, z0_ohm: f64) -> PyResult<Complex64> {
    rf::reflection_coefficient(z, z0_ohm).map_err(err)
}

#[pyfunction]
fn vswr(z: Complex64, z0_ohm: f64) -> PyResult<f64> {
    Ok(matching::vswr_from_gamma(
        rf::reflection_coefficient(z, z0_ohm).map_err(err)?.norm(),
    ))
}

/// Dissipation-factor metrics as a dict. DF and efficiency are fractions.
#[pyfunction]
#[pyo3(signature = (profile, reactance_epsilon_ohm=metrics::DEFAULT_REACTANCE_EPSILON_OHM, z_threshold_ohm=metrics::DEFAULT_Z_THRESHOLD_OHM, df_threshold=metrics::DEFAULT_DF_THRESHOLD))]
fn capacitor_metrics<'py>(
    py: Python<'py>,
    profile: &PyImpedanceProfile,
    reactance_epsilon_ohm: f64,
    z_threshold_ohm: f64,
    df_threshold: f64,
) -> PyResult<Bound<'py, PyDict>> {
    let m = metrics::metrics_report(
        &profile.inner,
        MetricThresholds {
            reactance_epsilon_ohm,
            z_threshold_ohm,
            df_threshold,
        },
    )
    .map_err(err)?;
    let d = PyDict::new(py);
    d.set_item("df", m.loss.df)?;
    d.set_item("efficiency", m.loss.efficiency)?;
    d.set_item("q", m.loss.q)?;
    d.set_item("resonance_crossing_hz", m.resonance.crossing_hz)?;
    d.set_item("resonance_min_impedance_hz", m.resonance.min_impedance_hz)?;
    d.set_item("bandwidth_hz", m.bandwidth.map(|b| (b.start_hz, b.stop_hz)))?;
    d.set_item("fraction_below_df_threshold", m.fraction_below_df_threshold)?;
    d.set_item("max_df", m.max_df)?;
    d.set_item("warnings", m.warnings)?;
    Ok(d)
}

/// Series resistor (ohm) matching the real part at `f_design_hz`.
#[pyfunction]
#[pyo3(signature = (profile, f_design_hz, z0_ohm=50.0))]
fn design_series_match(
    profile: &PyImpedanceProfile,
    f_design_hz: f64,
    z0_ohm: f64,
) -> PyResult<f64> {
    let d = matching::design_series_resistive_match(&profile.inner, z0_ohm, f_design_hz)
        .map_err(err)?;
    match d.network {
        MatchingNetwork::SeriesResistor { series_r_ohm, .. } => Ok(series_r_ohm),
        MatchingNetwork::LSection { .. } => unreachable!("series design returns a resistor"),
    }
}

/// L-section reactances: `{"q", "low_pass": (series_x, shunt_x), "high_pass": ...}`.
#[pyfunction]
#[pyo3(signature = (z_load, f_design_hz, z0_ohm=50.0))]
fn design_l_section<'py>(
    py: Python<'py>,
    z_load: Complex64,
    f_design_hz: f64,
    z0_ohm: f64,
) -> PyResult<Bound<'py, PyDict>> {
    let d = matching::design_l_section(z_load, z0_ohm, f_design_hz).map_err(err)?;
    let out = PyDict::new(py);
    out.set_item("q", d.q)?;
    for (key, n) in [("low_pass", &d.low_pass), ("high_pass", &d.high_pass)] {
        if let MatchingNetwork::LSection {
            series_x_ohm,
            shunt_x_ohm,
            ..
        } = n
        {
            out.set_item(key, (*series_x_ohm, *shunt_x_ohm))?;
        }
    }
    Ok(out)
}

/// Matched VSWR per frequency after adding a series resistor.
#[pyfunction]
#[pyo3(signature = (profile, series_r_ohm, z0_ohm=50.0))]
fn series_matched_vswr(
    profile: &PyImpedanceProfile,
    series_r_ohm: f64,
    z0_ohm: f64,
) -> Vec<Option<f64>> {
    let f_design_hz = profile
        .inner
        .frequencies_hz()
        .first()
        .copied()
        .unwrap_or(0.0);
    let net = MatchingNetwork::SeriesResistor {
        series_r_ohm,
        f_design_hz,
    };
    matching::vswr_profile(&matching::apply_match(&profile.inner, &net), z0_ohm).vswr
}

/// Directivity (linear) of an array on a uniform grid. `element` is
/// `"isotropic"` or `"dipole"` (z-directed unless `axis` is given).
#[pyfunction]
#[pyo3(signature = (positions_m, weights, frequency_hz, element="isotropic", axis=None, grid_step_deg=1.0))]
fn directivity(
    positions_m: Vec<[f64; 3]>,
    weights: Vec<Complex64>,
    frequency_hz: f64,
    element: &str,
    axis: Option<[f64; 3]>,
    grid_step_deg: f64,
) -> PyResult<f64> {
    let model = match element {
        "isotropic" => ElementModel::isotropic(),
        "dipole" => ElementModel::dipole(axis.unwrap_or([0.0, 0.0, 1.0])).map_err(err)?,
        other => return Err(PyValueError::new_err(format!("unknown element '{other}'"))),
    };
    let layout = ArrayLayout::new(positions_m, weights, frequency_hz).map_err(err)?;
    let (theta, phi) = radiation::uniform_grid(grid_step_deg).map_err(err)?;
    let pattern = radiation::evaluate_pattern(&layout, &model, &theta, &phi).map_err(err)?;
    Ok(radiation::directivity(&pattern).map_err(err)?.linear)
}

#[pyfunction]
fn rssi_to_dbm(rssi: u8) -> PyResult<f64> {
    field_stats::rssi_to_dbm(rssi).map_err(err)
}

/// Returns `(t, df, p)`.
#[pyfunction]
fn welch_t_test(a: Vec<f64>, b: Vec<f64>) -> PyResult<(f64, f64, f64)> {
    let w = field_stats::welch_t_test(&a, &b).map_err(err)?;
    Ok((w.t, w.df, w.p))
}

#[pymodule]
#[pyo3(name = "rfcap")]
fn rfcap_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyNetwork>()?;
    m.add_class::<PyImpedanceProfile>()?;
    m.add_function(wrap_pyfunction!(parse_touchstone, m)?)?;
    m.add_function(wrap_pyfunction!(read_touchstone, m)?)?;
    m.add_function(wrap_pyfunction!(impedance_profile, m)?)?;
    m.add_function(wrap_pyfunction!(synthesize_series_rlc, m)?)?;
    m.add_function(wrap_pyfunction!(reflection_coefficient, m)?)?;
    m.add_function(wrap_pyfunction!(vswr, m)?)?;
    m.add_function(wrap_pyfunction!(capacitor_metrics, m)?)?;
    m.add_function(wrap_pyfunction!(design_series_match, m)?)?;
    m.add_function(wrap_pyfunction!(design_l_section, m)?)?;
    m.add_function(wrap_pyfunction!(series_matched_vswr, m)?)?;
    m.add_function(wrap_pyfunction!(directivity, m)?)?;
    m.add_function(wrap_pyfunction!(rssi_to_dbm, m)?)?;
    m.add_function(wrap_pyfunction!(welch_t_test, m)?)?;
    Ok(())
}
