//! Matching-network synthesis, VSWR sweeps and power split.

use std::f64::consts::PI;
use std::fmt;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::rf::{reflection_coefficient, ImpedanceProfile};

/// VSWR reported for |Γ| at or above `1 - VSWR_INFINITE_MARGIN`.
pub const VSWR_DISPLAY_CAP: f64 = 1e6;
pub const VSWR_INFINITE_MARGIN: f64 = 1e-9;

/// A lumped reactive element, sized at a design frequency.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Reactor {
    Inductor {
        henries: f64,
    },
    Capacitor {
        farads: f64,
    },
    /// Zero reactance: a plain wire.
    Short,
    /// Infinite reactance: no element fitted.
    Open,
}

impl Reactor {
    /// The element presenting reactance `x_ohm` at `f_hz`.
    pub fn from_reactance(x_ohm: f64, f_hz: f64) -> Self {
        let w = 2.0 * PI * f_hz;
        if !x_ohm.is_finite() {
            Reactor::Open
        } else if x_ohm > 0.0 {
            Reactor::Inductor { henries: x_ohm / w }
        } else if x_ohm < 0.0 {
            Reactor::Capacitor {
                farads: -1.0 / (w * x_ohm),
            }
        } else {
            Reactor::Short
        }
    }

    pub fn reactance(&self, f_hz: f64) -> f64 {
        let w = 2.0 * PI * f_hz;
        match *self {
            Reactor::Inductor { henries } => w * henries,
            Reactor::Capacitor { farads } => -1.0 / (w * farads),
            Reactor::Short => 0.0,
            Reactor::Open => f64::INFINITY,
        }
    }
}

impl fmt::Display for Reactor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Reactor::Inductor { henries } => write!(f, "L = {henries:e} H"),
            Reactor::Capacitor { farads } => write!(f, "C = {farads:e} F"),
            Reactor::Short => f.write_str("short"),
            Reactor::Open => f.write_str("open"),
        }
    }
}

/// Which element of an L-section sits next to the load.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LSectionOrder {
    /// Load, then series element, then shunt element at the source side.
    SeriesAtLoad,
    /// Load, then shunt element across it, then series element at the source.
    ShuntAtLoad,
}

/// The two L-section solutions. Low-pass places a capacitor in shunt,
/// high-pass an inductor.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LSectionVariant {
    LowPass,
    HighPass,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MatchingNetwork {
    SeriesResistor {
        series_r_ohm: f64,
        f_design_hz: f64,
    },
    LSection {
        variant: LSectionVariant,
        order: LSectionOrder,
        /// Reactances at the design frequency.
        series_x_ohm: f64,
        shunt_x_ohm: f64,
        series: Reactor,
        shunt: Reactor,
        f_design_hz: f64,
    },
}

impl MatchingNetwork {
    pub fn f_design_hz(&self) -> f64 {
        match *self {
            MatchingNetwork::SeriesResistor { f_design_hz, .. }
            | MatchingNetwork::LSection { f_design_hz, .. } => f_design_hz,
        }
    }

    /// Input impedance seen by the source when the network drives `z_load`
    /// at frequency `f_hz`. `None` at an exact parallel resonance.
    pub fn input_impedance(&self, z_load: Complex64, f_hz: f64) -> Option<Complex64> {
        match *self {
            MatchingNetwork::SeriesResistor { series_r_ohm, .. } => Some(z_load + series_r_ohm),
            MatchingNetwork::LSection {
                order,
                series,
                shunt,
                ..
            } => {
                let zs = Complex64::new(0.0, series.reactance(f_hz));
                let across = |z: Complex64| match shunt {
                    Reactor::Open => Some(z),
                    _ => parallel(z, Complex64::new(0.0, shunt.reactance(f_hz))),
                };
                match order {
                    LSectionOrder::SeriesAtLoad => across(z_load + zs),
                    LSectionOrder::ShuntAtLoad => across(z_load).map(|z| z + zs),
                }
            }
        }
    }
}

fn parallel(a: Complex64, b: Complex64) -> Option<Complex64> {
    let sum = a + b;
    if sum == Complex64::new(0.0, 0.0) {
        return None;
    }
    Some(a * b / sum)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SeriesMatchDesign {
    pub network: MatchingNetwork,
    /// Antenna resistance interpolated at the design frequency.
    pub antenna_resistance_ohm: f64,
    pub warnings: Vec<String>,
}

/// Series resistor that raises the antenna resistance at `f_design` to z0.
/// Reactance is left untouched.
pub fn design_series_resistive_match(
    profile: &ImpedanceProfile,
    z0: f64,
    f_design: f64,
) -> Result<SeriesMatchDesign> {
    if !(z0 > 0.0) {
        return Err(Error::input(format!("z0 must be positive, got {z0}")));
    }
    let z = profile.interpolate(f_design)?.ok_or_else(|| {
        Error::input(format!(
            "impedance undefined at design frequency {f_design} Hz"
        ))
    })?;
    let mut warnings = Vec::new();
    let needed = z0 - z.re;
    let series_r_ohm = if needed < 0.0 {
        warnings.push(format!(
            "antenna resistance {} ohm exceeds z0 = {z0} ohm; series resistor clipped to 0",
            z.re
        ));
        0.0
    } else {
        needed
    };
    Ok(SeriesMatchDesign {
        network: MatchingNetwork::SeriesResistor {
            series_r_ohm,
            f_design_hz: f_design,
        },
        antenna_resistance_ohm: z.re,
        warnings,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct LSectionDesign {
    pub q: f64,
    pub low_pass: MatchingNetwork,
    pub high_pass: MatchingNetwork,
}

/// Lossless two-element match of `z_load` to `z0` at `f_design`.
///
/// For R < z0 the series element is next to the load: it cancels the load
/// reactance and adds ±Q·R, Q = √(z0/R − 1); the shunt element is ∓z0/Q.
/// For R > z0 the dual form is used on the load admittance.
pub fn design_l_section(z_load: Complex64, z0: f64, f_design: f64) -> Result<LSectionDesign> {
    if !(z0 > 0.0) || !(f_design > 0.0) {
        return Err(Error::input("z0 and design frequency must be positive"));
    }
    let r = z_load.re;
    if !(r > 0.0) {
        return Err(Error::input(format!(
            "load resistance must be positive for an L-section, got {r}"
        )));
    }
    if r == z0 {
        return Err(Error::input(format!(
            "load resistance already equals z0 = {z0} ohm; no L-section needed"
        )));
    }

    let build = |variant: LSectionVariant, sign: f64, q: f64| -> MatchingNetwork {
        let (order, series_x_ohm, shunt_x_ohm) = if r < z0 {
            (
                LSectionOrder::SeriesAtLoad,
                -z_load.im + sign * q * r,
                -sign * z0 / q,
            )
        } else {
            let y = z_load.inv();
            let rp = 1.0 / y.re;
            // shunt susceptance cancels the load susceptance and adds sign·Q/Rp
            let b = -y.im + sign * q / rp;
            (LSectionOrder::ShuntAtLoad, sign * q * z0, -1.0 / b)
        };
        MatchingNetwork::LSection {
            variant,
            order,
            series_x_ohm,
            shunt_x_ohm,
            series: Reactor::from_reactance(series_x_ohm, f_design),
            shunt: Reactor::from_reactance(shunt_x_ohm, f_design),
            f_design_hz: f_design,
        }
    };

    let q = if r < z0 {
        (z0 / r - 1.0).sqrt()
    } else {
        let rp = 1.0 / z_load.inv().re;
        (rp / z0 - 1.0).sqrt()
    };
    Ok(LSectionDesign {
        q,
        low_pass: build(LSectionVariant::LowPass, 1.0, q),
        high_pass: build(LSectionVariant::HighPass, -1.0, q),
    })
}

/// Input impedance of `net` driving the profile, pointwise.
pub fn apply_match(profile: &ImpedanceProfile, net: &MatchingNetwork) -> ImpedanceProfile {
    profile.map_points(|f, z| net.input_impedance(z, f))
}

/// (1+|Γ|)/(1−|Γ|), capped at [`VSWR_DISPLAY_CAP`].
pub fn vswr_from_gamma(gamma_mag: f64) -> f64 {
    if gamma_mag >= 1.0 - VSWR_INFINITE_MARGIN {
        VSWR_DISPLAY_CAP
    } else {
        ((1.0 + gamma_mag) / (1.0 - gamma_mag)).min(VSWR_DISPLAY_CAP)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VswrProfile {
    pub frequencies_hz: Vec<f64>,
    pub gamma: Vec<Option<Complex64>>,
    /// Finite VSWR; total reflection is reported as [`VSWR_DISPLAY_CAP`].
    pub vswr: Vec<Option<f64>>,
    pub infinite: Vec<bool>,
}

impl VswrProfile {
    pub fn max_vswr(&self) -> Option<f64> {
        self.vswr.iter().flatten().copied().reduce(f64::max)
    }
}

pub fn vswr_profile(profile: &ImpedanceProfile, z0: f64) -> VswrProfile {
    let gamma: Vec<Option<Complex64>> = profile
        .points()
        .iter()
        .map(|z| z.and_then(|z| reflection_coefficient(z, z0).ok()))
        .collect();
    let vswr = gamma
        .iter()
        .map(|g| g.map(|g| vswr_from_gamma(g.norm())))
        .collect();
    let infinite = gamma
        .iter()
        .map(|g| matches!(g, Some(g) if g.norm() >= 1.0 - VSWR_INFINITE_MARGIN))
        .collect();
    VswrProfile {
        frequencies_hz: profile.frequencies_hz().to_vec(),
        gamma,
        vswr,
        infinite,
    }
}

/// Where the power accepted at the source interface goes, per frequency.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerSplit {
    pub frequency_hz: f64,
    /// Share of accepted power dissipated in the antenna resistance.
    pub antenna_fraction: f64,
    /// Share of accepted power dissipated in the matching resistor.
    pub resistor_fraction: f64,
    /// 1 − |Γ|² at the source interface: fraction of incident power accepted.
    pub mismatch_factor: f64,
}

/// Resistor-divider split for series-resistor matches; an L-section is
/// lossless so all accepted power reaches the antenna. Points with an
/// undefined impedance or zero total resistance are `None`.
pub fn power_split_report(
    profile: &ImpedanceProfile,
    net: &MatchingNetwork,
    z0: f64,
) -> Vec<Option<PowerSplit>> {
    profile
        .frequencies_hz()
        .iter()
        .zip(profile.points())
        .map(|(&f, z)| {
            let z = (*z)?;
            let z_in = net.input_impedance(z, f)?;
            let gamma = reflection_coefficient(z_in, z0).ok()?;
            let antenna_fraction = match *net {
                MatchingNetwork::SeriesResistor { series_r_ohm, .. } => {
                    let total = series_r_ohm + z.re;
                    if total == 0.0 {
                        return None;
                    }
                    z.re / total
                }
                MatchingNetwork::LSection { .. } => 1.0,
            };
            Some(PowerSplit {
                frequency_hz: f,
                antenna_fraction,
                resistor_fraction: 1.0 - antenna_fraction,
                mismatch_factor: 1.0 - gamma.norm_sqr(),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn flat(z: Complex64) -> ImpedanceProfile {
        ImpedanceProfile::new(vec![1e9, 2e9, 3e9], vec![z; 3]).unwrap()
    }

    fn series_r(net: &MatchingNetwork) -> f64 {
        match net {
            MatchingNetwork::SeriesResistor { series_r_ohm, .. } => *series_r_ohm,
            _ => panic!("not a series resistor"),
        }
    }

    #[test]
    fn series_resistor_design() {
        let d = design_series_resistive_match(&flat(c(1.0, 2.0)), 50.0, 2e9).unwrap();
        assert_eq!(series_r(&d.network), 49.0);
        assert!(d.warnings.is_empty());

        let d = design_series_resistive_match(&flat(c(50.0, 0.0)), 50.0, 2e9).unwrap();
        assert_eq!(series_r(&d.network), 0.0);
        assert!(d.warnings.is_empty());

        let d = design_series_resistive_match(&flat(c(60.0, 0.0)), 50.0, 2e9).unwrap();
        assert_eq!(series_r(&d.network), 0.0);
        assert_eq!(d.warnings.len(), 1);

        assert!(design_series_resistive_match(&flat(c(1.0, 0.0)), 50.0, 5e9).is_err());
    }

    #[test]
    fn series_resistor_interpolates_resistance() {
        let p = ImpedanceProfile::new(vec![1e9, 3e9], vec![c(1.0, 0.0), c(3.0, 0.0)]).unwrap();
        let d = design_series_resistive_match(&p, 50.0, 2e9).unwrap();
        assert_eq!(series_r(&d.network), 48.0);
    }

    #[test]
    fn l_section_one_ohm() {
        let d = design_l_section(c(1.0, 0.0), 50.0, 1e9).unwrap();
        assert_relative_eq!(d.q, 7.0, epsilon = 1e-12);
        let MatchingNetwork::LSection {
            series_x_ohm,
            shunt_x_ohm,
            series,
            shunt,
            order,
            ..
        } = d.low_pass
        else {
            panic!()
        };
        assert_eq!(order, LSectionOrder::SeriesAtLoad);
        assert_relative_eq!(series_x_ohm, 7.0, epsilon = 1e-12);
        assert_relative_eq!(shunt_x_ohm, -50.0 / 7.0, epsilon = 1e-12);
        let Reactor::Inductor { henries } = series else {
            panic!()
        };
        assert_relative_eq!(henries, 1.114_084_6e-9, max_relative = 1e-6);
        let Reactor::Capacitor { farads } = shunt else {
            panic!()
        };
        assert_relative_eq!(farads, 22.281_692e-12, max_relative = 1e-6);

        // direct oracle: 1 / (1/(1+j7) + j7/50) = 50
        let oracle = 1.0 / (1.0 / c(1.0, 7.0) + c(0.0, 7.0 / 50.0));
        assert!((oracle - c(50.0, 0.0)).norm() < 1e-12);
        for net in [d.low_pass, d.high_pass] {
            let zin = net.input_impedance(c(1.0, 0.0), 1e9).unwrap();
            assert!((zin - c(50.0, 0.0)).norm() <= 1e-9 * 50.0, "{zin}");
        }
    }

    #[test]
    fn l_section_quarter_match() {
        let d = design_l_section(c(25.0, 0.0), 50.0, 1e9).unwrap();
        assert_relative_eq!(d.q, 1.0, epsilon = 1e-15);
        let MatchingNetwork::LSection {
            series_x_ohm,
            shunt_x_ohm,
            ..
        } = d.low_pass
        else {
            panic!()
        };
        assert_relative_eq!(series_x_ohm, 25.0, epsilon = 1e-12);
        assert_relative_eq!(shunt_x_ohm, -50.0, epsilon = 1e-12);
    }

    #[test]
    fn l_section_errors() {
        assert!(design_l_section(c(50.0, 0.0), 50.0, 1e9).is_err());
        assert!(design_l_section(c(0.0, 3.0), 50.0, 1e9).is_err());
        assert!(design_l_section(c(-1.0, 3.0), 50.0, 1e9).is_err());
    }

    #[test]
    fn apply_series_resistor() {
        let net = MatchingNetwork::SeriesResistor {
            series_r_ohm: 49.0,
            f_design_hz: 2e9,
        };
        let m = apply_match(&flat(c(1.0, 2.0)), &net);
        assert!(m.points().iter().all(|z| *z == Some(c(50.0, 2.0))));
        let id = MatchingNetwork::SeriesResistor {
            series_r_ohm: 0.0,
            f_design_hz: 2e9,
        };
        assert_eq!(apply_match(&flat(c(1.0, 2.0)), &id), flat(c(1.0, 2.0)));
    }

    #[test]
    fn apply_l_section_at_design() {
        let d = design_l_section(c(1.0, 0.0), 50.0, 1e9).unwrap();
        let p = ImpedanceProfile::new(vec![0.5e9, 1e9, 1.5e9], vec![c(1.0, 0.0); 3]).unwrap();
        let m = apply_match(&p, &d.low_pass);
        let z = m.points()[1].unwrap();
        assert!((z - c(50.0, 0.0)).norm() < 1e-9 * 50.0);
        // off design the match degrades
        assert!((m.points()[0].unwrap() - c(50.0, 0.0)).norm() > 1.0);
    }

    #[test]
    fn vswr_values() {
        let v = vswr_profile(&flat(c(50.0, 0.0)), 50.0);
        assert_eq!(v.vswr[0], Some(1.0));
        let v = vswr_profile(&flat(c(1.0, 0.0)), 50.0);
        assert_relative_eq!(v.vswr[0].unwrap(), 50.0, epsilon = 1e-9);
        let v = vswr_profile(&flat(c(50.0, 2.0)), 50.0);
        let g = v.gamma[0].unwrap().norm();
        assert_relative_eq!(g, 2.0 / (100.0f64.powi(2) + 4.0).sqrt(), epsilon = 1e-15);
        assert_relative_eq!(v.vswr[0].unwrap(), (1.0 + g) / (1.0 - g), epsilon = 1e-12);
        assert_relative_eq!(v.vswr[0].unwrap(), 1.040_808, epsilon = 1e-6);
        let v = vswr_profile(&flat(c(0.0, 5.0)), 50.0);
        assert!(v.infinite[0]);
        assert_eq!(v.vswr[0], Some(VSWR_DISPLAY_CAP));
    }

    #[test]
    fn power_split() {
        let net = MatchingNetwork::SeriesResistor {
            series_r_ohm: 49.0,
            f_design_hz: 1e9,
        };
        let s = power_split_report(&flat(c(1.0, 0.0)), &net, 50.0);
        let s = s[0].unwrap();
        assert_relative_eq!(s.antenna_fraction, 0.02, epsilon = 1e-15);
        assert_relative_eq!(s.mismatch_factor, 1.0, epsilon = 1e-15);

        let net = MatchingNetwork::SeriesResistor {
            series_r_ohm: 0.0,
            f_design_hz: 1e9,
        };
        let s = power_split_report(&flat(c(50.0, 0.0)), &net, 50.0)[0].unwrap();
        assert_eq!(s.antenna_fraction, 1.0);
        assert_eq!(s.mismatch_factor, 1.0);
        assert_eq!(s.resistor_fraction, 0.0);
    }

    proptest! {
        #[test]
        fn l_section_re_embeds(r in 0.01f64..500.0, x in -500.0f64..500.0, z0 in 10.0f64..100.0) {
            prop_assume!((r - z0).abs() > 1e-6);
            let d = design_l_section(c(r, x), z0, 1e9).unwrap();
            for net in [d.low_pass, d.high_pass] {
                if let Some(zin) = net.input_impedance(c(r, x), 1e9) {
                    prop_assert!((zin - c(z0, 0.0)).norm() <= 1e-9 * z0, "{:?} -> {}", net, zin);
                }
            }
        }

        #[test]
        fn vswr_at_least_one(r in 0.0f64..1e3, x in -1e3f64..1e3) {
            let v = vswr_profile(&flat(c(r, x)), 50.0);
            if let Some(s) = v.vswr[0] {
                prop_assert!(s >= 1.0);
            }
        }

        #[test]
        fn power_conserved(r in 0.01f64..50.0, x in -10.0f64..10.0, rs in 0.0f64..100.0) {
            let net = MatchingNetwork::SeriesResistor { series_r_ohm: rs, f_design_hz: 1e9 };
            let s = power_split_report(&flat(c(r, x)), &net, 50.0)[0].unwrap();
            prop_assert!((s.antenna_fraction + s.resistor_fraction - 1.0).abs() < 1e-15);
        }
    }
}
