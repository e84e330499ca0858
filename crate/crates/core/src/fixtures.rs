//! Synthetic reference profiles for a low-impedance capacitor element.
//!
//! Measured vendor data is not bundled, so these generators produce
//! profiles with a known envelope over 0.1–20 GHz for checks and demos.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::Result;
use crate::rf::{linear_sweep, ImpedanceProfile};

pub const BAND_START_HZ: f64 = 0.1e9;
pub const BAND_STOP_HZ: f64 = 20e9;

fn band_position(f: f64) -> f64 {
    (f - BAND_START_HZ) / (BAND_STOP_HZ - BAND_START_HZ)
}

/// Low-loss element: ESR 0.02 Ω and capacitive reactance whose magnitude
/// rises from 0.5 Ω at the band edges to 2.9 Ω mid-band. |Z| stays within
/// 0.5–3 Ω and the dissipation factor peaks (4 %) at the edges.
pub fn low_loss_element(points: usize) -> Result<ImpedanceProfile> {
    let f = linear_sweep(BAND_START_HZ, BAND_STOP_HZ, points)?;
    let z = f
        .iter()
        .map(|&f| {
            let x = 0.5 + 2.4 * (PI * band_position(f)).sin();
            Complex64::new(0.02, -x)
        })
        .collect();
    ImpedanceProfile::new(f, z)
}

/// Resistance wandering within [0.5, 1.5] Ω and reactance within ±3 Ω.
pub fn resistive_envelope(points: usize) -> Result<ImpedanceProfile> {
    let f = linear_sweep(BAND_START_HZ, BAND_STOP_HZ, points)?;
    let z = f
        .iter()
        .map(|&f| {
            let t = band_position(f);
            Complex64::new(1.0 + 0.5 * (3.0 * PI * t).sin(), 3.0 * (2.0 * PI * t).cos())
        })
        .collect();
    ImpedanceProfile::new(f, z)
}

/// Constant 1 + j2 Ω across the band.
pub fn flat_one_ohm(points: usize) -> Result<ImpedanceProfile> {
    let f = linear_sweep(BAND_START_HZ, BAND_STOP_HZ, points)?;
    let n = f.len();
    ImpedanceProfile::new(f, vec![Complex64::new(1.0, 2.0); n])
}
