//! Far-field radiation patterns of elements and arrays.
//!
//! Intensity is the product of an analytic element pattern and the array
//! factor |Σ wₙ·exp(j k rₙ·û)|². Directivity uses a product quadrature:
//! trapezoidal (piecewise-linear) in the intensity with the sin θ weight
//! integrated exactly over each θ interval, and periodic trapezoid in φ.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};

pub const SPEED_OF_LIGHT_M_PER_S: f64 = 299_792_458.0;
pub const DEFAULT_GRID_STEP_DEG: f64 = 1.0;
pub const DEFAULT_MAIN_LOBE_THRESHOLD_DB: f64 = -10.0;

/// Physical footprint of the capacitor element (metadata only).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Footprint {
    pub length_mm: f64,
    pub width_mm: f64,
    pub height_mm: f64,
}

impl Default for Footprint {
    fn default() -> Self {
        Self {
            length_mm: 0.63,
            width_mm: 0.63,
            height_mm: 0.25,
        }
    }
}

impl Footprint {
    pub fn area_mm2(&self) -> f64 {
        self.length_mm * self.width_mm
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ElementKind {
    Isotropic,
    /// Infinitesimal dipole along a unit axis; intensity sin²ψ.
    HertzianDipole {
        axis: [f64; 3],
    },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ElementModel {
    pub kind: ElementKind,
    pub footprint: Footprint,
}

impl ElementModel {
    pub fn isotropic() -> Self {
        Self {
            kind: ElementKind::Isotropic,
            footprint: Footprint::default(),
        }
    }

    /// A Hertzian dipole along `axis`, which is normalized here.
    pub fn dipole(axis: [f64; 3]) -> Result<Self> {
        let n = norm(axis);
        if !(n > 0.0 && n.is_finite()) {
            return Err(Error::input("dipole axis must be a nonzero finite vector"));
        }
        Ok(Self {
            kind: ElementKind::HertzianDipole {
                axis: [axis[0] / n, axis[1] / n, axis[2] / n],
            },
            footprint: Footprint::default(),
        })
    }

    fn intensity(&self, dir: [f64; 3]) -> f64 {
        match self.kind {
            ElementKind::Isotropic => 1.0,
            ElementKind::HertzianDipole { axis } => {
                let c = dot(axis, dir);
                (1.0 - c * c).max(0.0)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ArrayLayout {
    positions_m: Vec<[f64; 3]>,
    weights: Vec<Complex64>,
    frequency_hz: f64,
}

impl ArrayLayout {
    pub fn new(
        positions_m: Vec<[f64; 3]>,
        weights: Vec<Complex64>,
        frequency_hz: f64,
    ) -> Result<Self> {
        if positions_m.is_empty() || positions_m.len() != weights.len() {
            return Err(Error::input(format!(
                "layout needs matching non-empty positions and weights, got {} and {}",
                positions_m.len(),
                weights.len()
            )));
        }
        if weights.iter().all(|w| *w == Complex64::new(0.0, 0.0)) {
            return Err(Error::input("layout needs at least one nonzero weight"));
        }
        if !(frequency_hz > 0.0 && frequency_hz.is_finite()) {
            return Err(Error::input(format!(
                "frequency must be positive, got {frequency_hz}"
            )));
        }
        Ok(Self {
            positions_m,
            weights,
            frequency_hz,
        })
    }

    /// One element at the origin with unit weight.
    pub fn single(frequency_hz: f64) -> Result<Self> {
        Self::new(vec![[0.0; 3]], vec![Complex64::new(1.0, 0.0)], frequency_hz)
    }

    pub fn wavelength_m(&self) -> f64 {
        SPEED_OF_LIGHT_M_PER_S / self.frequency_hz
    }

    pub fn positions_m(&self) -> &[[f64; 3]] {
        &self.positions_m
    }

    pub fn weights(&self) -> &[Complex64] {
        &self.weights
    }

    pub fn frequency_hz(&self) -> f64 {
        self.frequency_hz
    }

    fn array_factor(&self, dir: [f64; 3]) -> f64 {
        let k = 2.0 * PI / self.wavelength_m();
        self.positions_m
            .iter()
            .zip(&self.weights)
            .fold(Complex64::new(0.0, 0.0), |acc, (r, w)| {
                acc + w * Complex64::from_polar(1.0, k * dot(*r, dir))
            })
            .norm_sqr()
    }
}

fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn norm(a: [f64; 3]) -> f64 {
    dot(a, a).sqrt()
}

fn direction(theta: f64, phi: f64) -> [f64; 3] {
    let (st, ct) = theta.sin_cos();
    let (sp, cp) = phi.sin_cos();
    [st * cp, st * sp, ct]
}

/// θ samples covering [0, π] inclusive and φ samples covering [0, 2π).
pub fn uniform_grid(step_deg: f64) -> Result<(Vec<f64>, Vec<f64>)> {
    if !(step_deg > 0.0 && step_deg <= 90.0) {
        return Err(Error::input(format!(
            "grid step must be in (0, 90] degrees, got {step_deg}"
        )));
    }
    let n_theta = (180.0 / step_deg).round() as usize;
    let n_phi = (360.0 / step_deg).round() as usize;
    if ((n_theta as f64) * step_deg - 180.0).abs() > 1e-9 {
        return Err(Error::input(format!(
            "grid step {step_deg} does not divide 180 degrees"
        )));
    }
    let theta = (0..=n_theta)
        .map(|i| (i as f64 * step_deg).to_radians())
        .collect();
    let phi = (0..n_phi)
        .map(|i| (i as f64 * step_deg).to_radians())
        .collect();
    Ok((theta, phi))
}

/// Radiation intensity sampled on a θ×φ grid, stored θ-major.
#[derive(Debug, Clone, PartialEq)]
pub struct RadiationPattern {
    theta: Vec<f64>,
    phi: Vec<f64>,
    u: Vec<f64>,
    frequency_hz: f64,
}

impl RadiationPattern {
    pub fn from_samples(
        theta: Vec<f64>,
        phi: Vec<f64>,
        u: Vec<f64>,
        frequency_hz: f64,
    ) -> Result<Self> {
        check_grid(&theta, &phi)?;
        if u.len() != theta.len() * phi.len() {
            return Err(Error::input(format!(
                "{} intensity samples for a {}x{} grid",
                u.len(),
                theta.len(),
                phi.len()
            )));
        }
        if u.iter().any(|v| !(*v >= 0.0 && v.is_finite())) {
            return Err(Error::input("intensity must be finite and non-negative"));
        }
        Ok(Self {
            theta,
            phi,
            u,
            frequency_hz,
        })
    }

    pub fn theta(&self) -> &[f64] {
        &self.theta
    }

    pub fn phi(&self) -> &[f64] {
        &self.phi
    }

    pub fn intensity(&self) -> &[f64] {
        &self.u
    }

    pub fn frequency_hz(&self) -> f64 {
        self.frequency_hz
    }

    pub fn at(&self, i_theta: usize, i_phi: usize) -> f64 {
        self.u[i_theta * self.phi.len() + i_phi]
    }

    pub fn max_intensity(&self) -> f64 {
        self.u.iter().copied().fold(0.0, f64::max)
    }
}

fn check_grid(theta: &[f64], phi: &[f64]) -> Result<()> {
    let increasing = |v: &[f64]| v.windows(2).all(|w| w[1] > w[0]);
    if theta.len() < 2 || phi.is_empty() {
        return Err(Error::input(
            "pattern grid needs >= 2 theta and >= 1 phi samples",
        ));
    }
    if !increasing(theta) || !increasing(phi) {
        return Err(Error::input("pattern grids must be strictly increasing"));
    }
    if theta[0] < 0.0 || theta[theta.len() - 1] > PI + 1e-12 {
        return Err(Error::input("theta grid must lie within [0, pi]"));
    }
    if phi[0] < 0.0 || phi[phi.len() - 1] >= 2.0 * PI {
        return Err(Error::input("phi grid must lie within [0, 2pi)"));
    }
    Ok(())
}

/// Samples element pattern × array factor on the grid. Rows are computed in
/// parallel; each cell depends only on its own direction, so the result is
/// identical for any thread count.
pub fn evaluate_pattern(
    layout: &ArrayLayout,
    model: &ElementModel,
    theta: &[f64],
    phi: &[f64],
) -> Result<RadiationPattern> {
    check_grid(theta, phi)?;
    let u: Vec<f64> = theta
        .par_iter()
        .flat_map_iter(|&t| {
            phi.iter().map(move |&p| {
                let dir = direction(t, p);
                layout.array_factor(dir) * model.intensity(dir)
            })
        })
        .collect();
    RadiationPattern::from_samples(theta.to_vec(), phi.to_vec(), u, layout.frequency_hz)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Directivity {
    pub linear: f64,
    pub dbi: f64,
    pub warnings: Vec<String>,
}

/// Weights w such that Σ wᵢ·u(θᵢ) = ∫ u(θ) sin θ dθ exactly for u linear
/// between samples.
fn theta_weights(theta: &[f64]) -> Vec<f64> {
    let mut w = vec![0.0; theta.len()];
    for i in 0..theta.len() - 1 {
        let (a, b) = (theta[i], theta[i + 1]);
        let h = b - a;
        let (sa, ca) = a.sin_cos();
        let (sb, cb) = b.sin_cos();
        w[i] += (h * ca + sa - sb) / h;
        w[i + 1] += (sb - sa - h * cb) / h;
    }
    w
}

/// Periodic trapezoid weights; the last sample closes onto the first at 2π.
fn phi_weights(phi: &[f64]) -> Vec<f64> {
    let n = phi.len();
    if n == 1 {
        return vec![2.0 * PI];
    }
    (0..n)
        .map(|i| {
            let next = if i + 1 < n {
                phi[i + 1]
            } else {
                phi[0] + 2.0 * PI
            };
            let prev = if i > 0 {
                phi[i - 1]
            } else {
                phi[n - 1] - 2.0 * PI
            };
            0.5 * (next - prev)
        })
        .collect()
}

/// 4π·u_max / ∬ u sin θ dθ dφ, summed serially in θ-major order.
pub fn directivity(pattern: &RadiationPattern) -> Result<Directivity> {
    let u_max = pattern.max_intensity();
    if u_max <= 0.0 {
        return Err(Error::input(
            "directivity of an all-zero pattern is undefined",
        ));
    }
    let wt = theta_weights(&pattern.theta);
    let wp = phi_weights(&pattern.phi);
    let mut total = 0.0;
    for (i, wti) in wt.iter().enumerate() {
        let mut row = 0.0;
        for (j, wpj) in wp.iter().enumerate() {
            row += wpj * pattern.at(i, j);
        }
        total += wti * row;
    }
    let linear = 4.0 * PI * u_max / total;
    let mut warnings = Vec::new();
    if let Some(w) = resolution_warning(pattern, u_max) {
        warnings.push(w);
    }
    Ok(Directivity {
        linear,
        dbi: 10.0 * linear.log10(),
        warnings,
    })
}

fn resolution_warning(pattern: &RadiationPattern, u_max: f64) -> Option<String> {
    let idx = pattern.u.iter().position(|&v| v == u_max)?;
    let (nt, np) = (pattern.theta.len(), pattern.phi.len());
    let (i, j) = (idx / np, idx % np);
    let mut neighbours = Vec::new();
    if i > 0 {
        neighbours.push(pattern.at(i - 1, j));
    }
    if i + 1 < nt {
        neighbours.push(pattern.at(i + 1, j));
    }
    if np > 1 {
        neighbours.push(pattern.at(i, (j + 1) % np));
        neighbours.push(pattern.at(i, (j + np - 1) % np));
    }
    let worst = neighbours
        .iter()
        .map(|v| (u_max - v) / u_max)
        .fold(0.0, f64::max);
    (worst >= 0.1).then(|| {
        format!(
            "grid too coarse at the peak: adjacent samples differ by {:.1}%",
            100.0 * worst
        )
    })
}

pub fn gain(directivity: f64, efficiency: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&efficiency) {
        return Err(Error::input(format!(
            "efficiency must be within [0, 1], got {efficiency}"
        )));
    }
    Ok(efficiency * directivity)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LobeClass {
    Main,
    Minor,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Lobe {
    /// Polar angle within the cut, in [0, 2π).
    pub angle_rad: f64,
    pub level: f64,
    pub level_db: f64,
    pub class: LobeClass,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LobeReport {
    pub lobes: Vec<Lobe>,
    /// The cut is uniform, so it has no distinguishable lobe.
    pub degenerate: bool,
}

impl LobeReport {
    pub fn main_count(&self) -> usize {
        self.lobes
            .iter()
            .filter(|l| l.class == LobeClass::Main)
            .count()
    }
}

/// A full polar cut through the pattern: θ ∈ [0, π] along `phi_cut`
/// followed by the opposite half-plane (φ_cut + π) mapped to 2π − θ.
#[derive(Debug, Clone, PartialEq)]
pub struct PolarCut {
    pub angle_rad: Vec<f64>,
    pub u: Vec<f64>,
}

pub fn polar_cut(pattern: &RadiationPattern, phi_cut: f64) -> Result<PolarCut> {
    let front = nearest_phi(pattern, phi_cut)?;
    let back = nearest_phi(pattern, phi_cut + PI)?;
    let theta = &pattern.theta;
    let mut angle = Vec::with_capacity(2 * theta.len());
    let mut u = Vec::with_capacity(2 * theta.len());
    for (i, &t) in theta.iter().enumerate() {
        angle.push(t);
        u.push(pattern.at(i, front));
    }
    for (i, &t) in theta.iter().enumerate().rev() {
        // θ = 0 and θ = π are shared by both half-planes.
        if t <= 1e-12 || (PI - t).abs() <= 1e-12 {
            continue;
        }
        angle.push(2.0 * PI - t);
        u.push(pattern.at(i, back));
    }
    Ok(PolarCut {
        angle_rad: angle,
        u,
    })
}

fn nearest_phi(pattern: &RadiationPattern, phi: f64) -> Result<usize> {
    let target = phi.rem_euclid(2.0 * PI);
    let circ = |a: f64| {
        let d = (a - target).abs();
        d.min(2.0 * PI - d)
    };
    let (idx, dist) = pattern
        .phi
        .iter()
        .enumerate()
        .map(|(i, &p)| (i, circ(p)))
        .fold(
            (0, f64::INFINITY),
            |best, cur| if cur.1 < best.1 { cur } else { best },
        );
    let spacing = if pattern.phi.len() > 1 {
        2.0 * PI / pattern.phi.len() as f64
    } else {
        2.0 * PI
    };
    if dist > 0.5 * spacing + 1e-9 {
        return Err(Error::input(format!(
            "phi cut {:.3} deg not covered by the pattern grid",
            phi.to_degrees()
        )));
    }
    Ok(idx)
}

/// Local maxima of the polar cut at `phi_cut`, with equal-valued plateaus
/// merged into one lobe at the plateau centre.
pub fn find_lobes(
    pattern: &RadiationPattern,
    phi_cut: f64,
    main_threshold_db: f64,
) -> Result<LobeReport> {
    let cut = polar_cut(pattern, phi_cut)?;
    let n = cut.u.len();
    let peak = cut.u.iter().copied().fold(0.0, f64::max);
    let same = |a: f64, b: f64| (a - b).abs() <= 1e-12 * peak.max(f64::MIN_POSITIVE);

    // Collapse the circular sequence into runs of equal values.
    let Some(start) = (0..n).find(|&i| !same(cut.u[i], cut.u[(i + n - 1) % n])) else {
        let level_db = if peak > 0.0 { 0.0 } else { f64::NEG_INFINITY };
        return Ok(LobeReport {
            lobes: vec![Lobe {
                angle_rad: 0.0,
                level: peak,
                level_db,
                class: LobeClass::Main,
            }],
            degenerate: true,
        });
    };
    let mut runs: Vec<(usize, usize, f64)> = Vec::new(); // (first index, length, value)
    let mut k = 0;
    while k < n {
        let i0 = (start + k) % n;
        let v = cut.u[i0];
        let mut len = 1;
        while k + len < n && same(cut.u[(start + k + len) % n], v) {
            len += 1;
        }
        runs.push((i0, len, v));
        k += len;
    }

    let m = runs.len();
    let mut lobes = Vec::new();
    for r in 0..m {
        let (i0, len, v) = runs[r];
        let prev = runs[(r + m - 1) % m].2;
        let next = runs[(r + 1) % m].2;
        if v > prev && v > next && v > 0.0 {
            let a0 = cut.angle_rad[i0];
            let a1 = cut.angle_rad[(i0 + len - 1) % n];
            let span = (a1 - a0).rem_euclid(2.0 * PI);
            let angle_rad = (a0 + 0.5 * span).rem_euclid(2.0 * PI);
            let level_db = 10.0 * (v / peak).log10();
            lobes.push(Lobe {
                angle_rad,
                level: v,
                level_db,
                class: if level_db >= main_threshold_db {
                    LobeClass::Main
                } else {
                    LobeClass::Minor
                },
            });
        }
    }
    lobes.sort_by(|a, b| a.angle_rad.total_cmp(&b.angle_rad));
    Ok(LobeReport {
        lobes,
        degenerate: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    const F: f64 = 1e9;

    fn grid() -> (Vec<f64>, Vec<f64>) {
        uniform_grid(1.0).unwrap()
    }

    fn pair(spacing_wavelengths: f64) -> ArrayLayout {
        let lambda = SPEED_OF_LIGHT_M_PER_S / F;
        ArrayLayout::new(
            vec![[0.0, 0.0, 0.0], [0.0, 0.0, spacing_wavelengths * lambda]],
            vec![Complex64::new(1.0, 0.0); 2],
            F,
        )
        .unwrap()
    }

    #[test]
    fn isotropic_is_uniform() {
        let (t, p) = grid();
        let pat = evaluate_pattern(
            &ArrayLayout::single(F).unwrap(),
            &ElementModel::isotropic(),
            &t,
            &p,
        )
        .unwrap();
        assert!(pat.intensity().iter().all(|&u| (u - 1.0).abs() < 1e-15));
        let d = directivity(&pat).unwrap();
        assert!((d.linear - 1.0).abs() < 1e-12, "{}", d.linear);
        assert!(d.warnings.is_empty());
    }

    #[test]
    fn dipole_is_sin_squared() {
        let (t, p) = grid();
        let model = ElementModel::dipole([0.0, 0.0, 2.0]).unwrap();
        let pat = evaluate_pattern(&ArrayLayout::single(F).unwrap(), &model, &t, &p).unwrap();
        for (i, th) in t.iter().enumerate() {
            assert_relative_eq!(pat.at(i, 17), th.sin().powi(2), epsilon = 1e-14);
        }
        let d = directivity(&pat).unwrap();
        assert!((d.linear - 1.5).abs() / 1.5 < 5e-3, "{}", d.linear);
    }

    #[test]
    fn half_wave_pair_closed_form() {
        let (t, p) = grid();
        let pat = evaluate_pattern(&pair(0.5), &ElementModel::isotropic(), &t, &p).unwrap();
        for (i, th) in t.iter().enumerate() {
            let want = 4.0 * (0.5 * PI * th.cos()).cos().powi(2);
            assert!((pat.at(i, 0) - want).abs() < 1e-12);
        }
        let d = directivity(&pat).unwrap();
        assert!((d.linear - 2.0).abs() / 2.0 < 0.01, "{}", d.linear);
    }

    #[test]
    fn all_zero_pattern_rejected() {
        let (t, p) = uniform_grid(10.0).unwrap();
        let pat =
            RadiationPattern::from_samples(t.clone(), p.clone(), vec![0.0; t.len() * p.len()], F)
                .unwrap();
        assert!(directivity(&pat).is_err());
    }

    #[test]
    fn coarse_grid_warns() {
        let lambda = SPEED_OF_LIGHT_M_PER_S / F;
        let positions = (0..16)
            .map(|i| [0.0, 0.0, 0.5 * lambda * i as f64])
            .collect();
        let layout = ArrayLayout::new(positions, vec![Complex64::new(1.0, 0.0); 16], F).unwrap();
        let (t, p) = uniform_grid(10.0).unwrap();
        let pat = evaluate_pattern(&layout, &ElementModel::isotropic(), &t, &p).unwrap();
        assert!(!directivity(&pat).unwrap().warnings.is_empty());
    }

    #[test]
    fn gain_values() {
        assert_relative_eq!(gain(1.5, 0.99).unwrap(), 1.485, epsilon = 1e-12);
        assert_eq!(gain(2.5, 1.0).unwrap(), 2.5);
        assert_relative_eq!(gain(2.0, 0.97).unwrap(), 1.94, epsilon = 1e-12);
        assert!(gain(2.0, 1.01).is_err());
        assert!(gain(2.0, -0.1).is_err());
    }

    #[test]
    fn dipole_lobes() {
        let (t, p) = grid();
        let model = ElementModel::dipole([0.0, 0.0, 1.0]).unwrap();
        let pat = evaluate_pattern(&ArrayLayout::single(F).unwrap(), &model, &t, &p).unwrap();
        let rep = find_lobes(&pat, 0.0, -10.0).unwrap();
        let angles: Vec<f64> = rep
            .lobes
            .iter()
            .map(|l| l.angle_rad.to_degrees().round())
            .collect();
        assert_eq!(angles, vec![90.0, 270.0]);
        assert_eq!(rep.main_count(), 2);
    }

    #[test]
    fn full_wave_pair_has_four_main_lobes() {
        let (t, p) = grid();
        let pat = evaluate_pattern(&pair(1.0), &ElementModel::isotropic(), &t, &p).unwrap();
        let rep = find_lobes(&pat, 0.0, -10.0).unwrap();
        let angles: Vec<f64> = rep
            .lobes
            .iter()
            .map(|l| l.angle_rad.to_degrees().round())
            .collect();
        assert_eq!(angles, vec![0.0, 90.0, 180.0, 270.0]);
        assert_eq!(rep.main_count(), 4);
        assert!(!rep.degenerate);
    }

    #[test]
    fn isotropic_cut_is_degenerate() {
        let (t, p) = grid();
        let pat = evaluate_pattern(
            &ArrayLayout::single(F).unwrap(),
            &ElementModel::isotropic(),
            &t,
            &p,
        )
        .unwrap();
        let rep = find_lobes(&pat, 0.0, -10.0).unwrap();
        assert!(rep.degenerate);
        assert_eq!(rep.lobes.len(), 1);
    }

    #[test]
    fn minor_lobes_classified() {
        // Four-element half-wave broadside array: sidelobes near -11 dB.
        let lambda = SPEED_OF_LIGHT_M_PER_S / F;
        let positions = (0..4)
            .map(|i| [0.0, 0.0, 0.5 * lambda * i as f64])
            .collect();
        let layout = ArrayLayout::new(positions, vec![Complex64::new(1.0, 0.0); 4], F).unwrap();
        let (t, p) = grid();
        let pat = evaluate_pattern(&layout, &ElementModel::isotropic(), &t, &p).unwrap();
        let rep = find_lobes(&pat, 0.0, -10.0).unwrap();
        assert_eq!(rep.main_count(), 2);
        assert!(rep.lobes.iter().any(|l| l.class == LobeClass::Minor));
    }

    #[test]
    fn layout_validation() {
        assert!(ArrayLayout::new(vec![], vec![], F).is_err());
        assert!(ArrayLayout::new(vec![[0.0; 3]], vec![Complex64::new(0.0, 0.0)], F).is_err());
        assert!(ArrayLayout::new(vec![[0.0; 3]], vec![Complex64::new(1.0, 0.0)], 0.0).is_err());
        assert!(ElementModel::dipole([0.0; 3]).is_err());
    }

    #[test]
    fn footprint_area() {
        assert_relative_eq!(Footprint::default().area_mm2(), 0.3969, epsilon = 1e-15);
    }
}
