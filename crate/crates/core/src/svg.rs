//! Minimal static SVG plots of the emitted CSV series.

use std::fmt::Write;

const W: f64 = 640.0;
const H: f64 = 400.0;
const MARGIN: f64 = 50.0;
const COLORS: [&str; 4] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd"];

pub struct Series<'a> {
    pub label: &'a str,
    pub points: Vec<(f64, f64)>,
}

fn bounds(series: &[Series]) -> Option<(f64, f64, f64, f64)> {
    let pts = series
        .iter()
        .flat_map(|s| s.points.iter())
        .filter(|(x, y)| x.is_finite() && y.is_finite());
    let mut b: Option<(f64, f64, f64, f64)> = None;
    for &(x, y) in pts {
        b = Some(match b {
            None => (x, x, y, y),
            Some((x0, x1, y0, y1)) => (x0.min(x), x1.max(x), y0.min(y), y1.max(y)),
        });
    }
    b.map(|(x0, x1, y0, y1)| {
        let (x0, x1) = if x1 > x0 {
            (x0, x1)
        } else {
            (x0 - 1.0, x1 + 1.0)
        };
        let (y0, y1) = if y1 > y0 {
            (y0, y1)
        } else {
            (y0 - 1.0, y1 + 1.0)
        };
        (x0, x1, y0, y1)
    })
}

/// Line chart of one or more series sharing axes.
pub fn line_plot(title: &str, x_label: &str, y_label: &str, series: &[Series]) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(
        s,
        r#"<text x="{}" y="20" text-anchor="middle">{title}</text>"#,
        W / 2.0
    );
    let Some((x0, x1, y0, y1)) = bounds(series) else {
        s.push_str("</svg>\n");
        return s;
    };
    let px = |x: f64| MARGIN + (x - x0) / (x1 - x0) * (W - 2.0 * MARGIN);
    let py = |y: f64| H - MARGIN - (y - y0) / (y1 - y0) * (H - 2.0 * MARGIN);
    let _ = writeln!(
        s,
        r#"<rect x="{MARGIN}" y="{MARGIN}" width="{}" height="{}" fill="none" stroke="black"/>"#,
        W - 2.0 * MARGIN,
        H - 2.0 * MARGIN
    );
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" text-anchor="middle">{x_label}</text>"#,
        W / 2.0,
        H - 10.0
    );
    let _ = writeln!(
        s,
        r#"<text x="15" y="{}" transform="rotate(-90 15 {})" text-anchor="middle">{y_label}</text>"#,
        H / 2.0,
        H / 2.0
    );
    for (v, anchor_y) in [(y0, py(y0)), (y1, py(y1))] {
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{anchor_y}" text-anchor="end">{v:.3}</text>"#,
            MARGIN - 4.0
        );
    }
    for v in [x0, x1] {
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" text-anchor="middle">{v:.4e}</text>"#,
            px(v),
            H - MARGIN + 15.0
        );
    }
    for (k, ser) in series.iter().enumerate() {
        let color = COLORS[k % COLORS.len()];
        let mut path = String::new();
        let mut pen_down = false;
        for &(x, y) in &ser.points {
            if !(x.is_finite() && y.is_finite()) {
                pen_down = false;
                continue;
            }
            let _ = write!(
                path,
                "{}{:.2},{:.2} ",
                if pen_down { "L" } else { "M" },
                px(x),
                py(y)
            );
            pen_down = true;
        }
        let _ = writeln!(s, r#"<path d="{path}" fill="none" stroke="{color}"/>"#);
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" fill="{color}">{}</text>"#,
            W - MARGIN - 120.0,
            MARGIN + 15.0 * (k as f64 + 1.0),
            ser.label
        );
    }
    s.push_str("</svg>\n");
    s
}

/// Polar plot of a cut in dB, clipped at `floor_db`.
pub fn polar_plot(title: &str, angle_rad: &[f64], level_db: &[f64], floor_db: f64) -> String {
    let mut s = String::new();
    let (cx, cy, r) = (W / 2.0, H / 2.0 + 10.0, H / 2.0 - 40.0);
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(
        s,
        r#"<text x="{cx}" y="20" text-anchor="middle">{title}</text>"#
    );
    for frac in [0.25, 0.5, 0.75, 1.0] {
        let _ = writeln!(
            s,
            r##"<circle cx="{cx}" cy="{cy}" r="{:.2}" fill="none" stroke="#ccc"/>"##,
            r * frac
        );
    }
    let mut path = String::new();
    for (k, (&a, &db)) in angle_rad.iter().zip(level_db).enumerate() {
        let rho = ((db.max(floor_db) - floor_db) / -floor_db).clamp(0.0, 1.0) * r;
        // 0 rad points up, angles grow clockwise
        let (x, y) = (cx + rho * a.sin(), cy - rho * a.cos());
        let _ = write!(path, "{}{x:.2},{y:.2} ", if k == 0 { "M" } else { "L" });
    }
    path.push('Z');
    let _ = writeln!(
        s,
        r#"<path d="{path}" fill="none" stroke="{}"/>"#,
        COLORS[0]
    );
    let _ = writeln!(
        s,
        r#"<text x="{cx}" y="{}" text-anchor="middle">0 deg</text>"#,
        cy - r - 5.0
    );
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{cy}">{} dB floor</text>"#,
        10.0, floor_db
    );
    s.push_str("</svg>\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plots_are_well_formed() {
        let l = line_plot(
            "t",
            "x",
            "y",
            &[Series {
                label: "a",
                points: vec![(0.0, 1.0), (1.0, f64::NAN), (2.0, 3.0)],
            }],
        );
        assert!(l.starts_with("<svg") && l.trim_end().ends_with("</svg>"));
        assert_eq!(l.matches("<path").count(), 1);
        let p = polar_plot(
            "cut",
            &[0.0, 1.0, 2.0],
            &[0.0, -3.0, f64::NEG_INFINITY],
            -40.0,
        );
        assert!(p.contains("Z\""));
    }
}
