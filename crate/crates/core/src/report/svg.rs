//! Minimal SVG line charts; no external renderer.

use std::fmt::Write as _;

use crate::simulate::TimeSeries;

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 420.0;
const MARGIN: (f64, f64, f64, f64) = (70.0, 20.0, 40.0, 50.0); // left, right, top, bottom
const MAX_POINTS: usize = 2000;
const PALETTE: [&str; 4] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd"];

#[derive(Debug, Clone)]
pub struct Curve<'a> {
    pub label: &'a str,
    pub x: &'a [f64],
    pub y: &'a [f64],
}

fn nice_step(span: f64) -> f64 {
    let raw = span / 6.0;
    let mag = 10f64.powf(raw.log10().floor());
    let f = raw / mag;
    let m = if f < 1.5 {
        1.0
    } else if f < 3.5 {
        2.0
    } else if f < 7.5 {
        5.0
    } else {
        10.0
    };
    m * mag
}

fn range(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values
        .filter(|v| v.is_finite())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
    if !lo.is_finite() {
        return (0.0, 1.0);
    }
    if hi - lo <= 1e-12 * lo.abs().max(1.0) {
        let pad = 0.5 * lo.abs().max(1.0) * 1e-3;
        return (lo - pad, hi + pad);
    }
    (lo, hi)
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Renders curves against a shared x axis.
pub fn line_chart(title: &str, x_label: &str, y_label: &str, curves: &[Curve]) -> String {
    let (l, r, t, b) = MARGIN;
    let (pw, ph) = (WIDTH - l - r, HEIGHT - t - b);
    let (x0, x1) = range(curves.iter().flat_map(|c| c.x.iter().copied()));
    let (y0, y1) = range(curves.iter().flat_map(|c| c.y.iter().copied()));
    let sx = |x: f64| l + (x - x0) / (x1 - x0) * pw;
    let sy = |y: f64| t + (1.0 - (y - y0) / (y1 - y0)) * ph;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{}" y="24" text-anchor="middle" font-size="15">{}</text>"#,
        WIDTH / 2.0,
        escape(title)
    );
    let _ = writeln!(s, r##"<rect x="{l}" y="{t}" width="{pw}" height="{ph}" fill="none" stroke="#444"/>"##);

    for (lo, hi, horizontal) in [(x0, x1, true), (y0, y1, false)] {
        let step = nice_step(hi - lo);
        let mut v = (lo / step).ceil() * step;
        while v <= hi + 1e-9 * step {
            let label = format!("{}", (v / step).round() * step);
            let label = if label.len() > 10 { format!("{v:.3e}") } else { label };
            if horizontal {
                let x = sx(v);
                let _ = writeln!(
                    s,
                    r##"<line x1="{x:.2}" y1="{t}" x2="{x:.2}" y2="{:.2}" stroke="#ddd"/><text x="{x:.2}" y="{:.2}" text-anchor="middle">{label}</text>"##,
                    t + ph,
                    t + ph + 16.0
                );
            } else {
                let y = sy(v);
                let _ = writeln!(
                    s,
                    r##"<line x1="{l}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="#ddd"/><text x="{:.2}" y="{:.2}" text-anchor="end">{label}</text>"##,
                    l + pw,
                    l - 6.0,
                    y + 4.0
                );
            }
            v += step;
        }
    }
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
        l + pw / 2.0,
        HEIGHT - 10.0,
        escape(x_label)
    );
    let _ = writeln!(
        s,
        r#"<text x="16" y="{:.2}" text-anchor="middle" transform="rotate(-90 16 {:.2})">{}</text>"#,
        t + ph / 2.0,
        t + ph / 2.0,
        escape(y_label)
    );

    for (i, c) in curves.iter().enumerate() {
        let colour = PALETTE[i % PALETTE.len()];
        let n = c.x.len().min(c.y.len());
        let stride = n.div_ceil(MAX_POINTS).max(1);
        let mut pts = String::new();
        for k in (0..n).step_by(stride).chain((n > 0 && (n - 1) % stride != 0).then_some(n - 1)) {
            if c.x[k].is_finite() && c.y[k].is_finite() {
                let _ = write!(pts, "{:.2},{:.2} ", sx(c.x[k]), sy(c.y[k]));
            }
        }
        let _ = writeln!(
            s,
            r#"<polyline fill="none" stroke="{colour}" stroke-width="1.5" points="{}"/>"#,
            pts.trim_end()
        );
        let ly = t + 14.0 + 16.0 * i as f64;
        let _ = writeln!(
            s,
            r#"<line x1="{:.2}" y1="{ly:.2}" x2="{:.2}" y2="{ly:.2}" stroke="{colour}" stroke-width="2"/><text x="{:.2}" y="{:.2}">{}</text>"#,
            l + pw - 150.0,
            l + pw - 128.0,
            l + pw - 122.0,
            ly + 4.0,
            escape(c.label)
        );
    }
    s.push_str("</svg>\n");
    s
}

/// The three standard charts: disturbance, densities and flows, keyed by
/// file name.
pub fn standard_charts(series: &TimeSeries) -> Vec<(&'static str, String)> {
    let hours: Vec<f64> = series.rows.iter().map(|r| r.t / 3600.0).collect();
    let col = |f: fn(&crate::simulate::TimeSeriesRow) -> f64| -> Vec<f64> {
        series.rows.iter().map(f).collect()
    };
    let s = col(|r| r.s);
    let d = col(|r| r.s + r.eps);
    let (ri, rm, ro) = (col(|r| r.rho_in), col(|r| r.rho_mid), col(|r| r.rho_out));
    let (fi, fm, fo) = (col(|r| r.phi_in), col(|r| r.phi_mid), col(|r| r.phi_out));
    vec![
        (
            "disturbance.svg",
            line_chart(
                "Outlet withdrawal fluctuation",
                "t [h]",
                "kg/(m² s)",
                &[
                    Curve { label: "s = CX", x: &hours, y: &s },
                    Curve { label: "s + ε", x: &hours, y: &d },
                ],
            ),
        ),
        (
            "density.svg",
            line_chart(
                "Density",
                "t [h]",
                "ρ [kg/m³]",
                &[
                    Curve { label: "inlet", x: &hours, y: &ri },
                    Curve { label: "middle", x: &hours, y: &rm },
                    Curve { label: "outlet", x: &hours, y: &ro },
                ],
            ),
        ),
        (
            "flow.svg",
            line_chart(
                "Mass flux",
                "t [h]",
                "φ [kg/(m² s)]",
                &[
                    Curve { label: "inlet", x: &hours, y: &fi },
                    Curve { label: "middle", x: &hours, y: &fm },
                    Curve { label: "outlet", x: &hours, y: &fo },
                ],
            ),
        ),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chart_is_well_formed() {
        let x: Vec<f64> = (0..5000).map(|k| k as f64).collect();
        let y: Vec<f64> = x.iter().map(|v| (v * 0.01).sin()).collect();
        let svg = line_chart("a < b", "x", "y", &[Curve { label: "sin", x: &x, y: &y }]);
        assert!(svg.starts_with("<svg") && svg.ends_with("</svg>\n"));
        assert!(svg.contains("a &lt; b"));
        assert_eq!(svg.matches("<polyline").count(), 1);
        let pts = svg.split("points=\"").nth(1).unwrap().split('"').next().unwrap();
        assert!(pts.split(' ').count() <= MAX_POINTS + 1);
    }

    #[test]
    fn degenerate_inputs_do_not_panic() {
        let svg = line_chart("flat", "x", "y", &[Curve { label: "c", x: &[1.0, 1.0], y: &[2.0, 2.0] }]);
        assert!(!svg.contains("NaN"));
        let svg = line_chart("empty", "x", "y", &[]);
        assert!(svg.contains("</svg>"));
        let svg = line_chart("nan", "x", "y", &[Curve { label: "c", x: &[0.0, 1.0], y: &[f64::NAN, 1.0] }]);
        assert!(!svg.contains("NaN"));
    }
}
