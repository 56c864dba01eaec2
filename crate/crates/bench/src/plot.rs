//! Minimal SVG output: estimated-vs-true scatter and per-series line plots.

use std::fmt::Write as _;

const W: f64 = 480.0;
const H: f64 = 360.0;
const MARGIN: f64 = 48.0;
const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

pub struct Series {
    pub name: String,
    pub points: Vec<(f64, f64)>,
}

struct Frame {
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
    log_y: bool,
}

impl Frame {
    fn fit<'a>(points: impl Iterator<Item = &'a (f64, f64)>, log_y: bool) -> Frame {
        let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
        for &(x, y) in points {
            let y = if log_y { floor_log(y) } else { y };
            if x.is_finite() && y.is_finite() {
                x0 = x0.min(x);
                x1 = x1.max(x);
                y0 = y0.min(y);
                y1 = y1.max(y);
            }
        }
        if !x0.is_finite() {
            (x0, x1, y0, y1) = (0.0, 1.0, 0.0, 1.0);
        }
        if x1 - x0 < 1e-12 {
            x1 = x0 + 1.0;
        }
        if y1 - y0 < 1e-12 {
            y1 = y0 + 1.0;
        }
        Frame { x0, x1, y0, y1, log_y }
    }

    fn px(&self, x: f64) -> f64 {
        MARGIN + (x - self.x0) / (self.x1 - self.x0) * (W - 2.0 * MARGIN)
    }

    fn py(&self, y: f64) -> f64 {
        let y = if self.log_y { floor_log(y) } else { y };
        H - MARGIN - (y - self.y0) / (self.y1 - self.y0) * (H - 2.0 * MARGIN)
    }
}

fn floor_log(y: f64) -> f64 {
    y.max(1e-300).log10()
}

fn open(out: &mut String, title: &str, frame: &Frame, x_label: &str, y_label: &str) {
    let _ = write!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" font-family="sans-serif" font-size="11">
<rect width="100%" height="100%" fill="white"/>
<text x="{}" y="18" text-anchor="middle" font-size="13">{}</text>
<line x1="{MARGIN}" y1="{b}" x2="{r}" y2="{b}" stroke="black"/>
<line x1="{MARGIN}" y1="{MARGIN}" x2="{MARGIN}" y2="{b}" stroke="black"/>
<text x="{}" y="{}" text-anchor="middle">{}</text>
<text x="12" y="{}" text-anchor="middle" transform="rotate(-90 12 {})">{}</text>
"#,
        W / 2.0,
        escape(title),
        W / 2.0,
        H - 10.0,
        escape(x_label),
        H / 2.0,
        H / 2.0,
        escape(y_label),
        b = H - MARGIN,
        r = W - MARGIN,
    );
    let y_fmt = |v: f64| if frame.log_y { format!("1e{v:.0}") } else { format!("{v:.3}") };
    let _ = writeln!(out, r#"<text x="{MARGIN}" y="{}" text-anchor="middle">{:.3}</text>"#, H - MARGIN + 14.0, frame.x0);
    let _ = writeln!(out, r#"<text x="{}" y="{}" text-anchor="middle">{:.3}</text>"#, W - MARGIN, H - MARGIN + 14.0, frame.x1);
    let _ = writeln!(out, r#"<text x="{}" y="{}" text-anchor="end">{}</text>"#, MARGIN - 4.0, H - MARGIN, y_fmt(frame.y0));
    let _ = writeln!(out, r#"<text x="{}" y="{}" text-anchor="end">{}</text>"#, MARGIN - 4.0, MARGIN + 4.0, y_fmt(frame.y1));
}

fn legend(out: &mut String, names: &[&str]) {
    for (k, name) in names.iter().enumerate() {
        let y = MARGIN + 14.0 * k as f64;
        let c = COLORS[k % COLORS.len()];
        let _ = writeln!(out, r#"<rect x="{}" y="{}" width="8" height="8" fill="{c}"/>"#, W - MARGIN - 110.0, y - 8.0);
        let _ = writeln!(out, r#"<text x="{}" y="{y}">{}</text>"#, W - MARGIN - 98.0, escape(name));
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

/// Estimated against true attribution with the identity line drawn in grey.
pub fn scatter_svg(title: &str, series: &[Series]) -> String {
    let all: Vec<(f64, f64)> = series.iter().flat_map(|s| s.points.iter().flat_map(|&(x, y)| [(x, y), (y, x)])).collect();
    let frame = Frame::fit(all.iter(), false);
    let mut out = String::new();
    open(&mut out, title, &frame, "true SHAP", "estimated SHAP");
    let lo = frame.x0.max(frame.y0);
    let hi = frame.x1.min(frame.y1);
    let _ = writeln!(
        out,
        r##"<line x1="{}" y1="{}" x2="{}" y2="{}" stroke="#999" stroke-dasharray="4 3"/>"##,
        frame.px(lo),
        frame.py(lo),
        frame.px(hi),
        frame.py(hi)
    );
    for (k, s) in series.iter().enumerate() {
        let c = COLORS[k % COLORS.len()];
        for &(x, y) in &s.points {
            let _ = writeln!(out, r#"<circle cx="{:.2}" cy="{:.2}" r="1.6" fill="{c}" fill-opacity="0.5"/>"#, frame.px(x), frame.py(y));
        }
    }
    legend(&mut out, &series.iter().map(|s| s.name.as_str()).collect::<Vec<_>>());
    out.push_str("</svg>\n");
    out
}

/// One polyline per series; `log_y` plots `log10(y)` with zeros clamped.
pub fn line_svg(title: &str, x_label: &str, y_label: &str, series: &[Series], log_y: bool) -> String {
    let frame = Frame::fit(series.iter().flat_map(|s| s.points.iter()), log_y);
    let mut out = String::new();
    open(&mut out, title, &frame, x_label, y_label);
    for (k, s) in series.iter().enumerate() {
        let c = COLORS[k % COLORS.len()];
        let pts: Vec<String> = s.points.iter().map(|&(x, y)| format!("{:.2},{:.2}", frame.px(x), frame.py(y))).collect();
        let _ = writeln!(out, r#"<polyline points="{}" fill="none" stroke="{c}" stroke-width="1.5"/>"#, pts.join(" "));
        for &(x, y) in &s.points {
            let _ = writeln!(out, r#"<circle cx="{:.2}" cy="{:.2}" r="2.5" fill="{c}"/>"#, frame.px(x), frame.py(y));
        }
    }
    legend(&mut out, &series.iter().map(|s| s.name.as_str()).collect::<Vec<_>>());
    out.push_str("</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scatter_is_well_formed() {
        let s = vec![Series { name: "a<b".into(), points: vec![(0.0, 0.1), (1.0, 0.9), (-1.0, -1.2)] }];
        let svg = scatter_svg("t", &s);
        assert!(svg.starts_with("<svg") && svg.ends_with("</svg>\n"));
        assert_eq!(svg.matches("<circle").count(), 3);
        assert!(svg.contains("a&lt;b"));
        assert!(!svg.contains("NaN"));
    }

    #[test]
    fn line_handles_zero_on_log_axis() {
        let s = vec![
            Series { name: "mean".into(), points: vec![(2.0, 0.3), (4.0, 1e-3), (6.0, 0.0)] },
            Series { name: "p975".into(), points: vec![(2.0, 0.5), (4.0, 0.1), (6.0, 0.0)] },
        ];
        let svg = line_svg("conv", "order", "metric", &s, true);
        assert_eq!(svg.matches("<polyline").count(), 2);
        assert!(!svg.contains("NaN") && !svg.contains("inf"));
    }

    #[test]
    fn empty_series() {
        let svg = line_svg("e", "x", "y", &[], false);
        assert!(svg.ends_with("</svg>\n"));
    }
}
