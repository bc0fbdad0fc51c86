//! Minimal SVG charts for sweep and breakdown results.

use std::fmt::Write;

const W: f64 = 640.0;
const H: f64 = 400.0;
const MARGIN: f64 = 60.0;
const COLORS: [&str; 7] = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2",
];

fn header(title: &str) -> String {
    let mut s = String::new();
    let _ = write!(
        s,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{W}\" height=\"{H}\" \
         font-family=\"sans-serif\" font-size=\"12\">\n\
         <rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n\
         <text x=\"{}\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">{}</text>\n\
         <line x1=\"{MARGIN}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"black\"/>\n\
         <line x1=\"{MARGIN}\" y1=\"{MARGIN}\" x2=\"{MARGIN}\" y2=\"{}\" stroke=\"black\"/>\n",
        W / 2.0,
        escape(title),
        H - MARGIN,
        W - MARGIN,
        H - MARGIN,
        H - MARGIN,
    );
    s
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn y_axis(s: &mut String, y_max: f64, label: &str) {
    for k in 0..=4 {
        let v = y_max * k as f64 / 4.0;
        let y = H - MARGIN - (H - 2.0 * MARGIN) * k as f64 / 4.0;
        let _ = writeln!(
            s,
            "<text x=\"{}\" y=\"{y:.1}\" text-anchor=\"end\">{v:.3}</text>",
            MARGIN - 4.0
        );
    }
    let _ = writeln!(
        s,
        "<text x=\"14\" y=\"{}\" transform=\"rotate(-90 14 {})\" text-anchor=\"middle\">{}</text>",
        H / 2.0,
        H / 2.0,
        escape(label)
    );
}

/// One polyline per series of `(x, y)` points.
pub fn line_chart(title: &str, x_label: &str, y_label: &str, series: &[(String, Vec<(f64, f64)>)]) -> String {
    let mut s = header(title);
    let pts = series.iter().flat_map(|(_, p)| p.iter());
    let (mut x_min, mut x_max, mut y_max) = (f64::INFINITY, f64::NEG_INFINITY, 0.0f64);
    for &(x, y) in pts.clone() {
        x_min = x_min.min(x);
        x_max = x_max.max(x);
        y_max = y_max.max(y);
    }
    if !x_min.is_finite() {
        s.push_str("</svg>\n");
        return s;
    }
    let x_span = if x_max > x_min { x_max - x_min } else { 1.0 };
    let y_max = if y_max > 0.0 { y_max } else { 1.0 };
    let px = |x: f64| MARGIN + (W - 2.0 * MARGIN) * (x - x_min) / x_span;
    let py = |y: f64| H - MARGIN - (H - 2.0 * MARGIN) * y / y_max;
    y_axis(&mut s, y_max, y_label);
    let mut xs: Vec<f64> = pts.map(|p| p.0).collect();
    xs.sort_by(f64::total_cmp);
    xs.dedup();
    for x in xs {
        let _ = writeln!(
            s,
            "<text x=\"{:.1}\" y=\"{}\" text-anchor=\"middle\">{x}</text>",
            px(x),
            H - MARGIN + 16.0
        );
    }
    let _ = writeln!(
        s,
        "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{}</text>",
        W / 2.0,
        H - 16.0,
        escape(x_label)
    );
    for (i, (name, points)) in series.iter().enumerate() {
        let color = COLORS[i % COLORS.len()];
        let path: Vec<String> = points
            .iter()
            .map(|&(x, y)| format!("{:.1},{:.1}", px(x), py(y)))
            .collect();
        let _ = writeln!(
            s,
            "<polyline fill=\"none\" stroke=\"{color}\" stroke-width=\"2\" points=\"{}\"/>",
            path.join(" ")
        );
        let ly = MARGIN + 16.0 * i as f64;
        let _ = writeln!(
            s,
            "<text x=\"{}\" y=\"{ly}\" fill=\"{color}\">{}</text>",
            W - MARGIN + 4.0,
            escape(name)
        );
    }
    s.push_str("</svg>\n");
    s
}

/// Stacked bars: one bar per label, one segment per component.
pub fn stacked_bar_chart(
    title: &str,
    y_label: &str,
    components: &[&str],
    bars: &[(String, Vec<f64>)],
) -> String {
    let mut s = header(title);
    let y_max = bars
        .iter()
        .map(|(_, v)| v.iter().sum::<f64>())
        .fold(0.0, f64::max);
    let y_max = if y_max > 0.0 { y_max } else { 1.0 };
    y_axis(&mut s, y_max, y_label);
    let slot = (W - 2.0 * MARGIN) / bars.len().max(1) as f64;
    let scale = (H - 2.0 * MARGIN) / y_max;
    for (i, (label, values)) in bars.iter().enumerate() {
        let x = MARGIN + slot * i as f64 + slot * 0.2;
        let mut base = H - MARGIN;
        for (k, v) in values.iter().enumerate() {
            let h = v.max(0.0) * scale;
            base -= h;
            let _ = writeln!(
                s,
                "<rect x=\"{x:.1}\" y=\"{base:.1}\" width=\"{:.1}\" height=\"{h:.1}\" fill=\"{}\"/>",
                slot * 0.6,
                COLORS[k % COLORS.len()]
            );
        }
        let _ = writeln!(
            s,
            "<text x=\"{:.1}\" y=\"{}\" text-anchor=\"middle\">{}</text>",
            x + slot * 0.3,
            H - MARGIN + 16.0,
            escape(label)
        );
    }
    for (k, name) in components.iter().enumerate() {
        let _ = writeln!(
            s,
            "<text x=\"{}\" y=\"{}\" fill=\"{}\">{}</text>",
            W - MARGIN - 150.0,
            MARGIN + 14.0 * k as f64,
            COLORS[k % COLORS.len()],
            escape(name)
        );
    }
    s.push_str("</svg>\n");
    s
}
