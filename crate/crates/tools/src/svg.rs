//! Self-contained SVG heatmaps and line plots.

use std::fmt::Write;

/// Cool-to-warm ramp: blue through light grey to red, `t` in `[0, 1]`.
pub fn cool_warm(t: f64) -> (u8, u8, u8) {
    const STOPS: [(f64, [f64; 3]); 3] = [(0.0, [59.0, 76.0, 192.0]), (0.5, [221.0, 221.0, 221.0]), (1.0, [180.0, 4.0, 38.0])];
    let t = if t.is_finite() { t.clamp(0.0, 1.0) } else { 0.0 };
    let (lo, hi) = if t <= 0.5 { (STOPS[0], STOPS[1]) } else { (STOPS[1], STOPS[2]) };
    let u = (t - lo.0) / (hi.0 - lo.0);
    let c = |n: usize| (lo.1[n] + (hi.1[n] - lo.1[n]) * u).round() as u8;
    (c(0), c(1), c(2))
}

fn hex((r, g, b): (u8, u8, u8)) -> String {
    format!("#{r:02x}{g:02x}{b:02x}")
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Heatmap of one `a x b` layer (row-major, rows along `i`). `i` runs left to
/// right and `j` bottom to top; blocked cells are drawn black. Values are
/// scaled by `vmax`.
pub fn heatmap(title: &str, values: &[f64], blocked: &[bool], a: u32, b: u32, vmax: f64) -> String {
    let px = (480.0 / a.max(b) as f64).clamp(2.0, 24.0);
    let (w, h) = (a as f64 * px, b as f64 * px);
    let (left, top) = (20.0, 40.0);
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{}" height="{}" shape-rendering="crispEdges">"#,
        left + w + 90.0,
        top + h + 20.0
    );
    let _ = writeln!(s, r#"<text x="{left}" y="24" font-family="sans-serif" font-size="14">{}</text>"#, escape(title));
    let scale = if vmax > 0.0 { vmax } else { 1.0 };
    for i in 0..a as usize {
        for j in 0..b as usize {
            let n = i * b as usize + j;
            let fill = if blocked[n] { "#000000".to_string() } else { hex(cool_warm(values[n] / scale)) };
            let x = left + i as f64 * px;
            let y = top + h - (j + 1) as f64 * px;
            let _ = writeln!(s, r#"<rect x="{x:.2}" y="{y:.2}" width="{px:.2}" height="{px:.2}" fill="{fill}"/>"#);
        }
    }
    let bar_x = left + w + 20.0;
    for n in 0..20 {
        let t = (19 - n) as f64 / 19.0;
        let y = top + n as f64 * h / 20.0;
        let _ = writeln!(
            s,
            r#"<rect x="{bar_x:.2}" y="{y:.2}" width="14" height="{:.2}" fill="{}"/>"#,
            h / 20.0 + 0.5,
            hex(cool_warm(t))
        );
    }
    let _ = writeln!(s, r#"<text x="{:.2}" y="{:.2}" font-family="sans-serif" font-size="10">{:.3}</text>"#, bar_x + 18.0, top + 8.0, scale);
    let _ = writeln!(s, r#"<text x="{:.2}" y="{:.2}" font-family="sans-serif" font-size="10">0</text>"#, bar_x + 18.0, top + h);
    s.push_str("</svg>\n");
    s
}

const PALETTE: [&str; 6] = ["#3b4cc0", "#b40426", "#2ca02c", "#ff7f0e", "#9467bd", "#555555"];

/// Named polyline; `markers` draws points instead of a line.
pub struct Series<'a> {
    pub label: &'a str,
    pub points: Vec<(f64, f64)>,
    pub markers: bool,
}

fn bounds(series: &[Series]) -> (f64, f64, f64, f64) {
    let pts = series.iter().flat_map(|s| s.points.iter()).filter(|(x, y)| x.is_finite() && y.is_finite());
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for &(x, y) in pts {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    if !x0.is_finite() {
        return (0.0, 1.0, 0.0, 1.0);
    }
    let pad = |lo: f64, hi: f64| if hi > lo { (lo, hi) } else { (lo - 0.5, hi + 0.5) };
    let (x0, x1) = pad(x0, x1);
    let (y0, y1) = pad(y0, y1);
    let m = 0.05 * (y1 - y0);
    (x0, x1, y0 - m, y1 + m)
}

pub fn line_plot(title: &str, x_label: &str, y_label: &str, series: &[Series]) -> String {
    let (w, h) = (520.0, 320.0);
    let (left, top) = (70.0, 40.0);
    let (x0, x1, y0, y1) = bounds(series);
    let sx = |x: f64| left + (x - x0) / (x1 - x0) * w;
    let sy = |y: f64| top + h - (y - y0) / (y1 - y0) * h;
    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{}" height="{}">"#, left + w + 150.0, top + h + 50.0);
    let _ = writeln!(s, r#"<text x="{left}" y="24" font-family="sans-serif" font-size="14">{}</text>"#, escape(title));
    let _ = writeln!(s, r##"<rect x="{left}" y="{top}" width="{w}" height="{h}" fill="none" stroke="#000000"/>"##);
    for n in 0..=4 {
        let fx = x0 + (x1 - x0) * n as f64 / 4.0;
        let fy = y0 + (y1 - y0) * n as f64 / 4.0;
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" font-family="sans-serif" font-size="10" text-anchor="middle">{}</text>"#,
            sx(fx),
            top + h + 14.0,
            tick(fx)
        );
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" font-family="sans-serif" font-size="10" text-anchor="end">{}</text>"#,
            left - 4.0,
            sy(fy) + 3.0,
            tick(fy)
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="{:.2}" font-family="sans-serif" font-size="12" text-anchor="middle">{}</text>"#,
        left + w / 2.0,
        top + h + 34.0,
        escape(x_label)
    );
    let _ = writeln!(
        s,
        r#"<text x="14" y="{:.2}" font-family="sans-serif" font-size="12" text-anchor="middle" transform="rotate(-90 14 {:.2})">{}</text>"#,
        top + h / 2.0,
        top + h / 2.0,
        escape(y_label)
    );
    for (n, ser) in series.iter().enumerate() {
        let color = PALETTE[n % PALETTE.len()];
        let pts: Vec<(f64, f64)> = ser.points.iter().filter(|(x, y)| x.is_finite() && y.is_finite()).copied().collect();
        if ser.markers {
            for (x, y) in &pts {
                let _ = writeln!(s, r#"<circle cx="{:.2}" cy="{:.2}" r="3.5" fill="{color}"/>"#, sx(*x), sy(*y));
            }
        } else if !pts.is_empty() {
            let path: Vec<String> = pts.iter().map(|(x, y)| format!("{:.2},{:.2}", sx(*x), sy(*y))).collect();
            let _ = writeln!(s, r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="1.5"/>"#, path.join(" "));
        }
        let ly = top + 14.0 + n as f64 * 16.0;
        let _ = writeln!(s, r#"<rect x="{:.2}" y="{:.2}" width="12" height="4" fill="{color}"/>"#, left + w + 12.0, ly - 4.0);
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{ly:.2}" font-family="sans-serif" font-size="11">{}</text>"#,
            left + w + 30.0,
            escape(ser.label)
        );
    }
    s.push_str("</svg>\n");
    s
}

fn tick(v: f64) -> String {
    let a = v.abs();
    if a != 0.0 && !(1e-2..1e5).contains(&a) {
        format!("{v:.2e}")
    } else {
        let t = format!("{v:.3}");
        t.trim_end_matches('0').trim_end_matches('.').to_string()
    }
}
