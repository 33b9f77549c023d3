//! Static SVG figures: histogram with a normal overlay, normal QQ plot and
//! log-log decay plot.

use std::fmt::Write;

use statrs::distribution::{ContinuousCDF, Normal};

const W: f64 = 480.0;
const H: f64 = 360.0;
const PAD: f64 = 48.0;

struct Frame {
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
}

impl Frame {
    fn px(&self, x: f64) -> f64 {
        PAD + (x - self.x0) / (self.x1 - self.x0) * (W - 2.0 * PAD)
    }
    fn py(&self, y: f64) -> f64 {
        H - PAD - (y - self.y0) / (self.y1 - self.y0) * (H - 2.0 * PAD)
    }
}

fn open(title: &str, f: &Frame, xlabel: &str, ylabel: &str) -> String {
    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">"#);
    let _ = writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{:.1}" y="20" font-size="14" text-anchor="middle">{}</text>"#, W / 2.0, escape(title));
    let _ = writeln!(
        s,
        r#"<rect x="{PAD}" y="{PAD}" width="{:.1}" height="{:.1}" fill="none" stroke="black"/>"#,
        W - 2.0 * PAD,
        H - 2.0 * PAD
    );
    let _ = writeln!(s, r#"<text x="{:.1}" y="{:.1}" font-size="11" text-anchor="middle">{}</text>"#, W / 2.0, H - 10.0, escape(xlabel));
    let _ = writeln!(
        s,
        r#"<text x="12" y="{:.1}" font-size="11" text-anchor="middle" transform="rotate(-90 12 {:.1})">{}</text>"#,
        H / 2.0,
        H / 2.0,
        escape(ylabel)
    );
    for (x, anchor) in [(f.x0, "start"), (f.x1, "end")] {
        let _ = writeln!(s, r#"<text x="{:.1}" y="{:.1}" font-size="10" text-anchor="{anchor}">{}</text>"#, f.px(x), H - PAD + 14.0, tick(x));
    }
    for y in [f.y0, f.y1] {
        let _ = writeln!(s, r#"<text x="{:.1}" y="{:.1}" font-size="10" text-anchor="end">{}</text>"#, PAD - 4.0, f.py(y) + 4.0, tick(y));
    }
    s
}

fn tick(v: f64) -> String {
    if v != 0.0 && (v.abs() < 1e-2 || v.abs() >= 1e4) {
        format!("{v:.2e}")
    } else {
        format!("{v:.2}")
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn polyline(f: &Frame, pts: &[(f64, f64)], color: &str) -> String {
    let d: Vec<String> = pts.iter().map(|(x, y)| format!("{:.2},{:.2}", f.px(*x), f.py(*y))).collect();
    format!(r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="1.5"/>"#, d.join(" ")) + "\n"
}

fn finite(values: &[f64]) -> Vec<f64> {
    let mut v: Vec<f64> = values.iter().copied().filter(|x| x.is_finite()).collect();
    v.sort_by(|a, b| a.total_cmp(b));
    v
}

/// Density histogram with the N(0, 1) density overlaid.
pub fn histogram_svg(values: &[f64], bins: usize, title: &str) -> String {
    let v = finite(values);
    let bins = bins.max(1);
    let (lo, hi) = match (v.first(), v.last()) {
        (Some(a), Some(b)) if b > a => (a.min(-4.0), b.max(4.0)),
        _ => (-4.0, 4.0),
    };
    let width = (hi - lo) / bins as f64;
    let mut counts = vec![0usize; bins];
    for x in &v {
        let b = (((x - lo) / width) as usize).min(bins - 1);
        counts[b] += 1;
    }
    let n = v.len().max(1) as f64;
    let dens: Vec<f64> = counts.iter().map(|c| *c as f64 / (n * width)).collect();
    let top = dens.iter().copied().fold(0.4_f64, f64::max) * 1.1;
    let f = Frame { x0: lo, x1: hi, y0: 0.0, y1: top };
    let mut s = open(title, &f, "value", "density");
    for (k, d) in dens.iter().enumerate() {
        let x = lo + k as f64 * width;
        let _ = writeln!(
            s,
            r#"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="steelblue" fill-opacity="0.6"/>"#,
            f.px(x),
            f.py(*d),
            f.px(x + width) - f.px(x),
            f.py(0.0) - f.py(*d)
        );
    }
    let curve: Vec<(f64, f64)> = (0..=200)
        .map(|i| {
            let x = lo + (hi - lo) * i as f64 / 200.0;
            (x, (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt())
        })
        .collect();
    s += &polyline(&f, &curve, "crimson");
    s + "</svg>\n"
}

/// Sample quantiles against standard normal quantiles.
pub fn qq_svg(values: &[f64], title: &str) -> String {
    let v = finite(values);
    let z = Normal::standard();
    let n = v.len();
    let pts: Vec<(f64, f64)> = v.iter().enumerate().map(|(i, x)| (z.inverse_cdf((i as f64 + 0.5) / n as f64), *x)).collect();
    let m = pts.iter().fold(3.0_f64, |m, (a, b)| m.max(a.abs()).max(b.abs()));
    let f = Frame { x0: -m, x1: m, y0: -m, y1: m };
    let mut s = open(title, &f, "normal quantile", "sample quantile");
    s += &polyline(&f, &[(-m, -m), (m, m)], "crimson");
    for (a, b) in &pts {
        let _ = writeln!(s, r#"<circle cx="{:.2}" cy="{:.2}" r="1.6" fill="steelblue"/>"#, f.px(*a), f.py(*b));
    }
    s + "</svg>\n"
}

/// `log10 y` against `log10 x`; non-positive points are dropped.
pub fn loglog_svg(points: &[(f64, f64)], title: &str, xlabel: &str, ylabel: &str) -> String {
    let pts: Vec<(f64, f64)> = points.iter().filter(|(x, y)| *x > 0.0 && *y > 0.0).map(|(x, y)| (x.log10(), y.log10())).collect();
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for (x, y) in &pts {
        x0 = x0.min(*x);
        x1 = x1.max(*x);
        y0 = y0.min(*y);
        y1 = y1.max(*y);
    }
    if pts.is_empty() {
        (x0, x1, y0, y1) = (0.0, 1.0, 0.0, 1.0);
    }
    if x1 - x0 < 1e-9 {
        x1 = x0 + 1.0;
    }
    if y1 - y0 < 1e-9 {
        y1 = y0 + 1.0;
    }
    let f = Frame { x0, x1, y0, y1 };
    let mut s = open(title, &f, &format!("log10 {xlabel}"), &format!("log10 {ylabel}"));
    s += &polyline(&f, &pts, "steelblue");
    for (a, b) in &pts {
        let _ = writeln!(s, r#"<circle cx="{:.2}" cy="{:.2}" r="3" fill="steelblue"/>"#, f.px(*a), f.py(*b));
    }
    s + "</svg>\n"
}
