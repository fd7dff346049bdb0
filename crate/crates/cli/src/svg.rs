//! Minimal SVG charts. Output depends only on the data, so reruns are byte-identical.

use std::fmt::Write;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 400.0;
const LEFT: f64 = 64.0;
const RIGHT: f64 = 24.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 56.0;
const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

struct Frame {
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
}

impl Frame {
    fn new(x0: f64, x1: f64, y0: f64, y1: f64) -> Self {
        let (x1, y1) = (if x1 > x0 { x1 } else { x0 + 1.0 }, if y1 > y0 { y1 } else { y0 + 1.0 });
        Frame { x0, x1, y0, y1 }
    }

    fn px(&self, x: f64) -> f64 {
        LEFT + (x - self.x0) / (self.x1 - self.x0) * (WIDTH - LEFT - RIGHT)
    }

    fn py(&self, y: f64) -> f64 {
        HEIGHT - BOTTOM - (y - self.y0) / (self.y1 - self.y0) * (HEIGHT - TOP - BOTTOM)
    }
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn open(out: &mut String, title: &str) {
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(out, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let _ = writeln!(
        out,
        r#"<text x="{:.1}" y="24" text-anchor="middle" font-size="14">{}</text>"#,
        WIDTH / 2.0,
        escape(title)
    );
}

fn axes(out: &mut String, f: &Frame, xlabel: &str, ylabel: &str, xticks: &[(f64, String)], yticks: usize) {
    let (bx, by) = (f.py(f.y0), f.px(f.x0));
    let _ = writeln!(
        out,
        r#"<path d="M{by:.2},{:.2} L{by:.2},{bx:.2} L{:.2},{bx:.2}" fill="none" stroke="black"/>"#,
        f.py(f.y1),
        f.px(f.x1)
    );
    for (x, label) in xticks {
        let px = f.px(*x);
        let _ = writeln!(
            out,
            r#"<line x1="{px:.2}" y1="{bx:.2}" x2="{px:.2}" y2="{:.2}" stroke="black"/><text x="{px:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
            bx + 4.0,
            bx + 18.0,
            escape(label)
        );
    }
    for i in 0..=yticks {
        let y = f.y0 + (f.y1 - f.y0) * i as f64 / yticks as f64;
        let py = f.py(y);
        let _ = writeln!(
            out,
            r#"<line x1="{:.2}" y1="{py:.2}" x2="{by:.2}" y2="{py:.2}" stroke="black"/><text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#,
            by - 4.0,
            by - 6.0,
            py + 4.0,
            tick_label(y)
        );
    }
    let _ = writeln!(
        out,
        r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{}</text>"#,
        (LEFT + WIDTH - RIGHT) / 2.0,
        HEIGHT - 14.0,
        escape(xlabel)
    );
    let _ = writeln!(
        out,
        r#"<text x="16" y="{:.1}" text-anchor="middle" transform="rotate(-90 16 {:.1})">{}</text>"#,
        (TOP + HEIGHT - BOTTOM) / 2.0,
        (TOP + HEIGHT - BOTTOM) / 2.0,
        escape(ylabel)
    );
}

fn tick_label(v: f64) -> String {
    if v != 0.0 && (v.abs() >= 1e4 || v.abs() < 1e-2) {
        format!("{v:.1e}")
    } else {
        format!("{v:.2}")
    }
}

fn legend(out: &mut String, names: &[String]) {
    for (i, name) in names.iter().enumerate() {
        let y = TOP + 8.0 + 16.0 * i as f64;
        let x = WIDTH - RIGHT - 150.0;
        let _ = writeln!(
            out,
            r#"<rect x="{x:.1}" y="{:.1}" width="10" height="10" fill="{}"/><text x="{:.1}" y="{:.1}">{}</text>"#,
            y - 9.0,
            PALETTE[i % PALETTE.len()],
            x + 14.0,
            y,
            escape(name)
        );
    }
}

/// Histogram over `[lo, hi]` with an optional dashed marker line.
pub fn histogram(title: &str, xlabel: &str, edges: &[f64], counts: &[usize], marker: Option<(f64, &str)>) -> String {
    let mut out = String::new();
    open(&mut out, title);
    let (lo, hi) = (edges[0], edges[edges.len() - 1]);
    let top = counts.iter().copied().max().unwrap_or(0).max(1) as f64;
    let f = Frame::new(lo, hi, 0.0, top);
    let ticks: Vec<(f64, String)> =
        (0..=4).map(|i| lo + (hi - lo) * i as f64 / 4.0).map(|x| (x, format!("{x:.2}"))).collect();
    axes(&mut out, &f, xlabel, "count", &ticks, 4);
    for (i, &c) in counts.iter().enumerate() {
        if c == 0 {
            continue;
        }
        let (x0, x1) = (f.px(edges[i]), f.px(edges[i + 1]));
        let y = f.py(c as f64);
        let _ = writeln!(
            out,
            r#"<rect x="{x0:.2}" y="{y:.2}" width="{:.2}" height="{:.2}" fill="{}" stroke="white"/>"#,
            x1 - x0,
            f.py(0.0) - y,
            PALETTE[0]
        );
    }
    if let Some((x, label)) = marker {
        let px = f.px(x);
        let _ = writeln!(
            out,
            r#"<line x1="{px:.2}" y1="{:.2}" x2="{px:.2}" y2="{:.2}" stroke="{}" stroke-dasharray="6 4"/><text x="{:.2}" y="{:.2}" fill="{}">{}</text>"#,
            f.py(0.0),
            f.py(top),
            PALETTE[1],
            px + 4.0,
            f.py(top) + 12.0,
            PALETTE[1],
            escape(label)
        );
    }
    out.push_str("</svg>\n");
    out
}

pub struct BarGroup {
    pub label: String,
    pub values: Vec<f64>,
}

/// Grouped bars; `series[i]` names the `i`-th value in every group.
pub fn grouped_bars(title: &str, ylabel: &str, series: &[String], groups: &[BarGroup]) -> String {
    let mut out = String::new();
    open(&mut out, title);
    let top =
        groups.iter().flat_map(|g| g.values.iter().copied()).filter(|v| v.is_finite()).fold(0.0f64, f64::max) * 1.1;
    let f = Frame::new(0.0, groups.len() as f64, 0.0, top);
    let ticks: Vec<(f64, String)> = groups.iter().enumerate().map(|(i, g)| (i as f64 + 0.5, g.label.clone())).collect();
    axes(&mut out, &f, "", ylabel, &ticks, 4);
    let k = series.len().max(1) as f64;
    for (i, g) in groups.iter().enumerate() {
        for (j, &v) in g.values.iter().enumerate() {
            if !v.is_finite() {
                continue;
            }
            let x0 = f.px(i as f64 + 0.1 + 0.8 * j as f64 / k);
            let x1 = f.px(i as f64 + 0.1 + 0.8 * (j + 1) as f64 / k);
            let y = f.py(v);
            let _ = writeln!(
                out,
                r#"<rect x="{x0:.2}" y="{y:.2}" width="{:.2}" height="{:.2}" fill="{}"/>"#,
                x1 - x0,
                f.py(0.0) - y,
                PALETTE[j % PALETTE.len()]
            );
        }
    }
    legend(&mut out, series);
    out.push_str("</svg>\n");
    out
}

pub struct Series {
    pub name: String,
    pub points: Vec<(f64, f64)>,
}

/// Polylines with point markers on a `[0, y_max]` vertical axis.
pub fn rate_curves(title: &str, xlabel: &str, ylabel: &str, series: &[Series], y_max: f64) -> String {
    let mut out = String::new();
    open(&mut out, title);
    let xs = series.iter().flat_map(|s| s.points.iter().map(|p| p.0));
    let (lo, hi) = xs.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), x| (a.min(x), b.max(x)));
    let (lo, hi) = if lo.is_finite() { (lo, hi) } else { (0.0, 1.0) };
    let f = Frame::new(lo, hi, 0.0, y_max);
    let integral = f.x0.fract() == 0.0 && f.x1.fract() == 0.0 && f.x1 - f.x0 >= 2.0;
    let ticks: Vec<(f64, String)> = if integral {
        let span = (f.x1 - f.x0) as usize;
        (0..=span).step_by(span.div_ceil(10)).map(|i| f.x0 + i as f64).map(|x| (x, format!("{x}"))).collect()
    } else {
        (0..=4).map(|i| f.x0 + (f.x1 - f.x0) * i as f64 / 4.0).map(|x| (x, format!("{x:.2}"))).collect()
    };
    axes(&mut out, &f, xlabel, ylabel, &ticks, 5);
    for (i, s) in series.iter().enumerate() {
        let colour = PALETTE[i % PALETTE.len()];
        let path: Vec<String> = s.points.iter().map(|&(x, y)| format!("{:.2},{:.2}", f.px(x), f.py(y))).collect();
        let _ =
            writeln!(out, r#"<polyline points="{}" fill="none" stroke="{colour}" stroke-width="2"/>"#, path.join(" "));
        for &(x, y) in &s.points {
            let _ = writeln!(out, r#"<circle cx="{:.2}" cy="{:.2}" r="3" fill="{colour}"/>"#, f.px(x), f.py(y));
        }
    }
    let names: Vec<String> = series.iter().map(|s| s.name.clone()).collect();
    legend(&mut out, &names);
    out.push_str("</svg>\n");
    out
}

/// Cell `(i, j)` of `values` is drawn at column `xs[i]`, row `ys[j]`; values lie in `[0, 1]`.
pub fn heatmap(title: &str, xlabel: &str, ylabel: &str, xs: &[usize], ys: &[usize], values: &[Vec<f64>]) -> String {
    let mut out = String::new();
    open(&mut out, title);
    let f = Frame::new(0.0, xs.len() as f64, 0.0, ys.len() as f64);
    let ticks: Vec<(f64, String)> = xs.iter().enumerate().map(|(i, x)| (i as f64 + 0.5, x.to_string())).collect();
    axes(&mut out, &f, xlabel, "", &ticks, 0);
    for (j, y) in ys.iter().enumerate() {
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{y}</text>"#,
            LEFT - 6.0,
            f.py(j as f64 + 0.5) + 4.0
        );
    }
    let _ = writeln!(
        out,
        r#"<text x="16" y="{:.1}" text-anchor="middle" transform="rotate(-90 16 {:.1})">{}</text>"#,
        (TOP + HEIGHT - BOTTOM) / 2.0,
        (TOP + HEIGHT - BOTTOM) / 2.0,
        escape(ylabel)
    );
    for (i, column) in values.iter().enumerate() {
        for (j, &v) in column.iter().enumerate() {
            let shade = (255.0 * (1.0 - v.clamp(0.0, 1.0))).round() as u8;
            let (x0, x1) = (f.px(i as f64), f.px(i as f64 + 1.0));
            let (y0, y1) = (f.py(j as f64 + 1.0), f.py(j as f64));
            let _ = writeln!(
                out,
                r##"<rect x="{x0:.2}" y="{y0:.2}" width="{:.2}" height="{:.2}" fill="#{shade:02x}{shade:02x}ff" stroke="white"><title>{v:.3}</title></rect>"##,
                x1 - x0,
                y1 - y0
            );
        }
    }
    out.push_str("</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn documents_are_closed_and_deterministic() {
        let h = histogram("t", "x", &[0.0, 0.5, 1.0], &[3, 1], Some((0.7, "cut")));
        assert!(h.starts_with("<svg") && h.ends_with("</svg>\n"));
        assert_eq!(h, histogram("t", "x", &[0.0, 0.5, 1.0], &[3, 1], Some((0.7, "cut"))));
        let c = rate_curves("t", "x", "y", &[Series { name: "a<b".into(), points: vec![(0.0, 1.0), (3.0, 0.5)] }], 1.0);
        assert!(c.contains("a&lt;b") && c.contains("<polyline"));
        let m = heatmap("t", "x", "y", &[0, 1], &[0], &[vec![1.0], vec![0.0]]);
        assert!(m.contains("#0000ff") && m.contains("#ffffff"));
        let b = grouped_bars(
            "t",
            "y",
            &["a".into(), "b".into()],
            &[BarGroup { label: "g".into(), values: vec![1.0, 2.0] }],
        );
        assert_eq!(b.matches("<rect").count(), 1 + 2 + 2);
    }
}
