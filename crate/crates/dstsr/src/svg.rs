//! Static SVG line and grouped-bar charts.

use std::fmt::Write;

const WIDTH: f64 = 900.0;
const HEIGHT: f64 = 480.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 190.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 60.0;

const PALETTE: [&str; 10] = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
    "#bcbd22", "#17becf",
];

fn color(i: usize) -> &'static str {
    PALETTE[i % PALETTE.len()]
}

pub fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            _ => out.push(c),
        }
    }
    out
}

/// Round tick step covering `span` in about `n` intervals.
fn nice_step(span: f64, n: f64) -> f64 {
    let raw = span / n;
    let mag = 10f64.powf(raw.log10().floor());
    let r = raw / mag;
    let f = if r <= 1.0 {
        1.0
    } else if r <= 2.0 {
        2.0
    } else if r <= 5.0 {
        5.0
    } else {
        10.0
    };
    f * mag
}

struct Scale {
    lo: f64,
    hi: f64,
    px_lo: f64,
    px_hi: f64,
}

impl Scale {
    fn map(&self, v: f64) -> f64 {
        self.px_lo + (v - self.lo) / (self.hi - self.lo) * (self.px_hi - self.px_lo)
    }
}

fn value_range<'a>(values: impl Iterator<Item = &'a f64>, include_zero: bool) -> (f64, f64) {
    let (mut lo, mut hi) = values
        .filter(|v| v.is_finite())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), &v| (l.min(v), h.max(v)));
    if include_zero {
        lo = lo.min(0.0);
        hi = hi.max(0.0);
    }
    if !lo.is_finite() {
        return (0.0, 1.0);
    }
    if hi - lo < 1e-9 {
        lo -= 1.0;
        hi += 1.0;
    }
    let step = nice_step(hi - lo, 6.0);
    ((lo / step).floor() * step, (hi / step).ceil() * step)
}

fn header(out: &mut String, title: &str) {
    let _ = writeln!(
        out,
        r#"<?xml version="1.0" encoding="UTF-8"?>
<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">
<rect width="100%" height="100%" fill="white"/>
<text x="{}" y="24" text-anchor="middle" font-size="16">{}</text>"#,
        LEFT + (WIDTH - LEFT - RIGHT) / 2.0,
        escape(title)
    );
}

fn y_axis(out: &mut String, y: &Scale, label: &str) {
    let step = nice_step(y.hi - y.lo, 6.0);
    let mut v = y.lo;
    out.push_str("<g class=\"y-axis\" stroke=\"#ccc\">\n");
    while v <= y.hi + step * 1e-6 {
        let py = y.map(v);
        let _ = writeln!(
            out,
            r##"<line x1="{LEFT}" x2="{:.2}" y1="{py:.2}" y2="{py:.2}"/><text x="{:.2}" y="{:.2}" text-anchor="end" stroke="none" fill="#333">{}</text>"##,
            WIDTH - RIGHT,
            LEFT - 6.0,
            py + 4.0,
            fmt_tick(v)
        );
        v += step;
    }
    out.push_str("</g>\n");
    let _ = writeln!(
        out,
        r#"<text x="16" y="{:.2}" transform="rotate(-90 16 {:.2})" text-anchor="middle">{}</text>"#,
        (TOP + HEIGHT - BOTTOM) / 2.0,
        (TOP + HEIGHT - BOTTOM) / 2.0,
        escape(label)
    );
}

fn fmt_tick(v: f64) -> String {
    let r = (v * 1e6).round() / 1e6;
    if r == 0.0 {
        "0".into()
    } else {
        format!("{r}")
    }
}

/// Stroke colour and dash pattern; colours repeat dashed after the palette
/// runs out.
fn style(i: usize) -> (&'static str, &'static str) {
    (color(i), if i >= PALETTE.len() { "6 3" } else { "none" })
}

fn legend(out: &mut String, entries: &[(&str, &str, &str)]) {
    out.push_str("<g class=\"legend\">\n");
    for (i, (name, stroke, dash)) in entries.iter().enumerate() {
        let y = TOP + 10.0 + 18.0 * i as f64;
        let x = WIDTH - RIGHT + 15.0;
        let _ = writeln!(
            out,
            r#"<line x1="{x}" x2="{:.2}" y1="{y:.2}" y2="{y:.2}" stroke="{stroke}" stroke-width="3" stroke-dasharray="{dash}"/><text x="{}" y="{:.2}">{}</text>"#,
            x + 16.0,
            x + 20.0,
            y + 4.0,
            escape(name)
        );
    }
    out.push_str("</g>\n");
}

/// One named series of a line chart.
pub struct Series<'a> {
    pub name: &'a str,
    pub values: &'a [f64],
}

/// Line chart over a shared x axis. The first series is the reference and
/// is drawn in black. Each series is a `<g class="series">` whose
/// `data-name` matches its name; non-finite values split the line.
pub fn line_chart(title: &str, y_label: &str, x_labels: &[String], series: &[Series]) -> String {
    let n = x_labels.len().max(2);
    let (lo, hi) = value_range(series.iter().flat_map(|s| s.values.iter()), false);
    let x = Scale {
        lo: 0.0,
        hi: (n - 1) as f64,
        px_lo: LEFT,
        px_hi: WIDTH - RIGHT,
    };
    let y = Scale {
        lo,
        hi,
        px_lo: HEIGHT - BOTTOM,
        px_hi: TOP,
    };
    let mut out = String::new();
    header(&mut out, title);
    y_axis(&mut out, &y, y_label);

    let every = (x_labels.len() / 6).max(1);
    out.push_str("<g class=\"x-axis\">\n");
    for (i, l) in x_labels.iter().enumerate().step_by(every) {
        let px = x.map(i as f64);
        let _ = writeln!(
            out,
            r#"<line x1="{px:.2}" x2="{px:.2}" y1="{:.2}" y2="{:.2}" stroke="black"/><text x="{px:.2}" y="{:.2}" text-anchor="middle" font-size="10">{}</text>"#,
            HEIGHT - BOTTOM,
            HEIGHT - BOTTOM + 5.0,
            HEIGHT - BOTTOM + 18.0,
            escape(l)
        );
    }
    out.push_str("</g>\n");

    let mut entries = Vec::with_capacity(series.len());
    for (i, s) in series.iter().enumerate() {
        let (stroke, dash) = if i == 0 { ("black", "none") } else { style(i - 1) };
        entries.push((s.name, stroke, dash));
        let _ = writeln!(
            out,
            r#"<g class="series" data-name="{}" data-points="{}" fill="none" stroke="{stroke}" stroke-dasharray="{dash}" stroke-width="{}">"#,
            escape(s.name),
            s.values.len(),
            if i == 0 { 2.5 } else { 1.5 }
        );
        let mut run: Vec<String> = Vec::new();
        let flush = |run: &mut Vec<String>, out: &mut String| {
            if !run.is_empty() {
                let _ = writeln!(out, r#"<polyline points="{}"/>"#, run.join(" "));
                run.clear();
            }
        };
        for (k, v) in s.values.iter().enumerate() {
            if v.is_finite() {
                run.push(format!("{:.2},{:.2}", x.map(k as f64), y.map(*v)));
            } else {
                flush(&mut run, &mut out);
            }
        }
        flush(&mut run, &mut out);
        out.push_str("</g>\n");
    }
    legend(&mut out, &entries);
    let _ = writeln!(
        out,
        r#"<rect x="{LEFT}" y="{TOP}" width="{}" height="{}" fill="none" stroke="black"/>"#,
        WIDTH - LEFT - RIGHT,
        HEIGHT - TOP - BOTTOM
    );
    out.push_str("</svg>\n");
    out
}

/// Grouped bars: one group per category, one bar per metric. Each bar is a
/// `<rect class="bar">` carrying `data-category`, `data-metric` and
/// `data-value`. Non-finite values are drawn as empty slots.
pub fn bar_chart(title: &str, y_label: &str, categories: &[String], metrics: &[(&str, Vec<f64>)]) -> String {
    let (_, hi) = value_range(metrics.iter().flat_map(|(_, v)| v.iter()), true);
    let y = Scale {
        lo: 0.0,
        hi,
        px_lo: HEIGHT - BOTTOM,
        px_hi: TOP,
    };
    let mut out = String::new();
    header(&mut out, title);
    y_axis(&mut out, &y, y_label);
    let group_w = (WIDTH - LEFT - RIGHT) / categories.len().max(1) as f64;
    let bar_w = group_w * 0.8 / metrics.len().max(1) as f64;
    for (c, cat) in categories.iter().enumerate() {
        let gx = LEFT + group_w * c as f64 + group_w * 0.1;
        for (m, (name, values)) in metrics.iter().enumerate() {
            let v = values.get(c).copied().unwrap_or(f64::NAN);
            if !v.is_finite() {
                continue;
            }
            let top = y.map(v.max(0.0));
            let _ = writeln!(
                out,
                r#"<rect class="bar" data-category="{}" data-metric="{}" data-value="{}" x="{:.2}" y="{top:.2}" width="{bar_w:.2}" height="{:.2}" fill="{}"/>"#,
                escape(cat),
                escape(name),
                v,
                gx + bar_w * m as f64,
                (HEIGHT - BOTTOM - top).max(0.0),
                color(m)
            );
        }
        let cx = gx + group_w * 0.4;
        let _ = writeln!(
            out,
            r#"<text x="{cx:.2}" y="{:.2}" text-anchor="end" font-size="10" transform="rotate(-35 {cx:.2} {:.2})">{}</text>"#,
            HEIGHT - BOTTOM + 14.0,
            HEIGHT - BOTTOM + 14.0,
            escape(cat)
        );
    }
    let entries: Vec<(&str, &str, &str)> = metrics
        .iter()
        .enumerate()
        .map(|(i, (n, _))| (*n, color(i), "none"))
        .collect();
    legend(&mut out, &entries);
    let _ = writeln!(
        out,
        r#"<line x1="{LEFT}" x2="{}" y1="{:.2}" y2="{:.2}" stroke="black"/>"#,
        WIDTH - RIGHT,
        HEIGHT - BOTTOM,
        HEIGHT - BOTTOM
    );
    out.push_str("</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ticks_are_round() {
        assert_eq!(nice_step(100.0, 5.0), 20.0);
        assert_eq!(nice_step(7.0, 6.0), 2.0);
        assert_eq!(value_range([-383.0, 10.0].iter(), false), (-400.0, 100.0));
    }

    #[test]
    fn nan_splits_polyline() {
        let labels: Vec<String> = (0..5).map(|i| i.to_string()).collect();
        let s = line_chart(
            "t",
            "y",
            &labels,
            &[Series {
                name: "a<b",
                values: &[1.0, 2.0, f64::NAN, 4.0, 5.0],
            }],
        );
        assert_eq!(s.matches("<polyline").count(), 2);
        assert!(s.contains("a&lt;b"));
    }
}
