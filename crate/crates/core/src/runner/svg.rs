//! Hand-written SVG 1.1 charts. Output is a pure function of the data, so
//! reruns produce identical bytes.

use std::fmt::Write;

const FONT: &str = "font-family=\"sans-serif\" font-size=\"11\"";
const PALETTE: [&str; 6] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b",
];

fn header(out: &mut String, width: f64, height: f64, title: &str) {
    let _ = writeln!(
        out,
        "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"{width}\" height=\"{height}\" viewBox=\"0 0 {width} {height}\">"
    );
    let _ = writeln!(
        out,
        "<rect width=\"{width}\" height=\"{height}\" fill=\"white\"/>"
    );
    let _ = writeln!(
        out,
        "<text x=\"{}\" y=\"20\" text-anchor=\"middle\" {FONT} font-size=\"14\">{}</text>",
        width / 2.0,
        escape(title)
    );
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

fn fmt(v: f64) -> String {
    format!("{v:.3}")
}

/// Light-to-dark blue ramp; `t = 1` is darkest.
fn ramp(t: f64) -> String {
    let t = if t.is_finite() {
        t.clamp(0.0, 1.0)
    } else {
        0.0
    };
    let lerp = |a: f64, b: f64| (a + (b - a) * t).round() as u8;
    format!(
        "#{:02x}{:02x}{:02x}",
        lerp(247.0, 8.0),
        lerp(251.0, 48.0),
        lerp(255.0, 107.0)
    )
}

/// Heatmap with rows = `row_axis` (drawn bottom to top) and columns =
/// `col_axis`. Darker cells hold larger values.
pub fn heatmap(
    title: &str,
    row_label: &str,
    col_label: &str,
    row_axis: &[f64],
    col_axis: &[f64],
    values: &[Vec<f64>],
) -> String {
    let cell = 24.0;
    let (left, top) = (70.0, 40.0);
    let grid_w = cell * col_axis.len() as f64;
    let grid_h = cell * row_axis.len() as f64;
    let width = left + grid_w + 110.0;
    let height = top + grid_h + 60.0;
    let flat: Vec<f64> = values.iter().flatten().copied().collect();
    let lo = flat.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = flat.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let span = if hi > lo { hi - lo } else { 1.0 };

    let mut out = String::new();
    header(&mut out, width, height, title);
    for (r, row) in values.iter().enumerate() {
        let y = top + grid_h - cell * (r as f64 + 1.0);
        for (c, &v) in row.iter().enumerate() {
            let x = left + cell * c as f64;
            let _ = writeln!(
                out,
                "<rect x=\"{x}\" y=\"{y}\" width=\"{cell}\" height=\"{cell}\" fill=\"{}\"><title>{}={}, {}={}: {}</title></rect>",
                ramp((v - lo) / span),
                escape(row_label),
                row_axis[r],
                escape(col_label),
                col_axis[c],
                fmt(v)
            );
        }
    }
    let tick_every = (row_axis.len() / 10).max(1);
    for (r, v) in row_axis.iter().enumerate().step_by(tick_every) {
        let y = top + grid_h - cell * (r as f64 + 0.5) + 4.0;
        let _ = writeln!(
            out,
            "<text x=\"{}\" y=\"{y}\" text-anchor=\"end\" {FONT}>{v}</text>",
            left - 4.0
        );
    }
    let tick_every = (col_axis.len() / 10).max(1);
    for (c, v) in col_axis.iter().enumerate().step_by(tick_every) {
        let x = left + cell * (c as f64 + 0.5);
        let _ = writeln!(
            out,
            "<text x=\"{x}\" y=\"{}\" text-anchor=\"middle\" {FONT}>{v}</text>",
            top + grid_h + 14.0
        );
    }
    let _ = writeln!(
        out,
        "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\" {FONT}>{}</text>",
        left + grid_w / 2.0,
        top + grid_h + 34.0,
        escape(col_label)
    );
    let _ = writeln!(
        out,
        "<text x=\"16\" y=\"{}\" text-anchor=\"middle\" transform=\"rotate(-90 16 {})\" {FONT}>{}</text>",
        top + grid_h / 2.0,
        top + grid_h / 2.0,
        escape(row_label)
    );

    // colorbar with numeric ticks
    let bar_x = left + grid_w + 30.0;
    let steps = 20;
    let seg = grid_h / steps as f64;
    for i in 0..steps {
        let t = (i as f64 + 0.5) / steps as f64;
        let y = top + grid_h - seg * (i as f64 + 1.0);
        let _ = writeln!(
            out,
            "<rect x=\"{bar_x}\" y=\"{y}\" width=\"16\" height=\"{seg}\" fill=\"{}\"/>",
            ramp(t)
        );
    }
    for i in 0..=4 {
        let t = i as f64 / 4.0;
        let y = top + grid_h - grid_h * t + 4.0;
        let _ = writeln!(
            out,
            "<text x=\"{}\" y=\"{y}\" {FONT}>{}</text>",
            bar_x + 20.0,
            fmt(lo + span * t)
        );
    }
    out.push_str("</svg>\n");
    out
}

pub struct Series<'a> {
    pub label: &'a str,
    pub mean: &'a [f64],
    /// Optional `(min, max)` band drawn behind the mean line.
    pub band: Option<(&'a [f64], &'a [f64])>,
}

/// Line chart over `x = 0, 1, …` with optional shaded bands.
pub fn line_chart(title: &str, x_label: &str, y_label: &str, series: &[Series<'_>]) -> String {
    let (width, height) = (760.0, 420.0);
    let (left, right, top, bottom) = (70.0, 150.0, 40.0, 50.0);
    let plot_w = width - left - right;
    let plot_h = height - top - bottom;
    let n = series
        .iter()
        .map(|s| s.mean.len())
        .max()
        .unwrap_or(0)
        .max(2);
    let mut values: Vec<f64> = Vec::new();
    for s in series {
        values.extend_from_slice(s.mean);
        if let Some((lo, hi)) = s.band {
            values.extend_from_slice(lo);
            values.extend_from_slice(hi);
        }
    }
    let mut lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let mut hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !(hi > lo) {
        lo -= 1.0;
        hi += 1.0;
    }
    let sx = |i: usize| left + plot_w * i as f64 / (n - 1) as f64;
    let sy = |v: f64| top + plot_h - plot_h * (v - lo) / (hi - lo);

    let mut out = String::new();
    header(&mut out, width, height, title);
    axes(
        &mut out,
        left,
        top,
        plot_w,
        plot_h,
        lo,
        hi,
        x_label,
        y_label,
        (n - 1) as f64,
    );
    for (k, s) in series.iter().enumerate() {
        let color = PALETTE[k % PALETTE.len()];
        if let Some((bl, bh)) = s.band {
            let mut pts: Vec<String> = bh
                .iter()
                .enumerate()
                .map(|(i, &v)| format!("{:.2},{:.2}", sx(i), sy(v)))
                .collect();
            pts.extend(
                bl.iter()
                    .enumerate()
                    .rev()
                    .map(|(i, &v)| format!("{:.2},{:.2}", sx(i), sy(v))),
            );
            let _ = writeln!(
                out,
                "<polygon points=\"{}\" fill=\"{color}\" fill-opacity=\"0.15\" stroke=\"none\"/>",
                pts.join(" ")
            );
        }
        let pts: Vec<String> = s
            .mean
            .iter()
            .enumerate()
            .map(|(i, &v)| format!("{:.2},{:.2}", sx(i), sy(v)))
            .collect();
        let _ = writeln!(
            out,
            "<polyline points=\"{}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\"/>",
            pts.join(" ")
        );
        let ly = top + 16.0 * k as f64 + 10.0;
        let lx = left + plot_w + 14.0;
        let _ = writeln!(out, "<line x1=\"{lx}\" y1=\"{ly}\" x2=\"{}\" y2=\"{ly}\" stroke=\"{color}\" stroke-width=\"3\"/>", lx + 18.0);
        let _ = writeln!(
            out,
            "<text x=\"{}\" y=\"{}\" {FONT}>{}</text>",
            lx + 24.0,
            ly + 4.0,
            escape(s.label)
        );
    }
    out.push_str("</svg>\n");
    out
}

/// Vertical bar chart, one bar per label.
pub fn bar_chart(
    title: &str,
    x_label: &str,
    y_label: &str,
    labels: &[String],
    values: &[f64],
) -> String {
    let (width, height) = (560.0, 380.0);
    let (left, right, top, bottom) = (70.0, 20.0, 40.0, 50.0);
    let plot_w = width - left - right;
    let plot_h = height - top - bottom;
    let mut lo = values.iter().copied().fold(0.0, f64::min);
    let mut hi = values.iter().copied().fold(0.0, f64::max);
    if !(hi > lo) {
        lo -= 1.0;
        hi += 1.0;
    }
    let sy = |v: f64| top + plot_h - plot_h * (v - lo) / (hi - lo);

    let mut out = String::new();
    header(&mut out, width, height, title);
    axes(
        &mut out,
        left,
        top,
        plot_w,
        plot_h,
        lo,
        hi,
        x_label,
        y_label,
        f64::NAN,
    );
    let slot = plot_w / values.len().max(1) as f64;
    for (i, (label, &v)) in labels.iter().zip(values).enumerate() {
        let x = left + slot * i as f64 + slot * 0.15;
        let (y0, y1) = (sy(0.0), sy(v));
        let _ = writeln!(
            out,
            "<rect x=\"{x:.2}\" y=\"{:.2}\" width=\"{:.2}\" height=\"{:.2}\" fill=\"{}\"><title>{}</title></rect>",
            y0.min(y1),
            slot * 0.7,
            (y1 - y0).abs(),
            PALETTE[0],
            fmt(v)
        );
        let _ = writeln!(
            out,
            "<text x=\"{:.2}\" y=\"{}\" text-anchor=\"middle\" {FONT}>{}</text>",
            x + slot * 0.35,
            top + plot_h + 14.0,
            escape(label)
        );
    }
    out.push_str("</svg>\n");
    out
}

#[allow(clippy::too_many_arguments)]
fn axes(
    out: &mut String,
    left: f64,
    top: f64,
    plot_w: f64,
    plot_h: f64,
    lo: f64,
    hi: f64,
    x_label: &str,
    y_label: &str,
    x_max: f64,
) {
    let bottom = top + plot_h;
    let _ = writeln!(
        out,
        "<line x1=\"{left}\" y1=\"{bottom}\" x2=\"{}\" y2=\"{bottom}\" stroke=\"black\"/>",
        left + plot_w
    );
    let _ = writeln!(
        out,
        "<line x1=\"{left}\" y1=\"{top}\" x2=\"{left}\" y2=\"{bottom}\" stroke=\"black\"/>"
    );
    for i in 0..=4 {
        let t = i as f64 / 4.0;
        let y = bottom - plot_h * t;
        let _ = writeln!(
            out,
            "<line x1=\"{}\" y1=\"{y}\" x2=\"{left}\" y2=\"{y}\" stroke=\"black\"/>",
            left - 4.0
        );
        let _ = writeln!(
            out,
            "<text x=\"{}\" y=\"{}\" text-anchor=\"end\" {FONT}>{}</text>",
            left - 6.0,
            y + 4.0,
            fmt(lo + (hi - lo) * t)
        );
    }
    if x_max.is_finite() {
        for i in 0..=4 {
            let t = i as f64 / 4.0;
            let x = left + plot_w * t;
            let _ = writeln!(
                out,
                "<text x=\"{x}\" y=\"{}\" text-anchor=\"middle\" {FONT}>{}</text>",
                bottom + 14.0,
                (x_max * t).round()
            );
        }
    }
    let _ = writeln!(
        out,
        "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\" {FONT}>{}</text>",
        left + plot_w / 2.0,
        bottom + 36.0,
        escape(x_label)
    );
    let _ = writeln!(
        out,
        "<text x=\"16\" y=\"{}\" text-anchor=\"middle\" transform=\"rotate(-90 16 {})\" {FONT}>{}</text>",
        top + plot_h / 2.0,
        top + plot_h / 2.0,
        escape(y_label)
    );
}
