//! Log-log SVG of an experiment summary.

use std::fmt::Write;

use otrelax::harness::SummaryRow;

use crate::error::{CliError, Result};
use crate::number::sig_digits;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const MARGIN_LEFT: f64 = 70.0;
const MARGIN_RIGHT: f64 = 150.0;
const MARGIN_Y: f64 = 40.0;

struct Axis {
    lo: f64,
    hi: f64,
    log: bool,
}

impl Axis {
    fn new(values: impl Iterator<Item = f64> + Clone, log: bool) -> Self {
        let log = log && values.clone().all(|v| v > 0.0);
        let map = |v: f64| if log { v.log10() } else { v };
        let lo = values.clone().map(map).fold(f64::INFINITY, f64::min);
        let hi = values.map(map).fold(f64::NEG_INFINITY, f64::max);
        let pad = if hi > lo { 0.05 * (hi - lo) } else { 0.5 };
        Self {
            lo: lo - pad,
            hi: hi + pad,
            log,
        }
    }

    fn unit(&self, v: f64) -> f64 {
        let v = if self.log { v.log10() } else { v };
        (v - self.lo) / (self.hi - self.lo)
    }
}

struct Series<'a> {
    name: &'a str,
    color: &'a str,
    values: Vec<f64>,
}

/// Renders mean `G₀(μ̂_n, ν)` and `G_δ(μ̂_n, ν)` against `n`, plus a
/// horizontal line at the mean `G₀(μ₀, ν)`. Output depends only on `summary`.
pub fn render_svg(summary: &[SummaryRow]) -> Result<String> {
    if summary.is_empty() {
        return Err(CliError::Usage("cannot plot an empty summary".into()));
    }
    let ns: Vec<f64> = summary.iter().map(|s| s.n as f64).collect();
    let reference = summary.iter().map(|s| s.g0_reference.mean).sum::<f64>() / summary.len() as f64;
    let series = [
        Series {
            name: "G0 empirical",
            color: "#1f77b4",
            values: summary.iter().map(|s| s.g0_empirical.mean).collect(),
        },
        Series {
            name: "G_delta empirical",
            color: "#d62728",
            values: summary.iter().map(|s| s.g_delta_empirical.mean).collect(),
        },
    ];
    let x = Axis::new(ns.iter().copied(), true);
    let y = Axis::new(
        series
            .iter()
            .flat_map(|s| s.values.iter().copied())
            .chain(std::iter::once(reference)),
        true,
    );
    let plot_w = WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
    let plot_h = HEIGHT - 2.0 * MARGIN_Y;
    let px = |v: f64| MARGIN_LEFT + plot_w * x.unit(v);
    let py = |v: f64| HEIGHT - MARGIN_Y - plot_h * y.unit(v);

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let (x0, x1, y0, y1) = (
        MARGIN_LEFT,
        MARGIN_LEFT + plot_w,
        HEIGHT - MARGIN_Y,
        MARGIN_Y,
    );
    let _ = writeln!(
        svg,
        r#"<path d="M{x0:.2},{y1:.2} L{x0:.2},{y0:.2} L{x1:.2},{y0:.2}" fill="none" stroke="black"/>"#
    );
    for &n in &ns {
        let _ = writeln!(
            svg,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
            px(n),
            y0 + 16.0,
            n
        );
    }
    let scale = |log: bool| if log { "log" } else { "linear" };
    let _ = writeln!(
        svg,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">n ({} scale)</text>"#,
        0.5 * (x0 + x1),
        HEIGHT - 6.0,
        scale(x.log)
    );
    let _ = writeln!(
        svg,
        r#"<text x="14" y="{:.2}" text-anchor="middle" transform="rotate(-90 14 {:.2})">mean value ({} scale)</text>"#,
        0.5 * (y0 + y1),
        0.5 * (y0 + y1),
        scale(y.log)
    );

    for (k, s) in series.iter().enumerate() {
        let _ = writeln!(
            svg,
            r#"<g class="series" data-name="{}" stroke="{}" fill="{}">"#,
            s.name, s.color, s.color
        );
        if s.values.len() > 1 {
            let points: Vec<String> = ns
                .iter()
                .zip(&s.values)
                .map(|(&n, &v)| format!("{:.2},{:.2}", px(n), py(v)))
                .collect();
            let _ = writeln!(
                svg,
                r#"<polyline fill="none" points="{}"/>"#,
                points.join(" ")
            );
        }
        for (&n, &v) in ns.iter().zip(&s.values) {
            let _ = writeln!(
                svg,
                r#"<circle class="marker" cx="{:.2}" cy="{:.2}" r="3.5"><title>n={} mean={}</title></circle>"#,
                px(n),
                py(v),
                n,
                sig_digits(v, 6)
            );
        }
        legend(&mut svg, k, s.name, s.color);
        let _ = writeln!(svg, "</g>");
    }
    let ref_color = "#2ca02c";
    let _ = writeln!(
        svg,
        r#"<g class="series" data-name="G0 reference" stroke="{ref_color}" fill="{ref_color}">"#
    );
    let _ = writeln!(
        svg,
        r#"<line class="reference" x1="{x0:.2}" y1="{:.2}" x2="{x1:.2}" y2="{:.2}" stroke-dasharray="6 4"/>"#,
        py(reference),
        py(reference)
    );
    legend(&mut svg, 2, "G0 reference", ref_color);
    let _ = writeln!(svg, "</g>");
    svg.push_str("</svg>\n");
    Ok(svg)
}

fn legend(svg: &mut String, slot: usize, name: &str, color: &str) {
    let x = WIDTH - MARGIN_RIGHT + 15.0;
    let y = MARGIN_Y + 10.0 + 20.0 * slot as f64;
    let _ = writeln!(
        svg,
        r#"<line x1="{x:.2}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="{color}"/><text x="{:.2}" y="{:.2}" stroke="none" fill="black">{name}</text>"#,
        x + 20.0,
        x + 26.0,
        y + 4.0
    );
}
