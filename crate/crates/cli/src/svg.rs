//! Minimal SVG output: heatmap panels and stacked x/y plots. Output contains
//! nothing but the data, so identical inputs give identical files.

use std::fmt::Write;

use sqvac_core::husimi::PhaseSpaceGrid;

const FONT: &str = "font-family=\"sans-serif\" font-size=\"11\"";

fn header(width: f64, height: f64) -> String {
    format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{width}\" height=\"{height}\" viewBox=\"0 0 {width} {height}\">\n\
         <rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
    )
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

/// Viridis, linearly interpolated between five anchors; `x` in `[0, 1]`.
fn viridis(x: f64) -> (u8, u8, u8) {
    const STOPS: [(f64, f64, f64); 5] = [
        (68.0, 1.0, 84.0),
        (59.0, 82.0, 139.0),
        (33.0, 145.0, 140.0),
        (94.0, 201.0, 98.0),
        (253.0, 231.0, 37.0),
    ];
    let x = x.clamp(0.0, 1.0) * 4.0;
    let i = (x.floor() as usize).min(3);
    let f = x - i as f64;
    let (a, b) = (STOPS[i], STOPS[i + 1]);
    let mix = |p: f64, q: f64| (p + (q - p) * f).round() as u8;
    (mix(a.0, b.0), mix(a.1, b.1), mix(a.2, b.2))
}

/// Colour levels used to quantise heatmaps, so equal neighbours merge into
/// one rectangle.
const LEVELS: f64 = 96.0;

/// One heatmap per panel, side by side, sharing the colour scale.
pub fn heatmap_panels(panels: &[(String, &PhaseSpaceGrid)]) -> String {
    let size = 220.0;
    let pad = 40.0;
    let width = pad + panels.len() as f64 * (size + pad);
    let height = size + 2.5 * pad;
    let vmax = panels
        .iter()
        .map(|(_, g)| g.max_value())
        .fold(0.0, f64::max)
        .max(f64::MIN_POSITIVE);
    let mut s = header(width, height);
    for (k, (title, grid)) in panels.iter().enumerate() {
        let x0 = pad + k as f64 * (size + pad);
        let y0 = 1.5 * pad;
        let n = grid.resolution;
        let cell = size / n as f64;
        let _ = writeln!(s, "<g class=\"panel\">");
        let _ = writeln!(
            s,
            "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"middle\" {FONT}>{}</text>",
            x0 + size / 2.0,
            y0 - 8.0,
            escape(title)
        );
        for i in 0..n {
            // row i holds Im α = im_axis[i]; draw the largest Im α at the top
            let y = y0 + (n - 1 - i) as f64 * cell;
            let level = |j: usize| (grid.values[(i, j)] / vmax * LEVELS).round();
            let mut j = 0;
            while j < n {
                let l = level(j);
                let mut end = j + 1;
                while end < n && level(end) == l {
                    end += 1;
                }
                let (r, g, b) = viridis(l / LEVELS);
                let _ = writeln!(
                    s,
                    "<rect x=\"{:.2}\" y=\"{:.2}\" width=\"{:.2}\" height=\"{:.2}\" fill=\"#{r:02x}{g:02x}{b:02x}\"/>",
                    x0 + j as f64 * cell,
                    y,
                    (end - j) as f64 * cell + 0.05,
                    cell + 0.05
                );
                j = end;
            }
        }
        let _ = writeln!(s, "<rect x=\"{x0}\" y=\"{y0}\" width=\"{size}\" height=\"{size}\" fill=\"none\" stroke=\"black\"/>");
        let _ = writeln!(
            s,
            "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"middle\" {FONT}>Re α ∈ [{:.2}, {:.2}], Im α ∈ [{:.2}, {:.2}]</text>",
            x0 + size / 2.0,
            y0 + size + 16.0,
            grid.re_range.0,
            grid.re_range.1,
            grid.im_range.0,
            grid.im_range.1
        );
        let _ = writeln!(s, "</g>");
    }
    s.push_str("</svg>\n");
    s
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Style {
    Line,
    Points,
    Bars,
}

#[derive(Clone, Debug)]
pub struct Series {
    pub label: String,
    pub style: Style,
    pub color: &'static str,
    pub points: Vec<(f64, f64)>,
    /// Symmetric error bars, one per point.
    pub errors: Option<Vec<f64>>,
}

impl Series {
    pub fn new(
        label: impl Into<String>,
        style: Style,
        color: &'static str,
        points: Vec<(f64, f64)>,
    ) -> Self {
        Self {
            label: label.into(),
            style,
            color,
            points,
            errors: None,
        }
    }

    pub fn with_errors(mut self, errors: Vec<f64>) -> Self {
        self.errors = Some(errors);
        self
    }
}

#[derive(Clone, Debug)]
pub struct Panel {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub series: Vec<Series>,
}

fn ticks(lo: f64, hi: f64) -> Vec<f64> {
    (0..=4).map(|k| lo + (hi - lo) * k as f64 / 4.0).collect()
}

fn tick_label(v: f64) -> String {
    let a = v.abs();
    if a != 0.0 && !(1e-3..1e4).contains(&a) {
        format!("{v:.2e}")
    } else {
        format!("{v:.3}")
    }
}

/// Panels stacked vertically with independent axes.
pub fn stacked_plot(panels: &[Panel]) -> String {
    let (width, ph) = (640.0, 260.0);
    let (left, right, top, bottom) = (70.0, 150.0, 30.0, 45.0);
    let mut s = header(width, panels.len() as f64 * ph);
    for (k, panel) in panels.iter().enumerate() {
        let oy = k as f64 * ph;
        let (pw, plot_h) = (width - left - right, ph - top - bottom);
        let all = panel.series.iter().flat_map(|se| {
            let errs = se
                .errors
                .clone()
                .unwrap_or_else(|| vec![0.0; se.points.len()]);
            se.points
                .iter()
                .zip(errs)
                .map(|(&(x, y), e)| (x, y - e, y + e))
                .collect::<Vec<_>>()
        });
        let (mut x_lo, mut x_hi, mut y_lo, mut y_hi) = (
            f64::INFINITY,
            f64::NEG_INFINITY,
            f64::INFINITY,
            f64::NEG_INFINITY,
        );
        for (x, lo, hi) in all {
            x_lo = x_lo.min(x);
            x_hi = x_hi.max(x);
            y_lo = y_lo.min(lo);
            y_hi = y_hi.max(hi);
        }
        if panel.series.iter().any(|se| se.style == Style::Bars) {
            y_lo = y_lo.min(0.0);
        }
        if x_hi.partial_cmp(&x_lo) != Some(std::cmp::Ordering::Greater) {
            x_hi = x_lo + 1.0;
        }
        if y_hi.partial_cmp(&y_lo) != Some(std::cmp::Ordering::Greater) {
            y_hi = y_lo + 1.0;
        }
        let margin = 0.05 * (y_hi - y_lo);
        let (y_lo, y_hi) = (y_lo - margin, y_hi + margin);
        let sx = |x: f64| left + (x - x_lo) / (x_hi - x_lo) * pw;
        let sy = |y: f64| oy + top + (y_hi - y) / (y_hi - y_lo) * plot_h;

        let _ = writeln!(s, "<g class=\"panel\">");
        let _ = writeln!(
            s,
            "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"middle\" {FONT}>{}</text>",
            left + pw / 2.0,
            oy + 18.0,
            escape(&panel.title)
        );
        let _ = writeln!(s, "<rect x=\"{left}\" y=\"{:.1}\" width=\"{pw}\" height=\"{plot_h}\" fill=\"none\" stroke=\"black\"/>", oy + top);
        for t in ticks(x_lo, x_hi) {
            let _ = writeln!(
                s,
                "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"middle\" {FONT}>{}</text>",
                sx(t),
                oy + top + plot_h + 14.0,
                tick_label(t)
            );
        }
        for t in ticks(y_lo, y_hi) {
            let _ = writeln!(
                s,
                "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"end\" {FONT}>{}</text>",
                left - 4.0,
                sy(t) + 4.0,
                tick_label(t)
            );
        }
        let _ = writeln!(
            s,
            "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"middle\" {FONT}>{}</text>",
            left + pw / 2.0,
            oy + ph - 8.0,
            escape(&panel.x_label)
        );
        let _ = writeln!(
            s,
            "<text transform=\"translate(14 {:.1}) rotate(-90)\" text-anchor=\"middle\" {FONT}>{}</text>",
            oy + top + plot_h / 2.0,
            escape(&panel.y_label)
        );

        let bar_w = panel
            .series
            .iter()
            .filter(|se| se.style == Style::Bars && se.points.len() > 1)
            .map(|se| 0.8 * pw / se.points.len() as f64)
            .fold(8.0, f64::min);
        for (n, se) in panel.series.iter().enumerate() {
            match se.style {
                Style::Line => {
                    let pts: Vec<String> = se
                        .points
                        .iter()
                        .map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y)))
                        .collect();
                    let _ = writeln!(s, "<polyline fill=\"none\" stroke=\"{}\" stroke-width=\"1.5\" points=\"{}\"/>", se.color, pts.join(" "));
                }
                Style::Points => {
                    for &(x, y) in &se.points {
                        let _ = writeln!(
                            s,
                            "<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"2.5\" fill=\"{}\"/>",
                            sx(x),
                            sy(y),
                            se.color
                        );
                    }
                }
                Style::Bars => {
                    let base = sy(0.0f64.clamp(y_lo, y_hi));
                    for &(x, y) in &se.points {
                        let (a, b) = (sy(y).min(base), sy(y).max(base));
                        let _ = writeln!(
                            s,
                            "<rect x=\"{:.2}\" y=\"{a:.2}\" width=\"{bar_w:.2}\" height=\"{:.2}\" fill=\"{}\" fill-opacity=\"0.6\"/>",
                            sx(x) - bar_w / 2.0,
                            b - a,
                            se.color
                        );
                    }
                }
            }
            if let Some(errs) = &se.errors {
                for (&(x, y), e) in se.points.iter().zip(errs) {
                    let _ = writeln!(
                        s,
                        "<line x1=\"{0:.2}\" x2=\"{0:.2}\" y1=\"{1:.2}\" y2=\"{2:.2}\" stroke=\"{3}\"/>",
                        sx(x),
                        sy(y - e),
                        sy(y + e),
                        se.color
                    );
                }
            }
            let ly = oy + top + 12.0 + 16.0 * n as f64;
            let _ = writeln!(
                s,
                "<rect x=\"{:.1}\" y=\"{:.1}\" width=\"10\" height=\"10\" fill=\"{}\"/>",
                left + pw + 10.0,
                ly - 9.0,
                se.color
            );
            let _ = writeln!(
                s,
                "<text x=\"{:.1}\" y=\"{ly:.1}\" {FONT}>{}</text>",
                left + pw + 24.0,
                escape(&se.label)
            );
        }
        let _ = writeln!(s, "</g>");
    }
    s.push_str("</svg>\n");
    s
}
