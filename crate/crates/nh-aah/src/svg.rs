//! Minimal deterministic SVG plotting.
//!
//! Hand-rolled figures for the standard experiment artifacts: spectrum
//! sweeps, complex-plane scatters, wavefunction profiles, pump sweeps, and
//! polar phase diagrams. Plots are data-faithful rather than publication
//! replicas; CSV files remain the quantitative record. Output is fully
//! deterministic (fixed-precision coordinates, no timestamps, no ids), so
//! reruns produce byte-identical files.

use std::f64::consts::TAU;
use std::fmt::Write as _;

use crate::export::SpectrumRow;
use crate::topology::{PhaseDiagram, PhaseLabel};

/// Fill colors shared with the usual phase-diagram color semantics:
/// orange nontrivial, blue trivial, black gapless.
pub const COLOR_NONTRIVIAL: &str = "#e8913a";
pub const COLOR_TRIVIAL: &str = "#3d7ec2";
pub const COLOR_GAPLESS: &str = "#1a1a1a";
const COLOR_POINT: &str = "#5a5a5a";
const COLOR_HIGHLIGHT: &str = "#e8913a";
const SERIES_COLORS: [&str; 4] = ["#e8913a", "#3d7ec2", "#4a9b5e", "#8755a1"];

/// Fixed-precision pixel coordinate (deterministic output, no `-0.000`).
fn fmt(x: f64) -> String {
    let s = format!("{x:.3}");
    if s == "-0.000" {
        "0.000".into()
    } else {
        s
    }
}

/// Short tick label: three decimals with trailing zeros trimmed.
fn tick_label(x: f64) -> String {
    let mut s = format!("{x:.3}");
    while s.contains('.') && (s.ends_with('0') || s.ends_with('.')) {
        s.pop();
    }
    if s == "-0" {
        s = "0".into();
    }
    s
}

fn document(width: f64, height: f64, body: &str) -> String {
    format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" \
         viewBox=\"0 0 {w} {h}\" font-family=\"monospace\" font-size=\"11\">\n\
         <rect width=\"{w}\" height=\"{h}\" fill=\"#ffffff\"/>\n{body}</svg>\n",
        w = fmt(width),
        h = fmt(height),
    )
}

/// One rectangular plot area mapping data coordinates to pixels.
struct Axes {
    x0: f64,
    y0: f64,
    w: f64,
    h: f64,
    xmin: f64,
    xmax: f64,
    ymin: f64,
    ymax: f64,
}

fn padded(mut min: f64, mut max: f64) -> (f64, f64) {
    if !min.is_finite() || !max.is_finite() {
        return (0.0, 1.0);
    }
    if min == max {
        min -= 1.0;
        max += 1.0;
    }
    let pad = 0.05 * (max - min);
    (min - pad, max + pad)
}

impl Axes {
    /// Frame at pixel origin `(x0, y0)` sized `w x h`, spanning the padded
    /// hull of the finite data values.
    fn fit(x0: f64, y0: f64, w: f64, h: f64, xs: &[f64], ys: &[f64]) -> Self {
        let hull = |vals: &[f64]| {
            let mut min = f64::INFINITY;
            let mut max = f64::NEG_INFINITY;
            for &v in vals.iter().filter(|v| v.is_finite()) {
                min = min.min(v);
                max = max.max(v);
            }
            padded(min, max)
        };
        let (xmin, xmax) = hull(xs);
        let (ymin, ymax) = hull(ys);
        Axes {
            x0,
            y0,
            w,
            h,
            xmin,
            xmax,
            ymin,
            ymax,
        }
    }

    fn px(&self, x: f64) -> f64 {
        self.x0 + (x - self.xmin) / (self.xmax - self.xmin) * self.w
    }

    fn py(&self, y: f64) -> f64 {
        self.y0 + self.h - (y - self.ymin) / (self.ymax - self.ymin) * self.h
    }

    fn contains(&self, x: f64, y: f64) -> bool {
        x.is_finite() && y.is_finite() && (self.xmin..=self.xmax).contains(&x) && (self.ymin..=self.ymax).contains(&y)
    }

    /// Frame box, five ticks per side with labels, and axis titles.
    fn frame(&self, body: &mut String, xlabel: &str, ylabel: &str) {
        let _ = write!(
            body,
            "<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"#222222\"/>\n",
            fmt(self.x0),
            fmt(self.y0),
            fmt(self.w),
            fmt(self.h)
        );
        for i in 0..5 {
            let f = i as f64 / 4.0;
            let xv = self.xmin + f * (self.xmax - self.xmin);
            let xp = self.px(xv);
            let ybase = self.y0 + self.h;
            let _ = write!(
                body,
                "<line x1=\"{x}\" y1=\"{y0}\" x2=\"{x}\" y2=\"{y1}\" stroke=\"#222222\"/>\n\
                 <text x=\"{x}\" y=\"{yt}\" text-anchor=\"middle\">{label}</text>\n",
                x = fmt(xp),
                y0 = fmt(ybase),
                y1 = fmt(ybase + 4.0),
                yt = fmt(ybase + 16.0),
                label = tick_label(xv),
            );
            let yv = self.ymin + f * (self.ymax - self.ymin);
            let yp = self.py(yv);
            let _ = write!(
                body,
                "<line x1=\"{x0}\" y1=\"{y}\" x2=\"{x1}\" y2=\"{y}\" stroke=\"#222222\"/>\n\
                 <text x=\"{xt}\" y=\"{yt}\" text-anchor=\"end\">{label}</text>\n",
                x0 = fmt(self.x0 - 4.0),
                x1 = fmt(self.x0),
                y = fmt(yp),
                xt = fmt(self.x0 - 7.0),
                yt = fmt(yp + 4.0),
                label = tick_label(yv),
            );
        }
        let _ = write!(
            body,
            "<text x=\"{x}\" y=\"{y}\" text-anchor=\"middle\">{xlabel}</text>\n",
            x = fmt(self.x0 + self.w / 2.0),
            y = fmt(self.y0 + self.h + 32.0),
        );
        let _ = write!(
            body,
            "<text x=\"{x}\" y=\"{y}\" text-anchor=\"middle\" \
             transform=\"rotate(-90 {x} {y})\">{ylabel}</text>\n",
            x = fmt(self.x0 - 48.0),
            y = fmt(self.y0 + self.h / 2.0),
        );
    }

    fn circle(&self, body: &mut String, x: f64, y: f64, r: f64, color: &str) {
        if self.contains(x, y) {
            let _ = write!(
                body,
                "<circle cx=\"{}\" cy=\"{}\" r=\"{}\" fill=\"{}\"/>\n",
                fmt(self.px(x)),
                fmt(self.py(y)),
                fmt(r),
                color
            );
        }
    }

    fn polyline(&self, body: &mut String, pts: &[(f64, f64)], color: &str) {
        let coords: Vec<String> = pts
            .iter()
            .filter(|(x, y)| x.is_finite() && y.is_finite())
            .map(|&(x, y)| format!("{},{}", fmt(self.px(x)), fmt(self.py(y))))
            .collect();
        if coords.len() >= 2 {
            let _ = write!(
                body,
                "<polyline points=\"{}\" fill=\"none\" stroke=\"{}\" stroke-width=\"1.5\"/>\n",
                coords.join(" "),
                color
            );
        }
    }
}

fn title_text(body: &mut String, x: f64, title: &str) {
    let _ = write!(
        body,
        "<text x=\"{}\" y=\"18\" text-anchor=\"middle\" font-size=\"13\">{}</text>\n",
        fmt(x),
        escape(title)
    );
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Two stacked panels, `Re(E)` and `Im(E)` versus `delta`, with zero-mode
/// eigenvalues highlighted on top of the regular spectrum.
pub fn spectrum_sweep_svg(title: &str, rows: &[SpectrumRow]) -> String {
    let (w, h) = (640.0, 640.0);
    let mut body = String::new();
    title_text(&mut body, w / 2.0, title);
    let deltas: Vec<f64> = rows.iter().map(|r| r.delta).collect();
    for (panel, ylabel) in [(0usize, "Re(E)"), (1usize, "Im(E)")] {
        let ys: Vec<f64> = rows
            .iter()
            .map(|r| if panel == 0 { r.re_e } else { r.im_e })
            .collect();
        let ax = Axes::fit(70.0, 40.0 + panel as f64 * 300.0, 530.0, 240.0, &deltas, &ys);
        ax.frame(&mut body, "delta", ylabel);
        for (r, &y) in rows.iter().zip(&ys) {
            if !r.is_zero_mode {
                ax.circle(&mut body, r.delta, y, 1.2, COLOR_POINT);
            }
        }
        for (r, &y) in rows.iter().zip(&ys) {
            if r.is_zero_mode {
                ax.circle(&mut body, r.delta, y, 2.2, COLOR_HIGHLIGHT);
            }
        }
    }
    document(w, h, &body)
}

/// Single-panel scatter; `true`-flagged points draw larger, highlighted,
/// and on top.
pub fn scatter_svg(title: &str, points: &[(f64, f64, bool)], xlabel: &str, ylabel: &str) -> String {
    let (w, h) = (560.0, 480.0);
    let mut body = String::new();
    title_text(&mut body, w / 2.0, title);
    let xs: Vec<f64> = points.iter().map(|p| p.0).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1).collect();
    let ax = Axes::fit(70.0, 40.0, 450.0, 380.0, &xs, &ys);
    ax.frame(&mut body, xlabel, ylabel);
    for &(x, y, hot) in points.iter().filter(|p| !p.2) {
        let _ = hot;
        ax.circle(&mut body, x, y, 2.0, COLOR_POINT);
    }
    for &(x, y, _) in points.iter().filter(|p| p.2) {
        ax.circle(&mut body, x, y, 3.2, COLOR_HIGHLIGHT);
    }
    document(w, h, &body)
}

/// Connected line through `(x, y)` points (sweeps, spectra, onset curves).
pub fn line_svg(title: &str, points: &[(f64, f64)], xlabel: &str, ylabel: &str) -> String {
    let (w, h) = (560.0, 480.0);
    let mut body = String::new();
    title_text(&mut body, w / 2.0, title);
    let xs: Vec<f64> = points.iter().map(|p| p.0).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1).collect();
    let ax = Axes::fit(70.0, 40.0, 450.0, 380.0, &xs, &ys);
    ax.frame(&mut body, xlabel, ylabel);
    ax.polyline(&mut body, points, SERIES_COLORS[1]);
    for &(x, y) in points {
        ax.circle(&mut body, x, y, 2.0, COLOR_POINT);
    }
    document(w, h, &body)
}

/// Per-site profiles over sites `1..=N`, one polyline per named series.
/// With `log_y` the vertical axis is `log10(value)` and non-positive
/// values are dropped (semi-log localization plots).
pub fn profile_svg(title: &str, series: &[(&str, &[f64])], log_y: bool) -> String {
    let (w, h) = (640.0, 480.0);
    let mut body = String::new();
    title_text(&mut body, w / 2.0, title);
    let mut pts_per_series: Vec<Vec<(f64, f64)>> = Vec::new();
    for (_, values) in series {
        pts_per_series.push(
            values
                .iter()
                .enumerate()
                .filter_map(|(i, &v)| {
                    let y = if log_y {
                        if v > 0.0 {
                            v.log10()
                        } else {
                            return None;
                        }
                    } else {
                        v
                    };
                    Some(((i + 1) as f64, y))
                })
                .collect(),
        );
    }
    let xs: Vec<f64> = pts_per_series.iter().flatten().map(|p| p.0).collect();
    let ys: Vec<f64> = pts_per_series.iter().flatten().map(|p| p.1).collect();
    let ax = Axes::fit(70.0, 40.0, 530.0, 380.0, &xs, &ys);
    let ylabel = if log_y { "log10(amplitude)" } else { "amplitude" };
    ax.frame(&mut body, "site", ylabel);
    for (s, ((name, _), pts)) in series.iter().zip(&pts_per_series).enumerate() {
        let color = SERIES_COLORS[s % SERIES_COLORS.len()];
        ax.polyline(&mut body, pts, color);
        let _ = write!(
            body,
            "<text x=\"{x}\" y=\"{y}\" fill=\"{color}\">{name}</text>\n",
            x = fmt(610.0 - 120.0),
            y = fmt(52.0 + 14.0 * s as f64),
            name = escape(name),
        );
    }
    document(w, h, &body)
}

fn label_color(label: PhaseLabel) -> &'static str {
    match label {
        PhaseLabel::Nontrivial => COLOR_NONTRIVIAL,
        PhaseLabel::Trivial => COLOR_TRIVIAL,
        PhaseLabel::Gapless => COLOR_GAPLESS,
    }
}

/// Polar phase diagram: radius `V`, angle `delta`, one annular-sector cell
/// per grid point, orange/blue/black for nontrivial/trivial/gapless. Cells
/// are drawn as short polygon arcs (4 subdivisions per edge), which keeps
/// the output simple and deterministic.
pub fn polar_phase_svg(d: &PhaseDiagram) -> String {
    let size = 560.0;
    let cx = size / 2.0;
    let cy = size / 2.0 + 10.0;
    let v_max = d.v_grid.last().copied().unwrap_or(1.0);
    let radius_px = 230.0;
    let scale = radius_px / v_max;
    let nv = d.v_grid.len();
    let ndelta = d.delta_grid.len();
    let dr = v_max / nv as f64;
    let dtheta = TAU / ndelta as f64;

    let mut body = String::new();
    title_text(
        &mut body,
        size / 2.0,
        &format!("phase diagram, alpha = {}/{}", d.alpha.q(), d.alpha.p()),
    );
    let point = |r: f64, theta: f64| {
        format!(
            "{},{}",
            fmt(cx + r * scale * theta.cos()),
            fmt(cy - r * scale * theta.sin())
        )
    };
    for (i, &v) in d.v_grid.iter().enumerate() {
        let r_in = (v - 0.5 * dr).max(0.0);
        let r_out = v + 0.5 * dr;
        for (j, &delta) in d.delta_grid.iter().enumerate() {
            let a0 = delta - 0.5 * dtheta;
            let mut pts = Vec::with_capacity(10);
            for s in 0..=4 {
                pts.push(point(r_out, a0 + dtheta * s as f64 / 4.0));
            }
            for s in (0..=4).rev() {
                pts.push(point(r_in, a0 + dtheta * s as f64 / 4.0));
            }
            let color = label_color(d.labels[i][j]);
            let _ = write!(
                body,
                "<polygon points=\"{}\" fill=\"{color}\" stroke=\"{color}\" stroke-width=\"0.4\"/>\n",
                pts.join(" ")
            );
        }
    }
    // Radial scale marker and legend.
    let _ = write!(
        body,
        "<line x1=\"{x0}\" y1=\"{y}\" x2=\"{x1}\" y2=\"{y}\" stroke=\"#222222\"/>\n\
         <text x=\"{x1}\" y=\"{yt}\" text-anchor=\"end\">V = {v}</text>\n",
        x0 = fmt(cx),
        x1 = fmt(cx + radius_px),
        y = fmt(cy + radius_px + 18.0),
        yt = fmt(cy + radius_px + 34.0),
        v = tick_label(v_max),
    );
    for (s, (label, color)) in [
        ("nontrivial", COLOR_NONTRIVIAL),
        ("trivial", COLOR_TRIVIAL),
        ("gapless", COLOR_GAPLESS),
    ]
    .iter()
    .enumerate()
    {
        let y = 40.0 + 16.0 * s as f64;
        let _ = write!(
            body,
            "<rect x=\"16\" y=\"{y0}\" width=\"10\" height=\"10\" fill=\"{color}\"/>\n\
             <text x=\"30\" y=\"{yt}\">{label}</text>\n",
            y0 = fmt(y - 9.0),
            yt = fmt(y),
        );
    }
    document(size, size + 40.0, &body)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Rational;
    use crate::topology::phase_diagram;

    fn sample_rows() -> Vec<SpectrumRow> {
        vec![
            SpectrumRow {
                delta: 0.1,
                index: 0,
                re_e: -1.0,
                im_e: 0.2,
                is_zero_mode: false,
            },
            SpectrumRow {
                delta: 0.1,
                index: 1,
                re_e: 0.0,
                im_e: 0.9,
                is_zero_mode: true,
            },
            SpectrumRow {
                delta: 0.2,
                index: 0,
                re_e: 1.0,
                im_e: -0.2,
                is_zero_mode: false,
            },
        ]
    }

    #[test]
    fn documents_are_deterministic_and_well_formed() {
        let rows = sample_rows();
        let a = spectrum_sweep_svg("sweep", &rows);
        let b = spectrum_sweep_svg("sweep", &rows);
        assert_eq!(a, b);
        assert!(a.starts_with("<svg xmlns"));
        assert!(a.ends_with("</svg>\n"));
        assert!(a.contains("Re(E)") && a.contains("Im(E)"));
        assert!(a.contains(COLOR_HIGHLIGHT));
    }

    #[test]
    fn scatter_and_line_render_points() {
        let svg = scatter_svg("s", &[(0.0, 1.0, false), (1.0, -1.0, true)], "x", "y");
        assert_eq!(svg.matches("<circle").count(), 2);
        let svg = line_svg("l", &[(0.0, 0.0), (1.0, 2.0), (2.0, 1.0)], "x", "y");
        assert!(svg.contains("<polyline"));
        assert_eq!(svg.matches("<circle").count(), 3);
    }

    #[test]
    fn log_profiles_drop_nonpositive_values() {
        let values = [1.0, 0.1, 0.0, 0.01];
        let svg = profile_svg("p", &[("mode", &values[..])], true);
        assert!(svg.contains("log10(amplitude)"));
        // The zero sample is dropped: polyline has three points.
        let pts = svg
            .split("points=\"")
            .nth(1)
            .unwrap()
            .split('"')
            .next()
            .unwrap();
        assert_eq!(pts.split(' ').count(), 3);
    }

    #[test]
    fn polar_diagram_paints_every_cell_with_phase_colors() {
        let d = phase_diagram(Rational::new(1, 4).unwrap(), 2.0, 8, 16).unwrap();
        let svg = polar_phase_svg(&d);
        assert_eq!(svg.matches("<polygon").count(), 8 * 16);
        assert!(svg.contains(COLOR_NONTRIVIAL));
        assert!(svg.contains(COLOR_TRIVIAL));
        assert!(svg.contains(COLOR_GAPLESS));
        assert!(svg.contains("alpha = 1/4"));
        assert_eq!(svg, polar_phase_svg(&d));
    }
}
