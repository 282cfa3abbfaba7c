//! Minimal deterministic SVG line charts for trace plots.
//!
//! Everything is rendered with fixed-precision coordinates and no external
//! assets, so the same trace always produces byte-identical SVG.

use std::fmt::Write;

/// Fixed series palette, applied in order.
pub const PALETTE: [&str; 4] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd"];

/// Longest polyline we emit; denser series are strided down to this.
const MAX_POINTS: usize = 2000;

const PANEL_W: f64 = 460.0;
const PANEL_H: f64 = 300.0;
const MARGIN_L: f64 = 62.0;
const MARGIN_R: f64 = 14.0;
const MARGIN_T: f64 = 30.0;
const MARGIN_B: f64 = 44.0;
const TITLE_H: f64 = 26.0;

/// One polyline.
pub struct Series {
    pub label: String,
    pub color: &'static str,
    pub points: Vec<(f64, f64)>,
}

/// One chart panel; panels are tiled onto a grid by [`render`].
pub struct Panel {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub series: Vec<Series>,
    /// Shaded x-interval, e.g. the queue extent.
    pub band: Option<(f64, f64)>,
    /// Dashed vertical marker with a small caption, e.g. the latch point.
    pub marker: Option<(f64, String)>,
    /// Overrides the computed y-range so panels can share an axis.
    pub y_range: Option<(f64, f64)>,
}

fn nice(v: f64) -> String {
    if v == 0.0 {
        return "0".to_string();
    }
    let a = v.abs();
    if a >= 1000.0 {
        format!("{v:.0}")
    } else if a >= 10.0 {
        format!("{v:.1}")
    } else {
        format!("{v:.2}")
    }
}

fn data_range(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for v in values {
        lo = lo.min(v);
        hi = hi.max(v);
    }
    if !lo.is_finite() || !hi.is_finite() {
        return (0.0, 1.0);
    }
    if hi - lo < 1e-9 {
        return (lo - 1.0, hi + 1.0);
    }
    let pad = 0.05 * (hi - lo);
    (lo - pad, hi + pad)
}

fn stride(points: &[(f64, f64)]) -> Vec<(f64, f64)> {
    if points.len() <= MAX_POINTS {
        return points.to_vec();
    }
    let step = points.len().div_ceil(MAX_POINTS);
    let mut out: Vec<(f64, f64)> = points.iter().copied().step_by(step).collect();
    if out.last() != points.last() {
        out.push(*points.last().unwrap());
    }
    out
}

struct Mapper {
    x0: f64,
    y0: f64,
    w: f64,
    h: f64,
    x_lo: f64,
    x_hi: f64,
    y_lo: f64,
    y_hi: f64,
}

impl Mapper {
    fn x(&self, v: f64) -> f64 {
        self.x0 + (v - self.x_lo) / (self.x_hi - self.x_lo) * self.w
    }

    fn y(&self, v: f64) -> f64 {
        self.y0 + self.h - (v - self.y_lo) / (self.y_hi - self.y_lo) * self.h
    }
}

fn render_panel(svg: &mut String, panel: &Panel, ox: f64, oy: f64) {
    let (x_lo, x_hi) = data_range(
        panel
            .series
            .iter()
            .flat_map(|s| s.points.iter().map(|p| p.0)),
    );
    let (y_lo, y_hi) = panel.y_range.unwrap_or_else(|| {
        data_range(
            panel
                .series
                .iter()
                .flat_map(|s| s.points.iter().map(|p| p.1)),
        )
    });
    let m = Mapper {
        x0: ox + MARGIN_L,
        y0: oy + MARGIN_T,
        w: PANEL_W - MARGIN_L - MARGIN_R,
        h: PANEL_H - MARGIN_T - MARGIN_B,
        x_lo,
        x_hi,
        y_lo,
        y_hi,
    };

    let _ = write!(
        svg,
        r##"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="#ffffff" stroke="#888" stroke-width="1"/>"##,
        m.x0, m.y0, m.w, m.h
    );

    if let Some((b0, b1)) = panel.band {
        let x0 = m.x(b0.max(x_lo)).max(m.x0);
        let x1 = m.x(b1.min(x_hi)).min(m.x0 + m.w);
        if x1 > x0 {
            let _ = write!(
                svg,
                r##"<rect x="{x0:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="#1f77b4" opacity="0.10"/>"##,
                m.y0,
                x1 - x0,
                m.h
            );
        }
    }

    // Grid and ticks: five stops per axis.
    for i in 0..=4 {
        let fx = x_lo + (x_hi - x_lo) * i as f64 / 4.0;
        let px = m.x(fx);
        let _ = write!(
            svg,
            r##"<line x1="{px:.2}" y1="{:.2}" x2="{px:.2}" y2="{:.2}" stroke="#ddd" stroke-width="0.5"/>"##,
            m.y0,
            m.y0 + m.h
        );
        let _ = write!(
            svg,
            r##"<text x="{px:.2}" y="{:.2}" font-size="10" text-anchor="middle" fill="#444">{}</text>"##,
            m.y0 + m.h + 14.0,
            nice(fx)
        );
        let fy = y_lo + (y_hi - y_lo) * i as f64 / 4.0;
        let py = m.y(fy);
        let _ = write!(
            svg,
            r##"<line x1="{:.2}" y1="{py:.2}" x2="{:.2}" y2="{py:.2}" stroke="#ddd" stroke-width="0.5"/>"##,
            m.x0,
            m.x0 + m.w
        );
        let _ = write!(
            svg,
            r##"<text x="{:.2}" y="{:.2}" font-size="10" text-anchor="end" fill="#444">{}</text>"##,
            m.x0 - 5.0,
            py + 3.5,
            nice(fy)
        );
    }

    if let Some((at, label)) = &panel.marker {
        if *at >= x_lo && *at <= x_hi {
            let px = m.x(*at);
            let _ = write!(
                svg,
                r##"<line x1="{px:.2}" y1="{:.2}" x2="{px:.2}" y2="{:.2}" stroke="#555" stroke-width="1" stroke-dasharray="4 3"/>"##,
                m.y0,
                m.y0 + m.h
            );
            let _ = write!(
                svg,
                r##"<text x="{:.2}" y="{:.2}" font-size="9" fill="#555">{label}</text>"##,
                px + 3.0,
                m.y0 + 10.0
            );
        }
    }

    for series in &panel.series {
        let pts = stride(&series.points);
        if pts.is_empty() {
            continue;
        }
        let mut path = String::new();
        for (i, (x, y)) in pts.iter().enumerate() {
            let cmd = if i == 0 { 'M' } else { 'L' };
            let _ = write!(path, "{cmd}{:.2} {:.2}", m.x(*x), m.y(y.clamp(y_lo, y_hi)));
        }
        let _ = write!(
            svg,
            r##"<path d="{path}" fill="none" stroke="{}" stroke-width="1.5"/>"##,
            series.color
        );
    }

    // Legend, top-left inside the plot area.
    for (i, series) in panel.series.iter().enumerate() {
        let ly = m.y0 + 12.0 + 13.0 * i as f64;
        let _ = write!(
            svg,
            r##"<line x1="{:.2}" y1="{ly:.2}" x2="{:.2}" y2="{ly:.2}" stroke="{}" stroke-width="2"/>"##,
            m.x0 + 6.0,
            m.x0 + 24.0,
            series.color
        );
        let _ = write!(
            svg,
            r##"<text x="{:.2}" y="{:.2}" font-size="10" fill="#222">{}</text>"##,
            m.x0 + 28.0,
            ly + 3.5,
            series.label
        );
    }

    let _ = write!(
        svg,
        r##"<text x="{:.2}" y="{:.2}" font-size="12" font-weight="bold" text-anchor="middle" fill="#222">{}</text>"##,
        ox + PANEL_W / 2.0,
        oy + 18.0,
        panel.title
    );
    let _ = write!(
        svg,
        r##"<text x="{:.2}" y="{:.2}" font-size="10" text-anchor="middle" fill="#444">{}</text>"##,
        m.x0 + m.w / 2.0,
        oy + PANEL_H - 10.0,
        panel.x_label
    );
    let _ = write!(
        svg,
        r##"<text x="{:.2}" y="{:.2}" font-size="10" text-anchor="middle" fill="#444" transform="rotate(-90 {:.2} {:.2})">{}</text>"##,
        ox + 14.0,
        m.y0 + m.h / 2.0,
        ox + 14.0,
        m.y0 + m.h / 2.0,
        panel.y_label
    );
}

/// Tiles `panels` onto a `cols`-wide grid under a shared title and returns
/// the complete SVG document.
pub fn render(title: &str, panels: &[Panel], cols: usize) -> String {
    let cols = cols.max(1);
    let rows = panels.len().div_ceil(cols);
    let width = PANEL_W * cols as f64;
    let height = TITLE_H + PANEL_H * rows as f64;
    let mut svg = String::new();
    let _ = write!(
        svg,
        r##"<svg xmlns="http://www.w3.org/2000/svg" width="{width:.0}" height="{height:.0}" viewBox="0 0 {width:.0} {height:.0}" font-family="Helvetica, Arial, sans-serif">"##
    );
    let _ = write!(
        svg,
        r##"<rect x="0" y="0" width="{width:.0}" height="{height:.0}" fill="#ffffff"/>"##
    );
    let _ = write!(
        svg,
        r##"<text x="{:.2}" y="18" font-size="14" font-weight="bold" text-anchor="middle" fill="#111">{title}</text>"##,
        width / 2.0
    );
    for (i, panel) in panels.iter().enumerate() {
        let ox = (i % cols) as f64 * PANEL_W;
        let oy = TITLE_H + (i / cols) as f64 * PANEL_H;
        render_panel(&mut svg, panel, ox, oy);
    }
    svg.push_str("</svg>");
    svg
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_panel() -> Panel {
        Panel {
            title: "speed".into(),
            x_label: "distance (m)".into(),
            y_label: "m/s".into(),
            series: vec![Series {
                label: "speed".into(),
                color: PALETTE[0],
                points: (0..100)
                    .map(|i| (i as f64, (i as f64 / 10.0).sin()))
                    .collect(),
            }],
            band: Some((20.0, 40.0)),
            marker: Some((10.0, "latch".into())),
            y_range: None,
        }
    }

    #[test]
    fn render_produces_wellformed_svg() {
        let svg = render("demo", &[sample_panel()], 2);
        assert!(svg.starts_with("<svg "));
        assert!(svg.ends_with("</svg>"));
        assert!(svg.contains("latch"));
        assert!(svg.contains("demo"));
    }

    #[test]
    fn render_is_deterministic() {
        let a = render("demo", &[sample_panel()], 1);
        let b = render("demo", &[sample_panel()], 1);
        assert_eq!(a, b);
    }

    #[test]
    fn long_series_are_strided_down() {
        let pts: Vec<(f64, f64)> = (0..100_000).map(|i| (i as f64, 1.0)).collect();
        let out = stride(&pts);
        assert!(out.len() <= MAX_POINTS + 1);
        assert_eq!(out.last(), pts.last());
    }

    #[test]
    fn degenerate_ranges_are_padded() {
        let (lo, hi) = data_range([3.0, 3.0].into_iter());
        assert!(lo < 3.0 && hi > 3.0);
    }
}
