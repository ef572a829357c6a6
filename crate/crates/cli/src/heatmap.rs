//! SVG heatmaps of scan grids.

use std::fmt::Write;

use effham_core::scan::ScanGrid;
use effham_core::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Quantity {
    Gamma,
    OneMinusF,
}

impl Quantity {
    fn label(self) -> &'static str {
        match self {
            Quantity::Gamma => "Gamma",
            Quantity::OneMinusF => "1 - F",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct HeatmapStyle {
    pub width: u32,
    pub height: u32,
    /// Colour anchors for 0, 1/4, 1/2, 3/4 and 1 of the value range.
    pub stops: [[u8; 3]; 5],
    pub nan_color: [u8; 3],
    pub x_label: String,
    pub y_label: String,
}

impl Default for HeatmapStyle {
    fn default() -> Self {
        HeatmapStyle {
            width: 640,
            height: 480,
            // Viridis samples; relative luminance increases monotonically.
            stops: [
                [68, 1, 84],
                [59, 82, 139],
                [33, 145, 140],
                [94, 201, 98],
                [253, 231, 37],
            ],
            nan_color: [128, 128, 128],
            x_label: "dgamma1(T)".into(),
            y_label: "gamma1(T)".into(),
        }
    }
}

const MARGIN_LEFT: f64 = 70.0;
const MARGIN_RIGHT: f64 = 110.0;
const MARGIN_TOP: f64 = 30.0;
const MARGIN_BOTTOM: f64 = 50.0;

/// Linear interpolation between the five stops, `t` clamped to `[0, 1]`.
pub fn color_at(stops: &[[u8; 3]; 5], t: f64) -> [u8; 3] {
    let t = if t.is_nan() { 0.0 } else { t.clamp(0.0, 1.0) };
    let x = t * 4.0;
    let k = (x.floor() as usize).min(3);
    let f = x - k as f64;
    let mut out = [0u8; 3];
    for (c, o) in out.iter_mut().enumerate() {
        let a = stops[k][c] as f64;
        let b = stops[k + 1][c] as f64;
        *o = (a + f * (b - a)).round() as u8;
    }
    out
}

fn hex(c: [u8; 3]) -> String {
    format!("#{:02x}{:02x}{:02x}", c[0], c[1], c[2])
}

/// One `rect` per cell with `gamma1_T` increasing upward and `dgamma1_T` to the
/// right. NaN cells use `style.nan_color`; the legend shows the finite min/max.
pub fn render_heatmap(grid: &ScanGrid, which: Quantity, style: &HeatmapStyle) -> Result<String> {
    let rows = grid.gamma1_t.len();
    let cols = grid.dgamma1_t.len();
    if rows == 0 || cols == 0 || grid.is_empty() {
        return Err(Error::EmptyGrid);
    }
    let values = match which {
        Quantity::Gamma => &grid.gamma_cap,
        Quantity::OneMinusF => &grid.infidelity,
    };
    let finite = values.iter().copied().filter(|v| v.is_finite());
    let (lo, hi) = finite.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| {
        (a.min(v), b.max(v))
    });
    let (lo, hi) = if lo.is_finite() { (lo, hi) } else { (0.0, 0.0) };
    let span = hi - lo;

    let (w, h) = (style.width as f64, style.height as f64);
    let pw = (w - MARGIN_LEFT - MARGIN_RIGHT).max(1.0);
    let ph = (h - MARGIN_TOP - MARGIN_BOTTOM).max(1.0);
    let cw = pw / cols as f64;
    let ch = ph / rows as f64;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{}" height="{}" viewBox="0 0 {} {}">"#,
        style.width, style.height, style.width, style.height
    );
    let _ = writeln!(
        s,
        r#"<rect x="0" y="0" width="{w}" height="{h}" fill="white"/>"#
    );
    let _ = writeln!(s, r#"<g class="cells">"#);
    for i in 0..rows {
        for j in 0..cols {
            let v = values[grid.index(i, j)];
            let fill = if v.is_finite() {
                let t = if span > 0.0 { (v - lo) / span } else { 0.0 };
                hex(color_at(&style.stops, t))
            } else {
                hex(style.nan_color)
            };
            let x = MARGIN_LEFT + j as f64 * cw;
            let y = MARGIN_TOP + (rows - 1 - i) as f64 * ch;
            let _ = writeln!(
                s,
                r#"<rect class="cell" x="{x:.3}" y="{y:.3}" width="{cw:.3}" height="{ch:.3}" fill="{fill}"/>"#
            );
        }
    }
    let _ = writeln!(s, "</g>");

    let axis = |v: &[f64]| (v[0], v[v.len() - 1]);
    let (x0, x1) = axis(&grid.dgamma1_t);
    let (y0, y1) = axis(&grid.gamma1_t);
    let bottom = MARGIN_TOP + ph;
    let right = MARGIN_LEFT + pw;
    let _ = writeln!(
        s,
        r#"<rect x="{MARGIN_LEFT}" y="{MARGIN_TOP}" width="{pw:.3}" height="{ph:.3}" fill="none" stroke="black"/>"#
    );
    let text = |s: &mut String, x: f64, y: f64, anchor: &str, body: &str| {
        let _ = writeln!(
            s,
            r#"<text x="{x:.3}" y="{y:.3}" font-family="sans-serif" font-size="12" text-anchor="{anchor}">{body}</text>"#
        );
    };
    text(
        &mut s,
        MARGIN_LEFT,
        bottom + 16.0,
        "start",
        &format!("{x0:.3}"),
    );
    text(&mut s, right, bottom + 16.0, "end", &format!("{x1:.3}"));
    text(
        &mut s,
        MARGIN_LEFT + pw / 2.0,
        bottom + 36.0,
        "middle",
        &escape(&style.x_label),
    );
    text(
        &mut s,
        MARGIN_LEFT - 6.0,
        bottom,
        "end",
        &format!("{y0:.3}"),
    );
    text(
        &mut s,
        MARGIN_LEFT - 6.0,
        MARGIN_TOP + 12.0,
        "end",
        &format!("{y1:.3}"),
    );
    let _ = writeln!(
        s,
        r#"<text x="16" y="{:.3}" font-family="sans-serif" font-size="12" text-anchor="middle" transform="rotate(-90 16 {:.3})">{}</text>"#,
        MARGIN_TOP + ph / 2.0,
        MARGIN_TOP + ph / 2.0,
        escape(&style.y_label)
    );

    // Legend: five bands, maximum on top.
    let lx = right + 20.0;
    let band = ph / 5.0;
    let _ = writeln!(s, r#"<g class="legend">"#);
    for (k, c) in style.stops.iter().rev().enumerate() {
        let _ = writeln!(
            s,
            r#"<rect x="{lx:.3}" y="{:.3}" width="20" height="{band:.3}" fill="{}"/>"#,
            MARGIN_TOP + k as f64 * band,
            hex(*c)
        );
    }
    text(
        &mut s,
        lx + 26.0,
        MARGIN_TOP + 12.0,
        "start",
        &format!("max {hi:.4e}"),
    );
    text(&mut s, lx + 26.0, bottom, "start", &format!("min {lo:.4e}"));
    text(&mut s, lx, MARGIN_TOP - 10.0, "start", which.label());
    let _ = writeln!(s, "</g>");
    s.push_str("</svg>\n");
    Ok(s)
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}
