//! Static SVG rendering of DepthGram point clouds.
//!
//! One SVG, three aligned panels (dimensions, time, time/correlation),
//! each a fixed `[0, 1]²` viewport so plots from different datasets are
//! visually comparable. Observations are circles — color by role when
//! labels are available, filled when flagged, hollow otherwise — with the
//! non-crossing envelope `g_n` drawn as a dashed polyline on request.
//! Output is a deterministic function of the inputs.

use std::fmt::Write as _;

use crate::depth::parabola_g;
use crate::engine::{DepthGram, Variant};
use crate::report::{role_name, DepthGramRow};
use crate::synth::Role;

const PANEL_SIZE: f64 = 320.0;
const MARGIN_LEFT: f64 = 56.0;
const MARGIN_BOTTOM: f64 = 46.0;
const MARGIN_TOP: f64 = 40.0;
const PANEL_GAP: f64 = 36.0;
const LEGEND_HEIGHT: f64 = 28.0;

/// One plottable observation point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlotPoint {
    pub variant: Variant,
    /// 1-based observation id.
    pub observation: usize,
    pub dg1: f64,
    pub dg2: f64,
    pub flagged: bool,
    /// Role when ground-truth labels are available.
    pub role: Option<Role>,
}

impl PlotPoint {
    /// Points straight from an in-memory analysis.
    pub fn from_depthgrams(grams: &[DepthGram], role_of: impl Fn(usize) -> Option<Role>) -> Vec<PlotPoint> {
        let mut points = Vec::new();
        for gram in grams {
            for i in 0..gram.dg1.len() {
                points.push(PlotPoint {
                    variant: gram.variant,
                    observation: i + 1,
                    dg1: gram.dg1[i],
                    dg2: gram.dg2[i],
                    flagged: gram.flagged[i],
                    role: role_of(i + 1),
                });
            }
        }
        points
    }

    /// Points from parsed CSV rows.
    pub fn from_rows(rows: &[DepthGramRow], role_of: impl Fn(usize) -> Option<Role>) -> Vec<PlotPoint> {
        rows.iter()
            .map(|row| PlotPoint {
                variant: row.variant,
                observation: row.observation,
                dg1: row.dg1,
                dg2: row.dg2,
                flagged: row.flagged,
                role: role_of(row.observation),
            })
            .collect()
    }
}

/// Rendering options.
#[derive(Debug, Clone)]
pub struct PlotOptions {
    /// Draw `g_n` for this observation count as a dashed guide curve.
    pub envelope_n: Option<usize>,
    /// Figure title.
    pub title: String,
}

impl Default for PlotOptions {
    fn default() -> Self {
        Self {
            envelope_n: None,
            title: "DepthGram".to_string(),
        }
    }
}

fn role_color(role: Option<Role>) -> &'static str {
    match role {
        None | Some(Role::Typical) => "#8a919c",
        Some(Role::Magnitude) => "#1e8e3e",
        Some(Role::Shape) => "#1a73e8",
        Some(Role::Joint) => "#e8710a",
    }
}

/// Renders the three-panel figure. Points may cover any subset of the
/// variants; panels without points still draw their axes.
pub fn render_svg(points: &[PlotPoint], options: &PlotOptions) -> String {
    let width = MARGIN_LEFT + 3.0 * PANEL_SIZE + 2.0 * PANEL_GAP + 24.0;
    let height = MARGIN_TOP + LEGEND_HEIGHT + PANEL_SIZE + MARGIN_BOTTOM;
    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r##"<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {width:.0} {height:.0}" font-family="Helvetica, Arial, sans-serif">"##
    );
    let _ = writeln!(
        svg,
        r##"<rect x="0" y="0" width="{width:.0}" height="{height:.0}" fill="white"/>"##
    );
    let _ = writeln!(
        svg,
        r##"<text x="{MARGIN_LEFT}" y="24" font-size="16" fill="#202124">{}</text>"##,
        xml_escape(&options.title)
    );

    // Legend: the four roles plus the filled/hollow flag convention.
    let legend_y = MARGIN_TOP + 12.0;
    let mut legend_x = MARGIN_LEFT;
    for (label, role, filled) in [
        ("typical", Some(Role::Typical), false),
        ("magnitude", Some(Role::Magnitude), false),
        ("shape", Some(Role::Shape), false),
        ("joint", Some(Role::Joint), false),
        ("flagged", None, true),
    ] {
        let color = match role {
            Some(r) => role_color(Some(r)),
            None => "#202124",
        };
        let fill = if filled { color } else { "none" };
        // Swatches are rects so that the `<circle>` count of the document is
        // exactly the number of plotted observations.
        let _ = writeln!(
            svg,
            r##"<rect x="{:.1}" y="{:.1}" width="8" height="8" fill="{fill}" stroke="{color}" stroke-width="1.2"/>"##,
            legend_x,
            legend_y - 8.0
        );
        let _ = writeln!(
            svg,
            r##"<text x="{:.1}" y="{legend_y:.1}" font-size="11" fill="#202124">{label}</text>"##,
            legend_x + 12.0
        );
        legend_x += 26.0 + 7.0 * label.len() as f64;
    }

    for (panel, variant) in Variant::ALL.into_iter().enumerate() {
        let x0 = MARGIN_LEFT + panel as f64 * (PANEL_SIZE + PANEL_GAP);
        let y0 = MARGIN_TOP + LEGEND_HEIGHT;
        render_panel(&mut svg, x0, y0, variant, points, options);
    }
    svg.push_str("</svg>\n");
    svg
}

fn render_panel(
    svg: &mut String,
    x0: f64,
    y0: f64,
    variant: Variant,
    points: &[PlotPoint],
    options: &PlotOptions,
) {
    let to_x = |v: f64| x0 + v.clamp(0.0, 1.0) * PANEL_SIZE;
    let to_y = |v: f64| y0 + (1.0 - v.clamp(0.0, 1.0)) * PANEL_SIZE;

    let _ = writeln!(
        svg,
        r##"<rect x="{x0:.1}" y="{y0:.1}" width="{PANEL_SIZE}" height="{PANEL_SIZE}" fill="#fafafa" stroke="#444" stroke-width="1"/>"##
    );
    let _ = writeln!(
        svg,
        r##"<text x="{:.1}" y="{:.1}" font-size="13" fill="#202124" text-anchor="middle">{}</text>"##,
        x0 + PANEL_SIZE / 2.0,
        y0 - 6.0,
        variant.name()
    );
    // Ticks at 0, 1/2, 1 on both axes.
    for tick in [0.0, 0.5, 1.0] {
        let tx = to_x(tick);
        let ty = to_y(tick);
        let _ = writeln!(
            svg,
            r##"<line x1="{tx:.1}" y1="{:.1}" x2="{tx:.1}" y2="{:.1}" stroke="#444" stroke-width="1"/>"##,
            y0 + PANEL_SIZE,
            y0 + PANEL_SIZE + 4.0
        );
        let _ = writeln!(
            svg,
            r##"<text x="{tx:.1}" y="{:.1}" font-size="10" fill="#202124" text-anchor="middle">{tick}</text>"##,
            y0 + PANEL_SIZE + 15.0
        );
        let _ = writeln!(
            svg,
            r##"<line x1="{:.1}" y1="{ty:.1}" x2="{x0:.1}" y2="{ty:.1}" stroke="#444" stroke-width="1"/>"##,
            x0 - 4.0
        );
        let _ = writeln!(
            svg,
            r##"<text x="{:.1}" y="{:.1}" font-size="10" fill="#202124" text-anchor="end">{tick}</text>"##,
            x0 - 7.0,
            ty + 3.0
        );
    }
    let _ = writeln!(
        svg,
        r##"<text x="{:.1}" y="{:.1}" font-size="12" fill="#202124" text-anchor="middle">1 - epigraph of band rows</text>"##,
        x0 + PANEL_SIZE / 2.0,
        y0 + PANEL_SIZE + 32.0
    );
    if variant == Variant::Dimensions {
        let _ = writeln!(
            svg,
            r##"<text x="{:.1}" y="{:.1}" font-size="12" fill="#202124" text-anchor="middle" transform="rotate(-90 {:.1} {:.1})">band of epigraph rows</text>"##,
            x0 - 36.0,
            y0 + PANEL_SIZE / 2.0,
            x0 - 36.0,
            y0 + PANEL_SIZE / 2.0
        );
    }

    if let Some(n) = options.envelope_n {
        let mut path = String::new();
        let samples = 200;
        for s in 0..=samples {
            let z = s as f64 / samples as f64;
            let g = parabola_g(n, z).clamp(0.0, 1.0);
            let _ = write!(path, "{}{:.2},{:.2}", if s == 0 { "" } else { " " }, to_x(z), to_y(g));
        }
        let _ = writeln!(
            svg,
            r##"<polyline points="{path}" fill="none" stroke="#b3261e" stroke-width="1.2" stroke-dasharray="5 4"/>"##
        );
    }

    for point in points.iter().filter(|p| p.variant == variant) {
        let color = role_color(point.role);
        let fill = if point.flagged { color } else { "none" };
        let _ = writeln!(
            svg,
            r##"<circle cx="{:.2}" cy="{:.2}" r="3.5" fill="{fill}" stroke="{color}" stroke-width="1.1"><title>{} #{} ({:.4}, {:.4})</title></circle>"##,
            to_x(point.dg1),
            to_y(point.dg2),
            point.role.map_or("observation", |r| role_name(r)),
            point.observation,
            point.dg1,
            point.dg2
        );
    }
}

fn xml_escape(text: &str) -> String {
    text.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

// ============================================================================
// Tests
// ============================================================================
