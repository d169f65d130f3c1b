//! SVG rendering of a layout. One user unit equals one circle radius.

use std::fmt::Write as _;

use crate::energy::{container_depth, pair_depth};
use crate::layout::Layout;

#[derive(Debug, Clone, PartialEq)]
pub struct SvgOptions {
    /// Label each circle with its index.
    pub show_indices: bool,
    /// Tint circles involved in an overlap deeper than `overlap_tolerance`.
    pub highlight_overlaps: bool,
    pub overlap_tolerance: f64,
    /// Output width in pixels; the height matches.
    pub pixel_size: u32,
}

impl Default for SvgOptions {
    fn default() -> Self {
        Self {
            show_indices: false,
            highlight_overlaps: true,
            overlap_tolerance: crate::io::DEFAULT_VERIFY_TOLERANCE,
            pixel_size: 800,
        }
    }
}

const CIRCLE_FILL: &str = "#9ecae1";
const OVERLAP_FILL: &str = "#fb6a4a";

/// Indices of circles that overlap a neighbor or the container wall.
pub fn overlapping_circles(layout: &Layout, tolerance: f64) -> Vec<bool> {
    let pts: Vec<[f64; 2]> = layout.centers().points().collect();
    let mut hit: Vec<bool> = pts
        .iter()
        .map(|&c| container_depth(c, layout.radius()) > tolerance)
        .collect();
    for a in 0..pts.len() {
        for b in (a + 1)..pts.len() {
            if pair_depth(pts[a], pts[b]) > tolerance {
                hit[a] = true;
                hit[b] = true;
            }
        }
    }
    hit
}

pub fn render_svg(layout: &Layout, options: &SvgOptions) -> String {
    let r = layout.radius();
    let half = 1.05 * r;
    let tinted = if options.highlight_overlaps {
        overlapping_circles(layout, options.overlap_tolerance)
    } else {
        vec![false; layout.n()]
    };

    let mut out = String::new();
    let _ = writeln!(out, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{px}" height="{px}" viewBox="{x:.6} {x:.6} {w:.6} {w:.6}">"#,
        px = options.pixel_size,
        x = -half,
        w = 2.0 * half,
    );
    let _ = writeln!(out, "<title>{} circles, R = {:.10}</title>", layout.n(), r);
    let stroke = 0.03;
    let _ = writeln!(
        out,
        r#"<circle cx="0" cy="0" r="{r:.10}" fill="none" stroke="black" stroke-width="{:.6}"/>"#,
        2.0 * stroke
    );
    // SVG's y axis points down; flip so the picture matches the coordinates.
    let _ = writeln!(out, r#"<g transform="scale(1,-1)">"#);
    for (i, [x, y]) in layout.centers().points().enumerate() {
        let fill = if tinted[i] { OVERLAP_FILL } else { CIRCLE_FILL };
        let _ = writeln!(
            out,
            r#"<circle cx="{x:.10}" cy="{y:.10}" r="1" fill="{fill}" stroke="black" stroke-width="{stroke:.6}"/>"#
        );
    }
    let _ = writeln!(out, "</g>");
    if options.show_indices {
        for (i, [x, y]) in layout.centers().points().enumerate() {
            let _ = writeln!(
                out,
                r#"<text x="{x:.6}" y="{:.6}" font-size="0.8" text-anchor="middle" dominant-baseline="central">{i}</text>"#,
                -y
            );
        }
    }
    out.push_str("</svg>\n");
    out
}
