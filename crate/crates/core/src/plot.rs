//! Deterministic SVG rendering of per-step partitions: road band, road-type
//! shading, colored cells with signature labels, obstacle boxes, and an
//! optional highlighted trace. Identical inputs produce byte-identical
//! output.

use std::fmt::Write as _;

use crate::partition::Cell;
use crate::scenario::{RoadType, Scenario};

const PX_PER_METER: f64 = 6.0;
const ROW_GAP: f64 = 24.0;
const MARGIN: f64 = 20.0;

/// Fixed fill palette; cells pick colors by index so output never depends on
/// iteration order.
const PALETTE: [&str; 8] = [
    "#a6cee3", "#b2df8a", "#fb9a99", "#fdbf6f", "#cab2d6", "#ffff99", "#80b1d3", "#b3de69",
];

fn fmt(v: f64) -> String {
    format!("{v:.2}")
}

/// Renders the partition of every step, one row per step, with the cells of
/// `highlight` (one cell index per step) outlined when given.
pub fn render_svg(
    scenario: &Scenario,
    cells_by_step: &[Vec<Cell>],
    highlight: Option<&[usize]>,
) -> String {
    let road = &scenario.road;
    let road_w = (road.s_end - road.s_begin) * PX_PER_METER;
    let road_h = (road.d_max - road.d_min) * PX_PER_METER;
    let rows = cells_by_step.len();
    let total_w = road_w + 2.0 * MARGIN;
    let total_h = MARGIN + rows as f64 * (road_h + ROW_GAP) + MARGIN;

    // Map Frenet coordinates to pixels within row `row` (d grows upward).
    let x = |s: f64| MARGIN + (s - road.s_begin) * PX_PER_METER;
    let y = |d: f64, row: usize| {
        MARGIN + row as f64 * (road_h + ROW_GAP) + (road.d_max - d) * PX_PER_METER
    };

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{}\" height=\"{}\" viewBox=\"0 0 {} {}\">",
        fmt(total_w),
        fmt(total_h),
        fmt(total_w),
        fmt(total_h)
    );
    svg.push_str("<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n");

    for (row, cells) in cells_by_step.iter().enumerate() {
        let top = y(road.d_max, row);
        // Road band with road-type shading.
        for iv in &road.road_types {
            let fill = match iv.road_type {
                RoadType::Carriageway => "#ededed",
                RoadType::PedestrianCrosswalk => "#ffe9b0",
            };
            let _ = writeln!(
                svg,
                "<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"{}\"/>",
                fmt(x(iv.s_lo)),
                fmt(top),
                fmt((iv.s_hi - iv.s_lo) * PX_PER_METER),
                fmt(road_h),
                fill
            );
        }
        // Cells.
        for (i, cell) in cells.iter().enumerate() {
            let color = PALETTE[i % PALETTE.len()];
            let outlined = highlight.and_then(|h| h.get(row)) == Some(&i);
            for r in cell.region.rects() {
                let _ = writeln!(
                    svg,
                    "<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"{}\" fill-opacity=\"0.55\"{}/>",
                    fmt(x(r.s_lo)),
                    fmt(y(r.d_hi, row)),
                    fmt((r.s_hi - r.s_lo) * PX_PER_METER),
                    fmt((r.d_hi - r.d_lo) * PX_PER_METER),
                    color,
                    if outlined { " stroke=\"#d62728\" stroke-width=\"2\"" } else { "" }
                );
            }
            // Label at the centroid of the first rectangle.
            if let Some(r) = cell.region.rects().first() {
                let _ = writeln!(
                    svg,
                    "<text x=\"{}\" y=\"{}\" font-size=\"10\" font-family=\"monospace\" text-anchor=\"middle\">{}</text>",
                    fmt(x(0.5 * (r.s_lo + r.s_hi))),
                    fmt(y(0.5 * (r.d_lo + r.d_hi), row) + 3.0),
                    cell.signature
                );
            }
        }
        // Obstacle boxes on top.
        for (o, bbox) in scenario.obstacles.iter().zip(scenario.obstacle_boxes(row)) {
            let clipped_lo = bbox.s_lo.max(road.s_begin);
            let clipped_hi = bbox.s_hi.min(road.s_end);
            if clipped_lo >= clipped_hi {
                continue;
            }
            let _ = writeln!(
                svg,
                "<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"#555555\"/>",
                fmt(x(clipped_lo)),
                fmt(y(bbox.d_hi.min(road.d_max), row)),
                fmt((clipped_hi - clipped_lo) * PX_PER_METER),
                fmt((bbox.d_hi.min(road.d_max) - bbox.d_lo.max(road.d_min)) * PX_PER_METER),
            );
            let _ = writeln!(
                svg,
                "<text x=\"{}\" y=\"{}\" font-size=\"9\" font-family=\"monospace\" fill=\"white\" text-anchor=\"middle\">{}</text>",
                fmt(x(0.5 * (clipped_lo + clipped_hi))),
                fmt(y(0.5 * (bbox.d_lo.max(road.d_min) + bbox.d_hi.min(road.d_max)), row) + 3.0),
                o.id
            );
        }
        // Step label.
        let _ = writeln!(
            svg,
            "<text x=\"{}\" y=\"{}\" font-size=\"11\" font-family=\"monospace\">t={}</text>",
            fmt(MARGIN),
            fmt(top - 6.0),
            row
        );
    }
    svg.push_str("</svg>\n");
    svg
}
