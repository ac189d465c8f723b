//! Minimal critical-difference diagram: a rank axis, one label per model and
//! a bar under each clique.

use std::fmt::Write;

use super::ComparisonReport;

const WIDTH: f64 = 640.0;
const MARGIN: f64 = 60.0;
const AXIS_Y: f64 = 50.0;

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

pub fn render_cd_svg(report: &ComparisonReport) -> String {
    let k = report.models.len();
    let span = (k.max(2) - 1) as f64;
    let x = |rank: f64| MARGIN + (rank - 1.0) / span * (WIDTH - 2.0 * MARGIN);

    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| report.average_ranks[a].total_cmp(&report.average_ranks[b]));
    let label_rows = k.div_ceil(2);
    let clique_top = AXIS_Y + 20.0;
    let labels_top = clique_top + 12.0 * report.cliques.len() as f64 + 20.0;
    let height = labels_top + 22.0 * label_rows as f64 + 20.0;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{height}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(
        s,
        r#"<line x1="{}" y1="{AXIS_Y}" x2="{}" y2="{AXIS_Y}" stroke="black"/>"#,
        x(1.0),
        x(k as f64)
    );
    for r in 1..=k {
        let xr = x(r as f64);
        let _ = writeln!(
            s,
            r#"<line x1="{xr}" y1="{}" x2="{xr}" y2="{AXIS_Y}" stroke="black"/><text x="{xr}" y="{}" text-anchor="middle">{r}</text>"#,
            AXIS_Y - 6.0,
            AXIS_Y - 10.0
        );
    }
    for (i, clique) in report.cliques.iter().enumerate() {
        let ranks: Vec<f64> = clique
            .iter()
            .filter_map(|name| report.models.iter().position(|m| m == name))
            .map(|j| report.average_ranks[j])
            .collect();
        let lo = ranks.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = ranks.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let y = clique_top + 12.0 * i as f64;
        let _ = writeln!(
            s,
            r#"<line class="clique" x1="{}" y1="{y}" x2="{}" y2="{y}" stroke="black" stroke-width="4"/>"#,
            x(lo) - 3.0,
            x(hi) + 3.0
        );
    }
    for (pos, &j) in order.iter().enumerate() {
        let xr = x(report.average_ranks[j]);
        let left = pos < label_rows;
        let row = if left { pos } else { k - 1 - pos };
        let y = labels_top + 22.0 * row as f64;
        let (tx, anchor) = if left { (MARGIN - 10.0, "end") } else { (WIDTH - MARGIN + 10.0, "start") };
        let _ = writeln!(
            s,
            r#"<polyline points="{xr},{AXIS_Y} {xr},{y} {},{y}" fill="none" stroke="gray"/><text x="{tx}" y="{}" text-anchor="{anchor}">{} ({:.2})</text>"#,
            tx + if left { 5.0 } else { -5.0 },
            y + 4.0,
            escape(&report.models[j]),
            report.average_ranks[j]
        );
    }
    s.push_str("</svg>\n");
    s
}
