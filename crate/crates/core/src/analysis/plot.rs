//! Minimal SVG renderings: Elo confidence-interval bars and per-category
//! WinPct bars.

use std::fmt::Write;

use super::CategoryBreakdown;
use crate::rating::RatingReport;

const PALETTE: [&str; 8] = [
    "#4c72b0", "#dd8452", "#55a868", "#c44e52", "#8172b3", "#937860", "#da8bc3", "#8c8c8c",
];

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

/// Horizontal interval bars, one row per model, highest mean on top.
pub fn elo_interval_svg(report: &RatingReport) -> String {
    let (w, row_h, left, right, top) = (720.0, 28.0, 220.0, 40.0, 40.0);
    let h = top + row_h * report.rows.len() as f64 + 40.0;
    let lo = report
        .rows
        .iter()
        .map(|r| r.ci_low)
        .fold(f64::INFINITY, f64::min);
    let hi = report
        .rows
        .iter()
        .map(|r| r.ci_high)
        .fold(f64::NEG_INFINITY, f64::max);
    let (lo, hi) = if lo.is_finite() && hi > lo {
        let pad = (hi - lo) * 0.05;
        (lo - pad, hi + pad)
    } else {
        (lo.min(1000.0) - 50.0, hi.max(1000.0) + 50.0)
    };
    let x = |v: f64| left + (v - lo) / (hi - lo) * (w - left - right);

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(
        s,
        r#"<text x="{left}" y="20" font-size="14">Elo rating (mean, CI)</text>"#
    );
    for (i, r) in report.rows.iter().enumerate() {
        let y = top + row_h * i as f64 + row_h / 2.0;
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" text-anchor="end">{}</text>"#,
            left - 8.0,
            y + 4.0,
            escape(&r.model)
        );
        let _ = writeln!(
            s,
            r##"<line x1="{:.2}" y1="{y}" x2="{:.2}" y2="{y}" stroke="#333" stroke-width="2"/>"##,
            x(r.ci_low),
            x(r.ci_high)
        );
        let _ = writeln!(
            s,
            r##"<circle cx="{:.2}" cy="{y}" r="4" fill="#c44e52"/>"##,
            x(r.elo_mean)
        );
    }
    let axis_y = top + row_h * report.rows.len() as f64 + 10.0;
    let _ = writeln!(
        s,
        r##"<line x1="{left}" y1="{axis_y}" x2="{}" y2="{axis_y}" stroke="#999"/>"##,
        w - right
    );
    for k in 0..=4 {
        let v = lo + (hi - lo) * k as f64 / 4.0;
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{}" text-anchor="middle">{v:.0}</text>"#,
            x(v),
            axis_y + 16.0
        );
    }
    s.push_str("</svg>\n");
    s
}

/// Grouped vertical bars: one group per category, one bar per model.
pub fn category_bars_svg(breakdown: &CategoryBreakdown) -> String {
    let categories = breakdown.categories();
    let mut models: Vec<&str> = breakdown.cells.iter().map(|c| c.model.as_str()).collect();
    models.sort_unstable();
    models.dedup();

    let (plot_h, top, left, bar_w, gap) = (240.0, 40.0, 50.0, 14.0, 24.0);
    let group_w = bar_w * models.len().max(1) as f64 + gap;
    let w = left + group_w * categories.len().max(1) as f64 + 200.0;
    let h = top + plot_h + 60.0;
    let base = top + plot_h;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w:.0}" height="{h}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(
        s,
        r#"<text x="{left}" y="20" font-size="14">WinPct by category</text>"#
    );
    let _ = writeln!(
        s,
        r##"<line x1="{left}" y1="{base}" x2="{:.2}" y2="{base}" stroke="#999"/>"##,
        left + group_w * categories.len() as f64
    );
    for (ci, cat) in categories.iter().enumerate() {
        let gx = left + group_w * ci as f64 + gap / 2.0;
        for (mi, model) in models.iter().enumerate() {
            if let Some(cell) = breakdown.get(model, cat) {
                let bh = cell.winpct * plot_h;
                let _ = writeln!(
                    s,
                    r#"<rect x="{:.2}" y="{:.2}" width="{bar_w}" height="{:.2}" fill="{}"/>"#,
                    gx + bar_w * mi as f64,
                    base - bh,
                    bh,
                    PALETTE[mi % PALETTE.len()]
                );
            }
        }
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{}" text-anchor="middle">{}</text>"#,
            gx + bar_w * models.len() as f64 / 2.0,
            base + 16.0,
            escape(cat)
        );
    }
    let legend_x = left + group_w * categories.len() as f64 + 20.0;
    for (mi, model) in models.iter().enumerate() {
        let y = top + 18.0 * mi as f64;
        let _ = writeln!(
            s,
            r#"<rect x="{legend_x}" y="{y}" width="10" height="10" fill="{}"/><text x="{}" y="{}">{}</text>"#,
            PALETTE[mi % PALETTE.len()],
            legend_x + 14.0,
            y + 9.0,
            escape(model)
        );
    }
    s.push_str("</svg>\n");
    s
}
