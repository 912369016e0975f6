use std::fmt::Write as _;

use super::{GridSpec, SweepRecord, LOG_FLOOR};
use crate::models::Family;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HeatmapQuantity {
    Cost,
    Df,
    Vne,
}

impl HeatmapQuantity {
    pub fn name(self) -> &'static str {
        match self {
            HeatmapQuantity::Cost => "cost",
            HeatmapQuantity::Df => "df",
            HeatmapQuantity::Vne => "vne",
        }
    }

    fn of(self, r: &SweepRecord) -> f64 {
        match self {
            HeatmapQuantity::Cost => r.best_cost,
            HeatmapQuantity::Df => r.df,
            HeatmapQuantity::Vne => r.vne,
        }
    }
}

// viridis, coarsely sampled
const STOPS: [(f64, f64, f64); 5] = [
    (68.0, 1.0, 84.0),
    (59.0, 82.0, 139.0),
    (33.0, 145.0, 140.0),
    (94.0, 201.0, 98.0),
    (253.0, 231.0, 37.0),
];

fn color(t: f64) -> String {
    let t = t.clamp(0.0, 1.0) * (STOPS.len() - 1) as f64;
    let k = (t.floor() as usize).min(STOPS.len() - 2);
    let f = t - k as f64;
    let (a, b) = (STOPS[k], STOPS[k + 1]);
    let mix = |x: f64, y: f64| (x + (y - x) * f).round() as u8;
    format!("#{:02x}{:02x}{:02x}", mix(a.0, b.0), mix(a.1, b.1), mix(a.2, b.2))
}

/// Critical-line endpoints drawn as an annotation; nothing in between is
/// known analytically, so only a straight segment is shown.
fn critical_line(family: Family) -> Option<[(f64, f64); 2]> {
    match family {
        Family::Afm => Some([(1.0, 0.0), (0.0, 2.0)]),
        Family::Threespin => Some([(0.0, -3.0), (1.0, 0.0)]),
        _ => None,
    }
}

/// Heatmap of one quantity over the grid, colored on a log₁₀ scale.
/// Cells without a record are left blank.
pub fn heatmap_svg(records: &[SweepRecord], grid: &GridSpec, family: Family, quantity: HeatmapQuantity) -> String {
    let (cols, rows) = (grid.cols(), grid.rows());
    let (cell, margin, bar) = (20.0, 60.0, 20.0);
    let (w, h) = (cols as f64 * cell, rows as f64 * cell);
    let logs: Vec<(usize, f64)> = records
        .iter()
        .filter(|r| r.index < cols * rows)
        .map(|r| (r.index, quantity.of(r).max(LOG_FLOOR).log10()))
        .collect();
    let lo = logs.iter().map(|l| l.1).fold(f64::INFINITY, f64::min);
    let hi = logs.iter().map(|l| l.1).fold(f64::NEG_INFINITY, f64::max);
    let span = if hi > lo { hi - lo } else { 1.0 };

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{}" height="{}" font-family="sans-serif" font-size="11">"#,
        w + 2.0 * margin + 3.0 * bar,
        h + 2.0 * margin
    );
    let _ = writeln!(
        s,
        r#"<text x="{}" y="20" text-anchor="middle">log10 {} ({})</text>"#,
        margin + w / 2.0,
        quantity.name(),
        family.name()
    );
    for &(index, l) in &logs {
        let (r, c) = (index / cols, index % cols);
        // h_z grows upward
        let y = margin + (rows - 1 - r) as f64 * cell;
        let x = margin + c as f64 * cell;
        let _ = writeln!(
            s,
            r#"<rect x="{x}" y="{y}" width="{cell}" height="{cell}" fill="{}"><title>{}</title></rect>"#,
            color((l - lo) / span),
            l
        );
    }

    let xs = grid.hx.values();
    let zs = grid.hz.values();
    let to_px = |v: f64, axis: &[f64], len: f64, flip: bool| -> Option<f64> {
        let (a, b) = (*axis.first()?, *axis.last()?);
        if axis.len() < 2 || b == a {
            return None;
        }
        let step = (b - a) / (axis.len() - 1) as f64;
        let t = (v - a) / step + 0.5;
        let px = t * len / axis.len() as f64;
        Some(if flip { margin + len - px } else { margin + px })
    };
    if let Some([(x0, z0), (x1, z1)]) = critical_line(family) {
        if let (Some(ax), Some(ay), Some(bx), Some(by)) = (
            to_px(x0, &xs, w, false),
            to_px(z0, &zs, h, true),
            to_px(x1, &xs, w, false),
            to_px(z1, &zs, h, true),
        ) {
            let _ = writeln!(
                s,
                r#"<line x1="{ax}" y1="{ay}" x2="{bx}" y2="{by}" stroke="white" stroke-width="1.5" stroke-dasharray="4 3"/>"#
            );
        }
    }

    let fmt = |v: f64| format!("{v:.3}");
    if let (Some(a), Some(b)) = (xs.first(), xs.last()) {
        let _ = writeln!(s, r#"<text x="{margin}" y="{}">{}</text>"#, margin + h + 15.0, fmt(*a));
        let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="end">{}</text>"#, margin + w, margin + h + 15.0, fmt(*b));
        let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle">h_x</text>"#, margin + w / 2.0, margin + h + 35.0);
    }
    if let (Some(a), Some(b)) = (zs.first(), zs.last()) {
        let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="end">{}</text>"#, margin - 4.0, margin + h, fmt(*a));
        let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="end">{}</text>"#, margin - 4.0, margin + 10.0, fmt(*b));
        let _ = writeln!(s, r#"<text x="15" y="{}" text-anchor="middle">h_z</text>"#, margin + h / 2.0);
    }

    // color bar
    let bx = margin + w + bar;
    for k in 0..50 {
        let t = k as f64 / 49.0;
        let y = margin + h * (1.0 - t) - h / 50.0;
        let _ = writeln!(s, r#"<rect x="{bx}" y="{y}" width="{bar}" height="{}" fill="{}"/>"#, h / 50.0 + 0.5, color(t));
    }
    if logs.is_empty() {
        let _ = writeln!(s, "</svg>");
        return s;
    }
    let _ = writeln!(s, r#"<text x="{}" y="{}">{}</text>"#, bx + bar + 3.0, margin + 10.0, fmt(hi));
    let _ = writeln!(s, r#"<text x="{}" y="{}">{}</text>"#, bx + bar + 3.0, margin + h, fmt(lo));
    let _ = writeln!(s, "</svg>");
    s
}
