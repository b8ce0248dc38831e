//! Minimal hand-rolled SVG output: persistence-diagram scatter, per-class
//! Betti-curve overlays, and a confusion-matrix heat grid.

use std::fmt::Write as _;

use topogait::classify::ConfusionMatrix;

const CLASS_COLORS: [&str; 3] = ["#1c6fb8", "#d95f02", "#3aa655"];

/// One class's diagram points as (birth, death, degree).
pub type ClassPoints = (String, Vec<(f64, f64, u8)>);
/// One class's curve as (filtration, value) vertices.
pub type ClassCurve = (String, Vec<(f64, f64)>);

struct Frame {
    width: f64,
    height: f64,
    margin: f64,
}

impl Frame {
    fn x(&self, v: f64, lo: f64, hi: f64) -> f64 {
        let span = (hi - lo).max(f64::MIN_POSITIVE);
        self.margin + (v - lo) / span * (self.width - 2.0 * self.margin)
    }

    fn y(&self, v: f64, lo: f64, hi: f64) -> f64 {
        let span = (hi - lo).max(f64::MIN_POSITIVE);
        self.height - self.margin - (v - lo) / span * (self.height - 2.0 * self.margin)
    }
}

fn svg_open(out: &mut String, width: f64, height: f64) {
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(
        out,
        r#"<rect width="{width}" height="{height}" fill="white"/>"#
    );
}

fn axes(out: &mut String, f: &Frame, x_label: &str, y_label: &str) {
    let (x0, y0) = (f.margin, f.height - f.margin);
    let (x1, y1) = (f.width - f.margin, f.margin);
    let _ = writeln!(
        out,
        r#"<line x1="{x0}" y1="{y0}" x2="{x1}" y2="{y0}" stroke="black"/><line x1="{x0}" y1="{y0}" x2="{x0}" y2="{y1}" stroke="black"/>"#
    );
    let _ = writeln!(
        out,
        r#"<text x="{}" y="{}" text-anchor="middle">{x_label}</text>"#,
        (x0 + x1) / 2.0,
        f.height - 8.0
    );
    let _ = writeln!(
        out,
        r#"<text x="12" y="{}" text-anchor="middle" transform="rotate(-90 12 {})">{y_label}</text>"#,
        (y0 + y1) / 2.0,
        (y0 + y1) / 2.0
    );
}

/// Persistence-diagram scatter: one color per class, filled circles for H0,
/// open triangles for H1, with the birth = death diagonal.
pub fn diagram_scatter(classes: &[ClassPoints]) -> String {
    let frame = Frame {
        width: 480.0,
        height: 420.0,
        margin: 48.0,
    };
    let top = classes
        .iter()
        .flat_map(|(_, pts)| pts.iter().map(|p| p.1))
        .fold(1e-9_f64, f64::max)
        * 1.05;

    let mut out = String::new();
    svg_open(&mut out, frame.width, frame.height);
    axes(&mut out, &frame, "birth", "death");
    let _ = writeln!(
        out,
        r##"<line x1="{}" y1="{}" x2="{}" y2="{}" stroke="#999" stroke-dasharray="4 3"/>"##,
        frame.x(0.0, 0.0, top),
        frame.y(0.0, 0.0, top),
        frame.x(top, 0.0, top),
        frame.y(top, 0.0, top)
    );
    for (ci, (label, points)) in classes.iter().enumerate() {
        let color = CLASS_COLORS[ci % CLASS_COLORS.len()];
        for &(birth, death, degree) in points {
            let (px, py) = (frame.x(birth, 0.0, top), frame.y(death, 0.0, top));
            if degree == 0 {
                let _ = writeln!(
                    out,
                    r#"<circle cx="{px:.2}" cy="{py:.2}" r="3" fill="{color}" fill-opacity="0.65"/>"#
                );
            } else {
                let _ = writeln!(
                    out,
                    r#"<path d="M {:.2} {:.2} L {:.2} {:.2} L {:.2} {:.2} Z" fill="none" stroke="{color}"/>"#,
                    px,
                    py - 4.0,
                    px - 3.5,
                    py + 3.0,
                    px + 3.5,
                    py + 3.0
                );
            }
        }
        let ly = 20.0 + 16.0 * ci as f64;
        let _ = writeln!(
            out,
            r#"<circle cx="{}" cy="{ly}" r="4" fill="{color}"/><text x="{}" y="{}">{label}</text>"#,
            frame.width - 130.0,
            frame.width - 120.0,
            ly + 4.0
        );
    }
    out.push_str("</svg>\n");
    out
}

/// Two panels (H0 left, H1 right), one mean curve per class.
pub fn betti_overlay(h0: &[ClassCurve], h1: &[ClassCurve]) -> String {
    let width = 840.0;
    let height = 380.0;
    let mut out = String::new();
    svg_open(&mut out, width, height);
    for (panel, (title, curves)) in [("H0", h0), ("H1", h1)].iter().enumerate() {
        let frame = Frame {
            width: 400.0,
            height: 340.0,
            margin: 44.0,
        };
        let dx = 10.0 + panel as f64 * 420.0;
        let _ = writeln!(out, r#"<g transform="translate({dx},20)">"#);
        let x_hi = curves
            .iter()
            .flat_map(|(_, c)| c.iter().map(|p| p.0))
            .fold(1e-9_f64, f64::max);
        let x_lo = curves
            .iter()
            .flat_map(|(_, c)| c.iter().map(|p| p.0))
            .fold(f64::INFINITY, f64::min)
            .min(x_hi);
        let y_hi = curves
            .iter()
            .flat_map(|(_, c)| c.iter().map(|p| p.1))
            .fold(1e-9_f64, f64::max)
            * 1.1;
        axes(&mut out, &frame, "filtration", "count");
        let _ = writeln!(
            out,
            r#"<text x="{}" y="14" text-anchor="middle" font-weight="bold">{title}</text>"#,
            frame.width / 2.0
        );
        for (ci, (label, curve)) in curves.iter().enumerate() {
            let color = CLASS_COLORS[ci % CLASS_COLORS.len()];
            let path: Vec<String> = curve
                .iter()
                .enumerate()
                .map(|(i, &(t, v))| {
                    format!(
                        "{}{:.2} {:.2}",
                        if i == 0 { "M " } else { "L " },
                        frame.x(t, x_lo, x_hi),
                        frame.y(v, 0.0, y_hi)
                    )
                })
                .collect();
            let _ = writeln!(
                out,
                r#"<path d="{}" fill="none" stroke="{color}" stroke-width="1.8"/>"#,
                path.join(" ")
            );
            let ly = 30.0 + 16.0 * ci as f64;
            let _ = writeln!(
                out,
                r#"<line x1="{}" y1="{ly}" x2="{}" y2="{ly}" stroke="{color}" stroke-width="2"/><text x="{}" y="{}">{label}</text>"#,
                frame.width - 120.0,
                frame.width - 96.0,
                frame.width - 90.0,
                ly + 4.0
            );
        }
        out.push_str("</g>\n");
    }
    out.push_str("</svg>\n");
    out
}

/// 2x2 heat grid in the style of the usual confusion-matrix figure;
/// predicted on columns, truth on rows, positive class first.
pub fn confusion_heatmap(cm: &ConfusionMatrix, positive: &str, negative: &str) -> String {
    let cell = 110.0;
    let left = 110.0;
    let top = 70.0;
    let width = left + 2.0 * cell + 30.0;
    let height = top + 2.0 * cell + 40.0;
    let max_count = [cm.tp, cm.fn_, cm.fp, cm.tn]
        .into_iter()
        .max()
        .unwrap_or(1)
        .max(1) as f64;

    let mut out = String::new();
    svg_open(&mut out, width, height);
    let _ = writeln!(
        out,
        r#"<text x="{}" y="24" text-anchor="middle" font-weight="bold">confusion matrix (n = {})</text>"#,
        width / 2.0,
        cm.total()
    );
    let cells = [(0, 0, cm.tp), (0, 1, cm.fn_), (1, 0, cm.fp), (1, 1, cm.tn)];
    for (row, col, count) in cells {
        let x = left + col as f64 * cell;
        let y = top + row as f64 * cell;
        // Blue ramp scaled to the largest cell.
        let intensity = count as f64 / max_count;
        let shade = (235.0 - 150.0 * intensity) as u8;
        let _ = writeln!(
            out,
            r#"<rect x="{x}" y="{y}" width="{cell}" height="{cell}" fill="rgb({shade},{},255)" stroke="black"/>"#,
            (240.0 - 90.0 * intensity) as u8
        );
        let _ = writeln!(
            out,
            r#"<text x="{}" y="{}" text-anchor="middle" font-size="20">{count}</text>"#,
            x + cell / 2.0,
            y + cell / 2.0 + 7.0
        );
    }
    for (i, label) in [positive, negative].iter().enumerate() {
        let _ = writeln!(
            out,
            r#"<text x="{}" y="{}" text-anchor="middle">pred {label}</text>"#,
            left + cell * (i as f64 + 0.5),
            top - 10.0
        );
        let _ = writeln!(
            out,
            r#"<text x="{}" y="{}" text-anchor="end">true {label}</text>"#,
            left - 10.0,
            top + cell * (i as f64 + 0.5) + 4.0
        );
    }
    out.push_str("</svg>\n");
    out
}
