//! Standalone SVG line charts, one per y column against the first column.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::error::Result;
use crate::labcli::report::Report;

const W: f64 = 640.0;
const H: f64 = 400.0;
const MARGIN: f64 = 60.0;

/// Writes `<report>_<column>.svg` for every y column and returns the paths.
/// An empty report writes nothing.
pub fn emit_plots(report: &Report, out_dir: &Path) -> Result<Vec<PathBuf>> {
    if report.is_empty() || report.columns.len() < 2 {
        return Ok(Vec::new());
    }
    fs::create_dir_all(out_dir)?;
    let x = report.column(&report.columns[0]).expect("first column");
    let mut out = Vec::new();
    for name in &report.columns[1..] {
        let y = report.column(name).expect("listed column");
        let svg = line_chart(&report.columns[0], name, &x, &y);
        let path = out_dir.join(format!("{}_{}.svg", report.name, sanitize(name)));
        fs::write(&path, svg)?;
        out.push(path);
    }
    Ok(out)
}

fn sanitize(s: &str) -> String {
    s.chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '_' || c == '-' { c } else { '_' })
        .collect()
}

fn bounds(v: impl Iterator<Item = f64>) -> Option<(f64, f64)> {
    let (lo, hi) = v.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), x| (a.min(x), b.max(x)));
    if lo > hi {
        return None;
    }
    if lo == hi {
        let pad = if lo == 0.0 { 1.0 } else { lo.abs() * 0.05 };
        return Some((lo - pad, hi + pad));
    }
    Some((lo, hi))
}

/// Chart body; x is drawn on a log scale when every x is positive.
pub fn line_chart(x_label: &str, y_label: &str, x: &[f64], y: &[f64]) -> String {
    let log_x = x.iter().all(|&v| v > 0.0);
    let tx = |v: f64| if log_x { v.log10() } else { v };
    let pts: Vec<(f64, f64)> = x
        .iter()
        .zip(y)
        .filter(|(a, b)| a.is_finite() && b.is_finite())
        .map(|(&a, &b)| (tx(a), b))
        .collect();
    let mut s = String::new();
    writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">"#
    )
    .unwrap();
    writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#).unwrap();
    let (x0, x1) = (MARGIN, W - MARGIN / 2.0);
    let (y0, y1) = (H - MARGIN, MARGIN / 2.0);
    writeln!(
        s,
        r#"<path d="M{x0} {y1} L{x0} {y0} L{x1} {y0}" stroke="black" fill="none"/>"#
    )
    .unwrap();
    let xl = if log_x { format!("log10({x_label})") } else { x_label.to_string() };
    writeln!(
        s,
        r#"<text x="{:.1}" y="{:.1}" text-anchor="middle" font-size="13">{}</text>"#,
        (x0 + x1) / 2.0,
        H - 15.0,
        escape(&xl)
    )
    .unwrap();
    writeln!(
        s,
        r#"<text x="15" y="{:.1}" text-anchor="middle" font-size="13" transform="rotate(-90 15 {:.1})">{}</text>"#,
        (y0 + y1) / 2.0,
        (y0 + y1) / 2.0,
        escape(y_label)
    )
    .unwrap();
    if let (Some((ax, bx)), Some((ay, by))) = (
        bounds(pts.iter().map(|p| p.0)),
        bounds(pts.iter().map(|p| p.1)),
    ) {
        let px = |v: f64| x0 + (v - ax) / (bx - ax) * (x1 - x0);
        let py = |v: f64| y0 - (v - ay) / (by - ay) * (y0 - y1);
        for (v, label) in [(ax, ax), (bx, bx)] {
            writeln!(
                s,
                r#"<text x="{:.1}" y="{:.1}" text-anchor="middle" font-size="11">{:.4}</text>"#,
                px(v),
                y0 + 16.0,
                label
            )
            .unwrap();
        }
        for v in [ay, by] {
            writeln!(
                s,
                r#"<text x="{:.1}" y="{:.1}" text-anchor="end" font-size="11">{:.4e}</text>"#,
                x0 - 4.0,
                py(v) + 4.0,
                v
            )
            .unwrap();
        }
        if pts.len() > 1 {
            let d: Vec<String> = pts
                .iter()
                .enumerate()
                .map(|(i, &(a, b))| format!("{}{:.2} {:.2}", if i == 0 { "M" } else { "L" }, px(a), py(b)))
                .collect();
            writeln!(s, r#"<path d="{}" stroke="steelblue" fill="none"/>"#, d.join(" ")).unwrap();
        }
        for &(a, b) in &pts {
            writeln!(
                s,
                r#"<circle cx="{:.2}" cy="{:.2}" r="3" fill="steelblue"/>"#,
                px(a),
                py(b)
            )
            .unwrap();
        }
    }
    s.push_str("</svg>\n");
    s
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_report_writes_nothing() {
        let dir = tempfile::tempdir().unwrap();
        let r = Report::new("avg", &["N", "ratio"]);
        assert!(emit_plots(&r, dir.path()).unwrap().is_empty());
        assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 0);
    }

    #[test]
    fn single_row_has_one_marker() {
        let svg = line_chart("N", "ratio", &[1e4], &[0.9]);
        assert_eq!(svg.matches("<circle").count(), 1);
        assert!(!svg.contains(r#"stroke="steelblue""#));
    }

    #[test]
    fn output_is_deterministic() {
        let mut r = Report::new("avg", &["N", "ratio", "abs dev"]);
        r.push(vec![1e4, 0.9, 0.1]);
        r.push(vec![1e5, 0.95, 0.05]);
        let a = tempfile::tempdir().unwrap();
        let b = tempfile::tempdir().unwrap();
        let pa = emit_plots(&r, a.path()).unwrap();
        let pb = emit_plots(&r, b.path()).unwrap();
        assert_eq!(pa.len(), 2);
        assert!(pa[1].ends_with("avg_abs_dev.svg"));
        for (x, y) in pa.iter().zip(&pb) {
            assert_eq!(fs::read(x).unwrap(), fs::read(y).unwrap());
        }
        assert!(fs::read_to_string(&pa[0]).unwrap().contains("log10(N)"));
    }
}
