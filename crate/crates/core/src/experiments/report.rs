//! CSV and SVG output for rate reports.

use std::fmt::Write as _;
use std::path::Path;

use super::sweep::RateReport;
use crate::error::{Error, Result};

pub const CSV_HEADER: &str = "eps,value,value_over_sqrt_eps,method,profile";

pub fn report_csv(report: &RateReport) -> String {
    let mut out = format!("{CSV_HEADER}\n");
    for &(e, v) in &report.pairs {
        let _ = writeln!(out, "{:.16e},{:.16e},{:.16e},{},{}", e, v, v / e.sqrt(), report.method, report.profile);
    }
    out
}

/// Parses the `(ε, value)` columns back out of [`report_csv`] output.
pub fn parse_report_csv(text: &str) -> Result<Vec<(f64, f64)>> {
    let mut lines = text.lines();
    if lines.next() != Some(CSV_HEADER) {
        return Err(Error::Parse("missing rate report header".into()));
    }
    lines
        .map(|l| {
            let mut cols = l.split(',');
            let mut num = || -> Result<f64> {
                let c = cols.next().ok_or_else(|| Error::Parse(format!("short row '{l}'")))?;
                c.parse().map_err(|_| Error::Parse(format!("bad number '{c}'")))
            };
            Ok((num()?, num()?))
        })
        .collect()
}

const W: f64 = 480.0;
const H: f64 = 360.0;
const MARGIN: f64 = 48.0;

/// Log-log scatter with the fitted line and a slope-½ guide through the
/// geometric centre of the data; `None` for reports without a fit.
pub fn report_svg(report: &RateReport) -> Option<String> {
    let fit = report.fit?;
    if report.pairs.is_empty() {
        return None;
    }
    let lx: Vec<f64> = report.pairs.iter().map(|p| p.0.ln()).collect();
    let ly: Vec<f64> = report.pairs.iter().map(|p| p.1.ln()).collect();
    let (x0, x1) = lx.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &x| (a.min(x), b.max(x)));
    let (cx, cy) = (lx.iter().sum::<f64>() / lx.len() as f64, ly.iter().sum::<f64>() / ly.len() as f64);
    let fit_y = |x: f64| fit.slope * x + fit.intercept;
    let guide_y = |x: f64| cy + 0.5 * (x - cx);
    let ys = ly.iter().copied().chain([fit_y(x0), fit_y(x1), guide_y(x0), guide_y(x1)]);
    let (y0, y1) = ys.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), y| (a.min(y), b.max(y)));
    let span = |lo: f64, hi: f64| if hi > lo { hi - lo } else { 1.0 };
    let px = |x: f64| MARGIN + (x - x0) / span(x0, x1) * (W - 2.0 * MARGIN);
    let py = |y: f64| H - MARGIN - (y - y0) / span(y0, y1) * (H - 2.0 * MARGIN);

    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">"#);
    let _ = writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{MARGIN}" y="24" font-family="sans-serif" font-size="13">{} ({}): slope {:.3}, R² {:.4}</text>"#,
        report.method, report.profile, fit.slope, fit.r_squared
    );
    let _ = writeln!(
        s,
        r#"<polyline points="{m},{m} {m},{b} {r},{b}" fill="none" stroke="black"/>"#,
        m = MARGIN,
        b = H - MARGIN,
        r = W - MARGIN
    );
    let _ = writeln!(
        s,
        r#"<line class="fit" x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="steelblue" stroke-width="2"/>"#,
        px(x0),
        py(fit_y(x0)),
        px(x1),
        py(fit_y(x1))
    );
    let _ = writeln!(
        s,
        r#"<line class="guide" x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="gray" stroke-dasharray="6 4"/>"#,
        px(x0),
        py(guide_y(x0)),
        px(x1),
        py(guide_y(x1))
    );
    for (x, y) in lx.iter().zip(&ly) {
        let _ = writeln!(s, r#"<circle cx="{:.2}" cy="{:.2}" r="4" fill="crimson"/>"#, px(*x), py(*y));
    }
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" font-family="sans-serif" font-size="11">ln ε</text>"#,
        W / 2.0,
        H - 12.0
    );
    s.push_str("</svg>\n");
    Some(s)
}

/// Writes the CSV, and the SVG when the report has a fit.
pub fn emit_report(report: &RateReport, csv_path: &Path, svg_path: Option<&Path>) -> Result<()> {
    std::fs::write(csv_path, report_csv(report)).map_err(|e| Error::io(csv_path, e))?;
    if let (Some(path), Some(svg)) = (svg_path, report_svg(report)) {
        std::fs::write(path, svg).map_err(|e| Error::io(path, e))?;
    }
    Ok(())
}
