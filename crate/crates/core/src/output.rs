//! CSV tables and SVG line charts for sweep results.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::experiments::SweepResult;
use crate::{Error, Result};

pub const CSV_HEADER: [&str; 5] = ["param", "value", "mean_se", "std_se", "seeds"];

/// Writes `param,value,mean_se,std_se,seeds` plus one row per sweep value.
pub fn emit_csv(result: &SweepResult, path: &Path) -> Result<()> {
    let mut writer = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_path(path)?;
    writer.write_record(CSV_HEADER)?;
    for row in &result.rows {
        writer.write_record([
            result.parameter.label().to_string(),
            row.value.to_string(),
            row.mean_se.to_string(),
            row.std_se.to_string(),
            row.seeds.to_string(),
        ])?;
    }
    writer.flush()?;
    Ok(())
}

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 460.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 170.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 60.0;
const PALETTE: [&str; 6] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b",
];
const TICKS: usize = 5;

fn axis_range(lo: f64, hi: f64) -> (f64, f64) {
    if hi > lo {
        (lo, hi)
    } else {
        (lo - 0.5, hi + 0.5)
    }
}

/// Renders mean efficiency against the swept value, one line per result.
pub fn render_svg(results: &[SweepResult]) -> Result<String> {
    let first = results
        .first()
        .ok_or_else(|| Error::InvalidSweep("nothing to plot".into()))?;
    if let Some(other) = results.iter().find(|r| r.parameter != first.parameter) {
        return Err(Error::MismatchedParameters(
            first.parameter.to_string(),
            other.parameter.to_string(),
        ));
    }

    let xs = results
        .iter()
        .flat_map(|r| r.rows.iter().map(|row| row.value));
    let ys = results
        .iter()
        .flat_map(|r| r.rows.iter().map(|row| row.mean_se));
    let (x_lo, x_hi) = axis_range(
        xs.clone().fold(f64::INFINITY, f64::min),
        xs.fold(f64::NEG_INFINITY, f64::max),
    );
    let (y_lo, y_hi) = axis_range(0.0, ys.fold(0.0, f64::max) * 1.05);

    let plot_w = WIDTH - LEFT - RIGHT;
    let plot_h = HEIGHT - TOP - BOTTOM;
    let sx = |x: f64| LEFT + (x - x_lo) / (x_hi - x_lo) * plot_w;
    let sy = |y: f64| TOP + plot_h - (y - y_lo) / (y_hi - y_lo) * plot_h;

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        svg,
        r#"<text x="{:.1}" y="22" text-anchor="middle" font-size="14">Total spectral efficiency versus {}</text>"#,
        LEFT + plot_w / 2.0,
        first.parameter
    );
    let _ = writeln!(
        svg,
        r#"<rect x="{LEFT}" y="{TOP}" width="{plot_w}" height="{plot_h}" fill="none" stroke="black"/>"#
    );

    for k in 0..=TICKS {
        let t = k as f64 / TICKS as f64;
        let x = x_lo + t * (x_hi - x_lo);
        let y = y_lo + t * (y_hi - y_lo);
        let _ = writeln!(
            svg,
            r#"<line x1="{0:.1}" y1="{1:.1}" x2="{0:.1}" y2="{2:.1}" stroke="black"/><text x="{0:.1}" y="{3:.1}" text-anchor="middle">{4:.2}</text>"#,
            sx(x),
            TOP + plot_h,
            TOP + plot_h + 5.0,
            TOP + plot_h + 20.0,
            x
        );
        let _ = writeln!(
            svg,
            r#"<line x1="{0:.1}" y1="{1:.1}" x2="{2:.1}" y2="{1:.1}" stroke="lightgray"/><text x="{3:.1}" y="{4:.1}" text-anchor="end">{5:.3}</text>"#,
            LEFT,
            sy(y),
            LEFT + plot_w,
            LEFT - 6.0,
            sy(y) + 4.0,
            y
        );
    }
    let _ = writeln!(
        svg,
        r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{}</text>"#,
        LEFT + plot_w / 2.0,
        HEIGHT - 15.0,
        first.parameter
    );
    let _ = writeln!(
        svg,
        r#"<text transform="translate(20 {:.1}) rotate(-90)" text-anchor="middle">mean total SE (bit/s/Hz)</text>"#,
        TOP + plot_h / 2.0
    );

    for (i, result) in results.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let points: Vec<String> = result
            .rows
            .iter()
            .map(|row| format!("{:.2},{:.2}", sx(row.value), sy(row.mean_se)))
            .collect();
        let _ = writeln!(
            svg,
            r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="2"/>"#,
            points.join(" ")
        );
        for row in &result.rows {
            let _ = writeln!(
                svg,
                r#"<circle cx="{:.2}" cy="{:.2}" r="3" fill="{color}"/>"#,
                sx(row.value),
                sy(row.mean_se)
            );
        }
        let ly = TOP + 10.0 + 20.0 * i as f64;
        let lx = LEFT + plot_w + 15.0;
        let _ = writeln!(
            svg,
            r#"<line x1="{lx:.1}" y1="{ly:.1}" x2="{:.1}" y2="{ly:.1}" stroke="{color}" stroke-width="2"/><text x="{:.1}" y="{:.1}">{}</text>"#,
            lx + 25.0,
            lx + 30.0,
            ly + 4.0,
            result.method
        );
    }
    svg.push_str("</svg>\n");
    Ok(svg)
}

/// Writes [`render_svg`] output to `path`.
pub fn emit_plot(results: &[SweepResult], path: &Path) -> Result<()> {
    fs::write(path, render_svg(results)?)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::{Method, SweepParam, SweepRow};
    use crate::scenario::ScenarioConfig;

    fn result(parameter: SweepParam, method: Method, n: usize) -> SweepResult {
        SweepResult {
            parameter,
            method,
            rows: (0..n)
                .map(|i| SweepRow {
                    value: 5.0 + i as f64,
                    mean_se: 1.0 + 0.25 * i as f64,
                    std_se: 0.1,
                    seeds: 3,
                })
                .collect(),
            config: ScenarioConfig::standard(),
            timestamp_s: 0,
            revision: "test".into(),
        }
    }

    #[test]
    fn csv_has_header_and_rows() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("out.csv");
        let r = result(SweepParam::DbsRadius, Method::Proposed, 3);
        emit_csv(&r, &path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 4);
        assert_eq!(lines[0], "param,value,mean_se,std_se,seeds");
        assert_eq!(lines[1], "dbs_radius,5,1,0.1,3");
        assert!(text.ends_with('\n'));

        let again = dir.path().join("again.csv");
        emit_csv(&r, &again).unwrap();
        assert_eq!(
            std::fs::read(&path).unwrap(),
            std::fs::read(&again).unwrap()
        );
    }

    #[test]
    fn svg_has_one_line_per_result() {
        let one = render_svg(&[result(SweepParam::Epsilon, Method::Proposed, 4)]).unwrap();
        assert_eq!(one.matches("<polyline").count(), 1);
        let three = render_svg(&[
            result(SweepParam::Epsilon, Method::Proposed, 4),
            result(SweepParam::Epsilon, Method::PlainDbscan, 4),
            result(SweepParam::Epsilon, Method::MbsOnly, 4),
        ])
        .unwrap();
        assert_eq!(three.matches("<polyline").count(), 3);
        assert!(three.contains("plain_dbscan") && three.contains("mbs_only"));
    }

    #[test]
    fn svg_is_reproducible() {
        let dir = tempfile::tempdir().unwrap();
        let inputs = [
            result(SweepParam::MinPoints, Method::Proposed, 5),
            result(SweepParam::MinPoints, Method::MbsOnly, 5),
        ];
        let a = dir.path().join("a.svg");
        let b = dir.path().join("b.svg");
        emit_plot(&inputs, &a).unwrap();
        emit_plot(&inputs, &b).unwrap();
        assert_eq!(std::fs::read(a).unwrap(), std::fs::read(b).unwrap());
    }

    #[test]
    fn mismatched_parameters_rejected() {
        let err = render_svg(&[
            result(SweepParam::MinPoints, Method::Proposed, 2),
            result(SweepParam::Epsilon, Method::Proposed, 2),
        ])
        .unwrap_err();
        assert!(matches!(err, Error::MismatchedParameters(_, _)));
    }
}
