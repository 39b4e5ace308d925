//! Scan output writers: CSV, JSON, and banded SVG heatmaps.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde_json::json;

use crate::scan::{OutputFormat, ScanConfig, ScanRow};
use crate::CliError;

const CSV_HEADER: &str = "axis1,axis2,p_meas,p_inst,advantage,gap_meas,gap_inst";
const SUCCESS_BAND: f64 = 0.002;
const ADVANTAGE_BAND: f64 = 0.00165;

fn sig9(v: f64) -> String {
    format!("{v:.8e}")
}

fn opt9(v: Option<f64>) -> String {
    v.map(sig9).unwrap_or_default()
}

pub fn rows_to_csv(rows: &[ScanRow]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            sig9(r.axis1),
            sig9(r.axis2),
            opt9(r.p_meas),
            opt9(r.p_inst),
            opt9(r.advantage),
            opt9(r.gap_meas),
            opt9(r.gap_inst),
        );
    }
    out
}

pub fn rows_to_json(rows: &[ScanRow]) -> String {
    let arr: Vec<_> = rows
        .iter()
        .map(|r| {
            let mut obj = json!({
                "axis1": r.axis1,
                "axis2": r.axis2,
                "p_meas": r.p_meas,
                "p_inst": r.p_inst,
                "advantage": r.advantage,
                "gap_meas": r.gap_meas,
                "gap_inst": r.gap_inst,
                "solver_failure": r.solver_failure,
            });
            if let Some(a) = r.p_meas_analytic {
                obj["p_meas_analytic"] = json!(a);
            }
            if let Some(l) = r.locc_lower {
                obj["locc_lower"] = json!(l);
            }
            obj
        })
        .collect();
    serde_json::to_string_pretty(&arr).expect("serializable")
}

fn band_color(value: f64, lo: f64, hi: f64, spacing: f64) -> String {
    // quantize into bands so contour lines are visible, then map through a
    // blue -> yellow -> red ramp
    let banded = (value / spacing).floor() * spacing;
    let t = if hi > lo {
        ((banded - lo) / (hi - lo)).clamp(0.0, 1.0)
    } else {
        0.0
    };
    let (r, g, b) = if t < 0.5 {
        let s = t * 2.0;
        (
            (40.0 + 215.0 * s) as u8,
            (60.0 + 180.0 * s) as u8,
            (180.0 * (1.0 - s) + 60.0 * s) as u8,
        )
    } else {
        let s = (t - 0.5) * 2.0;
        (255, (240.0 * (1.0 - s) + 40.0 * s) as u8, (60.0 * (1.0 - s)) as u8)
    };
    format!("#{r:02x}{g:02x}{b:02x}")
}

fn heatmap_svg(
    rows: &[ScanRow],
    n: usize,
    metric: impl Fn(&ScanRow) -> Option<f64>,
    spacing: f64,
) -> String {
    let cell = 10usize;
    let size = n * cell;
    let values: Vec<Option<f64>> = rows.iter().map(&metric).collect();
    let finite: Vec<f64> = values.iter().flatten().copied().collect();
    let lo = finite.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = finite.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut svg = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{size}\" height=\"{size}\" \
         viewBox=\"0 0 {size} {size}\">\n"
    );
    for (idx, v) in values.iter().enumerate() {
        let (i, j) = (idx / n, idx % n);
        let fill = match v {
            Some(v) => band_color(*v, lo, hi, spacing),
            None => "#999999".to_string(),
        };
        // axis1 along x, axis2 along y, origin bottom-left
        let _ = writeln!(
            svg,
            "<rect x=\"{}\" y=\"{}\" width=\"{cell}\" height=\"{cell}\" fill=\"{fill}\"/>",
            i * cell,
            size - (j + 1) * cell,
        );
    }
    svg.push_str("</svg>\n");
    svg
}

pub fn write_outputs(cfg: &ScanConfig, rows: &[ScanRow]) -> Result<(), CliError> {
    let body = match cfg.format {
        OutputFormat::Csv => rows_to_csv(rows),
        OutputFormat::Json => rows_to_json(rows),
    };
    fs::write(&cfg.output_path, body)?;
    if cfg.emit_heatmap {
        write_heatmaps(&cfg.output_path, rows, cfg.grid_n)?;
    }
    Ok(())
}

fn write_heatmaps(out: &Path, rows: &[ScanRow], n: usize) -> Result<(), CliError> {
    let stem = out.with_extension("");
    let stem = stem.to_string_lossy();
    let maps: [(&str, Box<dyn Fn(&ScanRow) -> Option<f64>>, f64); 3] = [
        ("p_meas", Box::new(|r: &ScanRow| r.p_meas), SUCCESS_BAND),
        ("p_inst", Box::new(|r: &ScanRow| r.p_inst), SUCCESS_BAND),
        (
            "advantage",
            Box::new(|r: &ScanRow| r.advantage),
            ADVANTAGE_BAND,
        ),
    ];
    for (name, metric, spacing) in maps {
        if rows.iter().all(|r| metric(r).is_none()) {
            continue;
        }
        let svg = heatmap_svg(rows, n, metric, spacing);
        fs::write(format!("{stem}_{name}.svg"), svg)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(a: f64, b: f64) -> ScanRow {
        ScanRow {
            axis1: a,
            axis2: b,
            p_meas: Some(0.75),
            p_inst: Some(0.8),
            advantage: Some(1.2),
            gap_meas: Some(1e-9),
            gap_inst: Some(2e-9),
            p_meas_analytic: None,
            locc_lower: None,
            solver_failure: false,
        }
    }

    #[test]
    fn csv_header_and_digits() {
        let csv = rows_to_csv(&[row(0.0, 0.5)]);
        let mut lines = csv.lines();
        assert_eq!(lines.next().unwrap(), CSV_HEADER);
        let data = lines.next().unwrap();
        assert!(data.contains("7.50000000e-1"));
        assert!(csv.ends_with('\n'));
        assert!(!csv.contains('\r'));
    }

    #[test]
    fn empty_fields_for_missing_values() {
        let mut r = row(0.0, 0.0);
        r.p_inst = None;
        r.advantage = None;
        r.gap_inst = None;
        let csv = rows_to_csv(&[r]);
        let data = csv.lines().nth(1).unwrap();
        assert_eq!(data.split(',').count(), 7);
        assert_eq!(data.split(',').nth(3).unwrap(), "");
    }

    #[test]
    fn json_includes_analytic_fields_when_present() {
        let mut r = row(0.0, 0.25);
        r.p_meas_analytic = Some(0.625);
        r.locc_lower = Some(1.0 / 1.5);
        let parsed: serde_json::Value = serde_json::from_str(&rows_to_json(&[r])).unwrap();
        assert!((parsed[0]["p_meas_analytic"].as_f64().unwrap() - 0.625).abs() < 1e-12);
        assert!(parsed[0]["locc_lower"].is_number());
    }

    #[test]
    fn heatmap_has_one_rect_per_cell() {
        let rows: Vec<ScanRow> = (0..4)
            .map(|k| row((k / 2) as f64, (k % 2) as f64))
            .collect();
        let svg = heatmap_svg(&rows, 2, |r| r.p_meas, SUCCESS_BAND);
        assert_eq!(svg.matches("<rect").count(), 4);
    }
}
