//! Parameter-grid scans over the trine and noisy measurement families.

use rayon::prelude::*;
use std::path::PathBuf;

use luderscope_core::{
    luders_channel_choi, mp_channel_choi, noisy_z_measurement_success, noisy_z_optimal_success,
    noisy_z_povm, optimize_tester, trine_povm, Ensemble, Povm,
};

use crate::CliError;

const ADVANTAGE_GUARD: f64 = 1e-9;
const ROW_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    Trine,
    Noisy,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScanMode {
    Measurement,
    Instrument,
    Both,
}

impl ScanMode {
    fn wants_measurement(self) -> bool {
        self != ScanMode::Instrument
    }
    fn wants_instrument(self) -> bool {
        self != ScanMode::Measurement
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    Json,
}

#[derive(Debug, Clone)]
pub struct ScanConfig {
    pub family: Family,
    pub grid_n: usize,
    /// theta range, radians
    pub axis1_range: (f64, f64),
    /// phi (trine, radians) or p (noisy, unitless) range
    pub axis2_range: (f64, f64),
    pub mode: ScanMode,
    pub output_path: PathBuf,
    pub format: OutputFormat,
    pub emit_heatmap: bool,
}

impl ScanConfig {
    pub fn defaults(family: Family) -> Self {
        ScanConfig {
            family,
            grid_n: 50,
            axis1_range: (0.0, std::f64::consts::TAU),
            axis2_range: match family {
                Family::Trine => (0.0, std::f64::consts::PI),
                Family::Noisy => (0.0, 1.0),
            },
            mode: ScanMode::Both,
            output_path: PathBuf::from("scan.csv"),
            format: OutputFormat::Csv,
            emit_heatmap: false,
        }
    }

    fn validate(&self) -> Result<(), CliError> {
        if self.grid_n < 2 {
            return Err(CliError::Input("grid size must be at least 2".into()));
        }
        for (lo, hi) in [self.axis1_range, self.axis2_range] {
            if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
                return Err(CliError::Input(format!("empty or invalid range {lo}:{hi}")));
            }
        }
        Ok(())
    }
}

/// One grid point. Value fields are None when the mode skips the metric or the
/// solver failed at this point (`solver_failure` distinguishes the two).
/// Analytic fields are only populated on the noisy family's theta = 0 line.
#[derive(Debug, Clone)]
pub struct ScanRow {
    pub axis1: f64,
    pub axis2: f64,
    pub p_meas: Option<f64>,
    pub p_inst: Option<f64>,
    pub advantage: Option<f64>,
    pub gap_meas: Option<f64>,
    pub gap_inst: Option<f64>,
    pub p_meas_analytic: Option<f64>,
    pub locc_lower: Option<f64>,
    pub solver_failure: bool,
}

/// Grid values: half-open sampling lo + k (hi - lo)/n for k = 0..n-1, so a
/// full-turn theta axis does not duplicate its endpoint.
pub fn grid_values(range: (f64, f64), n: usize) -> Vec<f64> {
    (0..n)
        .map(|k| range.0 + k as f64 * (range.1 - range.0) / n as f64)
        .collect()
}

fn solve_mode(reference: &Povm, other: &Povm, instrument: bool) -> Result<(f64, f64), CliError> {
    let n = reference.n_outcomes().max(other.n_outcomes());
    let (a, b) = (reference.padded(n), other.padded(n));
    let chois = if instrument {
        vec![luders_channel_choi(&a)?, luders_channel_choi(&b)?]
    } else {
        vec![mp_channel_choi(&a), mp_channel_choi(&b)]
    };
    let e = Ensemble::new(vec![0.5, 0.5], chois)?;
    let (_, report) = optimize_tester(&e)?;
    Ok((report.primal_value, report.gap))
}

fn scan_point(cfg: &ScanConfig, axis1: f64, axis2: f64) -> ScanRow {
    let (reference, other) = match cfg.family {
        Family::Trine => (trine_povm(0.0, 0.0), Ok(trine_povm(axis1, axis2))),
        Family::Noisy => (
            noisy_z_povm(0.0, 0.0).expect("p=0 in range"),
            noisy_z_povm(axis1, axis2).map_err(CliError::from),
        ),
    };
    let mut row = ScanRow {
        axis1,
        axis2,
        p_meas: None,
        p_inst: None,
        advantage: None,
        gap_meas: None,
        gap_inst: None,
        p_meas_analytic: None,
        locc_lower: None,
        solver_failure: false,
    };
    let other = match other {
        Ok(o) => o,
        Err(_) => {
            row.solver_failure = true;
            return row;
        }
    };
    if cfg.mode.wants_measurement() {
        match solve_mode(&reference, &other, false) {
            Ok((v, g)) => {
                row.p_meas = Some(v);
                row.gap_meas = Some(g);
            }
            Err(_) => row.solver_failure = true,
        }
    }
    if cfg.mode.wants_instrument() {
        match solve_mode(&reference, &other, true) {
            Ok((v, g)) => {
                row.p_inst = Some(v);
                row.gap_inst = Some(g);
            }
            Err(_) => row.solver_failure = true,
        }
    }
    if let (Some(m), Some(i)) = (row.p_meas, row.p_inst) {
        let d_m = 4.0 * (m - 0.5);
        if d_m > ADVANTAGE_GUARD {
            row.advantage = Some(4.0 * (i - 0.5) / d_m);
        }
    }
    if cfg.family == Family::Noisy && axis1 == 0.0 {
        row.p_meas_analytic = noisy_z_measurement_success(axis2).ok();
        row.locc_lower = noisy_z_optimal_success(axis2).ok();
    }
    row
}

fn check_rows(rows: &[ScanRow]) -> Result<(), CliError> {
    for row in rows {
        if row.solver_failure {
            continue;
        }
        if let Some(m) = row.p_meas {
            if m < 0.5 - ROW_TOL || m > 1.0 + ROW_TOL {
                return Err(CliError::Solver(format!(
                    "row ({}, {}): p_meas {m} outside [1/2, 1]",
                    row.axis1, row.axis2
                )));
            }
        }
        if let Some(i) = row.p_inst {
            if i > 1.0 + ROW_TOL {
                return Err(CliError::Solver(format!(
                    "row ({}, {}): p_inst {i} above 1",
                    row.axis1, row.axis2
                )));
            }
            if let Some(m) = row.p_meas {
                if m > i + ROW_TOL {
                    return Err(CliError::Solver(format!(
                        "row ({}, {}): dominance violated ({m} > {i})",
                        row.axis1, row.axis2
                    )));
                }
            }
        }
    }
    Ok(())
}

fn run_scan(cfg: &ScanConfig) -> Result<Vec<ScanRow>, CliError> {
    cfg.validate()?;
    let a1 = grid_values(cfg.axis1_range, cfg.grid_n);
    let a2 = grid_values(cfg.axis2_range, cfg.grid_n);
    let points: Vec<(f64, f64)> = a1
        .iter()
        .flat_map(|&x| a2.iter().map(move |&y| (x, y)))
        .collect();
    let rows: Vec<ScanRow> = points
        .par_iter()
        .map(|&(x, y)| scan_point(cfg, x, y))
        .collect();
    check_rows(&rows)?;
    Ok(rows)
}

pub fn run_scan_trine(cfg: &ScanConfig) -> Result<Vec<ScanRow>, CliError> {
    if cfg.family != Family::Trine {
        return Err(CliError::Input("config family must be trine".into()));
    }
    run_scan(cfg)
}

pub fn run_scan_noisy(cfg: &ScanConfig) -> Result<Vec<ScanRow>, CliError> {
    if cfg.family != Family::Noisy {
        return Err(CliError::Input("config family must be noisy".into()));
    }
    run_scan(cfg)
}

/// Advantage curve for the noisy family at fixed theta: rows of
/// (p, advantage, d_meas, d_inst).
pub fn advantage_curve(
    theta: f64,
    p_range: (f64, f64),
    steps: usize,
) -> Result<Vec<(f64, Option<f64>, f64, f64)>, CliError> {
    if steps < 1 || !(p_range.0 <= p_range.1) {
        return Err(CliError::Input("invalid p range".into()));
    }
    let reference = noisy_z_povm(0.0, 0.0)?;
    let values: Vec<f64> = if steps == 1 {
        vec![p_range.0]
    } else {
        (0..steps)
            .map(|k| p_range.0 + k as f64 * (p_range.1 - p_range.0) / (steps - 1) as f64)
            .collect()
    };
    values
        .par_iter()
        .map(|&p| {
            let other = noisy_z_povm(theta, p)?;
            let (m, _) = solve_mode(&reference, &other, false)?;
            let (i, _) = solve_mode(&reference, &other, true)?;
            let d_m = 4.0 * (m - 0.5);
            let d_i = 4.0 * (i - 0.5);
            let adv = (d_m > ADVANTAGE_GUARD).then(|| d_i / d_m);
            Ok((p, adv, d_m, d_i))
        })
        .collect()
}
