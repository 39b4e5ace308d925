//! `discriminate` subcommand: optimal discrimination of a user-supplied
//! measurement ensemble, with or without post-measurement states.

use std::fs;
use std::path::Path;

use serde_json::json;

use luderscope_core::{
    luders_channel_choi, mp_channel_choi, optimize_tester, parse_povm_ensemble, validate_tester,
    ChoiOperator, Ensemble,
};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DiscriminationMode {
    Measurement,
    Instrument,
}

impl DiscriminationMode {
    fn label(self) -> &'static str {
        match self {
            DiscriminationMode::Measurement => "measurement",
            DiscriminationMode::Instrument => "instrument",
        }
    }
}

pub fn run_discriminate(
    input: &Path,
    mode: DiscriminationMode,
    priors_override: Option<Vec<f64>>,
) -> Result<String, CliError> {
    let text = fs::read_to_string(input)
        .map_err(|e| CliError::Input(format!("cannot read {}: {e}", input.display())))?;
    let mut ensemble = parse_povm_ensemble(&text)?;
    if let Some(priors) = priors_override {
        if priors.len() != ensemble.povms.len() {
            return Err(CliError::Input(format!(
                "{} priors given for {} hypotheses",
                priors.len(),
                ensemble.povms.len()
            )));
        }
        let total: f64 = priors.iter().sum();
        if priors.iter().any(|&p| p < 0.0) || (total - 1.0).abs() > 1e-9 {
            return Err(CliError::Input(
                "priors must be nonnegative and sum to 1".into(),
            ));
        }
        ensemble.priors = priors;
    }

    let n = ensemble
        .povms
        .iter()
        .map(|p| p.n_outcomes())
        .max()
        .unwrap_or(0);
    let chois: Vec<ChoiOperator> = ensemble
        .povms
        .iter()
        .map(|p| {
            let padded = p.padded(n);
            match mode {
                DiscriminationMode::Measurement => Ok(mp_channel_choi(&padded)),
                DiscriminationMode::Instrument => luders_channel_choi(&padded),
            }
        })
        .collect::<Result<_, _>>()?;
    let choi_diag: Vec<_> = chois
        .iter()
        .map(|c| {
            json!({
                "input_dim": c.input_dim(),
                "output_dim": c.output_dim(),
                "trace": c.operator().trace_re(),
                "channel_valid": c.validate_channel().is_ok(),
            })
        })
        .collect();

    let problem = Ensemble::new(ensemble.priors.clone(), chois)?;
    let (tester, report) = optimize_tester(&problem)?;
    let tester_report = validate_tester(&tester, problem.output_dim())?;
    if !tester_report.passes() {
        return Err(CliError::Solver(format!(
            "optimizer output fails feasibility: residual {:.3e}, min eig {:.3e}",
            tester_report.normalization_residual,
            tester_report
                .operator_min_eigs
                .iter()
                .cloned()
                .fold(f64::INFINITY, f64::min),
        )));
    }

    // distance is only meaningful for two equal-prior hypotheses
    let distance = (problem.priors().len() == 2
        && problem.priors().iter().all(|&p| (p - 0.5).abs() < 1e-12))
    .then(|| 4.0 * (report.primal_value - 0.5).max(0.0));

    let sdp: serde_json::Value =
        serde_json::from_str(&report.to_json()).expect("report json is valid");
    let result = json!({
        "mode": mode.label(),
        "success": report.primal_value,
        "distance": distance,
        "report": sdp,
        "tester": {
            "operator_min_eigs": tester_report.operator_min_eigs,
            "normalization_residual": tester_report.normalization_residual,
            "sigma_min_eig": tester_report.sigma_min_eig,
            "sigma_trace": tester_report.sigma_trace,
        },
        "hypotheses": choi_diag,
    });
    Ok(serde_json::to_string_pretty(&result).expect("serializable"))
}
