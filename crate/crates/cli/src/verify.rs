//! Self-check harness: reruns the closed-form cross-validation suite and
//! reports one pass/fail line per criterion.

use std::time::{Duration, Instant};

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use luderscope_core::{
    eig_hermitian, entangled_collapse, luders_channel_choi, mp_channel_choi,
    noisy_z_difference_eigenvalues, noisy_z_difference_operator, noisy_z_povm,
    optimal_sequential_strategy, optimize_tester, projective_instrument_success,
    projective_qubit_povm, sequential_success,
    universal_not, validate_tester, CMatrix, ChoiOperator, Ensemble, HermitianOperator,
    NoisyZParams, ProjectivePair, PureState, SdpReport, TesterReport, C64,
};

use crate::scan::{run_scan_noisy, run_scan_trine, Family, ScanConfig, ScanMode};
use crate::CliError;

#[derive(Debug, Clone)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    pub fn line(&self) -> String {
        format!(
            "[{}] {} — {}",
            if self.passed { "PASS" } else { "FAIL" },
            self.name,
            self.detail
        )
    }
}

/// Aggregate feasibility record for every solve made on behalf of the
/// closed-form criteria; criterion 8 certifies it.
#[derive(Debug, Default)]
struct FeasStats {
    solves: usize,
    max_gap: f64,
    max_residual: f64,
    min_operator_eig: f64,
    all_pass: bool,
}

impl FeasStats {
    fn new() -> Self {
        FeasStats {
            solves: 0,
            max_gap: 0.0,
            max_residual: 0.0,
            min_operator_eig: 0.0,
            all_pass: true,
        }
    }

    fn record(&mut self, report: &SdpReport, tester: &TesterReport) {
        self.solves += 1;
        self.max_gap = self.max_gap.max(report.gap.abs());
        self.max_residual = self.max_residual.max(tester.normalization_residual);
        for &e in &tester.operator_min_eigs {
            self.min_operator_eig = self.min_operator_eig.min(e);
        }
        self.all_pass &= tester.passes() && report.gap.abs() <= 1e-7;
    }
}

fn random_ket(rng: &mut ChaCha8Rng) -> PureState {
    let amps: Vec<C64> = (0..2)
        .map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        .collect();
    let norm: f64 = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    PureState::new(amps.into_iter().map(|a| a / norm).collect()).expect("normalized")
}

fn random_density(rng: &mut ChaCha8Rng) -> HermitianOperator {
    let mut g = CMatrix::zeros(2, 2);
    for i in 0..2 {
        for j in 0..2 {
            g.set(
                i,
                j,
                C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)),
            );
        }
    }
    let gg = HermitianOperator::from_nearly_hermitian(g.mul(&g.dagger()));
    gg.scale(1.0 / gg.trace_re())
}

fn pair_ensemble(
    pair: &ProjectivePair,
    instrument: bool,
) -> Result<Ensemble, CliError> {
    let povms = [
        projective_qubit_povm(&pair.psi)?,
        projective_qubit_povm(&pair.phi)?,
    ];
    let chois: Vec<ChoiOperator> = povms
        .iter()
        .map(|p| {
            if instrument {
                luders_channel_choi(p)
            } else {
                Ok(mp_channel_choi(p))
            }
        })
        .collect::<Result<_, _>>()?;
    Ok(Ensemble::new(vec![pair.p_psi, pair.p_phi], chois)?)
}

fn tracked_solve(e: &Ensemble, stats: &mut FeasStats) -> Result<SdpReport, CliError> {
    let (tester, report) = optimize_tester(e)?;
    let tester_report = validate_tester(&tester, e.output_dim())?;
    stats.record(&report, &tester_report);
    Ok(report)
}

fn max_abs_eig(h: &HermitianOperator) -> f64 {
    let (vals, _) = eig_hermitian(h).expect("eig");
    vals.iter().fold(0.0f64, |m, v| m.max(v.abs()))
}

fn zx_ensemble(instrument: bool) -> Result<Ensemble, CliError> {
    let z = PureState::basis(2, 0);
    let s = 1.0 / 2.0f64.sqrt();
    let x = PureState::new(vec![C64::new(s, 0.0), C64::new(s, 0.0)])?;
    pair_ensemble(&ProjectivePair::new(z, x, 0.5, 0.5)?, instrument)
}

fn check_zx_measurement(stats: &mut FeasStats) -> Check {
    let start = Instant::now();
    let result = zx_ensemble(false).and_then(|e| tracked_solve(&e, stats));
    let elapsed = start.elapsed();
    let target = (std::f64::consts::PI / 8.0).cos().powi(2);
    finish_value_check(
        "1 Z-vs-X measurement value",
        result,
        target,
        1e-6,
        elapsed,
        Duration::from_secs(1),
    )
}

fn check_zx_instrument(stats: &mut FeasStats) -> Check {
    let start = Instant::now();
    let result = zx_ensemble(true).and_then(|e| tracked_solve(&e, stats));
    let elapsed = start.elapsed();
    let target = 0.5 + 3.0f64.sqrt() / 4.0;
    finish_value_check(
        "2 Z-vs-X instrument value",
        result,
        target,
        1e-6,
        elapsed,
        Duration::from_secs(5),
    )
}

fn finish_value_check(
    name: &str,
    result: Result<SdpReport, CliError>,
    target: f64,
    tol: f64,
    elapsed: Duration,
    budget: Duration,
) -> Check {
    match result {
        Ok(report) => {
            let err = (report.primal_value - target).abs();
            Check {
                name: name.into(),
                passed: err <= tol && elapsed <= budget,
                detail: format!(
                    "value {:.9}, target {:.9}, |err| {:.2e}, {:.2?}",
                    report.primal_value, target, err, elapsed
                ),
            }
        }
        Err(e) => Check {
            name: name.into(),
            passed: false,
            detail: format!("solver error: {e}"),
        },
    }
}

fn check_random_pairs(stats: &mut FeasStats, mutation: bool) -> Check {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5EED_0003);
    // mutation mode deliberately corrupts the oracle so the harness must flag it
    let coeff = if mutation { 4.04 } else { 4.0 };
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let psi = random_ket(&mut rng);
        let phi = random_ket(&mut rng);
        let q: f64 = rng.gen_range(0.05..0.95);
        let pair = match ProjectivePair::new(psi, phi, q, 1.0 - q) {
            Ok(p) => p,
            Err(e) => return fail("3 closed-form oracle equivalence", e.to_string()),
        };
        let x = pair.overlap();
        let inst_oracle = 0.5 * (1.0 + (1.0 - coeff * q * (1.0 - q) * x * x).max(0.0).sqrt());
        let meas_oracle = 0.5 * (1.0 + (1.0 - coeff * q * (1.0 - q) * x).max(0.0).sqrt());
        for (instrument, oracle) in [(true, inst_oracle), (false, meas_oracle)] {
            let report = match pair_ensemble(&pair, instrument).and_then(|e| tracked_solve(&e, stats))
            {
                Ok(r) => r,
                Err(e) => return fail("3 closed-form oracle equivalence", e.to_string()),
            };
            worst = worst.max((report.primal_value - oracle).abs());
        }
    }
    let elapsed = start.elapsed();
    Check {
        name: "3 closed-form oracle equivalence".into(),
        passed: worst <= 1e-6 && elapsed <= Duration::from_secs(600),
        detail: format!("100 pairs, worst |SDP − oracle| {worst:.2e}, {elapsed:.2?}"),
    }
}

fn check_sequential(mutation: bool) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5EED_0004);
    let shift = if mutation { 1e-6 } else { 0.0 };
    let mut worst = 0.0f64;
    for _ in 0..50 {
        let pair = match ProjectivePair::new(random_ket(&mut rng), random_ket(&mut rng), 0.5, 0.5)
        {
            Ok(p) => p,
            Err(e) => return fail("4 sequential strategy attains instrument value", e.to_string()),
        };
        let got = optimal_sequential_strategy(&pair)
            .and_then(|s| sequential_success(&pair, &s));
        let got = match got {
            Ok(v) => v,
            Err(e) => return fail("4 sequential strategy attains instrument value", e.to_string()),
        };
        worst = worst.max((got - projective_instrument_success(&pair) - shift).abs());
    }
    Check {
        name: "4 sequential strategy attains instrument value".into(),
        passed: worst <= 1e-9,
        detail: format!("50 pairs, worst deviation {worst:.2e}"),
    }
}

fn check_noisy_suite(stats: &mut FeasStats) -> Check {
    let mut details = Vec::new();
    let mut passed = true;
    for p in [0.25, 0.04, 0.01] {
        let reference = noisy_z_povm(0.0, 0.0).expect("ideal");
        let noisy = match noisy_z_povm(0.0, p) {
            Ok(v) => v,
            Err(e) => return fail("5 noisy-measurement bias suite", e.to_string()),
        };
        let mut solve = |instrument: bool| -> Result<f64, CliError> {
            let chois = if instrument {
                vec![luders_channel_choi(&noisy)?, luders_channel_choi(&reference)?]
            } else {
                vec![mp_channel_choi(&noisy), mp_channel_choi(&reference)]
            };
            Ok(tracked_solve(&Ensemble::new(vec![0.5, 0.5], chois)?, stats)?.primal_value)
        };
        let (meas, inst) = match (solve(false), solve(true)) {
            (Ok(m), Ok(i)) => (m, i),
            (Err(e), _) | (_, Err(e)) => {
                return fail("5 noisy-measurement bias suite", e.to_string())
            }
        };
        let meas_ok = (meas - (0.5 + p / 2.0)).abs() <= 1e-6;
        let inst_bound = 0.5 + (p + p.sqrt()) / 4.0 - 1e-6;
        let inst_ok = inst >= inst_bound;
        let delta = (inst - 0.5) / (meas - 0.5);
        let delta_bound = (p + p.sqrt()) / (2.0 * p) - 1e-4;
        let delta_ok = delta >= delta_bound;
        passed &= meas_ok && inst_ok && delta_ok;
        details.push(format!(
            "p={p}: meas {meas:.7} ({}), inst {inst:.7} vs bound {inst_bound:.7} ({}), \
             delta {delta:.4} vs bound {delta_bound:.4} ({})",
            ok(meas_ok),
            ok(inst_ok),
            ok(delta_ok)
        ));
    }
    Check {
        name: "5 noisy-measurement bias suite".into(),
        passed,
        detail: details.join("; "),
    }
}

fn check_eigenvalue_oracle(mutation: bool) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5EED_0006);
    let shift = if mutation { 1e-8 } else { 0.0 };
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let p: f64 = rng.gen_range(0.0..1.0);
        let rho = random_density(&mut rng);
        let params = match NoisyZParams::new(p, rho) {
            Ok(v) => v,
            Err(e) => return fail("6 difference-operator eigenvalue oracle", e.to_string()),
        };
        let mut expected = noisy_z_difference_eigenvalues(&params);
        expected.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let (numeric, _) = match eig_hermitian(&noisy_z_difference_operator(&params)) {
            Ok(v) => v,
            Err(e) => return fail("6 difference-operator eigenvalue oracle", e.to_string()),
        };
        for (a, b) in expected.iter().zip(numeric.iter()) {
            worst = worst.max((a - b + shift).abs());
        }
    }
    Check {
        name: "6 difference-operator eigenvalue oracle".into(),
        passed: worst <= 1e-10,
        detail: format!("100 random (rho, p), worst deviation {worst:.2e}"),
    }
}

fn check_structural_identities() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5EED_0007);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let psi = random_ket(&mut rng);
        let collapse = match entangled_collapse(&psi) {
            Ok(c) => c,
            Err(e) => return fail("7 structural identities", e.to_string()),
        };
        let norm_sq: f64 = collapse.amplitudes().iter().map(|a| a.norm_sqr()).sum();
        worst = worst.max((norm_sq - 0.5).abs());
        // collapse must factor as psi ⊗ conj(psi) / sqrt(2)
        let expected = psi.tensor(&psi.conj());
        for k in 0..4 {
            let diff = collapse.amplitude(k) * C64::new(2.0f64.sqrt(), 0.0) - expected.amplitude(k);
            worst = worst.max(diff.norm());
        }
    }
    let half = HermitianOperator::identity(2).scale(0.5);
    match universal_not(&half) {
        Ok(image) => worst = worst.max(max_abs_eig(&image.sub(&half))),
        Err(e) => return fail("7 structural identities", e.to_string()),
    }
    for _ in 0..20 {
        let povm = match projective_qubit_povm(&random_ket(&mut rng)) {
            Ok(p) => p,
            Err(e) => return fail("7 structural identities", e.to_string()),
        };
        match universal_not(&povm.elements()[0]) {
            Ok(image) => worst = worst.max(max_abs_eig(&image.sub(&povm.elements()[1]))),
            Err(e) => return fail("7 structural identities", e.to_string()),
        }
    }
    Check {
        name: "7 structural identities".into(),
        passed: worst <= 1e-12,
        detail: format!("worst residual {worst:.2e}"),
    }
}

fn check_feasibility(stats: &FeasStats) -> Check {
    Check {
        name: "8 tester feasibility certification".into(),
        passed: stats.all_pass && stats.max_residual <= 1e-7 && stats.max_gap <= 1e-7,
        detail: format!(
            "{} solves, max gap {:.2e}, max normalization residual {:.2e}, min operator eig {:.2e}",
            stats.solves, stats.max_gap, stats.max_residual, stats.min_operator_eig
        ),
    }
}

fn check_scan_dominance() -> Check {
    let start = Instant::now();
    let mut worst_violation = 0.0f64;
    let mut origin_err = 0.0f64;
    for family in [Family::Trine, Family::Noisy] {
        let mut cfg = ScanConfig::defaults(family);
        cfg.grid_n = 20;
        cfg.mode = ScanMode::Both;
        let rows = match family {
            Family::Trine => run_scan_trine(&cfg),
            Family::Noisy => run_scan_noisy(&cfg),
        };
        let rows = match rows {
            Ok(r) => r,
            Err(e) => return fail("9 scan dominance", e.to_string()),
        };
        for row in &rows {
            let (m, i) = match (row.p_meas, row.p_inst) {
                (Some(m), Some(i)) => (m, i),
                _ => return fail("9 scan dominance", "solver failure in grid".into()),
            };
            worst_violation = worst_violation
                .max(0.5 - m)
                .max(m - i)
                .max(i - 1.0);
            if row.axis1 == 0.0 && row.axis2 == 0.0 {
                origin_err = origin_err.max((m - 0.5).abs()).max((i - 0.5).abs());
            }
        }
    }
    let elapsed = start.elapsed();
    Check {
        name: "9 scan dominance".into(),
        passed: worst_violation <= 1e-6 && origin_err <= 1e-6 && elapsed <= Duration::from_secs(1800),
        detail: format!(
            "two 20x20 grids, worst ordering violation {worst_violation:.2e}, \
             origin deviation {origin_err:.2e}, {elapsed:.2?}"
        ),
    }
}

fn ok(b: bool) -> &'static str {
    if b {
        "ok"
    } else {
        "FAIL"
    }
}

fn fail(name: &str, detail: String) -> Check {
    Check {
        name: name.into(),
        passed: false,
        detail,
    }
}

/// Run all criteria. With `mutation` set, closed-form oracles are deliberately
/// perturbed; a healthy harness must then report at least one failure.
pub fn run_all(mutation: bool) -> Vec<Check> {
    let mut stats = FeasStats::new();
    let mut checks = vec![
        check_zx_measurement(&mut stats),
        check_zx_instrument(&mut stats),
        check_random_pairs(&mut stats, mutation),
        check_sequential(mutation),
        check_noisy_suite(&mut stats),
        check_eigenvalue_oracle(mutation),
        check_structural_identities(),
    ];
    checks.push(check_feasibility(&stats));
    checks.push(check_scan_dominance());
    checks
}
