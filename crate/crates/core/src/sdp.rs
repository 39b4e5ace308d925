//! Tester SDP: minimum-error discrimination of channels given as Choi
//! operators, maximized over process testers {T_x >= 0, sum_x T_x = sigma (x) 1}.

use clarabel::algebra::CscMatrix;
use clarabel::solver::{
    DefaultSettings, DefaultSolver, IPSolver, SolverStatus, SupportedConeT,
};
use num_complex::Complex64 as C64;

use crate::error::{CoreError, Result};
use crate::matrix::{
    eig_hermitian, kron, partial_trace, CMatrix, HermitianOperator, PureState, SystemDims,
};
use crate::qobjects::{luders_channel_choi, mp_channel_choi, ChoiOperator, Povm};

const TESTER_TOL: f64 = 1e-7;
const ADVANTAGE_GUARD: f64 = 1e-9;
const FLAG_BLOCK_TOL: f64 = 1e-12;

/// Prior-weighted channel hypotheses with identical Choi layouts.
#[derive(Debug, Clone)]
pub struct Ensemble {
    priors: Vec<f64>,
    chois: Vec<ChoiOperator>,
}

impl Ensemble {
    pub fn new(priors: Vec<f64>, chois: Vec<ChoiOperator>) -> Result<Self> {
        if priors.len() != chois.len() || chois.is_empty() {
            return Err(CoreError::InvalidInput(format!(
                "{} priors for {} Choi operators",
                priors.len(),
                chois.len()
            )));
        }
        let sum: f64 = priors.iter().sum();
        if priors.iter().any(|&p| p < 0.0) || (sum - 1.0).abs() > 1e-9 {
            return Err(CoreError::InvalidInput(format!(
                "priors must be nonnegative and sum to 1 (sum {sum})"
            )));
        }
        let dims = chois[0].dims().clone();
        for c in &chois[1..] {
            if c.dims().0 != dims.0 {
                return Err(CoreError::DimensionMismatch(
                    "Choi operators must share dimensions".into(),
                ));
            }
        }
        Ok(Ensemble { priors, chois })
    }

    pub fn priors(&self) -> &[f64] {
        &self.priors
    }

    pub fn chois(&self) -> &[ChoiOperator] {
        &self.chois
    }

    pub fn input_dim(&self) -> usize {
        self.chois[0].input_dim()
    }

    pub fn output_dim(&self) -> usize {
        self.chois[0].output_dim()
    }
}

/// A feasible tester: T_x >= 0 on in (x) out with sum_x T_x = sigma (x) 1_out.
#[derive(Debug, Clone)]
pub struct Tester {
    pub operators: Vec<HermitianOperator>,
    pub sigma: HermitianOperator,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SdpStatus {
    Optimal,
    MaxIter,
    Infeasible,
}

impl SdpStatus {
    fn label(self) -> &'static str {
        match self {
            SdpStatus::Optimal => "optimal",
            SdpStatus::MaxIter => "max-iter",
            SdpStatus::Infeasible => "infeasible",
        }
    }
}

#[derive(Debug, Clone)]
pub struct SdpReport {
    pub primal_value: f64,
    pub dual_bound: f64,
    pub gap: f64,
    pub status: SdpStatus,
    pub iterations: u32,
}

fn sig12(v: f64) -> String {
    format!("{v:.11e}")
}

impl SdpReport {
    /// `{"primal": .., "dual": .., "gap": .., "status": .., "iterations": ..}`
    /// with reals at 12 significant digits.
    pub fn to_json(&self) -> String {
        format!(
            "{{\"primal\":{},\"dual\":{},\"gap\":{},\"status\":\"{}\",\"iterations\":{}}}",
            sig12(self.primal_value),
            sig12(self.dual_bound),
            sig12(self.gap),
            self.status.label(),
            self.iterations
        )
    }
}

#[derive(Debug, Clone)]
pub struct SolverOptions {
    /// Restrict testers to the flag-block-diagonal form that the optimum is
    /// known to admit when every Choi operator commutes with the flag
    /// projectors. Accelerator only; values agree with the unreduced SDP.
    pub symmetry_reduction: bool,
    pub max_iter: u32,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            symmetry_reduction: false,
            max_iter: 500,
        }
    }
}

// ---- real embedding and svec packing ---------------------------------------

/// Hermitian X -> real symmetric [[Re X, -Im X], [Im X, Re X]] (2d x 2d),
/// PSD iff X is, with Tr(A^R B^R) = 2 Tr(A B).
fn embed(h: &HermitianOperator) -> Vec<Vec<f64>> {
    let d = h.dim();
    let mut m = vec![vec![0.0; 2 * d]; 2 * d];
    for i in 0..d {
        for j in 0..d {
            let v = h.get(i, j);
            m[i][j] = v.re;
            m[i + d][j + d] = v.re;
            m[i][j + d] = -v.im;
            m[i + d][j] = v.im;
        }
    }
    m
}

/// Scaled upper-triangle column-major packing: off-diagonals x sqrt(2), so
/// dot(svec A, svec B) = Tr(A B) for symmetric A, B.
fn svec(m: &[Vec<f64>]) -> Vec<f64> {
    let n = m.len();
    let rt2 = std::f64::consts::SQRT_2;
    let mut out = Vec::with_capacity(n * (n + 1) / 2);
    for c in 0..n {
        for r in 0..=c {
            out.push(if r == c { m[r][c] } else { m[r][c] * rt2 });
        }
    }
    out
}

/// Inverse of `svec` followed by undoing the real embedding; symmetrizes the
/// generic solver iterate (Re = (A + C)/2, Im = (B^T - B)/2 on the blocks).
fn unpack_hermitian(x: &[f64], d: usize) -> HermitianOperator {
    let n = 2 * d;
    let rt2 = std::f64::consts::SQRT_2;
    let mut m = vec![vec![0.0; n]; n];
    let mut idx = 0;
    for c in 0..n {
        for r in 0..=c {
            let v = if r == c { x[idx] } else { x[idx] / rt2 };
            m[r][c] = v;
            m[c][r] = v;
            idx += 1;
        }
    }
    let mut out = CMatrix::zeros(d, d);
    for i in 0..d {
        for j in 0..d {
            let re = 0.5 * (m[i][j] + m[i + d][j + d]);
            let im = 0.5 * (m[i + d][j] - m[i][j + d]);
            out.set(i, j, C64::new(re, im));
        }
    }
    HermitianOperator::from_nearly_hermitian(out)
}

fn triangle_len(complex_dim: usize) -> usize {
    let n = 2 * complex_dim;
    n * (n + 1) / 2
}

// ---- generic block SDP ------------------------------------------------------

/// max sum w Tr(C T_b) over PSD Hermitian blocks T_b subject to linear
/// equality constraints sum Tr(F T_b) = rhs.
struct BlockSdp {
    block_dims: Vec<usize>,
    objective: Vec<(usize, HermitianOperator, f64)>,
    constraints: Vec<(Vec<(usize, HermitianOperator)>, f64)>,
}

fn solve_block_sdp(
    problem: &BlockSdp,
    max_iter: u32,
) -> Result<(Vec<HermitianOperator>, SdpReport)> {
    let offsets: Vec<usize> = problem
        .block_dims
        .iter()
        .scan(0usize, |acc, &d| {
            let off = *acc;
            *acc += triangle_len(d);
            Some(off)
        })
        .collect();
    let n_vars: usize = problem.block_dims.iter().map(|&d| triangle_len(d)).sum();
    let m_eq = problem.constraints.len();
    let m_total = m_eq + n_vars;

    // objective: min q'x with q = -w/2 svec(C^R) per block
    let mut q = vec![0.0; n_vars];
    for (b, c, w) in &problem.objective {
        let s = svec(&embed(c));
        for (k, v) in s.iter().enumerate() {
            q[offsets[*b] + k] -= 0.5 * w * v;
        }
    }

    // A x + s = b: equality rows (zero cone), then -I rows per PSD block
    let mut rows = Vec::new();
    let mut cols = Vec::new();
    let mut vals = Vec::new();
    let mut b = vec![0.0; m_total];
    for (r, (terms, rhs)) in problem.constraints.iter().enumerate() {
        b[r] = *rhs;
        for (blk, f) in terms {
            let s = svec(&embed(f));
            for (k, v) in s.iter().enumerate() {
                if *v != 0.0 {
                    rows.push(r);
                    cols.push(offsets[*blk] + k);
                    vals.push(0.5 * v);
                }
            }
        }
    }
    for k in 0..n_vars {
        rows.push(m_eq + k);
        cols.push(k);
        vals.push(-1.0);
    }
    let a = CscMatrix::new_from_triplets(m_total, n_vars, rows, cols, vals);
    let p = CscMatrix::zeros((n_vars, n_vars));

    let mut cones = vec![SupportedConeT::ZeroConeT(m_eq)];
    for &d in &problem.block_dims {
        cones.push(SupportedConeT::PSDTriangleConeT(2 * d));
    }

    let settings = DefaultSettings {
        verbose: false,
        max_iter,
        tol_gap_abs: 1e-9,
        tol_gap_rel: 1e-9,
        tol_feas: 1e-9,
        ..DefaultSettings::default()
    };
    let mut solver = DefaultSolver::new(&p, &q, &a, &b, &cones, settings);
    solver.solve();
    let sol = &solver.solution;
    let status = match sol.status {
        SolverStatus::Solved => SdpStatus::Optimal,
        SolverStatus::AlmostSolved | SolverStatus::MaxIterations | SolverStatus::MaxTime => {
            SdpStatus::MaxIter
        }
        SolverStatus::PrimalInfeasible
        | SolverStatus::DualInfeasible
        | SolverStatus::AlmostPrimalInfeasible
        | SolverStatus::AlmostDualInfeasible => SdpStatus::Infeasible,
        other => {
            return Err(CoreError::Solver(format!(
                "solver terminated with {other:?}"
            )))
        }
    };
    let primal_value = -sol.obj_val;
    let dual_bound = -sol.obj_val_dual;
    let blocks = problem
        .block_dims
        .iter()
        .zip(offsets.iter())
        .map(|(&d, &off)| unpack_hermitian(&sol.x[off..off + triangle_len(d)], d))
        .collect();
    Ok((
        blocks,
        SdpReport {
            primal_value,
            dual_bound,
            gap: dual_bound - primal_value,
            status,
            iterations: sol.iterations,
        },
    ))
}

// ---- tester SDP assembly ----------------------------------------------------

/// Hermitian basis element with 1 at (r,c): for r == c the matrix unit, for
/// r != c either the real (E_rc + E_cr) or imaginary i(E_rc - E_cr) pairing.
fn f_entry(d: usize, r: usize, c: usize, imag: bool) -> HermitianOperator {
    let mut m = CMatrix::zeros(d, d);
    if r == c {
        m.set(r, c, C64::new(1.0, 0.0));
    } else if imag {
        m.set(r, c, C64::new(0.0, 1.0));
        m.set(c, r, C64::new(0.0, -1.0));
    } else {
        m.set(r, c, C64::new(1.0, 0.0));
        m.set(c, r, C64::new(1.0, 0.0));
    }
    HermitianOperator::from_nearly_hermitian(m)
}

/// Constraints forcing S = sum over the given blocks of T to have the form
/// sigma (x) 1_out on index layout (in, out), with Tr sigma = rhs_trace on the
/// baseline out-column 0 (rhs_trace = None skips the trace row so callers can
/// pin the baseline elsewhere).
fn tester_shape_constraints(
    blocks: &[usize],
    d_in: usize,
    d_out: usize,
    trace_rhs: Option<f64>,
) -> Vec<(Vec<(usize, HermitianOperator)>, f64)> {
    let d = d_in * d_out;
    let idx = |i: usize, k: usize| i * d_out + k;
    let spread = |f: HermitianOperator| -> Vec<(usize, HermitianOperator)> {
        blocks.iter().map(|&b| (b, f.clone())).collect()
    };
    let mut out = Vec::new();
    // off-diagonal in the out factor must vanish
    for r in 0..d {
        for c in (r + 1)..d {
            if r % d_out != c % d_out {
                out.push((spread(f_entry(d, r, c, false)), 0.0));
                out.push((spread(f_entry(d, r, c, true)), 0.0));
            }
        }
    }
    // every diagonal out-column repeats the k = 0 baseline
    for k in 1..d_out {
        for i in 0..d_in {
            for j in i..d_in {
                let f = f_entry(d, idx(i, k), idx(j, k), false)
                    .sub(&f_entry(d, idx(i, 0), idx(j, 0), false));
                out.push((spread(f), 0.0));
                if i != j {
                    let f = f_entry(d, idx(i, k), idx(j, k), true)
                        .sub(&f_entry(d, idx(i, 0), idx(j, 0), true));
                    out.push((spread(f), 0.0));
                }
            }
        }
    }
    if let Some(rhs) = trace_rhs {
        let mut f = HermitianOperator::zeros(d);
        for i in 0..d_in {
            f = f.add(&f_entry(d, idx(i, 0), idx(i, 0), false));
        }
        out.push((spread(f), rhs));
    }
    out
}

fn sigma_from_sum(operators: &[HermitianOperator], d_in: usize, d_out: usize) -> Result<HermitianOperator> {
    let mut sum = HermitianOperator::zeros(d_in * d_out);
    for t in operators {
        sum = sum.add(t);
    }
    Ok(partial_trace(&sum, &SystemDims::new(vec![d_in, d_out]), &[0])?.scale(1.0 / d_out as f64))
}

pub fn optimize_tester(e: &Ensemble) -> Result<(Tester, SdpReport)> {
    optimize_tester_with(e, &SolverOptions::default())
}

pub fn optimize_tester_with(e: &Ensemble, opts: &SolverOptions) -> Result<(Tester, SdpReport)> {
    let d_in = e.input_dim();
    let d_out = e.output_dim();
    let n = e.chois.len();
    if opts.symmetry_reduction {
        return optimize_tester_reduced(e, opts);
    }
    let problem = BlockSdp {
        block_dims: vec![d_in * d_out; n],
        objective: e
            .chois
            .iter()
            .enumerate()
            .map(|(x, c)| (x, c.operator().clone(), e.priors[x]))
            .collect(),
        constraints: tester_shape_constraints(
            &(0..n).collect::<Vec<_>>(),
            d_in,
            d_out,
            Some(1.0),
        ),
    };
    let (operators, report) = solve_block_sdp(&problem, opts.max_iter)?;
    let sigma = sigma_from_sum(&operators, d_in, d_out)?;
    Ok((Tester { operators, sigma }, report))
}

/// Block-diagonal reduction over the flag factor (the last tensor factor of
/// the Choi layout): valid whenever every Choi operator is flag-diagonal.
fn optimize_tester_reduced(e: &Ensemble, opts: &SolverOptions) -> Result<(Tester, SdpReport)> {
    let dims = e.chois[0].dims();
    if dims.len() < 2 {
        return Err(CoreError::InvalidInput(
            "symmetry reduction requires an explicit flag factor".into(),
        ));
    }
    let d_in = e.input_dim();
    let n_flag = *dims.0.last().unwrap();
    let d_out = e.output_dim();
    let d_out1 = d_out / n_flag;
    let n = e.chois.len();
    let d_red = d_in * d_out1;

    // flag-block extraction; error if any Choi has cross-flag coherences
    let mut choi_blocks: Vec<Vec<HermitianOperator>> = Vec::with_capacity(n);
    for c in &e.chois {
        let full = c.operator();
        let mut per_flag = Vec::with_capacity(n_flag);
        for a in 0..n_flag {
            let mut m = CMatrix::zeros(d_red, d_red);
            for u in 0..d_red {
                for v in 0..d_red {
                    m.set(u, v, full.get(u * n_flag + a, v * n_flag + a));
                }
            }
            per_flag.push(HermitianOperator::from_nearly_hermitian(m));
        }
        for u in 0..full.dim() {
            for v in 0..full.dim() {
                if u % n_flag != v % n_flag && full.get(u, v).norm() > FLAG_BLOCK_TOL {
                    return Err(CoreError::InvalidInput(
                        "symmetry reduction requires flag-diagonal Choi operators".into(),
                    ));
                }
            }
        }
        choi_blocks.push(per_flag);
    }

    // block (x, a) at index x * n_flag + a, each on in (x) out1
    let block_of = |x: usize, a: usize| x * n_flag + a;
    let mut constraints = Vec::new();
    for a in 0..n_flag {
        let blocks: Vec<usize> = (0..n).map(|x| block_of(x, a)).collect();
        constraints.extend(tester_shape_constraints(
            &blocks,
            d_in,
            d_out1,
            if a == 0 { Some(1.0) } else { None },
        ));
    }
    // all flag blocks share the same sigma: tie each baseline to flag 0
    let idx = |i: usize| i * d_out1; // out1 index 0
    for a in 1..n_flag {
        for i in 0..d_in {
            for j in i..d_in {
                for imag in [false, true] {
                    if imag && i == j {
                        continue;
                    }
                    let f = f_entry(d_red, idx(i), idx(j), imag);
                    let mut terms = Vec::new();
                    for x in 0..n {
                        terms.push((block_of(x, a), f.clone()));
                        terms.push((block_of(x, 0), f.scale(-1.0)));
                    }
                    constraints.push((terms, 0.0));
                }
            }
        }
    }
    let mut objective = Vec::new();
    for x in 0..n {
        for a in 0..n_flag {
            objective.push((block_of(x, a), choi_blocks[x][a].clone(), e.priors[x]));
        }
    }
    let problem = BlockSdp {
        block_dims: vec![d_red; n * n_flag],
        objective,
        constraints,
    };
    let (blocks, report) = solve_block_sdp(&problem, opts.max_iter)?;
    let mut operators = Vec::with_capacity(n);
    for x in 0..n {
        let mut t = CMatrix::zeros(d_in * d_out, d_in * d_out);
        for a in 0..n_flag {
            let proj = PureState::basis(n_flag, a).projector();
            t = t.add(&kron(blocks[block_of(x, a)].matrix(), proj.matrix()));
        }
        operators.push(HermitianOperator::from_nearly_hermitian(t));
    }
    let sigma = sigma_from_sum(&operators, d_in, d_out)?;
    Ok((Tester { operators, sigma }, report))
}

pub fn tester_success(t: &Tester, e: &Ensemble) -> Result<f64> {
    if t.operators.len() != e.chois.len() {
        return Err(CoreError::DimensionMismatch(format!(
            "{} tester operators for {} hypotheses",
            t.operators.len(),
            e.chois.len()
        )));
    }
    let mut s = 0.0;
    for ((p, c), op) in e.priors.iter().zip(e.chois.iter()).zip(t.operators.iter()) {
        if op.dim() != c.operator().dim() {
            return Err(CoreError::DimensionMismatch(format!(
                "tester dim {} != Choi dim {}",
                op.dim(),
                c.operator().dim()
            )));
        }
        s += p * c.operator().inner(op);
    }
    Ok(s)
}

#[derive(Debug, Clone)]
pub struct TesterReport {
    pub operator_min_eigs: Vec<f64>,
    pub normalization_residual: f64,
    pub sigma_min_eig: f64,
    pub sigma_trace: f64,
}

impl TesterReport {
    pub fn passes(&self) -> bool {
        self.operator_min_eigs.iter().all(|&e| e >= -TESTER_TOL)
            && self.normalization_residual <= TESTER_TOL
            && self.sigma_min_eig >= -TESTER_TOL
            && (self.sigma_trace - 1.0).abs() <= TESTER_TOL
    }
}

pub fn validate_tester(t: &Tester, out_dim: usize) -> Result<TesterReport> {
    let mut operator_min_eigs = Vec::with_capacity(t.operators.len());
    let d = t.operators[0].dim();
    let mut sum = HermitianOperator::zeros(d);
    for op in &t.operators {
        let (vals, _) = eig_hermitian(op)?;
        operator_min_eigs.push(vals[0]);
        sum = sum.add(op);
    }
    let expected = kron(t.sigma.matrix(), &CMatrix::identity(out_dim));
    let normalization_residual = sum.matrix().max_abs_diff(&expected);
    let (svals, _) = eig_hermitian(&t.sigma)?;
    Ok(TesterReport {
        operator_min_eigs,
        normalization_residual,
        sigma_min_eig: svals[0],
        sigma_trace: t.sigma.trace_re(),
    })
}

/// Diamond distance by inverting the equal-prior two-channel relation
/// p = 1/2 + d/4: returns (4(primal - 1/2), interval from the (primal, dual)
/// bracket).
pub fn diamond_distance(a: &ChoiOperator, b: &ChoiOperator) -> Result<(f64, (f64, f64))> {
    let e = Ensemble::new(vec![0.5, 0.5], vec![a.clone(), b.clone()])?;
    let (_, report) = optimize_tester(&e)?;
    let value = (4.0 * (report.primal_value - 0.5)).max(0.0);
    let hi = 4.0 * (report.dual_bound - 0.5);
    Ok((value, (value, hi)))
}

fn padded_pair(p1: &Povm, p2: &Povm) -> (Povm, Povm) {
    let n = p1.n_outcomes().max(p2.n_outcomes());
    (p1.padded(n), p2.padded(n))
}

/// d_M: diamond distance between the measure-and-prepare channels.
pub fn measurement_distance(p1: &Povm, p2: &Povm) -> Result<f64> {
    let (a, b) = padded_pair(p1, p2);
    Ok(diamond_distance(&mp_channel_choi(&a), &mp_channel_choi(&b))?.0)
}

/// d_L: diamond distance between the Lüders channels.
pub fn luders_distance(p1: &Povm, p2: &Povm) -> Result<f64> {
    let (a, b) = padded_pair(p1, p2);
    Ok(diamond_distance(&luders_channel_choi(&a)?, &luders_channel_choi(&b)?)?.0)
}

/// Instrument advantage bias Delta = d_L / d_M.
pub fn instrument_advantage(p1: &Povm, p2: &Povm) -> Result<f64> {
    let d_m = measurement_distance(p1, p2)?;
    if d_m <= ADVANTAGE_GUARD {
        return Err(CoreError::UndefinedAdvantage { d_m });
    }
    Ok(luders_distance(p1, p2)? / d_m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::closed_form::noisy_z_optimal_success;
    use crate::matrix::PureState;
    use crate::qobjects::{noisy_z_povm, projective_qubit_povm};

    fn ket_plus() -> PureState {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        PureState::new(vec![C64::new(s, 0.0), C64::new(s, 0.0)]).unwrap()
    }

    fn z_povm() -> Povm {
        projective_qubit_povm(&PureState::basis(2, 0)).unwrap()
    }

    fn x_povm() -> Povm {
        projective_qubit_povm(&ket_plus()).unwrap()
    }

    fn zx_mp_ensemble() -> Ensemble {
        Ensemble::new(
            vec![0.5, 0.5],
            vec![mp_channel_choi(&z_povm()), mp_channel_choi(&x_povm())],
        )
        .unwrap()
    }

    fn zx_luders_ensemble() -> Ensemble {
        Ensemble::new(
            vec![0.5, 0.5],
            vec![
                luders_channel_choi(&z_povm()).unwrap(),
                luders_channel_choi(&x_povm()).unwrap(),
            ],
        )
        .unwrap()
    }

    fn cos2_pi8() -> f64 {
        let v = (std::f64::consts::PI / 8.0).cos();
        v * v
    }

    #[test]
    fn identical_hypotheses_give_half() {
        let c = mp_channel_choi(&z_povm());
        let e = Ensemble::new(vec![0.5, 0.5], vec![c.clone(), c]).unwrap();
        let (tester, report) = optimize_tester(&e).unwrap();
        assert_eq!(report.status, SdpStatus::Optimal);
        assert!((report.primal_value - 0.5).abs() < 1e-7, "{}", report.primal_value);
        assert!(validate_tester(&tester, e.output_dim()).unwrap().passes());
    }

    #[test]
    fn zx_measurement_value() {
        let (tester, report) = optimize_tester(&zx_mp_ensemble()).unwrap();
        assert!((report.primal_value - cos2_pi8()).abs() < 1e-6, "{}", report.primal_value);
        assert!(report.gap >= -1e-9 && report.gap < 1e-7);
        assert!(validate_tester(&tester, 2).unwrap().passes());
    }

    #[test]
    fn zx_luders_value() {
        let expect = 0.5 + 3f64.sqrt() / 4.0;
        let (tester, report) = optimize_tester(&zx_luders_ensemble()).unwrap();
        assert!((report.primal_value - expect).abs() < 1e-6, "{}", report.primal_value);
        assert!(validate_tester(&tester, 4).unwrap().passes());
    }

    #[test]
    fn tester_success_consistency() {
        let e = zx_luders_ensemble();
        let (tester, report) = optimize_tester(&e).unwrap();
        let fed_back = tester_success(&tester, &e).unwrap();
        assert!((fed_back - report.primal_value).abs() < 1e-9);
        // primal feasible, so bounded by the dual
        assert!(fed_back <= report.dual_bound + 1e-9);
    }

    #[test]
    fn uniform_tester_on_identical_chois() {
        let c = mp_channel_choi(&z_povm());
        let e = Ensemble::new(vec![0.5, 0.5], vec![c.clone(), c]).unwrap();
        let sigma = HermitianOperator::identity(2).scale(0.5);
        let t = HermitianOperator::from_nearly_hermitian(
            kron(sigma.matrix(), &CMatrix::identity(2)).scale_re(0.5),
        );
        let tester = Tester {
            operators: vec![t.clone(), t],
            sigma,
        };
        assert!(validate_tester(&tester, 2).unwrap().passes());
        assert!((tester_success(&tester, &e).unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn validate_tester_catches_scaling() {
        let e = zx_mp_ensemble();
        let (mut tester, _) = optimize_tester(&e).unwrap();
        assert!(validate_tester(&tester, 2).unwrap().passes());
        let good = tester.clone();
        tester.operators[0] = tester.operators[0].scale(2.0);
        assert!(!validate_tester(&tester, 2).unwrap().passes());
        let mut bad_sigma = good;
        bad_sigma.sigma = bad_sigma.sigma.scale(2.0);
        assert!(!validate_tester(&bad_sigma, 2).unwrap().passes());
    }

    #[test]
    fn diamond_distance_examples() {
        let c = mp_channel_choi(&z_povm());
        let (v, (lo, hi)) = diamond_distance(&c, &c).unwrap();
        assert!(v.abs() < 1e-7 && lo <= hi + 1e-12);
        assert!((measurement_distance(&z_povm(), &x_povm()).unwrap() - 2f64.sqrt()).abs() < 1e-6);
        assert!((luders_distance(&z_povm(), &x_povm()).unwrap() - 3f64.sqrt()).abs() < 1e-6);
        assert!(measurement_distance(&z_povm(), &z_povm()).unwrap() < 1e-7);
        assert!(luders_distance(&z_povm(), &z_povm()).unwrap() < 1e-7);
    }

    #[test]
    fn noisy_distances() {
        let w = noisy_z_povm(0.0, 0.25).unwrap();
        assert!((measurement_distance(&z_povm(), &w).unwrap() - 0.5).abs() < 1e-6);
        // d_L = 4 (p_L - 1/2) with p_L = 1/(2 - sqrt(p))
        let expect = 4.0 * (noisy_z_optimal_success(0.25).unwrap() - 0.5);
        assert!((luders_distance(&z_povm(), &w).unwrap() - expect).abs() < 1e-6);
    }

    #[test]
    fn advantage_examples() {
        assert!((instrument_advantage(&z_povm(), &x_povm()).unwrap() - 1.5f64.sqrt()).abs() < 1e-5);
        let w = noisy_z_povm(0.0, 0.25).unwrap();
        assert!((instrument_advantage(&z_povm(), &w).unwrap() - 4.0 / 3.0).abs() < 1e-5);
        assert!(matches!(
            instrument_advantage(&z_povm(), &z_povm()),
            Err(CoreError::UndefinedAdvantage { .. })
        ));
    }

    #[test]
    fn symmetry_reduction_agrees() {
        let opts = SolverOptions {
            symmetry_reduction: true,
            ..SolverOptions::default()
        };
        for e in [zx_mp_ensemble(), zx_luders_ensemble()] {
            let (_, full) = optimize_tester(&e).unwrap();
            let (tester, red) = optimize_tester_with(&e, &opts).unwrap();
            assert!(
                (full.primal_value - red.primal_value).abs() < 1e-7,
                "{} vs {}",
                full.primal_value,
                red.primal_value
            );
            assert!(validate_tester(&tester, e.output_dim()).unwrap().passes());
            let fed_back = tester_success(&tester, &e).unwrap();
            assert!((fed_back - red.primal_value).abs() < 1e-8);
        }
    }

    #[test]
    fn report_json_format() {
        let report = SdpReport {
            primal_value: 0.8535533905932737,
            dual_bound: 0.8535533905932742,
            gap: 5e-16,
            status: SdpStatus::Optimal,
            iterations: 13,
        };
        let json = report.to_json();
        let parsed: serde_json::Value = serde_json::from_str(&json).unwrap();
        assert_eq!(parsed["status"], "optimal");
        assert_eq!(parsed["iterations"], 13);
        let primal = parsed["primal"].as_f64().unwrap();
        assert!((primal - report.primal_value).abs() < 1e-11);
        // 12 significant digits in the mantissa
        assert!(json.contains("8.53553390593e-1"));
    }

    #[test]
    fn ensemble_rejects_bad_input() {
        let c = mp_channel_choi(&z_povm());
        assert!(Ensemble::new(vec![0.6, 0.6], vec![c.clone(), c.clone()]).is_err());
        assert!(Ensemble::new(vec![1.0], vec![]).is_err());
        let lud = luders_channel_choi(&z_povm()).unwrap();
        assert!(Ensemble::new(vec![0.5, 0.5], vec![c, lud]).is_err());
    }
}
