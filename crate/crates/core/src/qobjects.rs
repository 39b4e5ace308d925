//! POVMs, Lüders instruments, and Choi operators of the induced channels.

use num_complex::Complex64 as C64;
use serde::Deserialize;

use crate::error::{CoreError, Result};
use crate::matrix::{
    eig_hermitian, kron, max_entangled, partial_trace, pauli_x, pauli_y, pauli_z, psd_sqrt,
    CMatrix, HermitianOperator, PureState, SystemDims,
};

/// Looser than the raw matrix PSD tolerance: family constructors go through
/// trigonometry and we only need elements nonnegative up to solver noise.
pub const POVM_PSD_TOL: f64 = 1e-9;
pub const COMPLETENESS_TOL: f64 = 1e-9;
const KRAUS_COMPLETENESS_TOL: f64 = 1e-8;
const CHOI_CP_TOL: f64 = 1e-8;
const CHOI_TP_TOL: f64 = 1e-8;
const POST_STATE_PROB_TOL: f64 = 1e-12;

/// Validation report for a candidate POVM: per-element minimum eigenvalues and
/// the completeness residual max-norm.
#[derive(Debug, Clone)]
pub struct PovmReport {
    pub element_min_eigs: Vec<f64>,
    pub completeness_residual: f64,
}

impl PovmReport {
    pub fn passes(&self) -> bool {
        self.element_min_eigs.iter().all(|&e| e >= -POVM_PSD_TOL)
            && self.completeness_residual <= COMPLETENESS_TOL
    }
}

impl std::fmt::Display for PovmReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "min eigenvalues {:?}, completeness residual {:.3e}, {}",
            self.element_min_eigs,
            self.completeness_residual,
            if self.passes() { "pass" } else { "fail" }
        )
    }
}

pub fn validate_povm(elements: &[HermitianOperator]) -> Result<PovmReport> {
    let dim = match elements.first() {
        Some(e) => e.dim(),
        None => return Err(CoreError::InvalidPovm("no elements".into())),
    };
    let mut element_min_eigs = Vec::with_capacity(elements.len());
    let mut sum = HermitianOperator::zeros(dim);
    for e in elements {
        if e.dim() != dim {
            return Err(CoreError::DimensionMismatch(format!(
                "POVM element dim {} != {dim}",
                e.dim()
            )));
        }
        let (vals, _) = eig_hermitian(e)?;
        element_min_eigs.push(vals[0]);
        sum = sum.add(e);
    }
    let completeness_residual = sum
        .matrix()
        .max_abs_diff(HermitianOperator::identity(dim).matrix());
    Ok(PovmReport {
        element_min_eigs,
        completeness_residual,
    })
}

/// A positive operator-valued measure: elements M_a >= 0 with sum_a M_a = 1.
#[derive(Debug, Clone)]
pub struct Povm {
    dim: usize,
    elements: Vec<HermitianOperator>,
}

impl Povm {
    pub fn new(elements: Vec<HermitianOperator>) -> Result<Self> {
        let report = validate_povm(&elements)?;
        if !report.passes() {
            return Err(CoreError::InvalidPovm(report.to_string()));
        }
        Ok(Povm {
            dim: elements[0].dim(),
            elements,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n_outcomes(&self) -> usize {
        self.elements.len()
    }

    pub fn element(&self, a: usize) -> &HermitianOperator {
        &self.elements[a]
    }

    pub fn elements(&self) -> &[HermitianOperator] {
        &self.elements
    }

    /// Append zero elements until there are `n` outcomes. Used to line up flag
    /// registers when discriminating POVMs with different outcome counts; zero
    /// elements have zero Kraus operators and vanishing Choi blocks.
    pub fn padded(&self, n: usize) -> Povm {
        let mut elements = self.elements.clone();
        while elements.len() < n {
            elements.push(HermitianOperator::zeros(self.dim));
        }
        Povm {
            dim: self.dim,
            elements,
        }
    }
}

/// Lüders instrument: outcome maps rho -> sqrt(M_a) rho sqrt(M_a), stored via
/// their PSD Kraus operators sqrt(M_a).
#[derive(Debug, Clone)]
pub struct LudersInstrument {
    dim: usize,
    kraus: Vec<HermitianOperator>,
}

impl LudersInstrument {
    pub fn new(kraus: Vec<HermitianOperator>) -> Result<Self> {
        let dim = match kraus.first() {
            Some(k) => k.dim(),
            None => return Err(CoreError::InvalidPovm("no Kraus operators".into())),
        };
        let mut sum = HermitianOperator::zeros(dim);
        for k in kraus.iter() {
            if k.dim() != dim {
                return Err(CoreError::DimensionMismatch(format!(
                    "Kraus dim {} != {dim}",
                    k.dim()
                )));
            }
            let (vals, _) = eig_hermitian(k)?;
            if vals[0] < -POVM_PSD_TOL {
                return Err(CoreError::NotPsd {
                    min_eigenvalue: vals[0],
                });
            }
            sum = sum.add(&HermitianOperator::from_nearly_hermitian(
                k.matrix().mul(k.matrix()),
            ));
        }
        let residual = sum
            .matrix()
            .max_abs_diff(HermitianOperator::identity(dim).matrix());
        if residual > KRAUS_COMPLETENESS_TOL {
            return Err(CoreError::InvalidPovm(format!(
                "Kraus squares sum residual {residual:.3e}"
            )));
        }
        Ok(LudersInstrument { dim, kraus })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n_outcomes(&self) -> usize {
        self.kraus.len()
    }

    pub fn kraus(&self, a: usize) -> &HermitianOperator {
        &self.kraus[a]
    }
}

pub fn luders_instrument(p: &Povm) -> Result<LudersInstrument> {
    let kraus = p
        .elements()
        .iter()
        .map(psd_sqrt)
        .collect::<Result<Vec<_>>>()?;
    LudersInstrument::new(kraus)
}

pub fn instrument_povm(instr: &LudersInstrument) -> Result<Povm> {
    let elements = instr
        .kraus
        .iter()
        .map(|k| HermitianOperator::from_nearly_hermitian(k.matrix().mul(k.matrix())))
        .collect();
    Povm::new(elements)
}

/// Outcome probability and normalized post-measurement state.
pub fn luders_post_state(
    instr: &LudersInstrument,
    a: usize,
    rho: &HermitianOperator,
) -> Result<(f64, HermitianOperator)> {
    if a >= instr.n_outcomes() {
        return Err(CoreError::InvalidInput(format!(
            "outcome {a} out of range for {} outcomes",
            instr.n_outcomes()
        )));
    }
    if rho.dim() != instr.dim {
        return Err(CoreError::DimensionMismatch(format!(
            "state dim {} != instrument dim {}",
            rho.dim(),
            instr.dim
        )));
    }
    let tr = rho.trace_re();
    if (tr - 1.0).abs() > 1e-8 {
        return Err(CoreError::NotNormalized(tr));
    }
    let collapsed = rho.conjugate_by(instr.kraus[a].matrix());
    let prob = collapsed.trace_re();
    if prob <= POST_STATE_PROB_TOL {
        return Err(CoreError::UndefinedPostState { outcome: a, prob });
    }
    Ok((prob, collapsed.scale(1.0 / prob)))
}

/// Choi operator of a channel, J(E) = sum_jk |j><k| tensor E(|j><k|), with its
/// tensor-factor layout (input first, then output factors).
#[derive(Debug, Clone)]
pub struct ChoiOperator {
    operator: HermitianOperator,
    dims: SystemDims,
}

impl ChoiOperator {
    pub fn new(operator: HermitianOperator, dims: SystemDims) -> Result<Self> {
        if dims.total() != operator.dim() {
            return Err(CoreError::DimensionMismatch(format!(
                "dims product {} != operator dim {}",
                dims.total(),
                operator.dim()
            )));
        }
        Ok(ChoiOperator { operator, dims })
    }

    pub fn operator(&self) -> &HermitianOperator {
        &self.operator
    }

    pub fn dims(&self) -> &SystemDims {
        &self.dims
    }

    pub fn input_dim(&self) -> usize {
        self.dims.0[0]
    }

    pub fn output_dim(&self) -> usize {
        self.operator.dim() / self.input_dim()
    }

    /// CP: operator PSD. TP: trace over output factors equals the input identity.
    pub fn validate_channel(&self) -> Result<()> {
        let (vals, _) = eig_hermitian(&self.operator)?;
        if vals[0] < -CHOI_CP_TOL {
            return Err(CoreError::NotPsd {
                min_eigenvalue: vals[0],
            });
        }
        let reduced = partial_trace(&self.operator, &self.dims, &[0])?;
        let residual = reduced
            .matrix()
            .max_abs_diff(HermitianOperator::identity(self.input_dim()).matrix());
        if residual > CHOI_TP_TOL {
            return Err(CoreError::InvalidInput(format!(
                "trace-preservation residual {residual:.3e}"
            )));
        }
        Ok(())
    }
}

fn flag_projector(n: usize, a: usize) -> HermitianOperator {
    PureState::basis(n, a).projector()
}

/// Choi operator of the measure-and-prepare channel rho -> sum_a Tr(M_a rho)|a><a|:
/// C = sum_a M_a^T tensor |a><a| on factors (in, flag).
pub fn mp_channel_choi(p: &Povm) -> ChoiOperator {
    let n = p.n_outcomes();
    let mut op = CMatrix::zeros(p.dim() * n, p.dim() * n);
    for (a, m) in p.elements().iter().enumerate() {
        let term = kron(&m.matrix().transpose(), flag_projector(n, a).matrix());
        op = op.add(&term);
    }
    ChoiOperator {
        operator: HermitianOperator::from_nearly_hermitian(op),
        dims: SystemDims::new(vec![p.dim(), n]),
    }
}

/// Choi operator of the Lüders channel rho -> sum_a sqrt(M_a) rho sqrt(M_a) tensor |a><a|:
/// C_L = sum_a [sum_jk |j><k| tensor sqrt(M_a)|j><k|sqrt(M_a)] tensor |a><a| on
/// factors (in, out, flag). For rank-1 projective elements this reduces to
/// sum_a M_a^T tensor M_a tensor |a><a|.
pub fn luders_channel_choi(p: &Povm) -> Result<ChoiOperator> {
    let d = p.dim();
    let n = p.n_outcomes();
    let instr = luders_instrument(p)?;
    // sum_jk |j><k| tensor |j><k| is the unnormalized maximally entangled projector
    let phi = max_entangled(d, false).projector();
    let mut op = CMatrix::zeros(d * d * n, d * d * n);
    for a in 0..n {
        let lift = kron(&CMatrix::identity(d), instr.kraus(a).matrix());
        let block = phi.conjugate_by(&lift);
        op = op.add(&kron(block.matrix(), flag_projector(n, a).matrix()));
    }
    Ok(ChoiOperator {
        operator: HermitianOperator::from_nearly_hermitian(op),
        dims: SystemDims::new(vec![d, d, n]),
    })
}

/// Two-outcome projective qubit measurement {|psi><psi|, 1 - |psi><psi|}.
pub fn projective_qubit_povm(psi: &PureState) -> Result<Povm> {
    if psi.dim() != 2 {
        return Err(CoreError::DimensionMismatch(format!(
            "expected qubit state, got dim {}",
            psi.dim()
        )));
    }
    let p0 = psi.projector();
    let p1 = HermitianOperator::identity(2).sub(&p0);
    Povm::new(vec![p0, p1])
}

/// Trine family: three scaled projectors (1/3)(1 + n_j . sigma) with Bloch
/// vectors n_j = (cos(t_j), sin(t_j)cos(phi), sin(t_j)sin(phi)), t_j = theta + 2 pi j / 3.
/// Complete because the three n_j sum to zero.
pub fn trine_povm(theta: f64, phi: f64) -> Povm {
    let mut elements = Vec::with_capacity(3);
    for j in 0..3 {
        let t = theta + 2.0 * std::f64::consts::PI * j as f64 / 3.0;
        let n = [t.cos(), t.sin() * phi.cos(), t.sin() * phi.sin()];
        let mut m = CMatrix::identity(2);
        m = m.add(&pauli_x().scale(C64::new(n[0], 0.0)));
        m = m.add(&pauli_y().scale(C64::new(n[1], 0.0)));
        m = m.add(&pauli_z().scale(C64::new(n[2], 0.0)));
        elements.push(HermitianOperator::from_nearly_hermitian(m.scale_re(1.0 / 3.0)));
    }
    Povm::new(elements).expect("trine elements are complete by construction")
}

/// |theta> = cos(theta/2)|0> + sin(theta/2)|1> and its orthogonal complement
/// -sin(theta/2)|0> + cos(theta/2)|1> (global phase fixed).
pub fn theta_states(theta: f64) -> (PureState, PureState) {
    let (s, c) = (theta / 2.0).sin_cos();
    let ket = PureState::new_unnormalized(vec![C64::new(c, 0.0), C64::new(s, 0.0)]);
    let perp = PureState::new_unnormalized(vec![C64::new(-s, 0.0), C64::new(c, 0.0)]);
    (ket, perp)
}

/// Noisy misaligned readout W(theta, p) = {|t><t| + p|t_perp><t_perp|, (1-p)|t_perp><t_perp|}.
/// W(0, p) is the noisy computational-basis measurement; W(theta, 0) is projective.
pub fn noisy_z_povm(theta: f64, p: f64) -> Result<Povm> {
    if !(0.0..=1.0).contains(&p) || !p.is_finite() {
        return Err(CoreError::Domain(format!("noise parameter p={p} outside [0,1]")));
    }
    let (ket, perp) = theta_states(theta);
    let proj = ket.projector();
    let proj_perp = perp.projector();
    Povm::new(vec![
        proj.add(&proj_perp.scale(p)),
        proj_perp.scale(1.0 - p),
    ])
}

#[derive(Deserialize)]
struct EnsembleJson {
    dim: usize,
    priors: Vec<f64>,
    povms: Vec<Vec<Vec<Vec<[f64; 2]>>>>,
}

/// A prior-weighted set of POVMs, as read from the JSON ensemble format.
#[derive(Debug, Clone)]
pub struct PovmEnsemble {
    pub dim: usize,
    pub priors: Vec<f64>,
    pub povms: Vec<Povm>,
}

/// Parse `{dim, priors, povms}` where each matrix entry is an `[re, im]` pair.
/// POVMs with fewer outcomes than the largest are padded with zero elements.
pub fn parse_povm_ensemble(json: &str) -> Result<PovmEnsemble> {
    let raw: EnsembleJson =
        serde_json::from_str(json).map_err(|e| CoreError::InvalidInput(format!("bad JSON: {e}")))?;
    if raw.dim == 0 {
        return Err(CoreError::InvalidInput("dim must be positive".into()));
    }
    if raw.priors.len() != raw.povms.len() {
        return Err(CoreError::InvalidInput(format!(
            "{} priors for {} POVMs",
            raw.priors.len(),
            raw.povms.len()
        )));
    }
    if raw.povms.is_empty() {
        return Err(CoreError::InvalidInput("no POVMs".into()));
    }
    let prior_sum: f64 = raw.priors.iter().sum();
    if raw.priors.iter().any(|&q| !(0.0..=1.0).contains(&q)) || (prior_sum - 1.0).abs() > 1e-9 {
        return Err(CoreError::InvalidInput(format!(
            "priors must be in [0,1] and sum to 1 (sum {prior_sum})"
        )));
    }
    let mut povms = Vec::with_capacity(raw.povms.len());
    for (x, povm_rows) in raw.povms.iter().enumerate() {
        let mut elements = Vec::with_capacity(povm_rows.len());
        for mat in povm_rows {
            let mut entries = Vec::with_capacity(raw.dim * raw.dim);
            if mat.len() != raw.dim {
                return Err(CoreError::InvalidInput(format!(
                    "POVM {x}: matrix has {} rows, expected {}",
                    mat.len(),
                    raw.dim
                )));
            }
            for row in mat {
                if row.len() != raw.dim {
                    return Err(CoreError::InvalidInput(format!(
                        "POVM {x}: row has {} entries, expected {}",
                        row.len(),
                        raw.dim
                    )));
                }
                entries.extend(row.iter().map(|&[re, im]| C64::new(re, im)));
            }
            let m = CMatrix::new(raw.dim, raw.dim, entries)?;
            elements.push(HermitianOperator::new(m).map_err(|e| {
                CoreError::InvalidPovm(format!("POVM {x}: non-Hermitian element: {e}"))
            })?);
        }
        let report = validate_povm(&elements)?;
        if !report.passes() {
            return Err(CoreError::InvalidPovm(format!("POVM {x}: {report}")));
        }
        povms.push(Povm::new(elements)?);
    }
    let n_max = povms.iter().map(Povm::n_outcomes).max().unwrap();
    let povms = povms.into_iter().map(|p| p.padded(n_max)).collect();
    Ok(PovmEnsemble {
        dim: raw.dim,
        priors: raw.priors,
        povms,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::tests::{random_ket, random_psd, random_state};
    use crate::matrix::universal_not;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn z_povm() -> Povm {
        projective_qubit_povm(&PureState::basis(2, 0)).unwrap()
    }

    fn diag2(a: f64, b: f64) -> HermitianOperator {
        HermitianOperator::new(CMatrix::from_real_rows(&[vec![a, 0.0], vec![0.0, b]])).unwrap()
    }

    // random two-outcome qubit POVM: normalize two random PSD ops by S^{-1/2} . S^{-1/2}
    fn random_povm(seed: u64) -> Povm {
        let a0 = random_psd(2, seed);
        let a1 = random_psd(2, seed.wrapping_add(7919));
        let s = a0.add(&a1);
        let (vals, vecs) = eig_hermitian(&s).unwrap();
        let mut inv_sqrt = CMatrix::zeros(2, 2);
        for k in 0..2 {
            let col = vecs.as_dmatrix().column(k).clone_owned();
            let w = 1.0 / vals[k].sqrt();
            for i in 0..2 {
                for j in 0..2 {
                    let old = inv_sqrt.get(i, j);
                    inv_sqrt.set(i, j, old + col[i] * col[j].conj() * w);
                }
            }
        }
        Povm::new(vec![a0.conjugate_by(&inv_sqrt), a1.conjugate_by(&inv_sqrt)]).unwrap()
    }

    #[test]
    fn validate_z_passes() {
        let r = validate_povm(z_povm().elements()).unwrap();
        assert!(r.passes());
        assert!(r.completeness_residual < 1e-14);
    }

    #[test]
    fn validate_incomplete_fails() {
        let p0 = PureState::basis(2, 0).projector();
        let r = validate_povm(&[p0.clone(), p0]).unwrap();
        assert!(!r.passes());
        assert!((r.completeness_residual - 1.0).abs() < 1e-14);
    }

    #[test]
    fn validate_noisy_z_passes() {
        let w = noisy_z_povm(0.0, 0.3).unwrap();
        assert!(validate_povm(w.elements()).unwrap().passes());
    }

    #[test]
    fn luders_instrument_projective_roots() {
        let instr = luders_instrument(&z_povm()).unwrap();
        assert!(instr.kraus(0).matrix().max_abs_diff(z_povm().element(0).matrix()) < 1e-14);
        assert!(instr.kraus(1).matrix().max_abs_diff(z_povm().element(1).matrix()) < 1e-14);
    }

    #[test]
    fn luders_instrument_noisy_diag() {
        let w = noisy_z_povm(0.0, 0.09).unwrap();
        let instr = luders_instrument(&w).unwrap();
        assert!(instr.kraus(0).matrix().max_abs_diff(diag2(1.0, 0.3).matrix()) < 1e-12);
        assert!(
            instr.kraus(1).matrix().max_abs_diff(diag2(0.0, 0.91f64.sqrt()).matrix()) < 1e-12
        );
    }

    #[test]
    fn luders_instrument_trivial() {
        let p = Povm::new(vec![HermitianOperator::identity(2)]).unwrap();
        let instr = luders_instrument(&p).unwrap();
        assert!(instr.kraus(0).matrix().max_abs_diff(&CMatrix::identity(2)) < 1e-14);
    }

    #[test]
    fn post_state_projective_collapse() {
        let instr = luders_instrument(&z_povm()).unwrap();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let plus = PureState::new(vec![c(s, 0.0), c(s, 0.0)]).unwrap();
        let (prob, state) = luders_post_state(&instr, 0, &plus.projector()).unwrap();
        assert!((prob - 0.5).abs() < 1e-14);
        assert!(state.matrix().max_abs_diff(PureState::basis(2, 0).projector().matrix()) < 1e-12);
    }

    #[test]
    fn post_state_impossible_outcome() {
        let instr = luders_instrument(&z_povm()).unwrap();
        let rho = PureState::basis(2, 0).projector();
        assert!(matches!(
            luders_post_state(&instr, 1, &rho),
            Err(CoreError::UndefinedPostState { outcome: 1, .. })
        ));
    }

    #[test]
    fn post_state_noisy_keeps_one() {
        let w = noisy_z_povm(0.0, 0.25).unwrap();
        let instr = luders_instrument(&w).unwrap();
        let one = PureState::basis(2, 1).projector();
        let (prob, state) = luders_post_state(&instr, 0, &one).unwrap();
        assert!((prob - 0.25).abs() < 1e-14);
        assert!(state.matrix().max_abs_diff(one.matrix()) < 1e-12);
    }

    #[test]
    fn post_state_probs_sum_to_one() {
        for seed in 0..20u64 {
            let povm = random_povm(seed * 31 + 5);
            let instr = luders_instrument(&povm).unwrap();
            let rho = random_state(2, seed * 17 + 3);
            let total: f64 = (0..instr.n_outcomes())
                .map(|a| luders_post_state(&instr, a, &rho).map(|(p, _)| p).unwrap_or(0.0))
                .sum();
            assert!((total - 1.0).abs() < 1e-10, "seed {seed}: {total}");
        }
    }

    #[test]
    fn instrument_povm_round_trip() {
        let w = noisy_z_povm(0.0, 0.5).unwrap();
        let back = instrument_povm(&luders_instrument(&w).unwrap()).unwrap();
        for a in 0..2 {
            assert!(back.element(a).matrix().max_abs_diff(w.element(a).matrix()) < 1e-12);
        }
        for seed in 0..100u64 {
            let povm = random_povm(seed * 13 + 1);
            let back = instrument_povm(&luders_instrument(&povm).unwrap()).unwrap();
            for a in 0..2 {
                assert!(
                    back.element(a).matrix().max_abs_diff(povm.element(a).matrix()) < 1e-10,
                    "seed {seed}"
                );
            }
        }
    }

    #[test]
    fn non_psd_kraus_rejected() {
        let h = HermitianOperator::new(pauli_x().scale_re(std::f64::consts::FRAC_1_SQRT_2))
            .unwrap();
        let i = HermitianOperator::identity(2).scale(std::f64::consts::FRAC_1_SQRT_2);
        assert!(matches!(
            LudersInstrument::new(vec![i, h]),
            Err(CoreError::NotPsd { .. })
        ));
    }

    #[test]
    fn mp_choi_z() {
        let choi = mp_channel_choi(&z_povm());
        let expect = CMatrix::from_real_rows(&[
            vec![1.0, 0.0, 0.0, 0.0],
            vec![0.0, 0.0, 0.0, 0.0],
            vec![0.0, 0.0, 0.0, 0.0],
            vec![0.0, 0.0, 0.0, 1.0],
        ]);
        assert!(choi.operator().matrix().max_abs_diff(&expect) < 1e-14);
        choi.validate_channel().unwrap();
    }

    #[test]
    fn mp_choi_noisy() {
        let w = noisy_z_povm(0.0, 0.25).unwrap();
        let choi = mp_channel_choi(&w);
        let expect = CMatrix::from_real_rows(&[
            vec![1.0, 0.0, 0.0, 0.0],
            vec![0.0, 0.0, 0.0, 0.0],
            vec![0.0, 0.0, 0.25, 0.0],
            vec![0.0, 0.0, 0.0, 0.75],
        ]);
        assert!(choi.operator().matrix().max_abs_diff(&expect) < 1e-14);
        choi.validate_channel().unwrap();
    }

    #[test]
    fn mp_choi_trivial() {
        let p = Povm::new(vec![HermitianOperator::identity(2)]).unwrap();
        let choi = mp_channel_choi(&p);
        assert!(choi.operator().matrix().max_abs_diff(&CMatrix::identity(2)) < 1e-14);
    }

    #[test]
    fn luders_choi_z_basis() {
        let choi = luders_channel_choi(&z_povm()).unwrap();
        let mut expect = CMatrix::zeros(8, 8);
        for a in 0..2 {
            // |aaa><aaa| at index a*4 + a*2 + a
            let idx = a * 7;
            expect.set(idx, idx, c(1.0, 0.0));
        }
        assert!(choi.operator().matrix().max_abs_diff(&expect) < 1e-14);
        choi.validate_channel().unwrap();
    }

    #[test]
    fn luders_choi_projective_form() {
        for seed in 0..20u64 {
            let psi = random_ket(2, seed * 11 + 2);
            let povm = projective_qubit_povm(&psi).unwrap();
            let general = luders_channel_choi(&povm).unwrap();
            let mut expect = CMatrix::zeros(8, 8);
            for a in 0..2 {
                let m = povm.element(a);
                let term = kron(
                    &kron(&m.matrix().transpose(), m.matrix()),
                    flag_projector(2, a).matrix(),
                );
                expect = expect.add(&term);
            }
            assert!(
                general.operator().matrix().max_abs_diff(&expect) < 1e-12,
                "seed {seed}"
            );
        }
    }

    #[test]
    fn luders_choi_noisy_tp() {
        for p in [0.0, 0.25, 0.7, 1.0] {
            let w = noisy_z_povm(0.3, p).unwrap();
            luders_channel_choi(&w).unwrap().validate_channel().unwrap();
        }
    }

    #[test]
    fn projective_family() {
        let z = projective_qubit_povm(&PureState::basis(2, 0)).unwrap();
        assert!(z.element(0).matrix().max_abs_diff(PureState::basis(2, 0).projector().matrix()) < 1e-14);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let plus = PureState::new(vec![c(s, 0.0), c(s, 0.0)]).unwrap();
        let x = projective_qubit_povm(&plus).unwrap();
        let expect = CMatrix::from_real_rows(&[vec![0.5, 0.5], vec![0.5, 0.5]]);
        assert!(x.element(0).matrix().max_abs_diff(&expect) < 1e-14);
        let circ = PureState::new(vec![c(s, 0.0), c(0.0, s)]).unwrap();
        let y = projective_qubit_povm(&circ).unwrap();
        assert!(validate_povm(y.elements()).unwrap().passes());
    }

    #[test]
    fn trine_xy_plane() {
        let t = trine_povm(0.0, 0.0);
        let expect = CMatrix::identity(2).add(&pauli_x()).scale_re(1.0 / 3.0);
        assert!(t.element(0).matrix().max_abs_diff(&expect) < 1e-14);

        // elements are 2/3 x projectors onto (|0> + e^{2 pi i j/3}|1>)/sqrt(2)
        for j in 0..3 {
            let ang = 2.0 * std::f64::consts::PI * j as f64 / 3.0;
            let s = std::f64::consts::FRAC_1_SQRT_2;
            let ket = PureState::new(vec![c(s, 0.0), c(s * ang.cos(), s * ang.sin())]).unwrap();
            let expect = ket.projector().scale(2.0 / 3.0);
            assert!(t.element(j).matrix().max_abs_diff(expect.matrix()) < 1e-12, "j={j}");
        }
    }

    #[test]
    fn trine_complete_everywhere() {
        for seed in 0..20u64 {
            let mut rng = crate::matrix::tests::rng_stream(seed + 400);
            let theta = rng() * std::f64::consts::TAU;
            let phi = rng() * std::f64::consts::PI;
            let t = trine_povm(theta, phi);
            let r = validate_povm(t.elements()).unwrap();
            assert!(r.completeness_residual < 1e-12);
            assert!(r.passes());
        }
    }

    #[test]
    fn noisy_z_family() {
        let w00 = noisy_z_povm(0.0, 0.0).unwrap();
        for a in 0..2 {
            assert!(w00.element(a).matrix().max_abs_diff(z_povm().element(a).matrix()) < 1e-14);
        }
        let w01 = noisy_z_povm(0.0, 1.0).unwrap();
        assert!(w01.element(0).matrix().max_abs_diff(&CMatrix::identity(2)) < 1e-14);
        assert!(w01.element(1).matrix().max_abs() < 1e-14);
        let w = noisy_z_povm(0.0, 0.25).unwrap();
        assert!(w.element(0).matrix().max_abs_diff(diag2(1.0, 0.25).matrix()) < 1e-14);
        assert!(w.element(1).matrix().max_abs_diff(diag2(0.0, 0.75).matrix()) < 1e-14);
    }

    #[test]
    fn noisy_z_domain() {
        assert!(matches!(noisy_z_povm(0.0, -0.1), Err(CoreError::Domain(_))));
        assert!(matches!(noisy_z_povm(0.0, 1.5), Err(CoreError::Domain(_))));
    }

    #[test]
    fn universal_not_swaps_projective_elements() {
        for seed in 0..20u64 {
            let psi = random_ket(2, seed * 23 + 9);
            let povm = projective_qubit_povm(&psi).unwrap();
            let g0 = universal_not(povm.element(0)).unwrap();
            assert!(g0.matrix().max_abs_diff(povm.element(1).matrix()) < 1e-12, "seed {seed}");
        }
    }

    #[test]
    fn entangled_collapse_identity() {
        let phi = max_entangled(2, true);
        for seed in 0..100u64 {
            let psi = random_ket(2, seed * 41 + 11);
            let lifted = kron(&psi.projector().matrix().clone(), &CMatrix::identity(2));
            let collapsed = lifted.as_dmatrix() * phi.amplitudes();
            let expect =
                psi.tensor(&psi.conj()).amplitudes() * c(std::f64::consts::FRAC_1_SQRT_2, 0.0);
            let diff = (&collapsed - &expect).norm();
            assert!(diff < 1e-12, "seed {seed}: {diff}");
        }
    }

    #[test]
    fn padding_adds_zero_outcomes() {
        let z = z_povm().padded(4);
        assert_eq!(z.n_outcomes(), 4);
        assert!(z.element(3).matrix().max_abs() == 0.0);
        let instr = luders_instrument(&z).unwrap();
        assert!(instr.kraus(3).matrix().max_abs() == 0.0);
    }

    #[test]
    fn parse_ensemble_round_trip() {
        let json = r#"{
            "dim": 2,
            "priors": [0.5, 0.5],
            "povms": [
                [[[[1,0],[0,0]],[[0,0],[0,0]]], [[[0,0],[0,0]],[[0,0],[1,0]]]],
                [[[[0.5,0],[0.5,0]],[[0.5,0],[0.5,0]]], [[[0.5,0],[-0.5,0]],[[-0.5,0],[0.5,0]]]]
            ]
        }"#;
        let ens = parse_povm_ensemble(json).unwrap();
        assert_eq!(ens.dim, 2);
        assert_eq!(ens.povms.len(), 2);
        assert!(ens.povms[0].element(0).matrix().max_abs_diff(diag2(1.0, 0.0).matrix()) < 1e-14);
    }

    #[test]
    fn parse_ensemble_rejects_bad_input() {
        // priors do not sum to one
        let bad_priors = r#"{"dim":2,"priors":[0.5,0.4],"povms":[
            [[[[1,0],[0,0]],[[0,0],[0,0]]],[[[0,0],[0,0]],[[0,0],[1,0]]]],
            [[[[1,0],[0,0]],[[0,0],[0,0]]],[[[0,0],[0,0]],[[0,0],[1,0]]]]]}"#;
        assert!(parse_povm_ensemble(bad_priors).is_err());
        // non-Hermitian element
        let non_herm = r#"{"dim":2,"priors":[1.0],"povms":[
            [[[[1,0],[1,0]],[[0,0],[0,0]]],[[[0,0],[-1,0]],[[0,0],[1,0]]]]]}"#;
        assert!(matches!(parse_povm_ensemble(non_herm), Err(CoreError::InvalidPovm(_))));
        // incomplete POVM: error carries the validation report
        let incomplete = r#"{"dim":2,"priors":[1.0],"povms":[
            [[[[1,0],[0,0]],[[0,0],[0,0]]],[[[1,0],[0,0]],[[0,0],[0,0]]]]]}"#;
        match parse_povm_ensemble(incomplete) {
            Err(CoreError::InvalidPovm(msg)) => assert!(msg.contains("residual")),
            other => panic!("expected InvalidPovm, got {other:?}"),
        }
        // mixed outcome counts get padded, not rejected
        let mixed = r#"{"dim":2,"priors":[0.5,0.5],"povms":[
            [[[[1,0],[0,0]],[[0,0],[1,0]]]],
            [[[[1,0],[0,0]],[[0,0],[0,0]]],[[[0,0],[0,0]],[[0,0],[1,0]]]]]}"#;
        let ens = parse_povm_ensemble(mixed).unwrap();
        assert_eq!(ens.povms[0].n_outcomes(), 2);
        assert!(ens.povms[0].element(1).matrix().max_abs() == 0.0);
    }
}
