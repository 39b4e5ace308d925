//! Analytic oracles: Helstrom, the projective-pair discrimination formulas,
//! the noisy-Z family values, and the optimal entanglement-free strategy.

use num_complex::Complex64 as C64;

use crate::error::{CoreError, Result};
use crate::matrix::{
    eig_hermitian, pauli_x, pauli_y, pauli_z, trace_norm, CMatrix, HermitianOperator, PureState,
};
use crate::qobjects::{luders_instrument, luders_post_state, projective_qubit_povm, Povm};

const PRIOR_TOL: f64 = 1e-12;
const BISECTOR_TOL: f64 = 1e-9;

/// Two equally-dimensioned projective qubit measurements {|psi>, |psi_perp>} and
/// {|phi>, |phi_perp>} with prior probabilities.
#[derive(Debug, Clone)]
pub struct ProjectivePair {
    pub psi: PureState,
    pub phi: PureState,
    pub p_psi: f64,
    pub p_phi: f64,
}

impl ProjectivePair {
    pub fn new(psi: PureState, phi: PureState, p_psi: f64, p_phi: f64) -> Result<Self> {
        if psi.dim() != 2 || phi.dim() != 2 {
            return Err(CoreError::DimensionMismatch(
                "projective pair requires qubit states".into(),
            ));
        }
        if p_psi < 0.0 || p_phi < 0.0 || (p_psi + p_phi - 1.0).abs() > PRIOR_TOL {
            return Err(CoreError::Domain(format!(
                "priors ({p_psi}, {p_phi}) must be nonnegative and sum to 1"
            )));
        }
        Ok(ProjectivePair {
            psi,
            phi,
            p_psi,
            p_phi,
        })
    }

    pub fn equal(psi: PureState, phi: PureState) -> Result<Self> {
        Self::new(psi, phi, 0.5, 0.5)
    }

    /// |<psi|phi>|^2
    pub fn overlap(&self) -> f64 {
        self.psi.inner(&self.phi).norm_sqr()
    }
}

/// Noise strength and input state for the noisy computational-basis readout.
#[derive(Debug, Clone)]
pub struct NoisyZParams {
    pub p: f64,
    pub rho: HermitianOperator,
}

impl NoisyZParams {
    pub fn new(p: f64, rho: HermitianOperator) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) || !p.is_finite() {
            return Err(CoreError::Domain(format!("p={p} outside [0,1]")));
        }
        if rho.dim() != 2 {
            return Err(CoreError::DimensionMismatch(format!(
                "expected qubit state, got dim {}",
                rho.dim()
            )));
        }
        let tr = rho.trace_re();
        if (tr - 1.0).abs() > 1e-10 {
            return Err(CoreError::NotNormalized(tr));
        }
        let (vals, _) = eig_hermitian(&rho)?;
        if vals[0] < -1e-10 {
            return Err(CoreError::NotPsd {
                min_eigenvalue: vals[0],
            });
        }
        Ok(NoisyZParams { p, rho })
    }

    fn r11(&self) -> f64 {
        self.rho.get(1, 1).re
    }

    fn r01(&self) -> C64 {
        self.rho.get(0, 1)
    }
}

/// Optimal two-hypothesis state discrimination: 1/2 (1 + ||p1 rho1 - p2 rho2||_1).
pub fn helstrom(
    p1: f64,
    rho1: &HermitianOperator,
    p2: f64,
    rho2: &HermitianOperator,
) -> Result<f64> {
    if (p1 + p2 - 1.0).abs() > PRIOR_TOL || p1 < 0.0 || p2 < 0.0 {
        return Err(CoreError::Domain(format!(
            "priors ({p1}, {p2}) must be nonnegative and sum to 1"
        )));
    }
    let diff = rho1.scale(p1).sub(&rho2.scale(p2));
    Ok(0.5 * (1.0 + trace_norm(&diff)?))
}

/// The measurement achieving the Helstrom value: element 0 projects onto the
/// nonnegative eigenspace of p1 rho1 - p2 rho2 (zero eigenvalues go to the
/// first hypothesis, a value-irrelevant deterministic tie-break).
pub fn helstrom_povm(
    p1: f64,
    rho1: &HermitianOperator,
    p2: f64,
    rho2: &HermitianOperator,
) -> Result<Povm> {
    if (p1 + p2 - 1.0).abs() > PRIOR_TOL || p1 < 0.0 || p2 < 0.0 {
        return Err(CoreError::Domain(format!(
            "priors ({p1}, {p2}) must be nonnegative and sum to 1"
        )));
    }
    let diff = rho1.scale(p1).sub(&rho2.scale(p2));
    let d = diff.dim();
    let (vals, vecs) = eig_hermitian(&diff)?;
    let mut e0 = CMatrix::zeros(d, d);
    for (k, &lam) in vals.iter().enumerate() {
        if lam >= 0.0 {
            let col = vecs.as_dmatrix().column(k).clone_owned();
            for i in 0..d {
                for j in 0..d {
                    let old = e0.get(i, j);
                    e0.set(i, j, old + col[i] * col[j].conj());
                }
            }
        }
    }
    let e0 = HermitianOperator::from_nearly_hermitian(e0);
    let e1 = HermitianOperator::identity(d).sub(&e0);
    Povm::new(vec![e0, e1])
}

/// Optimal success probability for discriminating the Lüders instruments of a
/// projective pair: 1/2 (1 + sqrt(1 - 4 p_psi p_phi |<psi|phi>|^4)).
pub fn projective_instrument_success(pair: &ProjectivePair) -> f64 {
    let x = pair.overlap();
    0.5 * (1.0 + (1.0 - 4.0 * pair.p_psi * pair.p_phi * x * x).max(0.0).sqrt())
}

/// Optimal success probability with the measurement statistics alone:
/// 1/2 (1 + sqrt(1 - 4 p_psi p_phi |<psi|phi>|^2)).
pub fn projective_measurement_success(pair: &ProjectivePair) -> f64 {
    let x = pair.overlap();
    0.5 * (1.0 + (1.0 - 4.0 * pair.p_psi * pair.p_phi * x).max(0.0).sqrt())
}

/// Equal-prior bias ratio instrument/measurement: sqrt(1 + |<psi|phi>|^2),
/// in (1, sqrt(2)]. Continuous at overlap 1, where it takes its limit sqrt(2)
/// even though both biases vanish there.
pub fn projective_advantage(psi: &PureState, phi: &PureState) -> f64 {
    (1.0 + psi.inner(phi).norm_sqr()).sqrt()
}

/// Optimal measurement-only success for Z vs the noisy readout W^p: 1/2 + p/2.
pub fn noisy_z_measurement_success(p: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&p) || !p.is_finite() {
        return Err(CoreError::Domain(format!("p={p} outside [0,1]")));
    }
    Ok(0.5 + p / 2.0)
}

/// The 4x4 operator whose trace norm gives the Lüders bias of Z vs W^p on
/// input rho: p r11 |10><10| + sqrt(p) r01 |00><10| + sqrt(p) r10 |10><00|
/// - p r11 |11><11|.
pub fn noisy_z_difference_operator(params: &NoisyZParams) -> HermitianOperator {
    let sp = params.p.sqrt();
    let mut m = CMatrix::zeros(4, 4);
    m.set(2, 2, C64::new(params.p * params.r11(), 0.0));
    m.set(0, 2, params.r01() * sp);
    m.set(2, 0, params.r01().conj() * sp);
    m.set(3, 3, C64::new(-params.p * params.r11(), 0.0));
    HermitianOperator::from_nearly_hermitian(m)
}

/// Spectrum of `noisy_z_difference_operator` in closed form:
/// (0, (sqrt(p)/2)(sqrt(p) r11 -+ sqrt(p r11^2 + 4 r01 r10)), -p r11).
pub fn noisy_z_difference_eigenvalues(params: &NoisyZParams) -> [f64; 4] {
    let sp = params.p.sqrt();
    let r11 = params.r11();
    let disc = (params.p * r11 * r11 + 4.0 * params.r01().norm_sqr()).sqrt();
    [
        0.0,
        0.5 * sp * (sp * r11 - disc),
        0.5 * sp * (sp * r11 + disc),
        -params.p * r11,
    ]
}

/// Success probability of the entanglement-free strategy that feeds rho into
/// the unknown device: 1/2 + 1/4 (sqrt(p) sqrt(p r11^2 + 4 r01 r10) + p r11).
pub fn noisy_z_locc_success(params: &NoisyZParams) -> f64 {
    let half_norm: f64 = noisy_z_difference_eigenvalues(params)
        .iter()
        .map(|l| l.abs())
        .sum::<f64>()
        / 2.0;
    0.5 + 0.5 * half_norm
}

/// Maximum of `noisy_z_locc_success` over input states, attained at
/// r11 = 1/(2 - sqrt(p)): equals 1/(2 - sqrt(p)), the optimal Lüders value.
pub fn noisy_z_optimal_success(p: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&p) || !p.is_finite() {
        return Err(CoreError::Domain(format!("p={p} outside [0,1]")));
    }
    Ok(1.0 / (2.0 - p.sqrt()))
}

/// Bias ratio Lüders/measurement for Z vs W^p: 1/(sqrt(p)(2 - sqrt(p))),
/// which diverges as p -> 0.
pub fn noisy_z_bias_lower(p: f64) -> Result<f64> {
    if !(p > 0.0 && p <= 1.0) {
        return Err(CoreError::Domain(format!("p={p} outside (0,1]")));
    }
    Ok(1.0 / (p.sqrt() * (2.0 - p.sqrt())))
}

/// Bloch vector of a qubit pure state.
fn bloch(psi: &PureState) -> [f64; 3] {
    let a0 = psi.amplitude(0);
    let a1 = psi.amplitude(1);
    let c = a0.conj() * a1;
    [2.0 * c.re, 2.0 * c.im, a0.norm_sqr() - a1.norm_sqr()]
}

/// Orthogonal qubit ket (-conj(a1), conj(a0)), phase fixed.
pub fn orthogonal_qubit(psi: &PureState) -> PureState {
    PureState::new_unnormalized(vec![-psi.amplitude(1).conj(), psi.amplitude(0).conj()])
}

fn pure_state_from_bloch(n: [f64; 3]) -> Result<PureState> {
    let mut m = CMatrix::identity(2);
    m = m.add(&pauli_x().scale(C64::new(n[0], 0.0)));
    m = m.add(&pauli_y().scale(C64::new(n[1], 0.0)));
    m = m.add(&pauli_z().scale(C64::new(n[2], 0.0)));
    let h = HermitianOperator::from_nearly_hermitian(m.scale_re(0.5));
    let (_, vecs) = eig_hermitian(&h)?;
    let col = vecs.as_dmatrix().column(1).clone_owned();
    Ok(PureState::new_unnormalized(vec![col[0], col[1]]))
}

/// First-round input plus outcome-conditioned Helstrom measurements.
/// `guess[a][b]` is the hypothesis announced after first outcome `a` and
/// second outcome `b`.
#[derive(Debug, Clone)]
pub struct SequentialStrategy {
    pub input: PureState,
    pub followup: [Povm; 2],
    pub guess: [[usize; 2]; 2],
    pub degenerate_bisector: bool,
}

/// The optimal entanglement-free discrimination strategy for an equal-prior
/// projective pair: feed in the pure state whose Bloch vector bisects those of
/// the outcome-0 post-state of the first hypothesis (psi) and the outcome-1
/// post-state of the second (phi_perp), then finish with Helstrom measurements
/// weighted by the measurement-only success probability.
pub fn optimal_sequential_strategy(pair: &ProjectivePair) -> Result<SequentialStrategy> {
    if (pair.p_psi - 0.5).abs() > PRIOR_TOL {
        return Err(CoreError::Domain(
            "sequential strategy construction requires equal priors".into(),
        ));
    }
    let phi_perp = orthogonal_qubit(&pair.phi);
    let psi_perp = orthogonal_qubit(&pair.psi);
    let b1 = bloch(&pair.psi);
    let b2 = bloch(&phi_perp);
    let mut n = [b1[0] + b2[0], b1[1] + b2[1], b1[2] + b2[2]];
    let norm = (n[0] * n[0] + n[1] * n[1] + n[2] * n[2]).sqrt();
    let degenerate = norm < BISECTOR_TOL;
    if degenerate {
        // antipodal post-states: any orthogonal direction works; pick one
        // deterministically from a cross product with z (or x if parallel to z)
        let axis = if b1[0].abs() + b1[1].abs() > BISECTOR_TOL {
            [b1[1], -b1[0], 0.0]
        } else {
            [0.0, b1[2], -b1[1]]
        };
        let an = (axis[0] * axis[0] + axis[1] * axis[1] + axis[2] * axis[2]).sqrt();
        n = [axis[0] / an, axis[1] / an, axis[2] / an];
    } else {
        n = [n[0] / norm, n[1] / norm, n[2] / norm];
    }
    let input = pure_state_from_bloch(n)?;
    let p_m = projective_measurement_success(pair);
    let followup0 = helstrom_povm(
        p_m,
        &pair.psi.projector(),
        1.0 - p_m,
        &pair.phi.projector(),
    )?;
    let followup1 = helstrom_povm(
        p_m,
        &phi_perp.projector(),
        1.0 - p_m,
        &psi_perp.projector(),
    )?;
    Ok(SequentialStrategy {
        input,
        followup: [followup0, followup1],
        guess: [[0, 1], [1, 0]],
        degenerate_bisector: degenerate,
    })
}

/// Success probability of a sequential strategy against the pair's Lüders
/// instruments.
pub fn sequential_success(pair: &ProjectivePair, strategy: &SequentialStrategy) -> Result<f64> {
    let povms = [
        projective_qubit_povm(&pair.psi)?,
        projective_qubit_povm(&pair.phi)?,
    ];
    let priors = [pair.p_psi, pair.p_phi];
    let rho_in = strategy.input.projector();
    let mut success = 0.0;
    for x in 0..2 {
        let instr = luders_instrument(&povms[x])?;
        for a in 0..2 {
            let (prob_a, post) = match luders_post_state(&instr, a, &rho_in) {
                Ok(r) => r,
                Err(CoreError::UndefinedPostState { .. }) => continue,
                Err(e) => return Err(e),
            };
            for b in 0..2 {
                if strategy.guess[a][b] == x {
                    let prob_b = strategy.followup[a].element(b).inner(&post);
                    success += priors[x] * prob_a * prob_b;
                }
            }
        }
    }
    Ok(success)
}

/// (|psi><psi| tensor 1)|phi2+> for the normalized maximally entangled state:
/// (1/sqrt(2)) |psi> tensor conj(|psi>), returned unnormalized (norm^2 = 1/2).
pub fn entangled_collapse(psi: &PureState) -> Result<PureState> {
    if psi.dim() != 2 {
        return Err(CoreError::DimensionMismatch(format!(
            "expected qubit state, got dim {}",
            psi.dim()
        )));
    }
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut amps = Vec::with_capacity(4);
    for i in 0..2 {
        for j in 0..2 {
            amps.push(psi.amplitude(i) * psi.amplitude(j).conj() * C64::new(s, 0.0));
        }
    }
    Ok(PureState::new_unnormalized(amps))
}
