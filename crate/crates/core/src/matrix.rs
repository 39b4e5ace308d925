//! Dense complex linear algebra: tensor products, partial traces, Hermitian
//! eigendecomposition, operator square roots, trace norm and the universal
//! NOT map. Everything downstream builds on these primitives.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{CoreError, Result};

pub const HERMITICITY_TOL: f64 = 1e-10;
pub const PSD_TOL: f64 = 1e-10;
/// Eigenvalues of PSD operators below this are treated as exact zeros when
/// taking square roots, so that roots of rank-deficient operators do not pick
/// up O(sqrt(eps)) noise in the kernel directions.
pub const SQRT_KERNEL_TOL: f64 = 1e-12;

pub type C64 = Complex64;

/// Dense complex matrix, row/column indexed.
#[derive(Debug, Clone, PartialEq)]
pub struct CMatrix {
    mat: DMatrix<C64>,
}

impl CMatrix {
    pub fn new(rows: usize, cols: usize, entries: Vec<C64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(CoreError::DimensionMismatch(format!(
                "rows and cols must be >= 1, got {rows}x{cols}"
            )));
        }
        if entries.len() != rows * cols {
            return Err(CoreError::DimensionMismatch(format!(
                "expected {} entries for {rows}x{cols}, got {}",
                rows * cols,
                entries.len()
            )));
        }
        // entries are row-major
        let mat = DMatrix::from_row_iterator(rows, cols, entries);
        let m = Self { mat };
        m.check_finite()?;
        Ok(m)
    }

    pub fn from_dmatrix(mat: DMatrix<C64>) -> Self {
        Self { mat }
    }

    pub fn from_real_rows(rows: &[Vec<f64>]) -> Self {
        let r = rows.len();
        let c = rows[0].len();
        let mat = DMatrix::from_fn(r, c, |i, j| C64::new(rows[i][j], 0.0));
        Self { mat }
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            mat: DMatrix::zeros(rows, cols),
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            mat: DMatrix::identity(dim, dim),
        }
    }

    fn check_finite(&self) -> Result<()> {
        for i in 0..self.rows() {
            for j in 0..self.cols() {
                let z = self.mat[(i, j)];
                if !z.re.is_finite() || !z.im.is_finite() {
                    return Err(CoreError::NonFinite { row: i, col: j });
                }
            }
        }
        Ok(())
    }

    pub fn rows(&self) -> usize {
        self.mat.nrows()
    }

    pub fn cols(&self) -> usize {
        self.mat.ncols()
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.mat[(i, j)]
    }

    pub fn set(&mut self, i: usize, j: usize, v: C64) {
        self.mat[(i, j)] = v;
    }

    pub fn as_dmatrix(&self) -> &DMatrix<C64> {
        &self.mat
    }

    pub fn transpose(&self) -> CMatrix {
        Self {
            mat: self.mat.transpose(),
        }
    }

    pub fn conj(&self) -> CMatrix {
        Self {
            mat: self.mat.map(|z| z.conj()),
        }
    }

    pub fn dagger(&self) -> CMatrix {
        Self {
            mat: self.mat.adjoint(),
        }
    }

    pub fn mul(&self, other: &CMatrix) -> CMatrix {
        Self {
            mat: &self.mat * &other.mat,
        }
    }

    pub fn add(&self, other: &CMatrix) -> CMatrix {
        Self {
            mat: &self.mat + &other.mat,
        }
    }

    pub fn sub(&self, other: &CMatrix) -> CMatrix {
        Self {
            mat: &self.mat - &other.mat,
        }
    }

    pub fn scale(&self, s: C64) -> CMatrix {
        Self {
            mat: self.mat.map(|z| z * s),
        }
    }

    pub fn scale_re(&self, s: f64) -> CMatrix {
        self.scale(C64::new(s, 0.0))
    }

    pub fn trace(&self) -> C64 {
        self.mat.trace()
    }

    /// Largest entrywise modulus of the difference.
    pub fn max_abs_diff(&self, other: &CMatrix) -> f64 {
        let mut m: f64 = 0.0;
        for i in 0..self.rows() {
            for j in 0..self.cols() {
                m = m.max((self.mat[(i, j)] - other.mat[(i, j)]).norm());
            }
        }
        m
    }

    pub fn max_abs(&self) -> f64 {
        self.mat.iter().fold(0.0f64, |m, z| m.max(z.norm()))
    }
}

/// Kronecker product: (a tensor b)[(i*rb+k), (j*cb+l)] = a[i,j] * b[k,l].
pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    CMatrix::from_dmatrix(a.mat.kronecker(&b.mat))
}

/// Ordered list of subsystem dimensions annotating a tensor-product operator.
/// Factor 0 is the leftmost tensor factor.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SystemDims(pub Vec<usize>);

impl SystemDims {
    pub fn new(dims: Vec<usize>) -> Self {
        Self(dims)
    }

    pub fn total(&self) -> usize {
        self.0.iter().product()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Square complex matrix with the Hermiticity invariant enforced on
/// construction (and symmetrized, to guard against accumulation from long
/// kron chains).
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianOperator {
    dim: usize,
    mat: CMatrix,
}

impl HermitianOperator {
    pub fn new(m: CMatrix) -> Result<Self> {
        if m.rows() != m.cols() {
            return Err(CoreError::DimensionMismatch(format!(
                "Hermitian operator must be square, got {}x{}",
                m.rows(),
                m.cols()
            )));
        }
        let dag = m.dagger();
        let residual = m.max_abs_diff(&dag);
        if residual > HERMITICITY_TOL {
            return Err(CoreError::NotHermitian {
                residual,
                tolerance: HERMITICITY_TOL,
            });
        }
        let sym = m.add(&dag).scale_re(0.5);
        Ok(Self {
            dim: sym.rows(),
            mat: sym,
        })
    }

    /// Symmetrizes unconditionally; for results of arithmetic that are
    /// Hermitian by construction.
    pub fn from_nearly_hermitian(m: CMatrix) -> Self {
        let dag = m.dagger();
        let sym = m.add(&dag).scale_re(0.5);
        Self {
            dim: sym.rows(),
            mat: sym,
        }
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            mat: CMatrix::zeros(dim, dim),
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            dim,
            mat: CMatrix::identity(dim),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.mat
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.mat.get(i, j)
    }

    pub fn trace_re(&self) -> f64 {
        self.mat.trace().re
    }

    pub fn add(&self, other: &HermitianOperator) -> HermitianOperator {
        Self::from_nearly_hermitian(self.mat.add(&other.mat))
    }

    pub fn sub(&self, other: &HermitianOperator) -> HermitianOperator {
        Self::from_nearly_hermitian(self.mat.sub(&other.mat))
    }

    pub fn scale(&self, s: f64) -> HermitianOperator {
        Self {
            dim: self.dim,
            mat: self.mat.scale_re(s),
        }
    }

    /// Tr(self * other), real for Hermitian pairs.
    pub fn inner(&self, other: &HermitianOperator) -> f64 {
        self.mat.mul(&other.mat).trace().re
    }

    /// Conjugation U self U^dagger.
    pub fn conjugate_by(&self, u: &CMatrix) -> HermitianOperator {
        Self::from_nearly_hermitian(u.mul(&self.mat).mul(&u.dagger()))
    }
}

/// Complex state vector.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    dim: usize,
    amplitudes: DVector<C64>,
}

impl PureState {
    pub fn new(amplitudes: Vec<C64>) -> Result<Self> {
        let dim = amplitudes.len();
        let v = DVector::from_vec(amplitudes);
        let nrm = v.norm();
        if (nrm - 1.0).abs() > HERMITICITY_TOL {
            return Err(CoreError::NotNormalized((nrm - 1.0).abs()));
        }
        Ok(Self {
            dim,
            amplitudes: v,
        })
    }

    /// Construct without the normalization check (explicitly unnormalized).
    pub fn new_unnormalized(amplitudes: Vec<C64>) -> Self {
        let dim = amplitudes.len();
        Self {
            dim,
            amplitudes: DVector::from_vec(amplitudes),
        }
    }

    pub fn basis(dim: usize, k: usize) -> Self {
        let mut v = vec![C64::new(0.0, 0.0); dim];
        v[k] = C64::new(1.0, 0.0);
        Self {
            dim,
            amplitudes: DVector::from_vec(v),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn amplitude(&self, k: usize) -> C64 {
        self.amplitudes[k]
    }

    pub fn amplitudes(&self) -> &DVector<C64> {
        &self.amplitudes
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.norm()
    }

    /// <self|other>.
    pub fn inner(&self, other: &PureState) -> C64 {
        self.amplitudes.dotc(&other.amplitudes)
    }

    /// |psi><psi| as a Hermitian operator.
    pub fn projector(&self) -> HermitianOperator {
        let d = self.dim;
        let mat = DMatrix::from_fn(d, d, |i, j| {
            self.amplitudes[i] * self.amplitudes[j].conj()
        });
        HermitianOperator::from_nearly_hermitian(CMatrix::from_dmatrix(mat))
    }

    pub fn conj(&self) -> PureState {
        Self {
            dim: self.dim,
            amplitudes: self.amplitudes.map(|z| z.conj()),
        }
    }

    pub fn tensor(&self, other: &PureState) -> PureState {
        Self {
            dim: self.dim * other.dim,
            amplitudes: self.amplitudes.kronecker(&other.amplitudes),
        }
    }
}

/// Partial trace over the factors NOT listed in `keep`. Kept factors stay in
/// their original order.
pub fn partial_trace(
    m: &HermitianOperator,
    dims: &SystemDims,
    keep: &[usize],
) -> Result<HermitianOperator> {
    if dims.total() != m.dim() {
        return Err(CoreError::DimensionMismatch(format!(
            "dims product {} != operator dim {}",
            dims.total(),
            m.dim()
        )));
    }
    let n = dims.len();
    for &k in keep {
        if k >= n {
            return Err(CoreError::DimensionMismatch(format!(
                "keep index {k} out of range for {n} factors"
            )));
        }
    }
    let keep_dims: Vec<usize> = keep.iter().map(|&k| dims.0[k]).collect();
    let out_dim: usize = keep_dims.iter().product::<usize>().max(1);
    let traced: Vec<usize> = (0..n).filter(|i| !keep.contains(i)).collect();
    let traced_dims: Vec<usize> = traced.iter().map(|&k| dims.0[k]).collect();
    let traced_total: usize = traced_dims.iter().product::<usize>().max(1);

    // Decompose a flat multi-index into per-factor indices.
    let strides: Vec<usize> = {
        let mut s = vec![1usize; n];
        for i in (0..n.saturating_sub(1)).rev() {
            s[i] = s[i + 1] * dims.0[i + 1];
        }
        s
    };
    let compose = |kept: usize, tr: usize| -> usize {
        // expand kept/tr multi-indices back into the full index
        let mut idx = 0usize;
        let mut kq = kept;
        let mut kt = tr;
        let mut kept_parts = vec![0usize; keep.len()];
        for i in (0..keep.len()).rev() {
            kept_parts[i] = kq % keep_dims[i];
            kq /= keep_dims[i];
        }
        let mut traced_parts = vec![0usize; traced.len()];
        for i in (0..traced.len()).rev() {
            traced_parts[i] = kt % traced_dims[i];
            kt /= traced_dims[i];
        }
        for (pos, &f) in keep.iter().enumerate() {
            idx += kept_parts[pos] * strides[f];
        }
        for (pos, &f) in traced.iter().enumerate() {
            idx += traced_parts[pos] * strides[f];
        }
        idx
    };

    let mut out = CMatrix::zeros(out_dim, out_dim);
    for r in 0..out_dim {
        for c in 0..out_dim {
            let mut acc = C64::new(0.0, 0.0);
            for t in 0..traced_total {
                acc += m.get(compose(r, t), compose(c, t));
            }
            out.set(r, c, acc);
        }
    }
    Ok(HermitianOperator::from_nearly_hermitian(out))
}

/// Hermitian eigendecomposition with eigenvalues ascending and orthonormal
/// eigenvector columns. Verifies the reconstruction residual.
pub fn eig_hermitian(h: &HermitianOperator) -> Result<(Vec<f64>, CMatrix)> {
    let se = h.matrix().as_dmatrix().clone().symmetric_eigen();
    let d = h.dim();
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| se.eigenvalues[a].partial_cmp(&se.eigenvalues[b]).unwrap());
    let vals: Vec<f64> = order.iter().map(|&i| se.eigenvalues[i]).collect();
    let mut vecs = DMatrix::zeros(d, d);
    for (col, &i) in order.iter().enumerate() {
        vecs.set_column(col, &se.eigenvectors.column(i));
    }
    // residual check: ||h - V diag V^dag||_max
    let mut recon = DMatrix::<C64>::zeros(d, d);
    for k in 0..d {
        let v = vecs.column(k);
        for i in 0..d {
            for j in 0..d {
                recon[(i, j)] += v[i] * v[j].conj() * C64::new(vals[k], 0.0);
            }
        }
    }
    let resid = (0..d)
        .flat_map(|i| (0..d).map(move |j| (i, j)))
        .fold(0.0f64, |m, (i, j)| {
            m.max((recon[(i, j)] - h.get(i, j)).norm())
        });
    if resid > 1e-7 * (1.0 + h.matrix().max_abs()) {
        return Err(CoreError::EigFailure(resid));
    }
    Ok((vals, CMatrix::from_dmatrix(vecs)))
}

/// Unique PSD square root. Eigenvalues in [-PSD_TOL, 0) are clamped to 0;
/// eigenvalues below SQRT_KERNEL_TOL are treated as exact kernel directions.
pub fn psd_sqrt(h: &HermitianOperator) -> Result<HermitianOperator> {
    let (vals, vecs) = eig_hermitian(h)?;
    if let Some(&min) = vals.first() {
        if min < -PSD_TOL {
            return Err(CoreError::NotPsd {
                min_eigenvalue: min,
            });
        }
    }
    let d = h.dim();
    let mut out = DMatrix::<C64>::zeros(d, d);
    for k in 0..d {
        let lam = if vals[k] < SQRT_KERNEL_TOL { 0.0 } else { vals[k] };
        let s = lam.sqrt();
        if s == 0.0 {
            continue;
        }
        let v = vecs.as_dmatrix().column(k);
        for i in 0..d {
            for j in 0..d {
                out[(i, j)] += v[i] * v[j].conj() * C64::new(s, 0.0);
            }
        }
    }
    Ok(HermitianOperator::from_nearly_hermitian(
        CMatrix::from_dmatrix(out),
    ))
}

/// Sum of absolute eigenvalues.
pub fn trace_norm(h: &HermitianOperator) -> Result<f64> {
    let (vals, _) = eig_hermitian(h)?;
    Ok(vals.iter().map(|l| l.abs()).sum())
}

/// Universal NOT map: A -> (Tr(A) 1 - A) / (dim - 1).
pub fn universal_not(a: &HermitianOperator) -> Result<HermitianOperator> {
    let d = a.dim();
    if d < 2 {
        return Err(CoreError::Domain(format!(
            "universal NOT needs dim >= 2, got {d}"
        )));
    }
    let tr = a.trace_re();
    Ok(HermitianOperator::identity(d)
        .scale(tr)
        .sub(a)
        .scale(1.0 / (d as f64 - 1.0)))
}

/// Maximally entangled state sum_j |j>|j>, normalized by 1/sqrt(d) on request.
pub fn max_entangled(d: usize, normalized: bool) -> PureState {
    let mut amps = vec![C64::new(0.0, 0.0); d * d];
    let s = if normalized {
        1.0 / (d as f64).sqrt()
    } else {
        1.0
    };
    for j in 0..d {
        amps[j * d + j] = C64::new(s, 0.0);
    }
    PureState::new_unnormalized(amps)
}

pub fn pauli_x() -> CMatrix {
    CMatrix::new(
        2,
        2,
        vec![
            C64::new(0.0, 0.0),
            C64::new(1.0, 0.0),
            C64::new(1.0, 0.0),
            C64::new(0.0, 0.0),
        ],
    )
    .unwrap()
}

pub fn pauli_y() -> CMatrix {
    CMatrix::new(
        2,
        2,
        vec![
            C64::new(0.0, 0.0),
            C64::new(0.0, -1.0),
            C64::new(0.0, 1.0),
            C64::new(0.0, 0.0),
        ],
    )
    .unwrap()
}

pub fn pauli_z() -> CMatrix {
    CMatrix::new(
        2,
        2,
        vec![
            C64::new(1.0, 0.0),
            C64::new(0.0, 0.0),
            C64::new(0.0, 0.0),
            C64::new(-1.0, 0.0),
        ],
    )
    .unwrap()
}
