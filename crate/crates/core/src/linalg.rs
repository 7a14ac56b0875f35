//! Dense complex linear algebra for small Hilbert spaces.
//!
//! Operators are stored densely (dimensions stay at or below 16 for single
//! registers, a few times that for joint agent/environment registers).
//! Everything here is an immutable value; operations return new values.
//!
//! Norm conventions: [`trace_distance`] and [`trace_norm`] use the trace
//! (Schatten-1) norm. [`hilbert_schmidt_norm`] is the Frobenius norm and is
//! only used for reporting channel description distances; no conversion
//! constant between the two is assumed.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{arg, Result};

/// Tolerance for Hermiticity, positivity and trace checks.
pub const STATE_TOL: f64 = 1e-9;
/// Eigenvalues at or below this are treated as outside the support.
pub const SUPPORT_CUTOFF: f64 = 1e-12;

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// A dense complex matrix with finite entries.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix(DMatrix<Complex64>);

impl ComplexMatrix {
    /// Builds a matrix from row-major entries.
    pub fn new(rows: usize, cols: usize, entries: &[Complex64]) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return arg("matrix dimensions must be positive");
        }
        if entries.len() != rows * cols {
            return arg(format!(
                "expected {} entries for a {rows}x{cols} matrix, got {}",
                rows * cols,
                entries.len()
            ));
        }
        if entries.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return arg("matrix entries must be finite");
        }
        Ok(Self(DMatrix::from_row_slice(rows, cols, entries)))
    }

    /// Builds a matrix from row-major real entries.
    pub fn from_real(rows: usize, cols: usize, entries: &[f64]) -> Result<Self> {
        let z: Vec<Complex64> = entries.iter().map(|&x| c(x, 0.0)).collect();
        Self::new(rows, cols, &z)
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self(DMatrix::from_element(rows, cols, ZERO))
    }

    pub fn identity(d: usize) -> Self {
        Self(DMatrix::identity(d, d))
    }

    pub fn from_diagonal(diag: &[Complex64]) -> Self {
        Self(DMatrix::from_diagonal(&DVector::from_row_slice(diag)))
    }

    /// `|u⟩⟨v|`.
    pub fn outer(u: &[Complex64], v: &[Complex64]) -> Self {
        let mut m = DMatrix::from_element(u.len(), v.len(), ZERO);
        for (i, ui) in u.iter().enumerate() {
            for (j, vj) in v.iter().enumerate() {
                m[(i, j)] = ui * vj.conj();
            }
        }
        Self(m)
    }

    pub fn from_dmatrix(m: DMatrix<Complex64>) -> Self {
        Self(m)
    }

    pub fn as_dmatrix(&self) -> &DMatrix<Complex64> {
        &self.0
    }

    pub fn into_dmatrix(self) -> DMatrix<Complex64> {
        self.0
    }

    pub fn rows(&self) -> usize {
        self.0.nrows()
    }

    pub fn cols(&self) -> usize {
        self.0.ncols()
    }

    pub fn is_square(&self) -> bool {
        self.rows() == self.cols()
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.0[(i, j)]
    }

    /// Row-major copy of the entries.
    pub fn entries(&self) -> Vec<Complex64> {
        let mut out = Vec::with_capacity(self.rows() * self.cols());
        for i in 0..self.rows() {
            for j in 0..self.cols() {
                out.push(self.0[(i, j)]);
            }
        }
        out
    }

    pub fn adjoint(&self) -> Self {
        Self(self.0.adjoint())
    }

    pub fn mul(&self, other: &Self) -> Self {
        Self(&self.0 * &other.0)
    }

    pub fn add(&self, other: &Self) -> Self {
        Self(&self.0 + &other.0)
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self(&self.0 - &other.0)
    }

    pub fn scale(&self, s: f64) -> Self {
        Self(&self.0 * c(s, 0.0))
    }

    pub fn scale_complex(&self, s: Complex64) -> Self {
        Self(&self.0 * s)
    }

    pub fn trace(&self) -> Complex64 {
        self.0.trace()
    }

    /// Kronecker product `self ⊗ other`.
    pub fn kron(&self, other: &Self) -> Self {
        Self(self.0.kronecker(&other.0))
    }

    /// `A X A†`.
    pub fn conjugate(&self, x: &Self) -> Self {
        Self(&self.0 * &x.0 * self.0.adjoint())
    }

    /// Largest absolute entry.
    pub fn max_abs(&self) -> f64 {
        self.0.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// `‖M − M†‖_max`.
    pub fn hermiticity_residual(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        self.sub(&self.adjoint()).max_abs()
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_residual() <= tol
    }

    /// `(M + M†)/2`.
    pub fn hermitian_part(&self) -> Self {
        Self((&self.0 + self.0.adjoint()) * c(0.5, 0.0))
    }

    /// `‖U†U − I‖` in operator norm; zero for exact isometries.
    pub fn isometry_residual(&self) -> f64 {
        let gram = self.adjoint().mul(self);
        operator_norm_hermitian(&gram.sub(&Self::identity(self.cols())))
    }
}

/// Result of a Hermitian eigendecomposition: `m = V diag(values) V†`.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    /// Ascending.
    pub values: Vec<f64>,
    /// Column `i` is the eigenvector of `values[i]`.
    pub vectors: ComplexMatrix,
}

impl HermitianEigen {
    /// Rebuilds `V f(Λ) V†`.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> ComplexMatrix {
        let d = self.values.len();
        let v = self.vectors.as_dmatrix();
        let mut scaled = v.clone();
        for j in 0..d {
            let fj = c(f(self.values[j]), 0.0);
            for i in 0..d {
                scaled[(i, j)] *= fj;
            }
        }
        ComplexMatrix(scaled * v.adjoint())
    }
}

/// Eigendecomposition of a Hermitian matrix with ascending eigenvalues.
pub fn eigendecompose_hermitian(m: &ComplexMatrix) -> Result<HermitianEigen> {
    if !m.is_square() {
        return arg("eigendecomposition needs a square matrix");
    }
    let residual = m.hermiticity_residual();
    if residual > STATE_TOL {
        return arg(format!("matrix is not Hermitian (residual {residual:.3e})"));
    }
    Ok(eigh(m))
}

// Caller guarantees Hermiticity.
fn eigh(m: &ComplexMatrix) -> HermitianEigen {
    let d = m.rows();
    let eig = SymmetricEigen::new(m.hermitian_part().0);
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vectors = DMatrix::from_element(d, d, ZERO);
    for (col, &i) in order.iter().enumerate() {
        vectors.set_column(col, &eig.eigenvectors.column(i));
    }
    HermitianEigen {
        values,
        vectors: ComplexMatrix(vectors),
    }
}

fn operator_norm_hermitian(m: &ComplexMatrix) -> f64 {
    eigh(m).values.iter().map(|x| x.abs()).fold(0.0, f64::max)
}

/// Trace norm `‖M‖₁` of a Hermitian matrix (sum of absolute eigenvalues).
pub fn trace_norm(m: &ComplexMatrix) -> Result<f64> {
    Ok(eigendecompose_hermitian(m)?.values.iter().map(|x| x.abs()).sum())
}

/// Hilbert–Schmidt (Frobenius) norm.
pub fn hilbert_schmidt_norm(m: &ComplexMatrix) -> f64 {
    m.0.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// A positive semidefinite operator with trace in `(0, 1]`, carrying its
/// tensor-factor structure. Trace below one is allowed (semi-density).
#[derive(Debug, Clone, PartialEq)]
pub struct DensityOperator {
    matrix: ComplexMatrix,
    dims: Vec<usize>,
}

impl DensityOperator {
    /// Validates and wraps `matrix` as a single-register state.
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        let d = matrix.rows();
        Self::with_dims(matrix, vec![d])
    }

    /// Validates and wraps `matrix` with an explicit subsystem structure.
    pub fn with_dims(matrix: ComplexMatrix, dims: Vec<usize>) -> Result<Self> {
        if !matrix.is_square() {
            return arg("density operator must be square");
        }
        if dims.is_empty() || dims.contains(&0) {
            return arg("subsystem dimensions must be positive");
        }
        if dims.iter().product::<usize>() != matrix.rows() {
            return arg(format!(
                "subsystem dims {dims:?} do not multiply to {}",
                matrix.rows()
            ));
        }
        let herm = matrix.hermiticity_residual();
        if herm > STATE_TOL {
            return arg(format!("not Hermitian (residual {herm:.3e})"));
        }
        let min_eig = eigh(&matrix).values[0];
        if min_eig < -STATE_TOL {
            return arg(format!("not positive semidefinite (min eigenvalue {min_eig:.3e})"));
        }
        let tr = matrix.trace().re;
        if !(tr > 0.0 && tr <= 1.0 + STATE_TOL) {
            return arg(format!("trace {tr} outside (0, 1]"));
        }
        Ok(Self { matrix, dims })
    }

    /// Wraps a matrix known to be a valid state up to rounding; the
    /// Hermitian part is kept.
    pub(crate) fn from_raw(matrix: ComplexMatrix, dims: Vec<usize>) -> Self {
        debug_assert_eq!(dims.iter().product::<usize>(), matrix.rows());
        Self {
            matrix: matrix.hermitian_part(),
            dims,
        }
    }

    pub fn maximally_mixed(d: usize) -> Self {
        Self::from_raw(ComplexMatrix::identity(d).scale(1.0 / d as f64), vec![d])
    }

    /// `diag(p)`; entries must be non-negative with sum in `(0, 1]`.
    pub fn diagonal(p: &[f64]) -> Result<Self> {
        let z: Vec<Complex64> = p.iter().map(|&x| c(x, 0.0)).collect();
        Self::new(ComplexMatrix::from_diagonal(&z))
    }

    /// Computational basis projector `|i⟩⟨i|`.
    pub fn basis(d: usize, i: usize) -> Result<Self> {
        if i >= d {
            return arg(format!("basis index {i} out of range for dimension {d}"));
        }
        let mut p = vec![0.0; d];
        p[i] = 1.0;
        Self::diagonal(&p)
    }

    pub fn from_pure(psi: &PureState) -> Self {
        Self::from_raw(psi.projector(), vec![psi.dim()])
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace().re
    }

    pub fn purity(&self) -> f64 {
        self.matrix.mul(&self.matrix).trace().re
    }

    /// Rescales to unit trace.
    pub fn normalized(&self) -> Self {
        Self {
            matrix: self.matrix.scale(1.0 / self.trace()),
            dims: self.dims.clone(),
        }
    }

    /// Reinterprets the subsystem structure.
    pub fn with_subsystems(&self, dims: Vec<usize>) -> Result<Self> {
        if dims.iter().product::<usize>() != self.dim() {
            return arg(format!("dims {dims:?} do not match dimension {}", self.dim()));
        }
        Ok(Self {
            matrix: self.matrix.clone(),
            dims,
        })
    }

    /// Largest deviation from a diagonal matrix.
    pub fn off_diagonal_max(&self) -> f64 {
        let m = self.matrix.as_dmatrix();
        let mut worst: f64 = 0.0;
        for i in 0..self.dim() {
            for j in 0..self.dim() {
                if i != j {
                    worst = worst.max(m[(i, j)].norm());
                }
            }
        }
        worst
    }

    pub fn diagonal_entries(&self) -> Vec<f64> {
        (0..self.dim()).map(|i| self.matrix.get(i, i).re).collect()
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        eigh(&self.matrix).values
    }

    /// Tensor product; the dims lists are concatenated.
    pub fn tensor(&self, other: &Self) -> Self {
        let mut dims = self.dims.clone();
        dims.extend_from_slice(&other.dims);
        Self {
            matrix: self.matrix.kron(&other.matrix),
            dims,
        }
    }
}

/// Tensor product of two matrices.
pub fn tensor(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    a.kron(b)
}

/// A unit vector in `ℂ^d`.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    amplitudes: Vec<Complex64>,
}

impl PureState {
    pub fn new(amplitudes: Vec<Complex64>) -> Result<Self> {
        if amplitudes.is_empty() {
            return arg("pure state needs at least one amplitude");
        }
        let norm: f64 = amplitudes.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > STATE_TOL {
            return arg(format!("amplitudes have norm {norm}, expected 1"));
        }
        Ok(Self { amplitudes })
    }

    /// Normalizes a non-zero vector.
    pub fn normalize(amplitudes: Vec<Complex64>) -> Result<Self> {
        let norm: f64 = amplitudes.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if !(norm > 0.0) || !norm.is_finite() {
            return arg("cannot normalize a zero or non-finite vector");
        }
        Self::new(amplitudes.into_iter().map(|z| z / norm).collect())
    }

    /// `|Φ⁺⟩ = d^{-1/2} Σ_i |i i⟩`.
    pub fn max_entangled(d: usize) -> Self {
        let mut amps = vec![ZERO; d * d];
        let a = 1.0 / (d as f64).sqrt();
        for i in 0..d {
            amps[i * d + i] = c(a, 0.0);
        }
        Self { amplitudes: amps }
    }

    pub fn basis(d: usize, i: usize) -> Result<Self> {
        if i >= d {
            return arg(format!("basis index {i} out of range for dimension {d}"));
        }
        let mut amps = vec![ZERO; d];
        amps[i] = ONE;
        Ok(Self { amplitudes: amps })
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn projector(&self) -> ComplexMatrix {
        ComplexMatrix::outer(&self.amplitudes, &self.amplitudes)
    }
}

/// Partial trace keeping the listed subsystems (in ascending order).
pub fn partial_trace(rho: &DensityOperator, keep: &[usize]) -> Result<DensityOperator> {
    let dims = rho.dims();
    if keep.is_empty() {
        return arg("partial trace must keep at least one subsystem");
    }
    let mut keep_sorted = keep.to_vec();
    keep_sorted.sort_unstable();
    keep_sorted.dedup();
    if let Some(&bad) = keep_sorted.iter().find(|&&k| k >= dims.len()) {
        return arg(format!(
            "subsystem index {bad} out of range for {} factors",
            dims.len()
        ));
    }
    if keep_sorted.len() == dims.len() {
        return Ok(rho.clone());
    }
    let traced: Vec<usize> = (0..dims.len()).filter(|i| !keep_sorted.contains(i)).collect();
    let kept_dims: Vec<usize> = keep_sorted.iter().map(|&i| dims[i]).collect();
    let traced_dims: Vec<usize> = traced.iter().map(|&i| dims[i]).collect();
    let dk: usize = kept_dims.iter().product();
    let dt: usize = traced_dims.iter().product();

    // Row-major strides of the full index.
    let mut strides = vec![1usize; dims.len()];
    for i in (0..dims.len().saturating_sub(1)).rev() {
        strides[i] = strides[i + 1] * dims[i + 1];
    }
    let compose = |kept_idx: usize, traced_idx: usize| -> usize {
        let mut full = 0;
        let mut rem = kept_idx;
        for (pos, &f) in keep_sorted.iter().enumerate().rev() {
            full += (rem % kept_dims[pos]) * strides[f];
            rem /= kept_dims[pos];
        }
        let mut rem = traced_idx;
        for (pos, &f) in traced.iter().enumerate().rev() {
            full += (rem % traced_dims[pos]) * strides[f];
            rem /= traced_dims[pos];
        }
        full
    };

    let m = rho.matrix().as_dmatrix();
    let mut out = DMatrix::from_element(dk, dk, ZERO);
    for i in 0..dk {
        for j in 0..dk {
            let mut acc = ZERO;
            for t in 0..dt {
                acc += m[(compose(i, t), compose(j, t))];
            }
            out[(i, j)] = acc;
        }
    }
    Ok(DensityOperator::from_raw(ComplexMatrix(out), kept_dims))
}

fn check_same_dim(rho: &DensityOperator, sigma: &DensityOperator) -> Result<()> {
    if rho.dim() != sigma.dim() {
        return arg(format!(
            "dimension mismatch: {} vs {}",
            rho.dim(),
            sigma.dim()
        ));
    }
    Ok(())
}

/// `½‖ρ − σ‖₁`.
pub fn trace_distance(rho: &DensityOperator, sigma: &DensityOperator) -> Result<f64> {
    check_same_dim(rho, sigma)?;
    let diff = rho.matrix().sub(sigma.matrix());
    Ok(0.5 * eigh(&diff).values.iter().map(|x| x.abs()).sum::<f64>())
}

/// Umegaki relative entropy `Tr[ρ(ln ρ − ln σ)]` in nats.
///
/// Evaluated on the raw operators (no renormalization of semi-density
/// inputs). Returns `f64::INFINITY` when the support of `ρ` is not
/// contained in the support of `σ`.
pub fn relative_entropy(rho: &DensityOperator, sigma: &DensityOperator) -> Result<f64> {
    check_same_dim(rho, sigma)?;
    let er = eigh(rho.matrix());
    let es = eigh(sigma.matrix());

    let neg_entropy: f64 = er
        .values
        .iter()
        .filter(|&&l| l > SUPPORT_CUTOFF)
        .map(|&l| l * l.ln())
        .sum();

    // Tr[ρ ln σ] = Σ_j ln μ_j ⟨v_j|ρ|v_j⟩
    let v = es.vectors.as_dmatrix();
    let r = rho.matrix().as_dmatrix();
    let mut cross = 0.0;
    for (j, &mu) in es.values.iter().enumerate() {
        let col = v.column(j);
        let weight = (col.adjoint() * r * col)[(0, 0)].re;
        if mu <= SUPPORT_CUTOFF {
            if weight > SUPPORT_CUTOFF {
                return Ok(f64::INFINITY);
            }
            continue;
        }
        cross += weight * mu.ln();
    }
    Ok(neg_entropy - cross)
}

/// Von Neumann entropy `−Tr ρ ln ρ` in nats.
pub fn von_neumann_entropy(rho: &DensityOperator) -> f64 {
    -rho.eigenvalues()
        .iter()
        .filter(|&&l| l > SUPPORT_CUTOFF)
        .map(|&l| l * l.ln())
        .sum::<f64>()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ket0() -> DensityOperator {
        DensityOperator::basis(2, 0).unwrap()
    }

    fn ket1() -> DensityOperator {
        DensityOperator::basis(2, 1).unwrap()
    }

    #[test]
    fn tensor_of_maximally_mixed() {
        let half = DensityOperator::maximally_mixed(2);
        let t = half.tensor(&half);
        assert_eq!(t.dims(), &[2, 2]);
        let expect = DensityOperator::maximally_mixed(4);
        assert!(t.matrix().sub(expect.matrix()).max_abs() < 1e-15);
    }

    #[test]
    fn tensor_of_basis_projectors() {
        let t = ket0().tensor(&ket1());
        let expect = DensityOperator::basis(4, 1).unwrap();
        assert!(t.matrix().sub(expect.matrix()).max_abs() < 1e-15);
    }

    #[test]
    fn partial_trace_of_bell_state() {
        let bell = DensityOperator::from_pure(&PureState::max_entangled(2))
            .with_subsystems(vec![2, 2])
            .unwrap();
        let reduced = partial_trace(&bell, &[1]).unwrap();
        assert_eq!(reduced.dims(), &[2]);
        let expect = DensityOperator::maximally_mixed(2);
        assert!(reduced.matrix().sub(expect.matrix()).max_abs() < 1e-12);
    }

    #[test]
    fn partial_trace_three_factors_keeps_order() {
        let a = DensityOperator::diagonal(&[0.7, 0.3]).unwrap();
        let b = DensityOperator::maximally_mixed(3);
        let cst = DensityOperator::diagonal(&[0.1, 0.9]).unwrap();
        let abc = a.tensor(&b).tensor(&cst);
        let ac = partial_trace(&abc, &[2, 0]).unwrap();
        assert_eq!(ac.dims(), &[2, 2]);
        let expect = a.tensor(&cst);
        assert!(ac.matrix().sub(expect.matrix()).max_abs() < 1e-12);
        let mid = partial_trace(&abc, &[1]).unwrap();
        assert!(mid.matrix().sub(b.matrix()).max_abs() < 1e-12);
    }

    #[test]
    fn partial_trace_keep_all_is_identity() {
        let a = DensityOperator::diagonal(&[0.7, 0.3]).unwrap();
        let ab = a.tensor(&DensityOperator::maximally_mixed(2));
        assert_eq!(partial_trace(&ab, &[0, 1]).unwrap(), ab);
    }

    #[test]
    fn partial_trace_rejects_bad_index() {
        let ab = ket0().tensor(&ket1());
        assert!(partial_trace(&ab, &[2]).is_err());
        assert!(partial_trace(&ab, &[]).is_err());
    }

    #[test]
    fn trace_distance_examples() {
        assert!(trace_distance(&ket0(), &ket0()).unwrap().abs() < 1e-15);
        assert!((trace_distance(&ket0(), &ket1()).unwrap() - 1.0).abs() < 1e-12);
        let half = DensityOperator::maximally_mixed(2);
        assert!((trace_distance(&ket0(), &half).unwrap() - 0.5).abs() < 1e-12);
        assert!(trace_distance(&ket0(), &DensityOperator::maximally_mixed(3)).is_err());
    }

    #[test]
    fn relative_entropy_examples() {
        let half = DensityOperator::maximally_mixed(2);
        assert!(relative_entropy(&half, &half).unwrap().abs() < 1e-12);
        let d = relative_entropy(&ket0(), &half).unwrap();
        assert!((d - std::f64::consts::LN_2).abs() < 1e-12);
        assert_eq!(relative_entropy(&ket0(), &ket1()).unwrap(), f64::INFINITY);
        // Full-rank ρ against a pure σ diverges.
        assert!(relative_entropy(&half, &ket0()).unwrap().is_infinite());
    }

    #[test]
    fn eigen_examples() {
        let d = ComplexMatrix::from_real(3, 3, &[1., 0., 0., 0., 2., 0., 0., 0., 3.]).unwrap();
        let e = eigendecompose_hermitian(&d).unwrap();
        for (got, want) in e.values.iter().zip([1.0, 2.0, 3.0]) {
            assert!((got - want).abs() < 1e-12);
        }
        let x = ComplexMatrix::from_real(2, 2, &[0., 1., 1., 0.]).unwrap();
        let e = eigendecompose_hermitian(&x).unwrap();
        assert!((e.values[0] + 1.0).abs() < 1e-12);
        assert!((e.values[1] - 1.0).abs() < 1e-12);
        let rebuilt = e.map(|l| l);
        assert!(rebuilt.sub(&x).max_abs() < 1e-12);
    }

    #[test]
    fn eigen_rejects_non_hermitian() {
        let m = ComplexMatrix::from_real(2, 2, &[0., 1., 0., 0.]).unwrap();
        assert!(eigendecompose_hermitian(&m).is_err());
    }

    #[test]
    fn density_operator_validation() {
        assert!(DensityOperator::diagonal(&[0.6, 0.6]).is_err());
        assert!(DensityOperator::diagonal(&[1.2, -0.2]).is_err());
        assert!(DensityOperator::diagonal(&[0.0, 0.0]).is_err());
        // Semi-density is allowed.
        assert!(DensityOperator::diagonal(&[0.3, 0.2]).is_ok());
        let nonherm = ComplexMatrix::from_real(2, 2, &[0.5, 0.1, 0.0, 0.5]).unwrap();
        assert!(DensityOperator::new(nonherm).is_err());
    }

    #[test]
    fn matrix_rejects_nan() {
        assert!(ComplexMatrix::from_real(1, 2, &[f64::NAN, 0.0]).is_err());
        assert!(ComplexMatrix::from_real(2, 2, &[1.0]).is_err());
    }

    #[test]
    fn pure_state_norm_checked() {
        assert!(PureState::new(vec![ONE, ONE]).is_err());
        let plus = PureState::normalize(vec![ONE, ONE]).unwrap();
        let rho = DensityOperator::from_pure(&plus);
        assert!((rho.purity() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn norms() {
        let x = ComplexMatrix::from_real(2, 2, &[0., 1., 1., 0.]).unwrap();
        assert!((trace_norm(&x).unwrap() - 2.0).abs() < 1e-12);
        assert!((hilbert_schmidt_norm(&x) - 2f64.sqrt()).abs() < 1e-12);
    }
}
