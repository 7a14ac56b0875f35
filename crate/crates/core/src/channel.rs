//! Completely positive maps in Kraus form, unitary actions, quantum
//! instruments and Choi states.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{arg, Result};
use crate::linalg::{
    c, eigendecompose_hermitian, ComplexMatrix, DensityOperator, PureState, STATE_TOL, ZERO,
};

/// Branches with probability at or below this are treated as impossible.
pub const ZERO_PROB_CUTOFF: f64 = 1e-12;

/// Largest eigenvalue magnitude and largest eigenvalue of `Σ M†M − I`.
fn completeness_stats(kraus: &[ComplexMatrix], in_dim: usize) -> (f64, f64) {
    let mut sum = ComplexMatrix::zeros(in_dim, in_dim);
    for m in kraus {
        sum = sum.add(&m.adjoint().mul(m));
    }
    let diff = sum.sub(&ComplexMatrix::identity(in_dim)).hermitian_part();
    let values = eigendecompose_hermitian(&diff)
        .expect("Hermitian by construction")
        .values;
    let norm = values.iter().map(|x| x.abs()).fold(0.0, f64::max);
    let excess = values.last().copied().unwrap_or(0.0);
    (norm, excess)
}

/// A completely positive map `X ↦ Σ_j M_j X M_j†`.
#[derive(Debug, Clone, PartialEq)]
pub struct KrausChannel {
    in_dim: usize,
    out_dim: usize,
    kraus: Vec<ComplexMatrix>,
    trace_preserving: bool,
}

impl KrausChannel {
    /// Accepts any non-empty list of equally shaped Kraus operators; use
    /// [`Validate::validate`] to check trace conditions.
    pub fn new(kraus: Vec<ComplexMatrix>) -> Result<Self> {
        let Some(first) = kraus.first() else {
            return arg("Kraus list must be non-empty");
        };
        let (out_dim, in_dim) = (first.rows(), first.cols());
        if kraus.iter().any(|m| m.rows() != out_dim || m.cols() != in_dim) {
            return arg("all Kraus operators must share one shape");
        }
        let (residual, _) = completeness_stats(&kraus, in_dim);
        Ok(Self {
            in_dim,
            out_dim,
            kraus,
            trace_preserving: residual <= STATE_TOL,
        })
    }

    pub fn identity(d: usize) -> Self {
        Self::new(vec![ComplexMatrix::identity(d)]).expect("identity")
    }

    pub fn from_unitary(u: &UnitaryAction) -> Self {
        Self::new(vec![u.matrix().clone()]).expect("unitary Kraus")
    }

    /// `ρ ↦ (1 − p) ρ + p Tr(ρ) I/d`, built from the Weyl–Heisenberg basis.
    pub fn depolarizing(d: usize, p: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return arg(format!("depolarizing probability {p} outside [0, 1]"));
        }
        let dd = (d * d) as f64;
        let omega = std::f64::consts::TAU / d as f64;
        let mut kraus = vec![ComplexMatrix::identity(d).scale((1.0 - p + p / dd).sqrt())];
        for a in 0..d {
            for b in 0..d {
                if a == 0 && b == 0 {
                    continue;
                }
                // X^a Z^b with X|j⟩ = |j+1⟩ and Z|j⟩ = ω^j |j⟩.
                let mut w = DMatrix::from_element(d, d, ZERO);
                for j in 0..d {
                    let phase = Complex64::from_polar(1.0, omega * (b * j) as f64);
                    w[((j + a) % d, j)] = phase;
                }
                kraus.push(ComplexMatrix::from_dmatrix(w).scale(p.sqrt() / d as f64));
            }
        }
        Self::new(kraus)
    }

    /// Complete dephasing in the computational basis.
    pub fn dephasing(d: usize) -> Self {
        let kraus = (0..d)
            .map(|i| {
                let mut diag = vec![ZERO; d];
                diag[i] = c(1.0, 0.0);
                ComplexMatrix::from_diagonal(&diag)
            })
            .collect();
        Self::new(kraus).expect("projectors")
    }

    pub fn in_dim(&self) -> usize {
        self.in_dim
    }

    pub fn out_dim(&self) -> usize {
        self.out_dim
    }

    pub fn kraus(&self) -> &[ComplexMatrix] {
        &self.kraus
    }

    pub fn is_trace_preserving(&self) -> bool {
        self.trace_preserving
    }

    /// `‖Σ M†M − I‖` in operator norm.
    pub fn completeness_residual(&self) -> f64 {
        completeness_stats(&self.kraus, self.in_dim).0
    }

    /// `I_a ⊗ M_j` for every Kraus operator.
    pub fn lift_left(&self, ancilla_dim: usize) -> Self {
        let id = ComplexMatrix::identity(ancilla_dim);
        Self {
            in_dim: ancilla_dim * self.in_dim,
            out_dim: ancilla_dim * self.out_dim,
            kraus: self.kraus.iter().map(|m| id.kron(m)).collect(),
            trace_preserving: self.trace_preserving,
        }
    }

    /// `Σ M X M†` on a raw matrix.
    pub fn apply_matrix(&self, x: &ComplexMatrix) -> ComplexMatrix {
        let mut out = ComplexMatrix::zeros(self.out_dim, self.out_dim);
        for m in &self.kraus {
            out = out.add(&m.conjugate(x));
        }
        out
    }

    pub fn apply(&self, rho: &DensityOperator) -> Result<DensityOperator> {
        apply_channel(self, rho)
    }
}

/// Applies a CP map to a state. The subsystem structure is kept when the
/// channel is square, otherwise the output is a single register.
pub fn apply_channel(ch: &KrausChannel, rho: &DensityOperator) -> Result<DensityOperator> {
    if ch.in_dim != rho.dim() {
        return arg(format!(
            "channel input dimension {} does not match state dimension {}",
            ch.in_dim,
            rho.dim()
        ));
    }
    let dims = if ch.in_dim == ch.out_dim {
        rho.dims().to_vec()
    } else {
        vec![ch.out_dim]
    };
    Ok(DensityOperator::from_raw(ch.apply_matrix(rho.matrix()), dims))
}

/// The Choi state `(𝕀 ⊗ Q)(|Φ⁺⟩⟨Φ⁺|)` on `ℂ^d ⊗ ℂ^d`.
pub fn choi_state(ch: &KrausChannel) -> Result<DensityOperator> {
    if ch.in_dim != ch.out_dim {
        return arg("Choi state requires a square channel");
    }
    let d = ch.in_dim;
    let phi = DensityOperator::from_pure(&PureState::max_entangled(d)).with_subsystems(vec![d, d])?;
    apply_channel(&ch.lift_left(d), &phi)
}

/// A unitary action `X ↦ U X U†`.
#[derive(Debug, Clone, PartialEq)]
pub struct UnitaryAction {
    matrix: ComplexMatrix,
}

impl UnitaryAction {
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        let u = Self::unchecked(matrix)?;
        let residual = u.matrix.isometry_residual();
        if residual > STATE_TOL {
            return arg(format!("matrix is not unitary (residual {residual:.3e})"));
        }
        Ok(u)
    }

    /// Wraps a square matrix without the unitarity check, for validation
    /// tooling.
    pub fn unchecked(matrix: ComplexMatrix) -> Result<Self> {
        if !matrix.is_square() {
            return arg("unitary must be square");
        }
        Ok(Self { matrix })
    }

    pub fn pauli_x() -> Self {
        Self::new(ComplexMatrix::from_real(2, 2, &[0., 1., 1., 0.]).expect("2x2")).expect("unitary")
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    /// `(𝕀 ⊗ U)|Φ⁺⟩`.
    pub fn choi_vector(&self) -> Result<PureState> {
        let d = self.dim();
        let phi = PureState::max_entangled(d);
        let lifted = ComplexMatrix::identity(d).kron(&self.matrix).into_dmatrix();
        let v = lifted * nalgebra::DVector::from_row_slice(phi.amplitudes());
        PureState::normalize(v.iter().copied().collect())
    }

    pub fn apply(&self, rho: &DensityOperator) -> Result<DensityOperator> {
        apply_channel(&KrausChannel::from_unitary(self), rho)
    }
}

/// A family of CP branches indexed by classical outcomes, summing to a
/// CPTP map.
#[derive(Debug, Clone, PartialEq)]
pub struct Instrument {
    labels: Vec<String>,
    branches: Vec<KrausChannel>,
}

/// Outcome of applying one instrument branch.
#[derive(Debug, Clone)]
pub struct BranchOutcome {
    pub prob: f64,
    /// `None` when `prob ≤ ZERO_PROB_CUTOFF`; such a branch must not be
    /// followed.
    pub post_state: Option<DensityOperator>,
}

impl Instrument {
    pub fn new(labels: Vec<String>, branches: Vec<KrausChannel>) -> Result<Self> {
        if branches.is_empty() {
            return arg("instrument needs at least one branch");
        }
        if labels.len() != branches.len() {
            return arg(format!(
                "{} labels for {} branches",
                labels.len(),
                branches.len()
            ));
        }
        let mut sorted = labels.clone();
        sorted.sort();
        sorted.dedup();
        if sorted.len() != labels.len() {
            return arg("outcome labels must be unique");
        }
        let d = branches[0].in_dim;
        if branches.iter().any(|b| b.in_dim != d || b.out_dim != d) {
            return arg("all instrument branches must act on one square space");
        }
        Ok(Self { labels, branches })
    }

    /// Projective instrument with one projector per outcome, labelled `0..n`.
    pub fn projective(projectors: Vec<ComplexMatrix>) -> Result<Self> {
        let labels = (0..projectors.len()).map(|k| k.to_string()).collect();
        let branches = projectors
            .into_iter()
            .map(|p| KrausChannel::new(vec![p]))
            .collect::<Result<Vec<_>>>()?;
        Self::new(labels, branches)
    }

    pub fn computational_basis(d: usize) -> Self {
        let projectors = (0..d)
            .map(|i| DensityOperator::basis(d, i).expect("in range").matrix().clone())
            .collect();
        Self::projective(projectors).expect("basis projectors")
    }

    pub fn dim(&self) -> usize {
        self.branches[0].in_dim
    }

    pub fn outcomes(&self) -> usize {
        self.branches.len()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn branches(&self) -> &[KrausChannel] {
        &self.branches
    }

    pub fn outcome_index(&self, label: &str) -> Result<usize> {
        self.labels
            .iter()
            .position(|l| l == label)
            .ok_or_else(|| crate::Error::Argument(format!("unknown outcome label `{label}`")))
    }

    /// `‖Σ_k Σ_j M_{k,j}† M_{k,j} − I‖`.
    pub fn completeness_residual(&self) -> f64 {
        let all: Vec<ComplexMatrix> = self
            .branches
            .iter()
            .flat_map(|b| b.kraus.iter().cloned())
            .collect();
        completeness_stats(&all, self.dim()).0
    }

    /// The summed channel `Σ_k 𝓔_k`.
    pub fn total_channel(&self) -> KrausChannel {
        let all = self
            .branches
            .iter()
            .flat_map(|b| b.kraus.iter().cloned())
            .collect();
        KrausChannel::new(all).expect("shapes agree")
    }

    /// Identity lifted onto `ℂ^a ⊗ H`.
    pub fn lift_left(&self, ancilla_dim: usize) -> Self {
        Self {
            labels: self.labels.clone(),
            branches: self.branches.iter().map(|b| b.lift_left(ancilla_dim)).collect(),
        }
    }

    pub fn branch_apply(&self, k: usize, rho: &DensityOperator) -> Result<BranchOutcome> {
        branch_apply(self, k, rho)
    }

    pub fn distribution(&self, rho: &DensityOperator) -> Result<Vec<f64>> {
        instrument_distribution(self, rho)
    }
}

fn check_instrument_dim(instr: &Instrument, rho: &DensityOperator) -> Result<()> {
    if instr.dim() != rho.dim() {
        return arg(format!(
            "instrument dimension {} does not match state dimension {}",
            instr.dim(),
            rho.dim()
        ));
    }
    Ok(())
}

/// Probability `Tr[𝓔_k(ρ)]` and the renormalized post-measurement state.
pub fn branch_apply(instr: &Instrument, k: usize, rho: &DensityOperator) -> Result<BranchOutcome> {
    let Some(branch) = instr.branches.get(k) else {
        return arg(format!(
            "outcome {k} not in instrument alphabet of size {}",
            instr.outcomes()
        ));
    };
    check_instrument_dim(instr, rho)?;
    let unnormalized = branch.apply_matrix(rho.matrix());
    let prob = unnormalized.trace().re.max(0.0);
    let post_state = (prob > ZERO_PROB_CUTOFF).then(|| {
        DensityOperator::from_raw(unnormalized.scale(1.0 / prob), rho.dims().to_vec())
    });
    Ok(BranchOutcome { prob, post_state })
}

/// Outcome probabilities `k ↦ Tr[𝓔_k(ρ)]`; sums to `Tr ρ`.
pub fn instrument_distribution(instr: &Instrument, rho: &DensityOperator) -> Result<Vec<f64>> {
    check_instrument_dim(instr, rho)?;
    Ok(instr
        .branches
        .iter()
        .map(|b| b.apply_matrix(rho.matrix()).trace().re)
        .collect())
}

/// Which invariant a validation failure concerns.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Invariant {
    /// `Σ M†M = I` (or `≼ I` for a single CP branch).
    Completeness,
    /// A single branch increases trace.
    BranchTraceNonIncreasing,
    Unitarity,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationFailure {
    pub invariant: Invariant,
    pub residual: f64,
    pub detail: String,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ValidationReport {
    pub failures: Vec<ValidationFailure>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Lists every violated invariant with its measured residual.
pub trait Validate {
    fn validate(&self) -> ValidationReport;
}

impl Validate for KrausChannel {
    /// A Kraus channel is valid when it does not increase trace.
    fn validate(&self) -> ValidationReport {
        let (residual, excess) = completeness_stats(&self.kraus, self.in_dim);
        let mut report = ValidationReport::default();
        if excess > STATE_TOL {
            report.failures.push(ValidationFailure {
                invariant: Invariant::Completeness,
                residual,
                detail: format!("Σ M†M exceeds I by {excess:.3e}"),
            });
        }
        report
    }
}

impl KrausChannel {
    /// Like [`Validate::validate`] but also requires trace preservation.
    pub fn validate_cptp(&self) -> ValidationReport {
        let residual = self.completeness_residual();
        let mut report = ValidationReport::default();
        if residual > STATE_TOL {
            report.failures.push(ValidationFailure {
                invariant: Invariant::Completeness,
                residual,
                detail: format!("‖Σ M†M − I‖ = {residual:.3e}"),
            });
        }
        report
    }
}

impl Validate for Instrument {
    fn validate(&self) -> ValidationReport {
        let mut report = ValidationReport::default();
        for (label, branch) in self.labels.iter().zip(&self.branches) {
            let (residual, excess) = completeness_stats(&branch.kraus, branch.in_dim);
            if excess > STATE_TOL {
                report.failures.push(ValidationFailure {
                    invariant: Invariant::BranchTraceNonIncreasing,
                    residual,
                    detail: format!("branch `{label}` increases trace by {excess:.3e}"),
                });
            }
        }
        let residual = self.completeness_residual();
        if residual > STATE_TOL {
            report.failures.push(ValidationFailure {
                invariant: Invariant::Completeness,
                residual,
                detail: format!("branches sum to a non-CPTP map (‖Σ M†M − I‖ = {residual:.3e})"),
            });
        }
        report
    }
}

impl Validate for UnitaryAction {
    fn validate(&self) -> ValidationReport {
        let residual = self.matrix.isometry_residual();
        let mut report = ValidationReport::default();
        if residual > STATE_TOL {
            report.failures.push(ValidationFailure {
                invariant: Invariant::Unitarity,
                residual,
                detail: format!("‖U†U − I‖ = {residual:.3e}"),
            });
        }
        report
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{trace_distance, ONE};

    fn plus() -> DensityOperator {
        DensityOperator::from_pure(&PureState::normalize(vec![ONE, ONE]).unwrap())
    }

    #[test]
    fn identity_channel_is_noop() {
        let rho = DensityOperator::diagonal(&[0.3, 0.7]).unwrap();
        let out = apply_channel(&KrausChannel::identity(2), &rho).unwrap();
        assert!(out.matrix().sub(rho.matrix()).max_abs() < 1e-15);
    }

    #[test]
    fn pauli_x_flips_basis_state() {
        let x = KrausChannel::from_unitary(&UnitaryAction::pauli_x());
        let out = x.apply(&DensityOperator::basis(2, 0).unwrap()).unwrap();
        let expect = DensityOperator::basis(2, 1).unwrap();
        assert!(trace_distance(&out, &expect).unwrap() < 1e-15);
    }

    #[test]
    fn fully_depolarizing_qubit() {
        let ch = KrausChannel::depolarizing(2, 1.0).unwrap();
        assert!(ch.is_trace_preserving());
        // Kraus-sum oracle: (IρI + XρX + YρY + ZρZ)/4 for a fixed off-diagonal state.
        let rho = DensityOperator::new(
            ComplexMatrix::new(2, 2, &[c(0.6, 0.), c(0.1, 0.2), c(0.1, -0.2), c(0.4, 0.)]).unwrap(),
        )
        .unwrap();
        let out = ch.apply(&rho).unwrap();
        let half = DensityOperator::maximally_mixed(2);
        assert!(out.matrix().sub(half.matrix()).max_abs() < 1e-12);
    }

    #[test]
    fn depolarizing_qutrit_is_cptp() {
        let ch = KrausChannel::depolarizing(3, 0.4).unwrap();
        assert!(ch.validate_cptp().is_valid());
        let rho = DensityOperator::basis(3, 0).unwrap();
        let out = ch.apply(&rho).unwrap();
        let d = out.diagonal_entries();
        assert!((d[0] - (0.6 + 0.4 / 3.0)).abs() < 1e-12);
        assert!((d[1] - 0.4 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn basis_measurement_on_plus() {
        let m = Instrument::computational_basis(2);
        let p = m.distribution(&plus()).unwrap();
        assert!((p[0] - 0.5).abs() < 1e-12 && (p[1] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn projective_measurement_of_eigenstate() {
        let m = Instrument::computational_basis(2);
        let zero = DensityOperator::basis(2, 0).unwrap();
        let b = m.branch_apply(0, &zero).unwrap();
        assert!((b.prob - 1.0).abs() < 1e-15);
        assert!(trace_distance(&b.post_state.unwrap(), &zero).unwrap() < 1e-15);
        let b1 = m.branch_apply(1, &zero).unwrap();
        assert!(b1.prob.abs() < 1e-15);
        assert!(b1.post_state.is_none());
    }

    #[test]
    fn scaled_identity_povm() {
        let i2 = ComplexMatrix::identity(2);
        let instr = Instrument::new(
            vec!["a".into(), "b".into()],
            vec![
                KrausChannel::new(vec![i2.scale(0.3f64.sqrt())]).unwrap(),
                KrausChannel::new(vec![i2.scale(0.7f64.sqrt())]).unwrap(),
            ],
        )
        .unwrap();
        assert!(instr.validate().is_valid());
        let rho = plus();
        for (k, want) in [(0, 0.3), (1, 0.7)] {
            let b = instr.branch_apply(k, &rho).unwrap();
            assert!((b.prob - want).abs() < 1e-12);
            assert!(trace_distance(&b.post_state.unwrap(), &rho).unwrap() < 1e-12);
        }
        assert_eq!(instr.outcome_index("b").unwrap(), 1);
        assert!(instr.outcome_index("c").is_err());
        assert!(instr.branch_apply(2, &rho).is_err());
    }

    #[test]
    fn distribution_of_diagonal_state() {
        let m = Instrument::computational_basis(2);
        let rho = DensityOperator::diagonal(&[0.2, 0.8]).unwrap();
        let p = m.distribution(&rho).unwrap();
        assert!((p[0] - 0.2).abs() < 1e-12 && (p[1] - 0.8).abs() < 1e-12);
        let sub = DensityOperator::diagonal(&[0.1, 0.3]).unwrap();
        let p = m.distribution(&sub).unwrap();
        assert!((p.iter().sum::<f64>() - 0.4).abs() < 1e-12);
        assert!(m.distribution(&DensityOperator::maximally_mixed(3)).is_err());
    }

    #[test]
    fn choi_of_identity_is_bell_projector() {
        let choi = choi_state(&KrausChannel::identity(2)).unwrap();
        let phi = DensityOperator::from_pure(&PureState::max_entangled(2));
        assert!(choi.matrix().sub(phi.matrix()).max_abs() < 1e-15);
        assert_eq!(choi.dims(), &[2, 2]);
    }

    #[test]
    fn choi_of_pauli_x() {
        let choi = choi_state(&KrausChannel::from_unitary(&UnitaryAction::pauli_x())).unwrap();
        let a = 1.0 / 2f64.sqrt();
        let psi = PureState::new(vec![ZERO, c(a, 0.), c(a, 0.), ZERO]).unwrap();
        let expect = psi.projector();
        assert!(choi.matrix().sub(&expect).max_abs() < 1e-15);
        assert!((choi.purity() - 1.0).abs() < 1e-12);
        let v = UnitaryAction::pauli_x().choi_vector().unwrap();
        assert!(v.projector().sub(&expect).max_abs() < 1e-15);
    }

    #[test]
    fn choi_of_full_depolarizer() {
        let ch = KrausChannel::depolarizing(2, 1.0).unwrap();
        let choi = choi_state(&ch).unwrap();
        // Kraus-sum oracle on |Φ⁺⟩⟨Φ⁺| gives I/4.
        assert!(choi.matrix().sub(DensityOperator::maximally_mixed(4).matrix()).max_abs() < 1e-12);
    }

    #[test]
    fn choi_rejects_non_square() {
        let m = ComplexMatrix::from_real(1, 2, &[1.0, 0.0]).unwrap();
        let ch = KrausChannel::new(vec![m]).unwrap();
        assert!(choi_state(&ch).is_err());
    }

    #[test]
    fn validation_reports() {
        assert!(Instrument::computational_basis(3).validate().is_valid());

        let over = KrausChannel::new(vec![ComplexMatrix::identity(2).scale(1.1)]).unwrap();
        let report = over.validate();
        assert_eq!(report.failures.len(), 1);
        assert_eq!(report.failures[0].invariant, Invariant::Completeness);
        assert!((report.failures[0].residual - 0.21).abs() < 1e-12);

        let p0 = DensityOperator::basis(2, 0).unwrap().matrix().clone();
        let missing = Instrument::projective(vec![p0]).unwrap();
        let report = missing.validate();
        assert!(report
            .failures
            .iter()
            .any(|f| f.invariant == Invariant::Completeness));

        let bad_u = UnitaryAction::unchecked(ComplexMatrix::identity(2).scale(2.0)).unwrap();
        assert_eq!(bad_u.validate().failures[0].invariant, Invariant::Unitarity);
        assert!(UnitaryAction::new(ComplexMatrix::identity(2).scale(2.0)).is_err());
    }

    #[test]
    fn lifted_instrument_matches_reduced_distribution() {
        let m = Instrument::computational_basis(2);
        let rho_a = DensityOperator::diagonal(&[0.25, 0.75]).unwrap();
        let rho_e = plus();
        let joint = rho_a.tensor(&rho_e);
        let lifted = m.lift_left(2).distribution(&joint).unwrap();
        let direct = m.distribution(&rho_e).unwrap();
        for (a, b) in lifted.iter().zip(&direct) {
            assert!((a - b).abs() < 1e-12);
        }
    }
}
