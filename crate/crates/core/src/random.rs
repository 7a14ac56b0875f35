//! Random states, unitaries, channels and instruments for property tests
//! and the validity experiments.
//!
//! Channels and instruments come from Stinespring dilations: a Haar
//! unitary on system ⊗ ancilla, ancilla prepared in `|0⟩`, then read out
//! (instrument) or traced out (channel). Both are CPTP by construction.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::channel::{Instrument, KrausChannel};
use crate::linalg::{c, ComplexMatrix, DensityOperator, PureState, ZERO};

fn gaussian(rng: &mut impl Rng) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    c(re, im)
}

/// Matrix of i.i.d. standard complex Gaussians.
pub fn ginibre(rows: usize, cols: usize, rng: &mut impl Rng) -> ComplexMatrix {
    let entries: Vec<Complex64> = (0..rows * cols).map(|_| gaussian(rng)).collect();
    ComplexMatrix::from_dmatrix(DMatrix::from_row_slice(rows, cols, &entries))
}

/// Haar-distributed unitary (Gram–Schmidt on a Ginibre matrix).
pub fn haar_unitary(d: usize, rng: &mut impl Rng) -> ComplexMatrix {
    let g = ginibre(d, d, rng).into_dmatrix();
    let mut q = DMatrix::from_element(d, d, ZERO);
    for j in 0..d {
        let mut v = g.column(j).clone_owned();
        for k in 0..j {
            let qk = q.column(k).clone_owned();
            let proj = (qk.adjoint() * &v)[(0, 0)];
            v -= qk * proj;
        }
        let norm = v.norm();
        q.set_column(j, &(v / c(norm, 0.0)));
    }
    ComplexMatrix::from_dmatrix(q)
}

/// Random Hermitian matrix `(G + G†)/2`.
pub fn random_hermitian(d: usize, rng: &mut impl Rng) -> ComplexMatrix {
    ginibre(d, d, rng).hermitian_part()
}

/// Full-rank random density operator `GG†/Tr(GG†)`.
pub fn random_density(d: usize, rng: &mut impl Rng) -> DensityOperator {
    let g = ginibre(d, d, rng);
    let w = g.mul(&g.adjoint());
    let tr = w.trace().re;
    DensityOperator::new(w.scale(1.0 / tr)).expect("Ginibre state is valid")
}

/// Random density operator of the given rank.
pub fn random_density_rank(d: usize, rank: usize, rng: &mut impl Rng) -> DensityOperator {
    let g = ginibre(d, rank.clamp(1, d), rng);
    let w = g.mul(&g.adjoint());
    let tr = w.trace().re;
    DensityOperator::new(w.scale(1.0 / tr)).expect("Ginibre state is valid")
}

pub fn random_pure(d: usize, rng: &mut impl Rng) -> PureState {
    PureState::normalize((0..d).map(|_| gaussian(rng)).collect()).expect("non-zero vector")
}

/// Kraus operators `(I ⊗ ⟨k|) U (I ⊗ |0⟩)` for each ancilla basis state `k`.
fn stinespring_kraus(d: usize, ancilla: usize, rng: &mut impl Rng) -> Vec<ComplexMatrix> {
    let u = haar_unitary(d * ancilla, rng).into_dmatrix();
    (0..ancilla)
        .map(|k| {
            let mut m = DMatrix::from_element(d, d, ZERO);
            for i in 0..d {
                for j in 0..d {
                    m[(i, j)] = u[(i * ancilla + k, j * ancilla)];
                }
            }
            ComplexMatrix::from_dmatrix(m)
        })
        .collect()
}

/// Random CPTP channel on `ℂ^d` with `ancilla` Kraus operators.
pub fn random_channel(d: usize, ancilla: usize, rng: &mut impl Rng) -> KrausChannel {
    KrausChannel::new(stinespring_kraus(d, ancilla, rng)).expect("Stinespring Kraus list is valid")
}

/// Random instrument with `outcomes` branches, each holding
/// `kraus_per_outcome` Kraus operators from one Stinespring dilation.
pub fn random_instrument(
    d: usize,
    outcomes: usize,
    kraus_per_outcome: usize,
    rng: &mut impl Rng,
) -> Instrument {
    let kraus = stinespring_kraus(d, outcomes * kraus_per_outcome, rng);
    let branches = kraus
        .chunks(kraus_per_outcome)
        .map(|ops| KrausChannel::new(ops.to_vec()).expect("valid Kraus list"))
        .collect();
    Instrument::new((0..outcomes).map(|k| k.to_string()).collect(), branches)
        .expect("valid instrument")
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn haar_unitary_is_unitary() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for d in [1, 2, 3, 8] {
            assert!(haar_unitary(d, &mut rng).isometry_residual() < 1e-12);
        }
    }

    #[test]
    fn random_states_are_valid() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let rho = random_density(4, &mut rng);
        assert!((rho.trace() - 1.0).abs() < 1e-12);
        assert!(rho.eigenvalues()[0] > 0.0);
        let low = random_density_rank(4, 1, &mut rng);
        assert!((low.purity() - 1.0).abs() < 1e-9);
    }
}
