//! The CHSH game as an environment: a two-qubit Bell pair re-prepared
//! every round, four setting-pair actions, and local hidden-variable
//! (LHV) models over the same interface.

use std::f64::consts::FRAC_1_SQRT_2;

use crate::channel::{Instrument, KrausChannel};
use crate::env::{make_classical_env, ActionSpec, ClassicalSpec, EnvironmentModel, Mode};
use crate::error::{arg, Result};
use crate::linalg::{c, ComplexMatrix, DensityOperator, PureState, ZERO};

/// Action ids in declaration order; index `2x + y`.
pub const CHSH_ACTIONS: [&str; 4] = ["x0y0", "x0y1", "x1y0", "x1y1"];
/// Outcome labels; index `2·[o_A = −1] + [o_B = −1]`.
pub const CHSH_OUTCOMES: [&str; 4] = ["++", "+-", "-+", "--"];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BellState {
    /// `(|01⟩ − |10⟩)/√2`
    PsiMinus,
    /// `(|00⟩ + |11⟩)/√2`
    PhiPlus,
}

impl BellState {
    pub fn state(self) -> PureState {
        let a = c(FRAC_1_SQRT_2, 0.0);
        let amps = match self {
            BellState::PsiMinus => vec![ZERO, a, -a, ZERO],
            BellState::PhiPlus => vec![a, ZERO, ZERO, a],
        };
        PureState::new(amps).expect("unit vector")
    }
}

/// Measurement directions in the X–Z plane: the observable for angle `θ`
/// is `cos θ Z + sin θ X`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChshAngles {
    pub a0: f64,
    pub a1: f64,
    pub b0: f64,
    pub b1: f64,
}

impl ChshAngles {
    /// Angles reaching `cos²(π/8)` on every setting pair for `bell`.
    pub fn optimal(bell: BellState) -> Self {
        use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};
        // ⟨A⊗B⟩ = cos(θ_A − θ_B) for Φ⁺ and −cos(θ_A − θ_B) for Ψ⁻.
        let shift = match bell {
            BellState::PhiPlus => 0.0,
            BellState::PsiMinus => PI,
        };
        Self {
            a0: 0.0,
            a1: FRAC_PI_2,
            b0: FRAC_PI_4 + shift,
            b1: -FRAC_PI_4 + shift,
        }
    }

    fn alice(&self, x: usize) -> f64 {
        if x == 0 {
            self.a0
        } else {
            self.a1
        }
    }

    fn bob(&self, y: usize) -> f64 {
        if y == 0 {
            self.b0
        } else {
            self.b1
        }
    }
}

/// `[P₊, P₋]` for the observable at angle `θ`.
fn qubit_projectors(theta: f64) -> [ComplexMatrix; 2] {
    let (s, co) = (theta / 2.0).sin_cos();
    let plus = [c(co, 0.0), c(s, 0.0)];
    let minus = [c(-s, 0.0), c(co, 0.0)];
    [
        ComplexMatrix::outer(&plus, &plus),
        ComplexMatrix::outer(&minus, &minus),
    ]
}

/// Whether outcomes (`±1` each) win on settings `(x, y)`:
/// `o_A · o_B = (−1)^{xy}`.
pub fn chsh_win(x: usize, y: usize, oa: i8, ob: i8) -> bool {
    let target = if x * y == 1 { -1 } else { 1 };
    oa * ob == target
}

fn outcome_signs(k: usize) -> (i8, i8) {
    let sign = |bit: usize| if bit == 0 { 1 } else { -1 };
    (sign(k / 2), sign(k % 2))
}

fn rewards_for(x: usize, y: usize) -> Vec<f64> {
    (0..4)
        .map(|k| {
            let (oa, ob) = outcome_signs(k);
            if chsh_win(x, y, oa, ob) {
                1.0
            } else {
                0.0
            }
        })
        .collect()
}

/// Quantum CHSH environment: the Bell pair is prepared each round and
/// each action measures both qubits at the configured angles.
pub fn make_chsh_env(angles: ChshAngles, bell: BellState, bits: u32) -> Result<EnvironmentModel> {
    let mut actions = Vec::with_capacity(4);
    for x in 0..2 {
        for y in 0..2 {
            let pa = qubit_projectors(angles.alice(x));
            let pb = qubit_projectors(angles.bob(y));
            let mut branches = Vec::with_capacity(4);
            for k in 0..4 {
                branches.push(KrausChannel::new(vec![pa[k / 2].kron(&pb[k % 2])])?);
            }
            let instrument = Instrument::new(
                CHSH_OUTCOMES.iter().map(|s| s.to_string()).collect(),
                branches,
            )?;
            let id = CHSH_ACTIONS[2 * x + y];
            actions.push(
                ActionSpec::instrument(id, instrument, rewards_for(x, y)).with_context(format!(
                    "A(θ={:.6})⊗B(θ={:.6})",
                    angles.alice(x),
                    angles.bob(y)
                )),
            );
        }
    }
    let name = match bell {
        BellState::PsiMinus => "chsh-quantum",
        BellState::PhiPlus => "chsh-quantum-phi-plus",
    };
    EnvironmentModel::new(
        name,
        Mode::Episodic,
        DensityOperator::from_pure(&bell.state()).with_subsystems(vec![2, 2])?,
        actions,
        bits,
    )
}

/// A deterministic local strategy: fixed `±1` answers per setting.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct LocalStrategy {
    /// `true` means answer `−1`.
    pub alice: [bool; 2],
    pub bob: [bool; 2],
}

impl LocalStrategy {
    /// All 16 deterministic strategies.
    pub fn all() -> Vec<Self> {
        (0..16u8)
            .map(|m| Self {
                alice: [m & 1 != 0, m & 2 != 0],
                bob: [m & 4 != 0, m & 8 != 0],
            })
            .collect()
    }

    /// Outcome index produced on settings `(x, y)`.
    pub fn outcome(&self, x: usize, y: usize) -> usize {
        2 * usize::from(self.alice[x]) + usize::from(self.bob[y])
    }

    /// Win probability under uniformly random settings.
    pub fn win_rate(&self) -> f64 {
        let mut wins = 0;
        for x in 0..2 {
            for y in 0..2 {
                let (oa, ob) = outcome_signs(self.outcome(x, y));
                wins += usize::from(chsh_win(x, y, oa, ob));
            }
        }
        wins as f64 / 4.0
    }
}

/// Best CHSH win rate over all deterministic local strategies (shared
/// randomness only mixes these, so it cannot do better).
pub fn best_lhv_win_rate() -> f64 {
    LocalStrategy::all()
        .iter()
        .map(LocalStrategy::win_rate)
        .fold(0.0, f64::max)
}

/// LHV environment: a hidden strategy drawn from `mixture` each round.
pub fn make_lhv_env(
    name: impl Into<String>,
    mixture: &[(LocalStrategy, f64)],
    bits: u32,
) -> Result<EnvironmentModel> {
    let total: f64 = mixture.iter().map(|(_, w)| w).sum();
    if mixture.is_empty() || (total - 1.0).abs() > 1e-9 || mixture.iter().any(|(_, w)| *w < 0.0) {
        return arg("LHV mixture weights must be non-negative and sum to 1");
    }
    let mut dists = Vec::with_capacity(4);
    let mut rewards = Vec::with_capacity(4);
    for x in 0..2 {
        for y in 0..2 {
            let mut d = vec![0.0; 4];
            for (s, w) in mixture {
                d[s.outcome(x, y)] += w;
            }
            dists.push(d);
            rewards.push(rewards_for(x, y));
        }
    }
    let spec = ClassicalSpec::iid(name, &CHSH_ACTIONS, &dists, &rewards, bits);
    make_classical_env(&spec)
}
