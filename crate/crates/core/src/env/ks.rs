//! Kochen–Specker projector sets: the contextual measurement environment
//! and the exhaustive {0,1}-colouring check.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::channel::{Instrument, KrausChannel};
use crate::env::{ActionSpec, EnvironmentModel, Mode};
use crate::error::{arg, Error, Result};
use crate::linalg::{c, ComplexMatrix, DensityOperator, STATE_TOL};

/// Largest projector count accepted by the brute-force colouring search.
pub const MAX_BRUTE_FORCE_PROJECTORS: usize = 24;

/// A finite set of projectors and the contexts (resolutions of the
/// identity) they are grouped into.
#[derive(Debug, Clone, PartialEq)]
pub struct KsSet {
    dim: usize,
    projectors: Vec<ComplexMatrix>,
    contexts: Vec<Vec<usize>>,
    /// Defining vectors when every projector has rank one.
    vectors: Option<Vec<Vec<Complex64>>>,
}

#[derive(Serialize, Deserialize)]
struct KsSetFile {
    dim: usize,
    /// Rank-one projectors given by (unnormalized) vectors of `[re, im]`.
    vectors: Vec<Vec<[f64; 2]>>,
    contexts: Vec<Vec<usize>>,
}

impl KsSet {
    /// Rank-one projectors onto the (normalized) `vectors`.
    pub fn from_vectors(
        dim: usize,
        vectors: &[Vec<Complex64>],
        contexts: Vec<Vec<usize>>,
    ) -> Result<Self> {
        let mut projectors = Vec::with_capacity(vectors.len());
        for (i, v) in vectors.iter().enumerate() {
            if v.len() != dim {
                return arg(format!("vector {i} has length {}, expected {dim}", v.len()));
            }
            let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            if !(norm > 0.0) {
                return arg(format!("vector {i} is zero"));
            }
            let u: Vec<Complex64> = v.iter().map(|z| z / norm).collect();
            projectors.push(ComplexMatrix::outer(&u, &u));
        }
        let mut set = Self::from_projectors(dim, projectors, contexts)?;
        set.vectors = Some(vectors.to_vec());
        Ok(set)
    }

    pub fn from_projectors(
        dim: usize,
        projectors: Vec<ComplexMatrix>,
        contexts: Vec<Vec<usize>>,
    ) -> Result<Self> {
        if projectors.iter().any(|p| p.rows() != dim || p.cols() != dim) {
            return arg(format!("every projector must be {dim}x{dim}"));
        }
        for (ci, ctx) in contexts.iter().enumerate() {
            if ctx.is_empty() {
                return arg(format!("context {ci} is empty"));
            }
            if let Some(bad) = ctx.iter().find(|&&i| i >= projectors.len()) {
                return arg(format!("context {ci} references unknown projector {bad}"));
            }
        }
        Ok(Self {
            dim,
            projectors,
            contexts,
            vectors: None,
        })
    }

    /// The 18-vector, 9-context set in dimension 4 where every vector lies
    /// in exactly two contexts.
    pub fn cabello18() -> Self {
        let raw: [[f64; 4]; 18] = [
            [0., 0., 0., 1.],
            [0., 0., 1., 0.],
            [1., 1., 0., 0.],
            [1., -1., 0., 0.],
            [0., 1., 0., 0.],
            [1., 0., 1., 0.],
            [1., 0., -1., 0.],
            [1., -1., 1., -1.],
            [1., -1., -1., 1.],
            [0., 0., 1., 1.],
            [1., 1., 1., 1.],
            [0., 1., 0., -1.],
            [1., 0., 0., 1.],
            [1., 0., 0., -1.],
            [0., 1., -1., 0.],
            [1., 1., -1., 1.],
            [1., 1., 1., -1.],
            [-1., 1., 1., 1.],
        ];
        let contexts = vec![
            vec![0, 1, 2, 3],
            vec![0, 4, 5, 6],
            vec![7, 8, 2, 9],
            vec![7, 10, 6, 11],
            vec![1, 4, 12, 13],
            vec![8, 10, 13, 14],
            vec![15, 16, 3, 9],
            vec![15, 17, 5, 11],
            vec![16, 17, 12, 14],
        ];
        let vectors: Vec<Vec<Complex64>> = raw
            .iter()
            .map(|v| v.iter().map(|&x| c(x, 0.0)).collect())
            .collect();
        Self::from_vectors(4, &vectors, contexts).expect("shipped set is well formed")
    }

    /// Parses `{dim, vectors: [[[re, im], ...], ...], contexts: [[i, ...], ...]}`.
    pub fn from_json(text: &str) -> Result<Self> {
        let f: KsSetFile = serde_json::from_str(text)?;
        let vectors: Vec<Vec<Complex64>> = f
            .vectors
            .iter()
            .map(|v| v.iter().map(|z| c(z[0], z[1])).collect())
            .collect();
        Self::from_vectors(f.dim, &vectors, f.contexts)
    }

    /// Serializes a vector-defined set; sets built from projector
    /// matrices have no vector form.
    pub fn to_json(&self) -> Result<String> {
        let Some(vectors) = &self.vectors else {
            return arg("only vector-defined sets can be written as JSON");
        };
        let file = KsSetFile {
            dim: self.dim,
            vectors: vectors
                .iter()
                .map(|v| v.iter().map(|z| [z.re, z.im]).collect())
                .collect(),
            contexts: self.contexts.clone(),
        };
        Ok(serde_json::to_string_pretty(&file)?)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn projectors(&self) -> &[ComplexMatrix] {
        &self.projectors
    }

    pub fn contexts(&self) -> &[Vec<usize>] {
        &self.contexts
    }

    /// `(max ‖P_i P_j‖ over distinct pairs, ‖Σ P_i − I‖_max)` for one context.
    pub fn context_residuals(&self, ci: usize) -> (f64, f64) {
        let ctx = &self.contexts[ci];
        let mut orth: f64 = 0.0;
        let mut sum = ComplexMatrix::zeros(self.dim, self.dim);
        for (a, &i) in ctx.iter().enumerate() {
            sum = sum.add(&self.projectors[i]);
            for &j in &ctx[a + 1..] {
                orth = orth.max(self.projectors[i].mul(&self.projectors[j]).max_abs());
            }
        }
        let resolution = sum.sub(&ComplexMatrix::identity(self.dim)).max_abs();
        (orth, resolution)
    }
}

/// Environment whose actions measure one context each. The register
/// persists, so repeating a context repeats its outcome.
pub fn make_ks_env(set: &KsSet, bits: u32) -> Result<EnvironmentModel> {
    let mut actions = Vec::with_capacity(set.contexts.len());
    for (ci, ctx) in set.contexts.iter().enumerate() {
        let (orth, resolution) = set.context_residuals(ci);
        if orth > STATE_TOL || resolution > STATE_TOL {
            return arg(format!(
                "context {ci} is not a resolution of the identity (orthogonality {orth:.3e}, completeness {resolution:.3e})"
            ));
        }
        let branches = ctx
            .iter()
            .map(|&i| KrausChannel::new(vec![set.projectors[i].clone()]))
            .collect::<Result<Vec<_>>>()?;
        let labels = ctx.iter().map(|i| format!("P{i}")).collect();
        let instrument = Instrument::new(labels, branches)?;
        let members: Vec<String> = ctx.iter().map(usize::to_string).collect();
        actions.push(
            ActionSpec::instrument(format!("ctx{ci}"), instrument, vec![0.0; ctx.len()])
                .with_context(format!("ctx{ci}:{{{}}}", members.join(","))),
        );
    }
    EnvironmentModel::new(
        "ks-contextual",
        Mode::Persistent,
        DensityOperator::maximally_mixed(set.dim),
        actions,
        bits,
    )
}

/// Result of the exhaustive colouring search.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Colourability {
    pub colourable: bool,
    /// Number of {0,1} assignments with exactly one 1 per context.
    pub valid_assignments: u64,
    /// First valid assignment found, if any.
    pub witness: Option<Vec<bool>>,
}

/// Tries every {0,1} assignment to the projectors.
pub fn ks_uncolourability_check(set: &KsSet) -> Result<Colourability> {
    let n = set.projectors.len();
    if n > MAX_BRUTE_FORCE_PROJECTORS {
        return Err(Error::Capacity(format!(
            "{n} projectors exceed the brute-force limit of {MAX_BRUTE_FORCE_PROJECTORS}"
        )));
    }
    let masks: Vec<u32> = set
        .contexts
        .iter()
        .map(|ctx| ctx.iter().fold(0u32, |m, &i| m | (1 << i)))
        .collect();
    let mut count = 0u64;
    let mut witness = None;
    for assignment in 0u32..(1u32 << n) {
        if masks.iter().all(|&m| (assignment & m).count_ones() == 1) {
            count += 1;
            if witness.is_none() {
                witness = Some((0..n).map(|i| assignment & (1 << i) != 0).collect());
            }
        }
    }
    Ok(Colourability {
        colourable: count > 0,
        valid_assignments: count,
        witness,
    })
}

/// Click probability of `outcome` under `action` after the listed
/// contexts have been measured non-selectively on a persistent register.
pub fn sequential_click_probability(
    env: &EnvironmentModel,
    state: &DensityOperator,
    preceding: &[&str],
    action: &str,
    outcome: usize,
) -> Result<f64> {
    let mut rho = state.clone();
    for id in preceding {
        let instr = env
            .action(id)?
            .instrument_ref()
            .ok_or_else(|| Error::Argument(format!("action `{id}` has no outcomes")))?;
        rho = instr.total_channel().apply(&rho)?;
    }
    let instr = env
        .action(action)?
        .instrument_ref()
        .ok_or_else(|| Error::Argument(format!("action `{action}` has no outcomes")))?;
    Ok(instr.distribution(&rho)?[outcome])
}

/// A projector shared by two contexts whose click statistics in the
/// second context depend on which context was measured before it.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ContextDependence {
    pub projector: usize,
    /// Context in which the register is prepared (outcome `projector`).
    pub first: usize,
    /// Context containing `projector` measured last.
    pub second: usize,
    /// Context measured in between, not containing `projector`.
    pub intervening: usize,
    /// Pr(projector clicks in `second`) measured right after `first`.
    pub direct: f64,
    /// The same probability with `intervening` measured in between.
    pub after_intervening: f64,
}

/// Searches the set for a shared projector whose statistics change when an
/// incompatible context is measured in between. The register starts in the
/// range of the projector (as after it clicked in its first context).
pub fn find_context_dependence(set: &KsSet) -> Result<Option<ContextDependence>> {
    let env = make_ks_env(set, 0)?;
    for (p, proj) in set.projectors.iter().enumerate() {
        let owners: Vec<usize> = (0..set.contexts.len())
            .filter(|&ci| set.contexts[ci].contains(&p))
            .collect();
        if owners.len() < 2 {
            continue;
        }
        let rank = proj.trace().re;
        let state = DensityOperator::new(proj.scale(1.0 / rank))?;
        let (first, second) = (owners[0], owners[1]);
        let second_id = format!("ctx{second}");
        let k = set.contexts[second].iter().position(|&i| i == p).expect("owner");
        let first_id = format!("ctx{first}");
        let direct = sequential_click_probability(&env, &state, &[&first_id], &second_id, k)?;
        for ci in 0..set.contexts.len() {
            if set.contexts[ci].contains(&p) {
                continue;
            }
            let mid = format!("ctx{ci}");
            let after =
                sequential_click_probability(&env, &state, &[&first_id, &mid], &second_id, k)?;
            if (after - direct).abs() > STATE_TOL {
                return Ok(Some(ContextDependence {
                    projector: p,
                    first,
                    second,
                    intervening: ci,
                    direct,
                    after_intervening: after,
                }));
            }
        }
    }
    Ok(None)
}
