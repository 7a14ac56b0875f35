//! JSON environment definitions. Matrices are flat row-major lists of
//! `[re, im]` pairs.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::channel::{Instrument, KrausChannel, UnitaryAction};
use crate::env::{ActionPayload, ActionSpec, EnvironmentModel, Mode};
use crate::error::{Error, Result};
use crate::linalg::{c, ComplexMatrix, DensityOperator};

type Entries = Vec<[f64; 2]>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ActionKind {
    Unitary,
    Instrument,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActionFile {
    pub id: String,
    pub kind: ActionKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub context: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub unitary: Option<Entries>,
    /// Branches, each a list of Kraus operators.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kraus: Option<Vec<Vec<Entries>>>,
    /// Outcome labels; defaults to "0", "1", ...
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub outcomes: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rewards: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnvironmentFile {
    pub name: String,
    pub dim: usize,
    pub mode: Mode,
    /// Subsystem dimensions of `H_E`; defaults to `[dim]`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub subsystems: Option<Vec<usize>>,
    pub initial_state: Entries,
    pub actions: Vec<ActionFile>,
    pub description_length: u32,
}

fn entries_of(m: &ComplexMatrix) -> Entries {
    m.entries().iter().map(|z| [z.re, z.im]).collect()
}

fn matrix_of(dim: usize, e: &Entries, what: &str) -> Result<ComplexMatrix> {
    if e.len() != dim * dim {
        return Err(Error::Config(format!(
            "{what}: expected {} entries for a {dim}x{dim} matrix, found {}",
            dim * dim,
            e.len()
        )));
    }
    let z: Vec<_> = e.iter().map(|p| c(p[0], p[1])).collect();
    ComplexMatrix::new(dim, dim, &z)
}

impl EnvironmentFile {
    pub fn from_model(env: &EnvironmentModel) -> Self {
        let actions = env
            .actions()
            .iter()
            .map(|a| {
                let context = Some(a.context.clone());
                match &a.payload {
                    ActionPayload::Unitary(u) => ActionFile {
                        id: a.id.clone(),
                        kind: ActionKind::Unitary,
                        context,
                        unitary: Some(entries_of(u.matrix())),
                        kraus: None,
                        outcomes: None,
                        rewards: None,
                    },
                    ActionPayload::Instrument { instrument, rewards } => ActionFile {
                        id: a.id.clone(),
                        kind: ActionKind::Instrument,
                        context,
                        unitary: None,
                        kraus: Some(
                            instrument
                                .branches()
                                .iter()
                                .map(|b| b.kraus().iter().map(entries_of).collect())
                                .collect(),
                        ),
                        outcomes: Some(instrument.labels().to_vec()),
                        rewards: Some(rewards.clone()),
                    },
                }
            })
            .collect();
        let dims = env.initial_state().dims();
        Self {
            name: env.name().to_string(),
            dim: env.dim(),
            mode: env.mode(),
            subsystems: (dims.len() > 1).then(|| dims.to_vec()),
            initial_state: entries_of(env.initial_state().matrix()),
            actions,
            description_length: env.description_length(),
        }
    }

    pub fn to_model(&self) -> Result<EnvironmentModel> {
        let config = |e: Error| Error::Config(format!("environment `{}`: {e}", self.name));
        let rho = matrix_of(self.dim, &self.initial_state, "initial_state")?;
        let dims = self.subsystems.clone().unwrap_or_else(|| vec![self.dim]);
        let initial = DensityOperator::with_dims(rho, dims).map_err(config)?;
        let mut actions = Vec::with_capacity(self.actions.len());
        for a in &self.actions {
            let what = format!("action `{}`", a.id);
            let spec = match a.kind {
                ActionKind::Unitary => {
                    let Some(u) = &a.unitary else {
                        return Err(Error::Config(format!("{what}: unitary action needs `unitary`")));
                    };
                    let u = UnitaryAction::new(matrix_of(self.dim, u, &what)?).map_err(config)?;
                    ActionSpec::unitary(a.id.clone(), u)
                }
                ActionKind::Instrument => {
                    let (Some(kraus), Some(rewards)) = (&a.kraus, &a.rewards) else {
                        return Err(Error::Config(format!(
                            "{what}: instrument action needs `kraus` and `rewards`"
                        )));
                    };
                    let mut branches = Vec::with_capacity(kraus.len());
                    for ops in kraus {
                        let ops = ops
                            .iter()
                            .map(|e| matrix_of(self.dim, e, &what))
                            .collect::<Result<Vec<_>>>()?;
                        branches.push(KrausChannel::new(ops).map_err(config)?);
                    }
                    let labels = a
                        .outcomes
                        .clone()
                        .unwrap_or_else(|| (0..kraus.len()).map(|k| k.to_string()).collect());
                    let instrument = Instrument::new(labels, branches).map_err(config)?;
                    ActionSpec::instrument(a.id.clone(), instrument, rewards.clone())
                }
            };
            actions.push(match &a.context {
                Some(ctx) => spec.with_context(ctx.clone()),
                None => spec,
            });
        }
        EnvironmentModel::new(
            self.name.clone(),
            self.mode,
            initial,
            actions,
            self.description_length,
        )
        .map_err(config)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Loads every `*.json` environment in `dir`, ordered by file name.
pub fn load_class_dir(dir: impl AsRef<Path>) -> Result<Vec<EnvironmentModel>> {
    let dir = dir.as_ref();
    let entries = fs::read_dir(dir)
        .map_err(|e| Error::Config(format!("cannot read class directory {}: {e}", dir.display())))?;
    let mut paths = Vec::new();
    for entry in entries {
        let path = entry?.path();
        if path.extension().is_some_and(|x| x == "json") {
            paths.push(path);
        }
    }
    paths.sort();
    if paths.is_empty() {
        return Err(Error::Config(format!(
            "class directory {} contains no .json environment files",
            dir.display()
        )));
    }
    paths
        .iter()
        .map(|p| {
            let text = fs::read_to_string(p)?;
            let file = EnvironmentFile::from_json(&text)
                .map_err(|e| Error::Config(format!("{}: {e}", p.display())))?;
            file.to_model()
        })
        .collect()
}
