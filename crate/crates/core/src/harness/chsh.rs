use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::{csv_error, csv_writer, episode_seed, mean_se, truth_index, write_json, ExperimentConfig};
use crate::agent::{run_episode, AgentState, EpisodeResult, Policy};
use crate::env::{best_lhv_win_rate, env_step, CHSH_ACTIONS};
use crate::error::{Error, Result};
use crate::harness::classes::{chsh_class, CHSH_TRUTH};
use crate::induction::mixture_init;

/// Rounds of the direct win-rate estimate.
pub const WIN_RATE_ROUNDS: usize = 10_000;
/// Posterior weight regarded as having identified the quantum hypothesis.
pub const IDENTIFIED: f64 = 0.99;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChshReport {
    pub truth: String,
    pub hypotheses: Vec<String>,
    pub episodes: usize,
    pub cycles: usize,
    pub policy: Policy,
    pub seed: u64,
    /// Exact win probability of the truth averaged over the four settings.
    pub born_win_rate: f64,
    /// Win rate over `WIN_RATE_ROUNDS` rounds with uniformly random settings.
    pub sampled_win_rate: f64,
    pub sampled_rounds: usize,
    /// Mean reward per round over all agent episodes.
    pub mean_reward: f64,
    pub best_lhv_win_rate: f64,
    /// Final posterior weights averaged over episodes, in class order.
    pub mean_final_weights: Vec<f64>,
    pub mean_final_truth_weight: f64,
    pub se_final_truth_weight: f64,
    pub min_final_truth_weight: f64,
    /// Fraction of episodes ending with truth weight ≥ 0.99.
    pub identified_fraction: f64,
}

/// Pits the quantum CHSH environment against its LHV rivals. Writes
/// `chsh_weights.csv` (per-t mean weights and reward) and `chsh_report.json`.
pub fn cmd_chsh(cfg: &ExperimentConfig) -> Result<ChshReport> {
    cfg.validate()?;
    let planning = cfg.planning()?;
    let class = cfg.class_or(chsh_class)?;
    let truth_name = cfg.truth.clone().unwrap_or_else(|| CHSH_TRUTH.to_string());
    let ti = truth_index(&class, &truth_name)?;
    if class.len() < 2 {
        return Err(Error::Config("the CHSH class needs at least one rival hypothesis".into()));
    }
    let truth = class[ti].clone();
    for id in CHSH_ACTIONS {
        truth
            .action(id)
            .map_err(|_| Error::Config(format!("truth `{truth_name}` lacks CHSH action `{id}`")))?;
    }
    let names: Vec<String> = class.iter().map(|m| m.name().to_string()).collect();
    let mixture = mixture_init(class)?;
    let policy = cfg.policy.unwrap_or(Policy::UniformRandom);
    let out = cfg.output_dir()?;

    let mut born = 0.0;
    for id in CHSH_ACTIONS {
        let spec = truth.action(id)?;
        let p = spec.instrument_ref().expect("checked").distribution(truth.initial_state())?;
        born += p.iter().enumerate().map(|(k, pk)| pk * spec.reward(Some(k))).sum::<f64>() / 4.0;
    }

    let mut rng = ChaCha8Rng::seed_from_u64(episode_seed(cfg.seed, cfg.episodes as u64));
    let mut state = truth.initial_state().clone();
    let mut wins = 0.0;
    for _ in 0..WIN_RATE_ROUNDS {
        let id = CHSH_ACTIONS[rng.random_range(0..4)];
        let (percept, next) = env_step(&truth, state, id, &mut rng)?;
        wins += percept.reward;
        state = next;
    }

    let episodes: Vec<EpisodeResult> = (0..cfg.episodes)
        .into_par_iter()
        .map(|i| {
            run_episode(
                &truth,
                AgentState::new(mixture.clone()),
                &planning,
                policy,
                cfg.cycles,
                episode_seed(cfg.seed, i as u64),
            )
        })
        .collect::<Result<_>>()?;

    let mut w = csv_writer(&out.join("chsh_weights.csv"))?;
    let mut header = vec!["t".to_string()];
    header.extend(names.iter().map(|n| format!("mean_w_{n}")));
    header.push("mean_reward".into());
    w.write_record(&header).map_err(csv_error)?;
    let n = episodes.len() as f64;
    for t in 0..cfg.cycles {
        let mut row = vec![(t + 1).to_string()];
        for h in 0..names.len() {
            row.push((episodes.iter().map(|e| e.steps[t].weights[h]).sum::<f64>() / n).to_string());
        }
        row.push((episodes.iter().map(|e| e.steps[t].reward).sum::<f64>() / n).to_string());
        w.write_record(&row).map_err(csv_error)?;
    }
    w.flush()?;

    let finals: Vec<&Vec<f64>> = episodes.iter().map(|e| &e.steps[cfg.cycles - 1].weights).collect();
    let mean_final_weights: Vec<f64> = (0..names.len())
        .map(|h| finals.iter().map(|w| w[h]).sum::<f64>() / n)
        .collect();
    let truth_final: Vec<f64> = finals.iter().map(|w| w[ti]).collect();
    let (mean_truth, se_truth) = mean_se(&truth_final);
    let rewards: f64 = episodes.iter().map(EpisodeResult::total_reward).sum();
    let report = ChshReport {
        truth: truth_name,
        hypotheses: names,
        episodes: cfg.episodes,
        cycles: cfg.cycles,
        policy,
        seed: cfg.seed,
        born_win_rate: born,
        sampled_win_rate: wins / WIN_RATE_ROUNDS as f64,
        sampled_rounds: WIN_RATE_ROUNDS,
        mean_reward: rewards / (n * cfg.cycles as f64),
        best_lhv_win_rate: best_lhv_win_rate(),
        mean_final_weights,
        mean_final_truth_weight: mean_truth,
        se_final_truth_weight: se_truth,
        min_final_truth_weight: truth_final.iter().copied().fold(f64::INFINITY, f64::min),
        identified_fraction: truth_final.iter().filter(|&&w| w >= IDENTIFIED).count() as f64 / n,
    };
    write_json(&out.join("chsh_report.json"), &report)?;
    Ok(report)
}
