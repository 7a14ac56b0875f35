use rayon::prelude::*;
use serde::Serialize;

use super::{csv_error, csv_writer, episode_seed, mean_se, truth_index, write_json, ExperimentConfig};
use crate::agent::{run_episode, AgentState, EpisodeResult, Policy};
use crate::error::Result;
use crate::harness::classes::{convergence_class, CONVERGENCE_TRUTH};
use crate::induction::{gap_statistics, mixture_init, GapStatistics};

/// Window of the trace-distance slope fit.
pub const SLOPE_WINDOW: (usize, usize) = (10, 500);

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergencePoint {
    pub t: usize,
    pub mean_divergence: f64,
    pub se_divergence: f64,
    pub mean_trace_distance: f64,
    pub se_trace_distance: f64,
    /// `(ℓ* ln 2 + ln(1 + g)) / t`
    pub bound: f64,
    /// Mean divergence above the bound by more than two standard errors.
    pub violation: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceReport {
    pub truth: String,
    pub hypotheses: Vec<String>,
    pub episodes: usize,
    pub cycles: usize,
    pub policy: Policy,
    pub seed: u64,
    pub gap: GapStatistics,
    pub mean_initial_divergence: f64,
    pub points: Vec<ConvergencePoint>,
    pub violations: usize,
    pub slope_window: (usize, usize),
    /// Least-squares slope of ln(mean trace distance) against ln t.
    pub trace_distance_slope: Option<f64>,
}

/// Least-squares slope of `ln y` against `ln t`, skipping non-positive `y`.
pub fn log_log_slope(points: &[(usize, f64)]) -> Option<f64> {
    let xy: Vec<(f64, f64)> = points
        .iter()
        .filter(|(t, y)| *t > 0 && *y > 0.0 && y.is_finite())
        .map(|&(t, y)| ((t as f64).ln(), y.ln()))
        .collect();
    if xy.len() < 2 {
        return None;
    }
    let n = xy.len() as f64;
    let mx = xy.iter().map(|p| p.0).sum::<f64>() / n;
    let my = xy.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = xy.iter().map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xy.iter().map(|(x, _)| (x - mx).powi(2)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

/// Runs `episodes` seeded episodes against the truth and compares the mean
/// posterior divergence with the `D₀/t` bound. Writes
/// `converge_episodes.csv`, `converge_summary.csv` and `converge_report.json`.
pub fn cmd_converge(cfg: &ExperimentConfig) -> Result<ConvergenceReport> {
    cfg.validate()?;
    let planning = cfg.planning()?;
    let class = cfg.class_or(convergence_class)?;
    let truth_name = cfg.truth.clone().unwrap_or_else(|| CONVERGENCE_TRUTH.to_string());
    let ti = truth_index(&class, &truth_name)?;
    let gap = gap_statistics(&class, ti)?;
    let truth = class[ti].clone();
    let names: Vec<String> = class.iter().map(|m| m.name().to_string()).collect();
    let mixture = mixture_init(class)?;
    let policy = cfg.policy.unwrap_or(Policy::UniformRandom);
    let out = cfg.output_dir()?;

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

    let mut w = csv_writer(&out.join("converge_episodes.csv"))?;
    let mut header = vec!["episode".to_string(), "t".to_string()];
    header.extend(names.iter().map(|n| format!("w_{n}")));
    header.extend(["divergence", "trace_distance", "bound_over_t"].map(String::from));
    w.write_record(&header).map_err(csv_error)?;
    for (i, ep) in episodes.iter().enumerate() {
        for s in &ep.steps {
            let mut row = vec![i.to_string(), s.t.to_string()];
            row.extend(s.weights.iter().map(f64::to_string));
            row.push(s.divergence.to_string());
            row.push(s.trace_distance.to_string());
            row.push(gap.bound_at(s.t).to_string());
            w.write_record(&row).map_err(csv_error)?;
        }
    }
    w.flush()?;

    let mut points = Vec::with_capacity(cfg.cycles);
    for t in 1..=cfg.cycles {
        let d: Vec<f64> = episodes.iter().map(|e| e.steps[t - 1].divergence).collect();
        let td: Vec<f64> = episodes.iter().map(|e| e.steps[t - 1].trace_distance).collect();
        let (md, sd) = mean_se(&d);
        let (mt, st) = mean_se(&td);
        let bound = gap.bound_at(t);
        points.push(ConvergencePoint {
            t,
            mean_divergence: md,
            se_divergence: sd,
            mean_trace_distance: mt,
            se_trace_distance: st,
            bound,
            violation: !md.is_finite() || md > bound + 2.0 * sd,
        });
    }
    let mut w = csv_writer(&out.join("converge_summary.csv"))?;
    w.write_record([
        "t",
        "mean_divergence",
        "se_divergence",
        "mean_trace_distance",
        "se_trace_distance",
        "bound_over_t",
        "violation",
    ])
    .map_err(csv_error)?;
    for p in &points {
        w.write_record([
            p.t.to_string(),
            p.mean_divergence.to_string(),
            p.se_divergence.to_string(),
            p.mean_trace_distance.to_string(),
            p.se_trace_distance.to_string(),
            p.bound.to_string(),
            p.violation.to_string(),
        ])
        .map_err(csv_error)?;
    }
    w.flush()?;

    let window = (SLOPE_WINDOW.0, SLOPE_WINDOW.1.min(cfg.cycles));
    let fit: Vec<(usize, f64)> = points
        .iter()
        .filter(|p| p.t >= window.0 && p.t <= window.1)
        .map(|p| (p.t, p.mean_trace_distance))
        .collect();
    let d0: Vec<f64> = episodes.iter().map(|e| e.initial_divergence).collect();
    let report = ConvergenceReport {
        truth: truth_name,
        hypotheses: names,
        episodes: cfg.episodes,
        cycles: cfg.cycles,
        policy,
        seed: cfg.seed,
        gap,
        mean_initial_divergence: mean_se(&d0).0,
        violations: points.iter().filter(|p| p.violation).count(),
        points,
        slope_window: window,
        trace_distance_slope: log_log_slope(&fit),
    };
    write_json(&out.join("converge_report.json"), &report)?;
    Ok(report)
}
