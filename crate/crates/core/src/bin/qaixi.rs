use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use qaixi::agent::Policy;
use qaixi::harness::{run_experiment, write_builtin_classes, ExperimentConfig, ExperimentKind};
use qaixi::Error;
use serde_json::Value;

#[derive(Parser)]
#[command(name = "qaixi", version, about = "Quantum AIXI experiments on finite environment classes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Posterior divergence against the D0/t bound over seeded episodes.
    Converge(Common),
    /// Quantum CHSH environment against local hidden-variable rivals.
    Chsh(Common),
    /// Kochen-Specker colouring check and a contextual trajectory.
    Ks {
        #[command(flatten)]
        common: Common,
        /// Projector set JSON ({dim, vectors, contexts}); defaults to the 18-vector set.
        #[arg(long)]
        ks_set: Option<PathBuf>,
    },
    /// Expectimax value and chosen action, optionally after a history.
    Value {
        #[command(flatten)]
        common: Common,
        /// JSON history ({"cycles": [{"action", "outcome"}]} or a run.json).
        #[arg(long)]
        history: Option<PathBuf>,
    },
    /// One episode against the true environment, written as JSON.
    Run(Common),
    /// Write the built-in environment classes as JSON.
    WriteClasses {
        #[arg(long, default_value = "classes")]
        out: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum PolicyArg {
    Random,
    Qaixi,
}

#[derive(Args)]
struct Common {
    /// Directory of environment JSON files (default: built-in class).
    #[arg(long)]
    class_dir: Option<PathBuf>,
    /// Name of the true environment within the class.
    #[arg(long)]
    truth: Option<String>,
    #[arg(long, default_value_t = 200)]
    episodes: usize,
    #[arg(long, default_value_t = 500)]
    cycles: usize,
    #[arg(long, default_value_t = 3)]
    horizon: usize,
    #[arg(long, default_value_t = 0.9)]
    gamma: f64,
    /// Master seed; all randomness derives from it.
    #[arg(long)]
    seed: u64,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    #[arg(long, value_enum)]
    policy: Option<PolicyArg>,
}

impl Common {
    fn config(self, kind: ExperimentKind) -> ExperimentConfig {
        let mut cfg = ExperimentConfig::new(kind, self.seed, self.out);
        cfg.class_dir = self.class_dir;
        cfg.truth = self.truth;
        cfg.episodes = self.episodes;
        cfg.cycles = self.cycles;
        cfg.horizon = self.horizon;
        cfg.gamma = self.gamma;
        cfg.policy = self.policy.map(|p| match p {
            PolicyArg::Random => Policy::UniformRandom,
            PolicyArg::Qaixi => Policy::Qaixi,
        });
        cfg
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Config(_) | Error::Argument(_) | Error::Io(_) | Error::Json(_) => 2,
        Error::Capacity(_) => 3,
        Error::ImpossibleObservation { .. } => 1,
    }
}

fn print_summary(kind: ExperimentKind, r: &Value) {
    match kind {
        ExperimentKind::Converge => {
            println!("truth: {}", r["truth"]);
            println!("g: {}, bound numerator: {}", r["gap"]["g"], r["gap"]["d0_bound"]);
            println!("bound violations: {}", r["violations"]);
            println!("trace-distance log-log slope: {}", r["trace_distance_slope"]);
        }
        ExperimentKind::Chsh => {
            println!("born win rate: {}", r["born_win_rate"]);
            println!("sampled win rate: {} over {} rounds", r["sampled_win_rate"], r["sampled_rounds"]);
            println!("best LHV win rate: {}", r["best_lhv_win_rate"]);
            println!("mean final truth weight: {}", r["mean_final_truth_weight"]);
        }
        ExperimentKind::Ks => {
            println!("contexts: {}", r["contexts"]);
            println!("colourable: {}, assignments: {}", r["colourable"], r["valid_assignments"]);
            if let Some(d) = r.get("context_dependence").filter(|d| !d.is_null()) {
                println!(
                    "P{} in ctx{}: {} after ctx{}, {} with ctx{} in between",
                    d["projector"], d["second"], d["direct"], d["first"], d["after_intervening"], d["intervening"]
                );
            }
        }
        ExperimentKind::Value => {
            println!("value: {}", r["value"]);
            println!("action: {}", r["action"]);
        }
        ExperimentKind::Run => {
            println!("truth: {}", r["truth"]);
            println!("total reward: {}", r["total_reward"]);
        }
    }
}

fn main() -> ExitCode {
    let cfg = match Cli::parse().command {
        Command::Converge(c) => c.config(ExperimentKind::Converge),
        Command::Chsh(c) => c.config(ExperimentKind::Chsh),
        Command::Ks { common, ks_set } => {
            let mut cfg = common.config(ExperimentKind::Ks);
            cfg.ks_set = ks_set;
            cfg
        }
        Command::Value { common, history } => {
            let mut cfg = common.config(ExperimentKind::Value);
            cfg.history = history;
            cfg
        }
        Command::Run(c) => c.config(ExperimentKind::Run),
        Command::WriteClasses { out } => {
            return match write_builtin_classes(&out) {
                Ok(()) => ExitCode::SUCCESS,
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::from(exit_code(&e))
                }
            };
        }
    };
    match run_experiment(&cfg) {
        Ok(report) => {
            print_summary(cfg.kind, &report);
            println!("outputs written to {}", cfg.out.display());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
