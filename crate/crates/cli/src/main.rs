mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use contact_sysid::Error;

#[derive(Parser)]
#[command(name = "contact-sysid", version, about = "Ball contact-dynamics identification toolkit")]
struct Cli {
    /// Unified JSON config; flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Print run summaries to stderr.
    #[arg(short, long, global = true)]
    verbose: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate a drop or roll experiment and write a `t,value` CSV.
    Simulate(SimulateArgs),
    /// Fit contact parameters to recorded drop and roll trajectories.
    Identify(IdentifyArgs),
    /// Draw samples from one of the training-time samplers.
    Sample(SampleArgs),
    /// Score a state trace with the reward stack.
    RewardEval(RewardEvalArgs),
    /// Rebuild a failure histogram from a failure log.
    CurriculumReplay(ReplayArgs),
}

#[derive(Clone, Copy, ValueEnum)]
pub enum Experiment {
    Drop,
    Roll,
}

#[derive(Clone, Copy, ValueEnum)]
pub enum Preset {
    HardGround,
    Grass,
}

#[derive(Args)]
pub struct SimulateArgs {
    #[arg(long, value_enum)]
    experiment: Experiment,
    /// JSON file holding the five contact parameters.
    #[arg(long, conflicts_with = "preset", required_unless_present = "preset")]
    params: Option<PathBuf>,
    /// Use a built-in parameter set instead of --params.
    #[arg(long, value_enum)]
    preset: Option<Preset>,
    /// Release height for drops, m.
    #[arg(long)]
    h0: Option<f64>,
    /// Launch speed for rolls, m/s.
    #[arg(long)]
    v0: Option<f64>,
    #[arg(long, default_value_t = 21)]
    samples: usize,
    /// Overrides the sampling interval, s.
    #[arg(long)]
    dt: Option<f64>,
    /// Number of noisy replicas; writes `<stem>_rep<i>.csv` plus `<stem>_mean.csv`.
    #[arg(long)]
    repeats: Option<usize>,
    /// Standard deviation of additive measurement noise, m.
    #[arg(long, default_value_t = 0.0)]
    noise: f64,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
pub struct IdentifyArgs {
    #[arg(long)]
    drop: PathBuf,
    #[arg(long)]
    roll: PathBuf,
    /// Release height; defaults to the first drop sample.
    #[arg(long)]
    h0: Option<f64>,
    /// Launch speed of the roll recording, m/s.
    #[arg(long)]
    v0: f64,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    tolerance: Option<f64>,
    #[arg(long)]
    max_generations: Option<usize>,
    #[arg(long)]
    population_size: Option<usize>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
pub enum Sampler {
    Dr,
    Noise,
    Placement,
    Goal,
    Curriculum,
    Surface,
}

#[derive(Args)]
pub struct SampleArgs {
    #[arg(long, value_enum)]
    which: Sampler,
    #[arg(short, long)]
    n: usize,
    /// Failure histogram CSV for the curriculum sampler.
    #[arg(long)]
    histogram: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
pub enum StageArg {
    #[value(name = "I", alias = "1")]
    I,
    #[value(name = "II", alias = "2")]
    II,
}

#[derive(Clone, Copy, ValueEnum)]
pub enum LegArg {
    Left,
    Right,
}

#[derive(Args)]
pub struct RewardEvalArgs {
    #[arg(long)]
    trace: PathBuf,
    #[arg(long, value_enum)]
    stage: StageArg,
    #[arg(long, value_enum)]
    leg: Option<LegArg>,
    /// Target direction as `x,y,z`.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    target: Option<Vec<f64>>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
pub struct ReplayArgs {
    /// CSV with `motion,phase` rows, one per recorded failure.
    #[arg(long)]
    failures: PathBuf,
    /// Starting histogram; defaults to an empty one sized by the config.
    #[arg(long)]
    histogram: Option<PathBuf>,
    #[arg(long)]
    decay: Option<f64>,
    /// Also write the smoothed cell probabilities.
    #[arg(long)]
    probabilities: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
}

fn exit_code(err: &Error) -> u8 {
    match err {
        Error::InvalidInput(_)
        | Error::InvalidState(_)
        | Error::UndefinedMetric(_)
        | Error::Parse(_) => 2,
        Error::Numerical(_) => 3,
        Error::Io(_) => 4,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = config::RunConfig::load(cli.config.as_deref()).and_then(|cfg| {
        let ctx = commands::Context {
            cfg,
            verbose: cli.verbose,
        };
        match cli.command {
            Command::Simulate(a) => commands::simulate(&ctx, a),
            Command::Identify(a) => commands::identify(&ctx, a),
            Command::Sample(a) => commands::sample(&ctx, a),
            Command::RewardEval(a) => commands::reward_eval(&ctx, a),
            Command::CurriculumReplay(a) => commands::curriculum_replay(&ctx, a),
        }
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes_follow_error_class() {
        assert_eq!(exit_code(&Error::InvalidInput(String::new())), 2);
        assert_eq!(exit_code(&Error::Parse(String::new())), 2);
        assert_eq!(exit_code(&Error::Numerical(String::new())), 3);
        assert_eq!(exit_code(&Error::Io(std::io::Error::other("x"))), 4);
    }
}
