use std::fs::{self, File};
use std::io::BufWriter;
use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use rtg_core::bbm::BonusConfig;
use rtg_core::config::{builtin_scenario, GameConfig, ScenarioName};
use rtg_core::error::{ConfigError, Error, PolicyError, ReplayError};
use rtg_core::harness::{
    bench_with, read_replay, render_replay, run_episode, run_eval, write_beliefs_csv, write_bonuses_csv, write_replay,
    Assignment, EpisodeOptions, TeamPools,
};
use rtg_core::policy::{PolicySpec, RoleConditionedPolicySet};
use rtg_core::Team;

/// Rescue the General: simulate, evaluate, replay and benchmark games.
#[derive(Debug, Parser)]
#[command(name = "rtg", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Play one game and report its outcome.
    Play(PlayArgs),
    /// Play many games over policy pools and report aggregate scores.
    Eval(EvalArgs),
    /// Write one PPM frame per state of a replay.
    Render {
        #[arg(long)]
        replay: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Measure environment throughput.
    Bench {
        #[command(flatten)]
        config: ConfigArgs,
        #[arg(long, default_value_t = 100_000)]
        steps: u64,
        #[arg(long, default_value_t = 1)]
        threads: usize,
        /// Run workers one after another instead of on the thread pool.
        #[arg(long)]
        sequential: bool,
        #[arg(long, default_value_t = 1)]
        repeats: usize,
    },
    /// Check or print a configuration.
    Config {
        #[command(subcommand)]
        action: ConfigAction,
    },
}

#[derive(Debug, Subcommand)]
enum ConfigAction {
    Validate(ConfigArgs),
    /// Print the canonical JSON form.
    Print(ConfigArgs),
}

#[derive(Debug, Args)]
struct ConfigArgs {
    /// JSON configuration file.
    #[arg(long, conflicts_with = "scenario")]
    config: Option<PathBuf>,
    /// Built-in scenario name.
    #[arg(long)]
    scenario: Option<String>,
    /// `key=value` override, applied after loading. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

impl ConfigArgs {
    fn load(&self) -> anyhow::Result<GameConfig> {
        let base = match (&self.config, &self.scenario) {
            (Some(path), _) => {
                let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
                GameConfig::from_json(&text)?
            }
            (None, Some(name)) => builtin_scenario(name.parse::<ScenarioName>()?),
            (None, None) => builtin_scenario(ScenarioName::Rescue),
        };
        let config = base.with_overrides(&self.set)?;
        config.validate()?;
        Ok(config)
    }
}

#[derive(Debug, Args)]
struct BonusArgs {
    /// Weight of the deception bonus for red players; 0 plays on extrinsic reward alone.
    #[arg(long, default_value_t = 0.5)]
    alpha_red: f64,
}

impl BonusArgs {
    fn bonus(&self) -> anyhow::Result<Option<BonusConfig>> {
        if self.alpha_red == 0.0 {
            return Ok(None);
        }
        let cfg = BonusConfig {
            alpha: [self.alpha_red, 0.0, 0.0],
            ..BonusConfig::default()
        };
        cfg.validate().map_err(Error::Usage)?;
        Ok(Some(cfg))
    }
}

#[derive(Debug, Args)]
struct PlayArgs {
    #[command(flatten)]
    config: ConfigArgs,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = "hunter:0.05")]
    red: PolicySpec,
    #[arg(long, default_value = "harvester:0.05")]
    green: PolicySpec,
    #[arg(long, default_value = "rescuer:0.05")]
    blue: PolicySpec,
    #[command(flatten)]
    bonus: BonusArgs,
    /// Write the game to a `.rtgr` replay file.
    #[arg(long)]
    replay: Option<PathBuf>,
    /// Per-step, per-player rewards and bonuses.
    #[arg(long)]
    csv: Option<PathBuf>,
    /// Per-step belief of every observer about every subject.
    #[arg(long)]
    beliefs_csv: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct EvalArgs {
    #[command(flatten)]
    config: ConfigArgs,
    /// Games per pool entry.
    #[arg(long, default_value_t = 16)]
    games: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Comma-separated red policy pool.
    #[arg(long, value_delimiter = ',', default_value = "hunter:0.05")]
    red: Vec<PolicySpec>,
    #[arg(long, value_delimiter = ',', default_value = "harvester:0.05")]
    green: Vec<PolicySpec>,
    #[arg(long, value_delimiter = ',', default_value = "rescuer:0.05")]
    blue: Vec<PolicySpec>,
    #[command(flatten)]
    bonus: BonusArgs,
    /// Write the full report as JSON.
    #[arg(long)]
    json: Option<PathBuf>,
}

fn play(args: PlayArgs) -> anyhow::Result<()> {
    let config = Arc::new(args.config.load()?);
    let set = RoleConditionedPolicySet::new(args.red, args.green, args.blue);
    set.validate()?;
    let opts = EpisodeOptions {
        record_beliefs: args.beliefs_csv.is_some(),
        bonus: args.bonus.bonus()?,
        ..EpisodeOptions::default()
    };
    let rec = run_episode(config, &Assignment::ByRole(set), args.seed, &opts)?;
    if let Some(path) = &args.replay {
        fs::write(path, write_replay(&rec.replay)).with_context(|| format!("writing {}", path.display()))?;
    }
    if let Some(path) = &args.csv {
        let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
        write_bonuses_csv(&rec, BufWriter::new(file))?;
    }
    if let Some(path) = &args.beliefs_csv {
        let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
        write_beliefs_csv(&rec, BufWriter::new(file))?;
    }
    let [r, g, b] = rec.team_scores();
    println!("outcome {:?} after {} steps", rec.replay.outcome, rec.len());
    println!("scores red {r} green {g} blue {b}");
    for team in Team::ALL {
        if let Some(m) = rec.mean_team_metric(team) {
            println!("{team} observers mean true-role belief {m:.4}");
        }
    }
    println!("red raw bonus {:.4}", rec.total_raw_bonus(Team::Red));
    Ok(())
}

fn eval(args: EvalArgs) -> anyhow::Result<()> {
    let config = Arc::new(args.config.load()?);
    let pools: TeamPools = [args.red, args.green, args.blue];
    for (team, pool) in Team::ALL.iter().zip(&pools) {
        for spec in pool {
            if !spec.kind.compatible_with(*team) {
                return Err(PolicyError::IncompatibleRole {
                    kind: spec.kind.name(),
                    role: *team,
                }
                .into());
            }
        }
    }
    let opts = EpisodeOptions {
        bonus: args.bonus.bonus()?,
        ..EpisodeOptions::default()
    };
    let report = run_eval(config, &pools, args.games, args.seed, &opts)?;
    println!("games {}", report.games);
    for team in Team::ALL {
        let s = &report.team_score[team.index()];
        match s.ci95 {
            Some(ci) => print!("{team} score {:.3} +- {ci:.3}", s.mean),
            None => print!("{team} score {:.3}", s.mean),
        }
        if let Some(m) = report.team_metric[team.index()] {
            print!(", true-role belief {m:.4}");
        }
        println!(", raw bonus {:.3}", report.raw_bonus[team.index()]);
    }
    if let Some(path) = &args.json {
        let text = serde_json::to_string_pretty(&report)?;
        fs::write(path, text).with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(())
}

fn run(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::Play(args) => play(args),
        Command::Eval(args) => eval(args),
        Command::Render { replay, out } => {
            let bytes = fs::read(&replay).with_context(|| format!("reading {}", replay.display()))?;
            let replay = read_replay(&bytes)?;
            let frames = render_replay(&replay, &out)?;
            println!("wrote {} frames to {}", frames.len(), out.display());
            Ok(())
        }
        Command::Bench {
            config,
            steps,
            threads,
            sequential,
            repeats,
        } => {
            let config = Arc::new(config.load()?);
            if repeats == 0 {
                bail!(Error::Usage("repeats must be at least 1".into()));
            }
            for _ in 0..repeats {
                let r = bench_with(Arc::clone(&config), steps, threads, !sequential)?;
                println!(
                    "{} steps, {} episodes, {} threads: {:.3}s, {:.0} steps/s",
                    r.steps, r.episodes, r.threads, r.seconds, r.steps_per_sec
                );
            }
            Ok(())
        }
        Command::Config { action } => match action {
            ConfigAction::Validate(args) => {
                args.load()?;
                println!("ok");
                Ok(())
            }
            ConfigAction::Print(args) => {
                print!("{}", args.load()?.to_canonical_json());
                Ok(())
            }
        },
    }
}

const USAGE: u8 = 1;
const VALIDATION: u8 = 2;
const RUNTIME: u8 = 3;

fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if let Some(e) = cause.downcast_ref::<ReplayError>() {
            return if matches!(e, ReplayError::Io(_)) {
                RUNTIME
            } else {
                VALIDATION
            };
        }
        if cause.is::<ConfigError>() {
            return VALIDATION;
        }
        if cause.is::<PolicyError>() {
            return USAGE;
        }
        if let Some(e) = cause.downcast_ref::<Error>() {
            return match e {
                Error::Usage(_) | Error::Policy(_) => USAGE,
                Error::Replay(ReplayError::Io(_)) => RUNTIME,
                Error::Config(_) | Error::Replay(_) => VALIDATION,
                _ => RUNTIME,
            };
        }
    }
    RUNTIME
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { USAGE } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
