//! Episodes, tournaments, replays, exports and benchmarks.

mod bench;
mod episode;
mod eval;
mod export;
mod replay;

pub use bench::{bench, bench_with, simulate_steps, BenchReport, MIN_BENCH_STEPS};
pub use episode::{run_episode, run_episode_with, Assignment, EpisodeOptions, EpisodeRecord, StepRecord};
pub use eval::{aggregate, run_eval, EvalReport, GameSummary, ScoreSummary, TeamPools};
pub use export::{render_replay, write_beliefs_csv, write_bonuses_csv};
pub use replay::{
    read_replay, resimulate, resimulate_with, write_replay, Replay, Resimulation, ENGINE_VERSION, FORMAT_VERSION, MAGIC,
};
