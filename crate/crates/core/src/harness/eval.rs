use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::batch::map_indexed;
use crate::config::{GameConfig, Team, NUM_TEAMS};
use crate::engine::Outcome;
use crate::error::Error;
use crate::policy::{PolicySpec, RoleConditionedPolicySet};

use super::episode::{run_episode, Assignment, EpisodeOptions, EpisodeRecord};

/// Candidate policies per team; game `k` uses entry `k % len` of each.
pub type TeamPools = [Vec<PolicySpec>; NUM_TEAMS];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreSummary {
    pub mean: f64,
    /// 95% normal-approximation half-width; absent for a single game.
    pub ci95: Option<f64>,
}

impl ScoreSummary {
    pub fn from_samples(xs: &[f64]) -> Self {
        let n = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / n;
        let ci95 = (xs.len() > 1).then(|| {
            let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
            1.96 * var.sqrt() / n.sqrt()
        });
        ScoreSummary { mean, ci95 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GameSummary {
    pub seed: u64,
    pub policies: [String; NUM_TEAMS],
    pub outcome: Outcome,
    pub length: usize,
    pub team_scores: [f64; NUM_TEAMS],
    pub team_metric: [Option<f64>; NUM_TEAMS],
    pub raw_bonus: [f64; NUM_TEAMS],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub games: usize,
    pub seeds: Vec<u64>,
    pub team_score: [ScoreSummary; NUM_TEAMS],
    /// Mean over games of the per-episode role metric of each observer team.
    pub team_metric: [Option<f64>; NUM_TEAMS],
    /// Mean over games of the summed raw bonus of each team.
    pub raw_bonus: [f64; NUM_TEAMS],
    pub per_game: Vec<GameSummary>,
}

fn summarize(seed: u64, set: &RoleConditionedPolicySet, rec: &EpisodeRecord) -> GameSummary {
    GameSummary {
        seed,
        policies: Team::ALL.map(|t| set.spec(t).to_string()),
        outcome: rec.replay.outcome,
        length: rec.len(),
        team_scores: rec.team_scores(),
        team_metric: Team::ALL.map(|t| rec.mean_team_metric(t)),
        raw_bonus: Team::ALL.map(|t| rec.total_raw_bonus(t)),
    }
}

/// Play `n_games` rounds against every pool entry: `n_games * max_pool_len`
/// games with seeds `base_seed + k`. Games may run in parallel; the report
/// does not depend on scheduling.
pub fn run_eval(
    config: Arc<GameConfig>,
    pools: &TeamPools,
    n_games: usize,
    base_seed: u64,
    opts: &EpisodeOptions,
) -> Result<EvalReport, Error> {
    if n_games == 0 {
        return Err(Error::Usage("at least one game is required".into()));
    }
    if let Some(t) = Team::ALL.into_iter().find(|t| pools[t.index()].is_empty()) {
        return Err(Error::Usage(format!("policy pool for {t} is empty")));
    }
    let rounds = pools.iter().map(Vec::len).max().unwrap_or(1);
    let total = n_games * rounds;
    let results = map_indexed(total, |k| {
        let set = RoleConditionedPolicySet {
            specs: std::array::from_fn(|z| pools[z][k % pools[z].len()]),
        };
        let seed = base_seed.wrapping_add(k as u64);
        run_episode(Arc::clone(&config), &Assignment::ByRole(set), seed, opts).map(|r| summarize(seed, &set, &r))
    });
    let per_game = results.into_iter().collect::<Result<Vec<_>, _>>()?;
    Ok(aggregate(per_game))
}

pub fn aggregate(per_game: Vec<GameSummary>) -> EvalReport {
    let n = per_game.len();
    let team_score = Team::ALL.map(|t| {
        let xs: Vec<f64> = per_game.iter().map(|g| g.team_scores[t.index()]).collect();
        ScoreSummary::from_samples(&xs)
    });
    let team_metric = Team::ALL.map(|t| {
        let xs: Vec<f64> = per_game.iter().filter_map(|g| g.team_metric[t.index()]).collect();
        (!xs.is_empty()).then(|| xs.iter().sum::<f64>() / xs.len() as f64)
    });
    let raw_bonus = Team::ALL.map(|t| per_game.iter().map(|g| g.raw_bonus[t.index()]).sum::<f64>() / n as f64);
    EvalReport {
        games: n,
        seeds: per_game.iter().map(|g| g.seed).collect(),
        team_score,
        team_metric,
        raw_bonus,
        per_game,
    }
}
