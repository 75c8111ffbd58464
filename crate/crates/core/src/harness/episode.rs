use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::bbm::{clip_and_mask, postprocess, step_raw_bonus, BonusConfig, ExactModel, ReturnNormalizer, RewardBundle};
use crate::belief::{true_role_metric, true_role_metric_for, BeliefTracker, CounterfactualBank, RoleBelief};
use crate::config::{GameConfig, Team, NUM_TEAMS};
use crate::engine::{Action, Event, GameState};
use crate::error::{Error, PolicyError};
use crate::obs::{local_dims, render_local_into, Observation};
use crate::policy::{sample, Policy, PolicySpec, RoleConditionedPolicySet};
use crate::rng::{EpisodeRng, OBSERVER_STREAM};

use super::replay::{Replay, ENGINE_VERSION, FORMAT_VERSION};

/// Which policy drives each player.
#[derive(Debug, Clone, PartialEq)]
pub enum Assignment {
    /// Every player plays its role's policy.
    ByRole(RoleConditionedPolicySet),
    /// One spec per player index, whatever role the player draws.
    PerPlayer(Vec<PolicySpec>),
}

impl From<RoleConditionedPolicySet> for Assignment {
    fn from(set: RoleConditionedPolicySet) -> Self {
        Assignment::ByRole(set)
    }
}

impl Assignment {
    fn build(&self, state: &GameState) -> Result<Vec<Box<dyn Policy>>, Error> {
        let cfg = &state.config;
        match self {
            Assignment::ByRole(set) => state.players.iter().map(|p| Ok(set.build(p.team, cfg)?)).collect(),
            Assignment::PerPlayer(specs) => {
                if specs.len() != state.players.len() {
                    return Err(PolicyError::Arity {
                        expected: state.players.len(),
                        got: specs.len(),
                    }
                    .into());
                }
                state
                    .players
                    .iter()
                    .zip(specs)
                    .map(|(p, s)| Ok(s.build(p.team, cfg)?))
                    .collect()
            }
        }
    }

    fn role_set(&self) -> RoleConditionedPolicySet {
        match self {
            Assignment::ByRole(set) => *set,
            Assignment::PerPlayer(_) => RoleConditionedPolicySet::scripted(PolicySpec::DEFAULT_EPSILON),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpisodeOptions {
    /// Maintain belief trackers (needed for the role metric and bonuses).
    pub track_beliefs: bool,
    /// Keep a full belief snapshot per step.
    pub record_beliefs: bool,
    /// Compute raw bonuses even when no bonus configuration is attached.
    pub record_bonuses: bool,
    /// Attach the intrinsic reward to the returned rewards.
    pub bonus: Option<BonusConfig>,
    /// Role policies the trackers assume; defaults to the assignment's set.
    pub tracker_policies: Option<RoleConditionedPolicySet>,
    /// Interactions already consumed before this episode (for warm-up).
    pub interaction_offset: u64,
    /// Joint actions to play instead of sampling, step by step. Dead
    /// players' entries are replaced with NoOp.
    pub forced_actions: Option<Vec<Vec<Action>>>,
}

impl Default for EpisodeOptions {
    fn default() -> Self {
        EpisodeOptions {
            track_beliefs: true,
            record_beliefs: false,
            record_bonuses: true,
            bonus: None,
            tracker_policies: None,
            interaction_offset: 0,
            forced_actions: None,
        }
    }
}

impl EpisodeOptions {
    /// Engine and policies only.
    pub fn untracked() -> Self {
        EpisodeOptions {
            track_beliefs: false,
            record_bonuses: false,
            ..EpisodeOptions::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub t: u32,
    pub rewards: RewardBundle,
    pub team_rewards: [f64; NUM_TEAMS],
    pub events: Vec<Event>,
    /// Role metric over all living observers after this step.
    pub belief_metric: Option<f64>,
    /// Role metric restricted to observers of each team.
    pub team_belief_metric: [Option<f64>; NUM_TEAMS],
    pub raw_bonus_by_team: [f64; NUM_TEAMS],
    /// Row-major observer x subject beliefs after this step.
    pub beliefs: Option<Vec<RoleBelief>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeRecord {
    pub replay: Replay,
    pub teams: Vec<Team>,
    pub initial_beliefs: Option<Vec<RoleBelief>>,
    pub steps: Vec<StepRecord>,
}

impl EpisodeRecord {
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn team_scores(&self) -> [f64; NUM_TEAMS] {
        self.replay.team_scores
    }

    /// Canonical JSON encoding; equal records give equal bytes.
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("episode records always serialize")
    }

    /// Mean over steps of the role metric for observers on `team`.
    pub fn mean_team_metric(&self, team: Team) -> Option<f64> {
        mean(self.steps.iter().filter_map(|s| s.team_belief_metric[team.index()]))
    }

    pub fn mean_metric(&self) -> Option<f64> {
        mean(self.steps.iter().filter_map(|s| s.belief_metric))
    }

    pub fn total_raw_bonus(&self, team: Team) -> f64 {
        self.steps.iter().map(|s| s.raw_bonus_by_team[team.index()]).sum()
    }
}

fn mean(xs: impl Iterator<Item = f64>) -> Option<f64> {
    let (sum, n) = xs.fold((0.0, 0usize), |(s, n), x| (s + x, n + 1));
    (n > 0).then(|| sum / n as f64)
}

/// Play one episode to completion with a fresh return normalizer.
pub fn run_episode(
    config: Arc<GameConfig>,
    assignment: &Assignment,
    seed: u64,
    opts: &EpisodeOptions,
) -> Result<EpisodeRecord, Error> {
    let gamma = opts.bonus.as_ref().map_or(0.99, |b| b.gamma);
    let mut normalizer = ReturnNormalizer::new(config.n_players(), gamma);
    run_episode_with(config, assignment, seed, opts, &mut normalizer)
}

/// Play one episode, carrying the return normalizer across calls.
pub fn run_episode_with(
    config: Arc<GameConfig>,
    assignment: &Assignment,
    seed: u64,
    opts: &EpisodeOptions,
    normalizer: &mut ReturnNormalizer,
) -> Result<EpisodeRecord, Error> {
    config.validate()?;
    if let Some(b) = &opts.bonus {
        b.validate().map_err(Error::Usage)?;
    }
    let mut state = GameState::new(Arc::clone(&config), seed)?;
    let n = state.n_players();
    let teams: Vec<Team> = state.players.iter().map(|p| p.team).collect();
    let mut policies = assignment.build(&state)?;
    let auto = config.auto_shooting;

    let tracking = opts.track_beliefs || opts.bonus.is_some();
    let compute_bonus = tracking && (opts.record_bonuses || opts.bonus.is_some());
    let bonus_cfg = opts.bonus.clone().unwrap_or_else(BonusConfig::disabled);
    let mut tracker = BeliefTracker::new(&state);
    let mut bank = if tracking {
        let set = opts.tracker_policies.unwrap_or_else(|| assignment.role_set());
        Some(CounterfactualBank::new(&set, &config)?)
    } else {
        None
    };
    let mut observer_rng = EpisodeRng::with_stream(seed, OBSERVER_STREAM);
    normalizer.reset_returns();

    let (h, w) = local_dims(&config);
    let mut obs: Vec<Observation> = (0..n).map(|_| Observation::new(h, w)).collect();
    let mut actions_log = Vec::new();
    let mut steps = Vec::new();
    let initial_beliefs = opts.record_beliefs.then(|| tracker.snapshot().to_vec());

    while !state.is_terminal() {
        let t = state.t;
        let mut joint = vec![Action::NoOp; n];
        let forced = opts.forced_actions.as_ref().and_then(|f| f.get(t as usize));
        for i in 0..n {
            if !state.players[i].alive {
                continue;
            }
            render_local_into(&state, i, &mut obs[i].pixels);
            let dist = policies[i].act(&obs[i])?;
            joint[i] = match forced {
                Some(row) => row.get(i).copied().unwrap_or(Action::NoOp),
                None => Action::from_index(sample(&dist, &mut state.rng), auto).unwrap_or(Action::NoOp),
            };
        }

        let mut raw = vec![0.0; n];
        if let Some(bank) = bank.as_mut() {
            observe_step_and_bonus(
                &mut tracker,
                &state,
                &joint,
                bank,
                &obs,
                compute_bonus.then_some((&mut observer_rng, bonus_cfg.nonvisible_sample_rate, &mut raw)),
            )?;
        }

        let result = state.step(&joint)?;
        let rewards = match &opts.bonus {
            Some(cfg) => {
                let masked = clip_and_mask(&raw, &teams, cfg);
                normalizer.update(&masked, &vec![result.done; n]);
                let t_int = opts.interaction_offset + u64::from(t) * n as u64;
                let r_int = postprocess(&raw, &teams, t_int, normalizer, cfg);
                RewardBundle::assemble(result.rewards.clone(), raw.clone(), r_int, &teams, cfg)
            }
            None => {
                let mut b = RewardBundle::extrinsic_only(result.rewards.clone());
                b.raw_bonus = raw.clone();
                b
            }
        };
        let mut raw_bonus_by_team = [0.0; NUM_TEAMS];
        for (b, team) in raw.iter().zip(&teams) {
            raw_bonus_by_team[team.index()] += b;
        }
        let (belief_metric, team_belief_metric) = if tracking {
            (
                true_role_metric(&tracker, &state),
                Team::ALL.map(|z| true_role_metric_for(&tracker, &state, z)),
            )
        } else {
            (None, [None; NUM_TEAMS])
        };
        steps.push(StepRecord {
            t,
            rewards,
            team_rewards: result.team_rewards,
            events: result.events,
            belief_metric,
            team_belief_metric,
            raw_bonus_by_team,
            beliefs: opts.record_beliefs.then(|| tracker.snapshot().to_vec()),
        });
        actions_log.push(joint);
    }

    let mut team_scores = [0.0; NUM_TEAMS];
    for s in &steps {
        for k in 0..NUM_TEAMS {
            team_scores[k] += s.team_rewards[k];
        }
    }
    let replay = Replay {
        format_version: FORMAT_VERSION,
        engine_version: ENGINE_VERSION.to_string(),
        config: (*config).clone(),
        seed,
        actions: actions_log,
        outcome: state.outcome.expect("loop exits on a terminal state"),
        team_scores,
    };
    Ok(EpisodeRecord {
        replay,
        teams,
        initial_beliefs,
        steps,
    })
}

type BonusSink<'a> = (&'a mut EpisodeRng, f64, &'a mut Vec<f64>);

/// Raw bonuses use the trackers as they stood before this step's update.
fn observe_step_and_bonus(
    tracker: &mut BeliefTracker,
    state: &GameState,
    joint: &[Action],
    bank: &mut CounterfactualBank,
    obs: &[Observation],
    bonus: Option<BonusSink<'_>>,
) -> Result<(), Error> {
    let mut liks = Vec::with_capacity(state.players.len());
    for p in &state.players {
        liks.push(if p.alive {
            let d = bank.evaluate(p.index, &obs[p.index])?;
            Some(bank.likelihoods(&d, joint[p.index]))
        } else {
            None
        });
    }
    if let Some((rng, rate, out)) = bonus {
        let model = ExactModel {
            tracker,
            likelihoods: &liks,
        };
        *out = step_raw_bonus(state, &model, rng, rate)?;
    }
    tracker.observe_step(state, &liks)?;
    Ok(())
}
