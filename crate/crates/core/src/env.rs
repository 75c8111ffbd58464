//! Vectorized environment API for external learners.
//!
//! A [`VecEnv`] owns `E` independent episodes. Episode `e` starts from seed
//! `seed + e`; every reset of any episode takes the next seed after the
//! highest one handed out so far. Observations are returned as one flat
//! byte buffer laid out `(player, row, col, channel)`.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::bbm::{clip_and_mask, postprocess, step_raw_bonus, BonusConfig, ExactModel, ReturnNormalizer, RewardBundle};
use crate::belief::{BeliefTracker, CounterfactualBank};
use crate::config::{builtin_scenario, GameConfig, ScenarioName, Team};
use crate::engine::{Action, Event, GameState};
use crate::error::{EngineError, Error};
use crate::obs::{local_dims, render_local_into, Observation};
use crate::policy::RoleConditionedPolicySet;
use crate::rng::{EpisodeRng, OBSERVER_STREAM};

pub fn list_scenarios() -> Vec<&'static str> {
    ScenarioName::ALL.iter().map(|s| s.as_str()).collect()
}

/// A scenario name, or a JSON configuration document.
pub fn resolve_config(spec: &str) -> Result<GameConfig, Error> {
    let trimmed = spec.trim_start();
    let config = if trimmed.starts_with('{') {
        GameConfig::from_json(spec)?
    } else {
        builtin_scenario(spec.parse::<ScenarioName>()?)
    };
    config.validate()?;
    Ok(config)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepInfo {
    pub events: Vec<Event>,
    pub raw_bonus: Vec<f64>,
    pub r_int: Vec<f64>,
    pub team_rewards: [f64; 3],
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepOutput {
    pub observations: Vec<u8>,
    pub rewards: Vec<f64>,
    pub done: bool,
    pub info: StepInfo,
}

struct Bonus {
    cfg: BonusConfig,
    policies: RoleConditionedPolicySet,
    normalizer: ReturnNormalizer,
    interactions: u64,
}

struct Episode {
    state: GameState,
    obs: Vec<Observation>,
    tracker: Option<(BeliefTracker, CounterfactualBank, EpisodeRng)>,
}

pub struct VecEnv {
    config: Arc<GameConfig>,
    next_seed: u64,
    episodes: Vec<Episode>,
    bonus: Option<Bonus>,
}

impl VecEnv {
    pub fn create(spec: &str, num_envs: usize, seed: u64) -> Result<VecEnv, Error> {
        if num_envs == 0 {
            return Err(Error::Usage("num_envs must be at least 1".into()));
        }
        let config = Arc::new(resolve_config(spec)?);
        let mut env = VecEnv {
            config,
            next_seed: seed,
            episodes: Vec::with_capacity(num_envs),
            bonus: None,
        };
        for _ in 0..num_envs {
            let ep = env.new_episode()?;
            env.episodes.push(ep);
        }
        Ok(env)
    }

    /// Mix the belief-manipulation bonus into returned rewards. Beliefs are
    /// tracked against `policies`; takes effect from the next reset.
    pub fn attach_bonus(&mut self, cfg: BonusConfig, policies: RoleConditionedPolicySet) -> Result<(), Error> {
        cfg.validate().map_err(Error::Usage)?;
        let normalizer = ReturnNormalizer::new(self.config.n_players(), cfg.gamma);
        self.bonus = Some(Bonus {
            cfg,
            policies,
            normalizer,
            interactions: 0,
        });
        Ok(())
    }

    pub fn config(&self) -> &GameConfig {
        &self.config
    }

    pub fn num_envs(&self) -> usize {
        self.episodes.len()
    }

    pub fn n_players(&self) -> usize {
        self.config.n_players()
    }

    /// `(players, height, width, channels)`.
    pub fn observation_shape(&self) -> (usize, usize, usize, usize) {
        let (h, w) = local_dims(&self.config);
        (self.n_players(), h, w, 3)
    }

    pub fn n_actions(&self) -> usize {
        self.config.n_actions()
    }

    pub fn state(&self, env: usize) -> Result<&GameState, Error> {
        Ok(&self.episode(env)?.state)
    }

    /// Role of each player in an episode (not visible to players themselves).
    pub fn teams(&self, env: usize) -> Result<Vec<Team>, Error> {
        Ok(self.episode(env)?.state.players.iter().map(|p| p.team).collect())
    }

    fn episode(&self, env: usize) -> Result<&Episode, Error> {
        self.episodes
            .get(env)
            .ok_or_else(|| Error::Usage(format!("env index {env} out of range (have {})", self.episodes.len())))
    }

    fn new_episode(&mut self) -> Result<Episode, Error> {
        let seed = self.next_seed;
        self.next_seed = self.next_seed.wrapping_add(1);
        let state = GameState::new(Arc::clone(&self.config), seed)?;
        let (h, w) = local_dims(&self.config);
        let tracker = match &self.bonus {
            Some(b) => Some((
                BeliefTracker::new(&state),
                CounterfactualBank::new(&b.policies, &self.config)?,
                EpisodeRng::with_stream(seed, OBSERVER_STREAM),
            )),
            None => None,
        };
        if let Some(b) = self.bonus.as_mut() {
            b.normalizer.reset_returns();
        }
        let mut ep = Episode {
            obs: (0..state.n_players()).map(|_| Observation::new(h, w)).collect(),
            state,
            tracker,
        };
        render_all(&mut ep);
        Ok(ep)
    }

    /// Current observations of every player in one episode.
    pub fn observe(&self, env: usize) -> Result<Vec<u8>, Error> {
        Ok(concat(&self.episode(env)?.obs))
    }

    pub fn reset(&mut self, env: usize) -> Result<Vec<u8>, Error> {
        self.episode(env)?;
        self.episodes[env] = self.new_episode()?;
        self.observe(env)
    }

    /// Advance one episode. Dead players' actions are ignored.
    pub fn step(&mut self, env: usize, actions: &[u32]) -> Result<StepOutput, Error> {
        self.episode(env)?;
        let n = self.n_players();
        let n_actions = self.n_actions();
        if actions.len() != n {
            return Err(EngineError::Arity {
                expected: n,
                got: actions.len(),
            }
            .into());
        }
        if let Some(&bad) = actions.iter().find(|&&a| a as usize >= n_actions) {
            return Err(Error::Usage(format!("action {bad} out of range 0..{n_actions}")));
        }
        let ep = &mut self.episodes[env];
        if ep.state.is_terminal() {
            return Err(EngineError::GameOver.into());
        }
        let auto = self.config.auto_shooting;
        let joint: Vec<Action> = actions
            .iter()
            .zip(&ep.state.players)
            .map(|(&a, p)| {
                if p.alive {
                    Action::from_index(a as usize, auto).expect("range checked")
                } else {
                    Action::NoOp
                }
            })
            .collect();

        let mut raw = vec![0.0; n];
        if let (Some((tracker, bank, rng)), Some(b)) = (ep.tracker.as_mut(), self.bonus.as_ref()) {
            let mut liks = Vec::with_capacity(n);
            for p in &ep.state.players {
                liks.push(if p.alive {
                    let d = bank.evaluate(p.index, &ep.obs[p.index])?;
                    Some(bank.likelihoods(&d, joint[p.index]))
                } else {
                    None
                });
            }
            let model = ExactModel {
                tracker,
                likelihoods: &liks,
            };
            raw = step_raw_bonus(&ep.state, &model, rng, b.cfg.nonvisible_sample_rate)?;
            tracker.observe_step(&ep.state, &liks)?;
        }

        let result = ep.state.step(&joint)?;
        let teams: Vec<Team> = ep.state.players.iter().map(|p| p.team).collect();
        let bundle = match self.bonus.as_mut() {
            Some(b) if ep.tracker.is_some() => {
                let masked = clip_and_mask(&raw, &teams, &b.cfg);
                b.normalizer.update(&masked, &vec![result.done; n]);
                let r_int = postprocess(&raw, &teams, b.interactions, &b.normalizer, &b.cfg);
                b.interactions += n as u64;
                RewardBundle::assemble(result.rewards.clone(), raw, r_int, &teams, &b.cfg)
            }
            _ => RewardBundle::extrinsic_only(result.rewards.clone()),
        };
        render_all(ep);
        Ok(StepOutput {
            observations: concat(&ep.obs),
            rewards: bundle.r_total,
            done: result.done,
            info: StepInfo {
                events: result.events,
                raw_bonus: bundle.raw_bonus,
                r_int: bundle.r_int,
                team_rewards: result.team_rewards,
            },
        })
    }

    pub fn close(self) {}
}

fn render_all(ep: &mut Episode) {
    for (i, o) in ep.obs.iter_mut().enumerate() {
        render_local_into(&ep.state, i, &mut o.pixels);
    }
}

fn concat(obs: &[Observation]) -> Vec<u8> {
    let mut out = Vec::with_capacity(obs.iter().map(|o| o.pixels.len()).sum());
    for o in obs {
        out.extend_from_slice(&o.pixels);
    }
    out
}
