//! Exact Bayesian role tracking for every (observer, subject) pair.
//!
//! Each observer holds an independent belief over each subject's role,
//! starts from population counts, and applies Bayes' rule every time it sees
//! that subject act. Action likelihoods come from counterfactual policy
//! instances: one per (subject, role), all fed the subject's own observation
//! stream.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::config::{GameConfig, Team, NUM_TEAMS};
use crate::engine::{Action, GameState};
use crate::error::{BeliefError, Error, PolicyError};
use crate::obs::{can_see, role_visible, Observation};
use crate::policy::{ActionDistribution, Policy, RoleConditionedPolicySet};

/// Probability over roles, indexed red, green, blue.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RoleBelief(pub [f64; NUM_TEAMS]);

impl RoleBelief {
    pub fn uniform() -> Self {
        RoleBelief([1.0 / NUM_TEAMS as f64; NUM_TEAMS])
    }

    pub fn one_hot(team: Team) -> Self {
        let mut p = [0.0; NUM_TEAMS];
        p[team.index()] = 1.0;
        RoleBelief(p)
    }

    #[inline]
    pub fn prob(&self, team: Team) -> f64 {
        self.0[team.index()]
    }

    pub fn is_valid(&self) -> bool {
        self.0.iter().all(|&p| p >= 0.0 && p.is_finite()) && (self.0.iter().sum::<f64>() - 1.0).abs() <= 1e-9
    }
}

/// Likelihood of one observed action under each role's policy.
pub type Likelihoods = [f64; NUM_TEAMS];

/// Posterior `L(z) P(z) / sum_z' L(z') P(z')`.
pub fn bayes_update(prior: &RoleBelief, likelihoods: &Likelihoods) -> Result<RoleBelief, BeliefError> {
    let joint: [f64; NUM_TEAMS] = std::array::from_fn(|z| likelihoods[z] * prior.0[z]);
    let evidence: f64 = joint.iter().sum();
    if !(evidence > 0.0) {
        return Err(BeliefError::ZeroEvidence);
    }
    Ok(RoleBelief(joint.map(|j| j / evidence)))
}

/// Starting beliefs of `observer` about every player (indexed by subject).
///
/// Self and role-visible subjects are one-hot on their true role; everyone
/// else gets the role counts among the other players.
pub fn count_prior(state: &GameState, observer: usize) -> Vec<RoleBelief> {
    let cfg = &*state.config;
    let o = &state.players[observer];
    let mut others = cfg.team_counts.map(|c| c as f64);
    others[o.team.index()] -= 1.0;
    let total: f64 = others.iter().sum();
    state
        .players
        .iter()
        .map(|s| {
            if s.index == observer || role_visible(cfg, o, s) || total <= 0.0 {
                RoleBelief::one_hot(s.team)
            } else {
                RoleBelief(others.map(|c| c / total))
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BeliefUpdate {
    pub step: u32,
    pub observer: usize,
    pub subject: usize,
    pub likelihoods: Likelihoods,
    pub posterior: RoleBelief,
}

/// All observers' beliefs about all subjects.
#[derive(Debug, Clone, PartialEq)]
pub struct BeliefTracker {
    n: usize,
    beliefs: Vec<RoleBelief>,
    log: Option<Vec<BeliefUpdate>>,
}

impl BeliefTracker {
    /// Count priors for every observer.
    pub fn new(state: &GameState) -> Self {
        let n = state.players.len();
        let beliefs = (0..n).flat_map(|o| count_prior(state, o)).collect();
        BeliefTracker { n, beliefs, log: None }
    }

    /// Tracker with explicit starting beliefs, `priors[observer][subject]`.
    pub fn from_priors(priors: Vec<Vec<RoleBelief>>) -> Self {
        let n = priors.len();
        assert!(priors.iter().all(|row| row.len() == n), "prior matrix must be square");
        BeliefTracker {
            n,
            beliefs: priors.into_iter().flatten().collect(),
            log: None,
        }
    }

    pub fn with_audit_log(mut self) -> Self {
        self.log = Some(Vec::new());
        self
    }

    pub fn audit_log(&self) -> Option<&[BeliefUpdate]> {
        self.log.as_deref()
    }

    pub fn n_players(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn belief(&self, observer: usize, subject: usize) -> &RoleBelief {
        &self.beliefs[observer * self.n + subject]
    }

    /// Row-major `n * n` snapshot.
    pub fn snapshot(&self) -> &[RoleBelief] {
        &self.beliefs
    }

    /// One Bayes update of `observer`'s belief about `subject`.
    pub fn update(
        &mut self,
        step: u32,
        observer: usize,
        subject: usize,
        likelihoods: &Likelihoods,
    ) -> Result<(), BeliefError> {
        let slot = observer * self.n + subject;
        let posterior = bayes_update(&self.beliefs[slot], likelihoods)?;
        self.beliefs[slot] = posterior;
        if let Some(log) = self.log.as_mut() {
            log.push(BeliefUpdate {
                step,
                observer,
                subject,
                likelihoods: *likelihoods,
                posterior,
            });
        }
        Ok(())
    }

    /// Update every living observer about every other subject it can see act.
    /// `likelihoods[s]` is `None` for subjects that did not act (dead).
    pub fn observe_step(&mut self, state: &GameState, likelihoods: &[Option<Likelihoods>]) -> Result<(), BeliefError> {
        for o in 0..self.n {
            if !state.players[o].alive {
                continue;
            }
            for (s, lik) in likelihoods.iter().enumerate() {
                if let Some(lik) = lik {
                    if s != o && can_see(state, o, s) {
                        self.update(state.t, o, s, lik)?;
                    }
                }
            }
        }
        Ok(())
    }
}

/// Role-z policy instances for every subject, fed the subject's observations.
pub struct CounterfactualBank {
    instances: Vec<[Box<dyn Policy>; NUM_TEAMS]>,
    auto_shooting: bool,
}

impl CounterfactualBank {
    pub fn new(policies: &RoleConditionedPolicySet, config: &Arc<GameConfig>) -> Result<Self, PolicyError> {
        let mut instances = Vec::with_capacity(config.n_players());
        for _ in 0..config.n_players() {
            instances.push([
                policies.build(Team::Red, config)?,
                policies.build(Team::Green, config)?,
                policies.build(Team::Blue, config)?,
            ]);
        }
        Ok(CounterfactualBank {
            instances,
            auto_shooting: config.auto_shooting,
        })
    }

    /// Distributions of every role policy for `subject` on this observation.
    pub fn evaluate(&mut self, subject: usize, obs: &Observation) -> Result<[ActionDistribution; NUM_TEAMS], Error> {
        let slots = self
            .instances
            .get_mut(subject)
            .ok_or(BeliefError::MissingCounterfactual {
                subject,
                role: Team::Red,
            })?;
        Ok([slots[0].act(obs)?, slots[1].act(obs)?, slots[2].act(obs)?])
    }

    pub fn likelihoods(&self, dists: &[ActionDistribution; NUM_TEAMS], action: Action) -> Likelihoods {
        let i = action.index(self.auto_shooting).unwrap_or(0);
        std::array::from_fn(|z| dists[z].prob(i))
    }
}

/// Feed the subject observations through the bank and update the tracker.
/// Returns the likelihoods used, per subject.
pub fn observe_step(
    tracker: &mut BeliefTracker,
    state: &GameState,
    joint_action: &[Action],
    bank: &mut CounterfactualBank,
    observations: &[Observation],
) -> Result<Vec<Option<Likelihoods>>, Error> {
    let mut liks = Vec::with_capacity(state.players.len());
    for p in &state.players {
        if p.alive {
            let d = bank.evaluate(p.index, &observations[p.index])?;
            liks.push(Some(bank.likelihoods(&d, joint_action[p.index])));
        } else {
            liks.push(None);
        }
    }
    tracker.observe_step(state, &liks)?;
    Ok(liks)
}

/// Geometric mean over (living observer, subject) pairs of the probability
/// the observer assigns to the subject's true role. Self pairs count.
pub fn true_role_metric(tracker: &BeliefTracker, state: &GameState) -> Option<f64> {
    true_role_metric_where(tracker, state, |_| true)
}

/// As [`true_role_metric`], restricted to observers on `team`.
pub fn true_role_metric_for(tracker: &BeliefTracker, state: &GameState, team: Team) -> Option<f64> {
    true_role_metric_where(tracker, state, |t| t == team)
}

fn true_role_metric_where(tracker: &BeliefTracker, state: &GameState, keep: impl Fn(Team) -> bool) -> Option<f64> {
    let mut sum = 0.0;
    let mut pairs = 0usize;
    for o in state.players.iter().filter(|o| o.alive && keep(o.team)) {
        for s in &state.players {
            sum += tracker.belief(o.index, s.index).prob(s.team).ln();
            pairs += 1;
        }
    }
    (pairs > 0).then(|| (sum / pairs as f64).exp())
}
