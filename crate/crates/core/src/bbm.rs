//! Bayesian belief manipulation bonus.
//!
//! For deceiver `i` and observer `j`, `rho` is the Bayes factor the observer
//! applies to `i`'s true role after seeing one action; the raw bonus is
//! `-ln rho` summed over observers. Raw bonuses then go through clipping,
//! team masking, return normalization and warm-up before being mixed into
//! the extrinsic reward.

use serde::{Deserialize, Serialize};

use crate::belief::{BeliefTracker, Likelihoods, RoleBelief};
use crate::config::{Team, NUM_TEAMS};
use crate::engine::GameState;
use crate::error::BeliefError;
use crate::obs::can_see;
use crate::rng::EpisodeRng;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BonusConfig {
    /// Bonus magnitude per team.
    pub alpha: [f64; NUM_TEAMS],
    pub clip_lo: f64,
    pub clip_hi: f64,
    /// Interactions over which the bonus ramps from 0 to full strength.
    pub warmup_horizon: f64,
    pub nonvisible_sample_rate: f64,
    /// Teams that receive the processed bonus.
    pub deceptive_teams: [bool; NUM_TEAMS],
    pub gamma: f64,
}

impl Default for BonusConfig {
    fn default() -> Self {
        BonusConfig {
            alpha: [0.5, 0.0, 0.0],
            clip_lo: -20.0,
            clip_hi: 20.0,
            warmup_horizon: 1e7,
            nonvisible_sample_rate: 0.1,
            deceptive_teams: [true, false, false],
            gamma: 0.99,
        }
    }
}

impl BonusConfig {
    /// Configuration with every team's alpha set to zero.
    pub fn disabled() -> Self {
        BonusConfig {
            alpha: [0.0; NUM_TEAMS],
            ..BonusConfig::default()
        }
    }

    pub fn validate(&self) -> Result<(), String> {
        if !(self.clip_lo < self.clip_hi) {
            return Err(format!("clip range [{}, {}] is empty", self.clip_lo, self.clip_hi));
        }
        if !(0.0..=1.0).contains(&self.nonvisible_sample_rate) {
            return Err(format!("sample rate {} outside [0, 1]", self.nonvisible_sample_rate));
        }
        if self.alpha.iter().any(|a| !(*a >= 0.0) || !a.is_finite()) {
            return Err(format!("alpha {:?} must be finite and nonnegative", self.alpha));
        }
        if !(self.warmup_horizon >= 0.0) || !(0.0..1.0).contains(&self.gamma) {
            return Err("warmup horizon must be >= 0 and gamma in [0, 1)".into());
        }
        Ok(())
    }

    #[inline]
    pub fn alpha_for(&self, team: Team) -> f64 {
        self.alpha[team.index()]
    }
}

/// `L(true) / sum_z L(z) P(z)`.
pub fn rho(true_role: Team, likelihoods: &Likelihoods, inverse_belief: &RoleBelief) -> Result<f64, BeliefError> {
    let mixture: f64 = (0..NUM_TEAMS).map(|z| likelihoods[z] * inverse_belief.0[z]).sum();
    let num = likelihoods[true_role.index()];
    if !(mixture > 0.0) || !(num > 0.0) {
        return Err(BeliefError::ZeroEvidence);
    }
    Ok(num / mixture)
}

#[inline]
pub fn bonus_from_rho(rho: f64) -> f64 {
    -rho.ln()
}

/// What deceiver `i` believes about observer `j`: the observer's belief
/// about `i` and the per-role likelihood of `i`'s action.
pub trait InverseModel {
    fn estimate(&self, deceiver: usize, observer: usize) -> Option<(Likelihoods, RoleBelief)>;
}

/// Perfect-information model: the observer's actual tracker and the
/// deceiver's true counterfactual likelihoods.
pub struct ExactModel<'a> {
    pub tracker: &'a BeliefTracker,
    /// Per subject; `None` for players that did not act.
    pub likelihoods: &'a [Option<Likelihoods>],
}

impl InverseModel for ExactModel<'_> {
    fn estimate(&self, deceiver: usize, observer: usize) -> Option<(Likelihoods, RoleBelief)> {
        let lik = (*self.likelihoods.get(deceiver)?)?;
        Some((lik, *self.tracker.belief(observer, deceiver)))
    }
}

/// Externally supplied estimates, e.g. from a learned predictor.
#[derive(Debug, Clone, Default)]
pub struct PredictedModel {
    n: usize,
    entries: Vec<Option<(Likelihoods, RoleBelief)>>,
}

impl PredictedModel {
    pub fn new(n_players: usize) -> Self {
        PredictedModel {
            n: n_players,
            entries: vec![None; n_players * n_players],
        }
    }

    pub fn set(&mut self, deceiver: usize, observer: usize, likelihoods: Likelihoods, belief: RoleBelief) {
        self.entries[deceiver * self.n + observer] = Some((likelihoods, belief));
    }

    pub fn clear(&mut self) {
        self.entries.fill(None);
    }
}

impl InverseModel for PredictedModel {
    fn estimate(&self, deceiver: usize, observer: usize) -> Option<(Likelihoods, RoleBelief)> {
        *self.entries.get(deceiver * self.n + observer)?
    }
}

/// Raw bonus per player for the step about to be taken from `state`.
///
/// Observers of a living deceiver are the living players that can see it,
/// plus each remaining living player with probability `sample_rate`. One
/// Bernoulli draw is made per non-visible (deceiver, observer) pair, in
/// deceiver-major index order.
pub fn step_raw_bonus(
    state: &GameState,
    model: &dyn InverseModel,
    rng: &mut EpisodeRng,
    sample_rate: f64,
) -> Result<Vec<f64>, BeliefError> {
    let n = state.players.len();
    let mut out = vec![0.0; n];
    for i in 0..n {
        let deceiver = &state.players[i];
        if !deceiver.alive {
            continue;
        }
        let mut total = 0.0;
        for j in 0..n {
            if j == i || !state.players[j].alive {
                continue;
            }
            if !can_see(state, j, i) && !rng.bernoulli(sample_rate) {
                continue;
            }
            let (lik, belief) = model.estimate(i, j).ok_or(BeliefError::MissingCounterfactual {
                subject: i,
                role: deceiver.team,
            })?;
            total += bonus_from_rho(rho(deceiver.team, &lik, &belief)?);
        }
        out[i] = total;
    }
    Ok(out)
}

/// Warm-up ramp `min(1, t / horizon)`.
#[inline]
pub fn phi(t: u64, horizon: f64) -> f64 {
    if horizon <= 0.0 {
        1.0
    } else {
        (t as f64 / horizon).min(1.0)
    }
}

#[inline]
pub fn combine(r_ext: f64, r_int: f64, alpha: f64) -> f64 {
    r_ext + alpha * r_int
}

/// Clip, then zero players outside the deceptive teams.
pub fn clip_and_mask(raw: &[f64], teams: &[Team], cfg: &BonusConfig) -> Vec<f64> {
    raw.iter()
        .zip(teams)
        .map(|(&b, t)| {
            if cfg.deceptive_teams[t.index()] {
                b.clamp(cfg.clip_lo, cfg.clip_hi)
            } else {
                0.0
            }
        })
        .collect()
}

/// Processed intrinsic reward: clip, mask, divide by the return scale,
/// multiply by the warm-up factor.
pub fn postprocess(raw: &[f64], teams: &[Team], t: u64, normalizer: &ReturnNormalizer, cfg: &BonusConfig) -> Vec<f64> {
    let scale = normalizer.scale();
    let ramp = phi(t, cfg.warmup_horizon);
    clip_and_mask(raw, teams, cfg)
        .into_iter()
        .map(|b| b / scale * ramp)
        .collect()
}

/// Streaming mean and variance (Welford), mergeable (Chan et al.).
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct RunningMoments {
    pub count: u64,
    pub mean: f64,
    pub m2: f64,
}

impl RunningMoments {
    pub fn push(&mut self, x: f64) {
        self.count += 1;
        let d = x - self.mean;
        self.mean += d / self.count as f64;
        self.m2 += d * (x - self.mean);
    }

    pub fn merge(&mut self, other: &RunningMoments) {
        if other.count == 0 {
            return;
        }
        if self.count == 0 {
            *self = *other;
            return;
        }
        let (na, nb) = (self.count as f64, other.count as f64);
        let n = na + nb;
        let d = other.mean - self.mean;
        self.mean += d * nb / n;
        self.m2 += other.m2 + d * d * na * nb / n;
        self.count += other.count;
    }

    /// Population variance.
    pub fn variance(&self) -> f64 {
        if self.count == 0 {
            0.0
        } else {
            (self.m2 / self.count as f64).max(0.0)
        }
    }
}

/// Per-player discounted intrinsic returns with pooled variance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReturnNormalizer {
    pub gamma: f64,
    returns: Vec<f64>,
    moments: RunningMoments,
}

impl ReturnNormalizer {
    const MIN_VARIANCE: f64 = 1e-12;

    pub fn new(n_players: usize, gamma: f64) -> Self {
        ReturnNormalizer {
            gamma,
            returns: vec![0.0; n_players],
            moments: RunningMoments::default(),
        }
    }

    /// `R <- gamma R + b` per player, pooled into the moments; returns of
    /// players whose episode ended are reset afterwards.
    pub fn update(&mut self, bonuses: &[f64], done: &[bool]) {
        if self.returns.len() < bonuses.len() {
            self.returns.resize(bonuses.len(), 0.0);
        }
        for (k, &b) in bonuses.iter().enumerate() {
            let r = self.gamma * self.returns[k] + b;
            self.moments.push(r);
            self.returns[k] = if done.get(k).copied().unwrap_or(false) { 0.0 } else { r };
        }
    }

    /// Start a new episode without discarding the variance estimate.
    pub fn reset_returns(&mut self) {
        self.returns.fill(0.0);
    }

    /// Fold in another normalizer's moments (returns are left alone).
    pub fn merge(&mut self, other: &ReturnNormalizer) {
        self.moments.merge(&other.moments);
    }

    pub fn moments(&self) -> &RunningMoments {
        &self.moments
    }

    /// Return standard deviation, or 1 before it can be estimated.
    pub fn scale(&self) -> f64 {
        let var = self.moments.variance();
        if self.moments.count < 2 || var < Self::MIN_VARIANCE {
            1.0
        } else {
            var.sqrt()
        }
    }
}

/// Reward components for one step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RewardBundle {
    pub r_ext: Vec<f64>,
    pub raw_bonus: Vec<f64>,
    pub r_int: Vec<f64>,
    pub r_total: Vec<f64>,
}

impl RewardBundle {
    pub fn extrinsic_only(r_ext: Vec<f64>) -> Self {
        let n = r_ext.len();
        RewardBundle {
            r_total: r_ext.clone(),
            r_ext,
            raw_bonus: vec![0.0; n],
            r_int: vec![0.0; n],
        }
    }

    pub fn assemble(r_ext: Vec<f64>, raw_bonus: Vec<f64>, r_int: Vec<f64>, teams: &[Team], cfg: &BonusConfig) -> Self {
        let r_total = r_ext
            .iter()
            .zip(&r_int)
            .zip(teams)
            .map(|((&e, &i), t)| combine(e, i, cfg.alpha_for(*t)))
            .collect();
        RewardBundle {
            r_ext,
            raw_bonus,
            r_int,
            r_total,
        }
    }
}
