use std::sync::Arc;

use rtg_core::config::{builtin_scenario, GameConfig, ScenarioName, Team};
use rtg_core::engine::{Event, GameState, Outcome};
use rtg_core::harness::{run_episode, Assignment, EpisodeOptions};
use rtg_core::obs::render_local;
use rtg_core::policy::{make_scripted, ActionDistribution, PolicyKind, PolicySpec, RoleConditionedPolicySet};
use rtg_core::rng::EpisodeRng;

fn baseline(name: ScenarioName) -> Arc<GameConfig> {
    Arc::new(GameConfig {
        initial_random_kills: 0.0,
        ..builtin_scenario(name)
    })
}

fn scripted() -> Assignment {
    Assignment::ByRole(RoleConditionedPolicySet::scripted(0.05))
}

#[test]
fn uniform_draws_are_uniform() {
    let dist = ActionDistribution::uniform(9);
    let mut rng = EpisodeRng::new(5);
    let mut counts = [0usize; 9];
    for _ in 0..90_000 {
        counts[dist.sample(&mut rng)] += 1;
    }
    for c in counts {
        let f = c as f64 / 90_000.0;
        assert!((f - 1.0 / 9.0).abs() <= 0.005, "frequency {f}");
    }
}

#[test]
fn wanderer_is_uniform_and_epsilon_mixes() {
    let config = Arc::new(builtin_scenario(ScenarioName::Rescue));
    let state = GameState::new(Arc::clone(&config), 3).unwrap();
    let obs = render_local(&state, 0);
    let team = state.players[0].team;
    let mut wanderer = make_scripted(team, PolicyKind::Wanderer, 0.0, &config).unwrap();
    let d = wanderer.act(&obs).unwrap();
    assert!(d.probs().iter().all(|&p| p == 1.0 / 9.0));

    let mut greedy = make_scripted(team, PolicyKind::Stationary, 0.1, &config).unwrap();
    let d = greedy.act(&obs).unwrap();
    assert!((d.prob(0) - (0.9 + 0.1 / 9.0)).abs() < 1e-12);
    for a in 1..9 {
        assert!((d.prob(a) - 0.1 / 9.0).abs() < 1e-12);
    }
    assert!((d.probs().iter().sum::<f64>() - 1.0).abs() < 1e-12);
}

#[test]
fn incompatible_kinds_are_rejected() {
    let config = Arc::new(GameConfig::default());
    assert!(make_scripted(Team::Blue, PolicyKind::Hunter, 0.05, &config).is_err());
    assert!(make_scripted(Team::Red, PolicyKind::Harvester, 0.05, &config).is_err());
    assert!(make_scripted(Team::Red, PolicyKind::Wanderer, 1.5, &config).is_err());
}

#[test]
fn specs_parse() {
    let s: PolicySpec = "hunter:0.1".parse().unwrap();
    assert_eq!(s, PolicySpec::new(PolicyKind::Hunter, 0.1));
    let s: PolicySpec = "rescuer".parse().unwrap();
    assert_eq!(s.epsilon, PolicySpec::DEFAULT_EPSILON);
    assert!("sniper:0.1".parse::<PolicySpec>().is_err());
    assert!("hunter:2".parse::<PolicySpec>().is_err());
    assert_eq!(s.to_string().parse::<PolicySpec>().unwrap(), s);
}

#[test]
fn rescuer_pair_rescues() {
    let config = baseline(ScenarioName::Blue2);
    let rescued = (0..200)
        .filter(|&seed| {
            let r = run_episode(Arc::clone(&config), &scripted(), seed, &EpisodeOptions::untracked()).unwrap();
            r.replay.outcome == Outcome::GeneralRescued
        })
        .count();
    assert!(rescued >= 190, "{rescued}/200");
}

#[test]
fn harvester_pair_clears_the_map() {
    let config = baseline(ScenarioName::Green2);
    let full = (0..200)
        .filter(|&seed| {
            let r = run_episode(Arc::clone(&config), &scripted(), seed, &EpisodeOptions::untracked()).unwrap();
            let n = r
                .steps
                .iter()
                .flat_map(|s| &s.events)
                .filter(|e| matches!(e, Event::Harvested { .. }))
                .count();
            n == 10
        })
        .count();
    assert!(full >= 190, "{full}/200");
}

#[test]
fn hunter_pair_kills() {
    let config = baseline(ScenarioName::Red2);
    let kills = (0..100)
        .filter(|&seed| {
            let r = run_episode(Arc::clone(&config), &scripted(), seed, &EpisodeOptions::untracked()).unwrap();
            r.replay.outcome == Outcome::GeneralKilled
        })
        .count();
    assert!(kills >= 95, "{kills}/100");
}

#[test]
fn policies_are_deterministic_given_observations() {
    let config = Arc::new(builtin_scenario(ScenarioName::Rescue));
    let state = GameState::new(Arc::clone(&config), 11).unwrap();
    for (i, p) in state.players.iter().enumerate() {
        let obs = render_local(&state, i);
        let kind = PolicyKind::default_for(p.team);
        let mut a = make_scripted(p.team, kind, 0.05, &config).unwrap();
        let mut b = make_scripted(p.team, kind, 0.05, &config).unwrap();
        let first = a.act(&obs).unwrap();
        assert_eq!(first, b.act(&obs).unwrap());
        a.reset();
        assert_eq!(a.act(&obs).unwrap(), first);
    }
}
