use rtg_core::bbm::BonusConfig;
use rtg_core::engine::{Action, GameState};
use rtg_core::env::{list_scenarios, VecEnv};
use rtg_core::error::{EngineError, Error};
use rtg_core::harness::{read_replay, resimulate, write_replay, Replay, ENGINE_VERSION, FORMAT_VERSION};
use rtg_core::policy::RoleConditionedPolicySet;
use rtg_core::rng::EpisodeRng;

#[test]
fn create_and_observe() {
    let env = VecEnv::create("rescue", 2, 7).unwrap();
    assert_eq!(env.num_envs(), 2);
    assert_eq!(env.n_players(), 6);
    assert_eq!(env.observation_shape(), (6, 42, 39, 3));
    assert_eq!(env.n_actions(), 9);
    assert_eq!(env.observe(0).unwrap().len(), 6 * 42 * 39 * 3);
    assert_eq!(env.state(0).unwrap().seed, 7);
    assert_eq!(env.state(1).unwrap().seed, 8);
    assert!(env.state(2).is_err());
}

#[test]
fn unknown_scenario_lists_valid_names() {
    let err = VecEnv::create("siege", 1, 0).err().unwrap();
    let msg = err.to_string();
    for name in list_scenarios() {
        assert!(msg.contains(name), "{msg}");
    }
    assert_eq!(list_scenarios().len(), 6);
}

#[test]
fn json_configs_are_accepted() {
    let env = VecEnv::create(r#"{"team_counts": [1, 2, 0], "map_width": 16, "map_height": 16}"#, 1, 0).unwrap();
    assert_eq!(env.n_players(), 3);
    assert!(VecEnv::create(r#"{"map_width": 1}"#, 1, 0).is_err());
    let wolf = VecEnv::create(r#"{"scenario": "Wolf", "timeout": 9}"#, 1, 0).unwrap();
    assert!(wolf.config().battle_royale && wolf.config().timeout == 9);
    assert_eq!(wolf.config().team_counts, [1, 3, 0]);
    assert!(VecEnv::create("rescue", 0, 0).is_err());
}

#[test]
fn reset_advances_the_seed() {
    let mut env = VecEnv::create("rescue", 2, 7).unwrap();
    env.reset(0).unwrap();
    assert_eq!(env.state(0).unwrap().seed, 9);
    env.reset(1).unwrap();
    assert_eq!(env.state(1).unwrap().seed, 10);
}

#[test]
fn bad_actions_are_rejected() {
    let mut env = VecEnv::create("rescue", 1, 3).unwrap();
    let err = env.step(0, &[0, 0, 0, 0, 0, 99]).unwrap_err();
    assert!(matches!(err, Error::Usage(_)) && err.to_string().contains("99"));
    assert!(matches!(
        env.step(0, &[0; 5]),
        Err(Error::Engine(EngineError::Arity { .. }))
    ));
}

#[test]
fn step_after_done_errors() {
    let mut env = VecEnv::create(r#"{"scenario": "rescue", "timeout": 4}"#, 1, 0).unwrap();
    for k in 0..4 {
        let out = env.step(0, &[0; 6]).unwrap();
        assert_eq!(out.done, k == 3);
    }
    assert!(matches!(
        env.step(0, &[0; 6]),
        Err(Error::Engine(EngineError::GameOver))
    ));
    env.reset(0).unwrap();
    assert!(env.step(0, &[0; 6]).is_ok());
}

#[test]
fn zero_alpha_returns_extrinsic_reward() {
    let mut plain = VecEnv::create("rescue", 1, 5).unwrap();
    let mut bonus = VecEnv::create("rescue", 1, 5).unwrap();
    bonus
        .attach_bonus(
            BonusConfig {
                alpha: [0.0; 3],
                ..BonusConfig::default()
            },
            RoleConditionedPolicySet::scripted(0.05),
        )
        .unwrap();
    bonus.reset(0).unwrap();
    plain.reset(0).unwrap();
    let mut rng = EpisodeRng::new(1);
    loop {
        let actions: Vec<u32> = (0..6).map(|_| rng.below(9) as u32).collect();
        let a = plain.step(0, &actions).unwrap();
        let b = bonus.step(0, &actions).unwrap();
        assert_eq!(a.rewards, b.rewards);
        assert_eq!(a.observations, b.observations);
        if a.done {
            break;
        }
    }
}

#[test]
fn env_play_matches_replay() {
    let mut env = VecEnv::create("rescue", 1, 31).unwrap();
    let config = env.config().clone();
    let mut rng = EpisodeRng::new(2);
    let mut actions = Vec::new();
    let mut scores = [0.0; 3];
    loop {
        let state: &GameState = env.state(0).unwrap();
        let joint: Vec<u32> = state
            .players
            .iter()
            .map(|p| if p.alive { rng.below(9) as u32 } else { 0 })
            .collect();
        actions.push(
            joint
                .iter()
                .map(|&a| Action::from_index(a as usize, false).unwrap())
                .collect::<Vec<_>>(),
        );
        let out = env.step(0, &joint).unwrap();
        for (score, r) in scores.iter_mut().zip(out.info.team_rewards) {
            *score += r;
        }
        if out.done {
            break;
        }
    }
    let state = env.state(0).unwrap();
    let replay = Replay {
        format_version: FORMAT_VERSION,
        engine_version: ENGINE_VERSION.to_string(),
        config,
        seed: 31,
        actions,
        outcome: state.outcome.unwrap(),
        team_scores: scores,
    };
    let back = read_replay(&write_replay(&replay)).unwrap();
    let sim = resimulate(&back).unwrap();
    assert_eq!(&sim.final_state, state);
    env.close();
}
