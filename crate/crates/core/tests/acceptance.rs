//! Primary acceptance criteria. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any fail.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::Arc;
use std::time::{Duration, Instant};

use rtg_core::bbm::{
    combine, phi, postprocess, rho, step_raw_bonus, BonusConfig, ExactModel, PredictedModel, ReturnNormalizer,
};
use rtg_core::belief::{true_role_metric, true_role_metric_for, BeliefTracker, CounterfactualBank, RoleBelief};
use rtg_core::config::{builtin_scenario, GameConfig, HiddenRoles, ScenarioName, StartingLocations, Team, NUM_TEAMS};
use rtg_core::engine::{Action, GameState, Outcome};
use rtg_core::harness::{
    bench, read_replay, render_replay, resimulate_with, run_episode, write_replay, Assignment, EpisodeOptions,
};
use rtg_core::obs::{can_see, render_local};
use rtg_core::policy::{make_scripted, Policy, PolicyKind, PolicySpec, RoleConditionedPolicySet};
use rtg_core::rng::EpisodeRng;

type Outcome_ = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome_);

fn check(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(elapsed: Duration, limit: Duration) -> Result<(), String> {
    check(elapsed < limit, || format!("took {elapsed:?}, limit {limit:?}"))
}

// ---------------------------------------------------------------- toys

fn random_toy(rng: &mut EpisodeRng, max_steps: u32) -> (GameConfig, RoleConditionedPolicySet) {
    let n = 2 + rng.below(3);
    let mut counts = [0u32; NUM_TEAMS];
    for _ in 0..n {
        counts[rng.below(NUM_TEAMS)] += 1;
    }
    let side = 8 + rng.below(5) as u32;
    let hidden = [HiddenRoles::Default, HiddenRoles::All, HiddenRoles::None][rng.below(3)];
    let config = GameConfig {
        map_width: side,
        map_height: side,
        n_trees: 3,
        team_counts: counts,
        timeout: 1 + rng.below(max_steps as usize) as u32,
        hidden_roles: hidden,
        starting_locations: StartingLocations::Random,
        initial_random_kills: if rng.bernoulli(0.5) { 0.5 } else { 0.0 },
        ..GameConfig::default()
    };
    let spec = |rng: &mut EpisodeRng, team: Team| {
        let kind = match rng.below(3) {
            0 => PolicyKind::default_for(team),
            1 => PolicyKind::Wanderer,
            _ => PolicyKind::Stationary,
        };
        PolicySpec::new(kind, 0.05 + 0.45 * rng.unit())
    };
    let set = RoleConditionedPolicySet::new(spec(rng, Team::Red), spec(rng, Team::Green), spec(rng, Team::Blue));
    (config, set)
}

/// Starting belief of `o` about `s`, from the rules rather than the library.
fn oracle_prior(state: &GameState, o: usize, s: usize) -> [f64; NUM_TEAMS] {
    let cfg = &state.config;
    let (obs, subj) = (&state.players[o], &state.players[s]);
    let visible = o == s
        || match cfg.hidden_roles {
            HiddenRoles::All => true,
            HiddenRoles::None => false,
            HiddenRoles::Default => obs.team == Team::Red,
        };
    let mut p = [0.0; NUM_TEAMS];
    if visible {
        p[subj.team.index()] = 1.0;
        return p;
    }
    let mut counts = cfg.team_counts.map(f64::from);
    counts[obs.team.index()] -= 1.0;
    let total: f64 = counts.iter().sum();
    counts.map(|c| c / total)
}

/// Posterior of every (observer, subject) pair by enumerating every joint
/// role assignment, weighting by prior times the likelihood of every action
/// the observer saw.
fn brute_force_posteriors(
    states: &[GameState],
    actions: &[Vec<Action>],
    set: &RoleConditionedPolicySet,
) -> Vec<[f64; NUM_TEAMS]> {
    let first = &states[0];
    let cfg = Arc::clone(&first.config);
    let n = first.players.len();
    let auto = cfg.auto_shooting;
    // lik[t][s][z]
    let mut fresh: Vec<Vec<Box<dyn Policy>>> = (0..n)
        .map(|_| {
            Team::ALL
                .iter()
                .map(|&z| make_scripted(z, set.spec(z).kind, set.spec(z).epsilon, &cfg).unwrap())
                .collect()
        })
        .collect();
    let mut lik = Vec::new();
    for (t, joint) in actions.iter().enumerate() {
        let st = &states[t];
        let mut row = vec![None; n];
        for s in 0..n {
            if st.players[s].alive {
                let obs = render_local(st, s);
                let a = joint[s].index(auto).unwrap();
                let l: Vec<f64> = (0..NUM_TEAMS).map(|z| fresh[s][z].act(&obs).unwrap().prob(a)).collect();
                row[s] = Some([l[0], l[1], l[2]]);
            }
        }
        lik.push(row);
    }
    let mut out = Vec::with_capacity(n * n);
    for o in 0..n {
        let priors: Vec<[f64; NUM_TEAMS]> = (0..n).map(|s| oracle_prior(first, o, s)).collect();
        let mut marginal = vec![[0.0; NUM_TEAMS]; n];
        let mut total = 0.0;
        for code in 0..NUM_TEAMS.pow(n as u32) {
            let roles: Vec<usize> = (0..n).map(|k| code / NUM_TEAMS.pow(k as u32) % NUM_TEAMS).collect();
            let mut w: f64 = (0..n).map(|s| priors[s][roles[s]]).product();
            if w == 0.0 {
                continue;
            }
            for (t, row) in lik.iter().enumerate() {
                let st = &states[t];
                let (po, view) = (&st.players[o], st.config.team_view_distance[st.players[o].team.index()]);
                if !po.alive {
                    continue;
                }
                for s in (0..n).filter(|&s| s != o) {
                    let ps = &st.players[s];
                    if let Some(l) = row[s] {
                        if ps.alive && ps.pos.chebyshev(po.pos) <= view {
                            w *= l[roles[s]];
                        }
                    }
                }
            }
            total += w;
            for s in 0..n {
                marginal[s][roles[s]] += w;
            }
        }
        for m in marginal {
            out.push(m.map(|x| x / total));
        }
    }
    out
}

fn bayes_oracle() -> Outcome_ {
    let start = Instant::now();
    let mut rng = EpisodeRng::new(20_240_601);
    let mut worst = 0.0f64;
    let mut episodes = 0;
    let mut updates = 0;
    while episodes < 120 {
        let (config, set) = random_toy(&mut rng, 6);
        let seed = rng.next_u64();
        let opts = EpisodeOptions {
            record_beliefs: true,
            ..EpisodeOptions::default()
        };
        let record = run_episode(Arc::new(config), &Assignment::ByRole(set), seed, &opts).map_err(|e| e.to_string())?;
        let mut states = Vec::new();
        resimulate_with(&record.replay, |s| states.push(s.clone())).map_err(|e| e.to_string())?;
        let oracle = brute_force_posteriors(&states, &record.replay.actions, &set);
        let tracked = record.steps.last().and_then(|s| s.beliefs.as_ref()).unwrap();
        for (a, b) in tracked.iter().zip(&oracle) {
            for (x, y) in a.0.iter().zip(b) {
                worst = worst.max((x - y).abs());
            }
            updates += if a.0 != *b { 1 } else { 0 };
        }
        check(record.len() <= 6, || "toy ran past 6 steps".into())?;
        episodes += 1;
    }
    check(worst <= 1e-9, || format!("max deviation {worst:e}"))?;
    within(start.elapsed(), Duration::from_secs(10))?;
    Ok(format!(
        "{episodes} toys, max |tracker - enumeration| = {worst:.1e}, {} non-bitwise pairs, {:?}",
        updates,
        start.elapsed()
    ))
}

fn rho_telescoping() -> Outcome_ {
    let start = Instant::now();
    let mut rng = EpisodeRng::new(77);
    let mut worst = 0.0f64;
    for episode in 0..1000u64 {
        let teams = [Team::ALL[rng.below(3)], Team::ALL[rng.below(3)]];
        let mut counts = [0u32; NUM_TEAMS];
        teams.iter().for_each(|t| counts[t.index()] += 1);
        let config = Arc::new(GameConfig {
            map_width: 6,
            map_height: 6,
            n_trees: 2,
            team_counts: counts,
            timeout: 5 + rng.below(40) as u32,
            starting_locations: StartingLocations::Random,
            initial_random_kills: 0.0,
            hidden_roles: HiddenRoles::None,
            ..GameConfig::default()
        });
        let eps = 0.05 + 0.5 * rng.unit();
        let set = RoleConditionedPolicySet::new(
            PolicySpec::new(PolicyKind::Hunter, eps),
            PolicySpec::new(PolicyKind::Harvester, eps),
            PolicySpec::new(PolicyKind::Rescuer, eps),
        );
        let mut state = GameState::new(Arc::clone(&config), episode).map_err(|e| e.to_string())?;
        let true_role = state.players[1].team;
        let prior = RoleBelief([0.2 + rng.unit(), 0.2 + rng.unit(), 0.2 + rng.unit()]);
        let total: f64 = prior.0.iter().sum();
        let prior = RoleBelief(prior.0.map(|p| p / total));
        let mut tracker = BeliefTracker::from_priors(vec![vec![RoleBelief::one_hot(state.players[0].team), prior]; 2]);
        let mut bank = CounterfactualBank::new(&set, &config).map_err(|e| e.to_string())?;
        let mut policies: Vec<Box<dyn Policy>> = state
            .players
            .iter()
            .map(|p| set.build(p.team, &config).unwrap())
            .collect();
        let mut observer_rng = EpisodeRng::new(episode ^ 0xabcdef);
        let mut log_rho = 0.0;
        let mut log_bonus = 0.0;
        while !state.is_terminal() && state.players.iter().all(|p| p.alive) {
            let obs: Vec<_> = (0..2).map(|i| render_local(&state, i)).collect();
            let mut joint = vec![Action::NoOp; 2];
            let mut liks = vec![None; 2];
            for i in 0..2 {
                let d = policies[i].act(&obs[i]).unwrap();
                joint[i] = Action::from_index(d.sample(&mut state.rng), false).unwrap();
                let cf = bank.evaluate(i, &obs[i]).map_err(|e| e.to_string())?;
                liks[i] = Some(bank.likelihoods(&cf, joint[i]));
            }
            check(can_see(&state, 0, 1), || "toy lost full visibility".into())?;
            let r = rho(true_role, &liks[1].unwrap(), tracker.belief(0, 1)).map_err(|e| e.to_string())?;
            log_rho += r.ln();
            let model = ExactModel {
                tracker: &tracker,
                likelihoods: &liks,
            };
            let raw = step_raw_bonus(&state, &model, &mut observer_rng, 0.0).map_err(|e| e.to_string())?;
            log_bonus -= raw[1];
            tracker.observe_step(&state, &liks).map_err(|e| e.to_string())?;
            state.step(&joint).map_err(|e| e.to_string())?;
        }
        let factor = tracker.belief(0, 1).prob(true_role) / prior.prob(true_role);
        worst = worst.max((log_rho.exp() - factor).abs() / factor.max(1.0));
        worst = worst.max((log_bonus.exp() - factor).abs() / factor.max(1.0));
    }
    check(worst <= 1e-6, || format!("max relative deviation {worst:e}"))?;
    within(start.elapsed(), Duration::from_secs(30))?;
    Ok(format!(
        "1000 episodes, max deviation {worst:.1e}, {:?}",
        start.elapsed()
    ))
}

fn reward_exactness() -> Outcome_ {
    let scripted = Assignment::ByRole(RoleConditionedPolicySet::scripted(0.05));
    let opts = EpisodeOptions::untracked();

    let blue2 = Arc::new(GameConfig {
        initial_random_kills: 0.0,
        ..builtin_scenario(ScenarioName::Blue2)
    });
    let mut rescues = 0;
    for seed in 0..200 {
        let r = run_episode(Arc::clone(&blue2), &scripted, seed, &opts).map_err(|e| e.to_string())?;
        if r.replay.outcome == Outcome::GeneralRescued {
            rescues += 1;
            let blue = r.team_scores()[Team::Blue.index()];
            check((blue - 10.0).abs() <= 1e-9, || {
                format!("seed {seed}: blue total {blue}")
            })?;
        }
    }
    check(rescues >= 190, || format!("only {rescues}/200 Blue2 rescues"))?;

    let green2 = Arc::new(GameConfig {
        initial_random_kills: 0.0,
        ..builtin_scenario(ScenarioName::Green2)
    });
    let mut harvests = 0;
    for seed in 0..200 {
        let r = run_episode(Arc::clone(&green2), &scripted, seed, &opts).map_err(|e| e.to_string())?;
        let trees: usize = r
            .steps
            .iter()
            .flat_map(|s| &s.events)
            .filter(|e| matches!(e, rtg_core::engine::Event::Harvested { .. }))
            .count();
        if trees == 10 {
            harvests += 1;
            let green = r.team_scores()[Team::Green.index()];
            check(green == 10.0, || format!("seed {seed}: green total {green}"))?;
        }
    }
    check(harvests >= 190, || format!("only {harvests}/200 Green2 full harvests"))?;

    let still = Assignment::ByRole(RoleConditionedPolicySet::new(
        PolicySpec::new(PolicyKind::Stationary, 0.0),
        PolicySpec::new(PolicyKind::Stationary, 0.0),
        PolicySpec::new(PolicyKind::Stationary, 0.0),
    ));
    let rescue = Arc::new(builtin_scenario(ScenarioName::Rescue));
    for seed in 0..20 {
        let r = run_episode(Arc::clone(&rescue), &still, seed, &opts).map_err(|e| e.to_string())?;
        check(r.replay.outcome == Outcome::Timeout && r.len() == 500, || {
            "stationary game did not time out".into()
        })?;
        let totals = r.team_scores();
        check(totals == [5.0, 0.0, -5.0], || {
            format!("seed {seed}: timeout totals {totals:?}")
        })?;
        check(r.steps.last().unwrap().team_rewards == [5.0, 0.0, -5.0], || {
            "final step rewards".into()
        })?;
    }
    Ok(format!(
        "Blue2 {rescues}/200 rescues all at 10.0, Green2 {harvests}/200 full harvests at 10.0, timeouts (5, 0, -5)"
    ))
}

fn bbm_sign() -> Outcome_ {
    let config = Arc::new(GameConfig {
        map_width: 6,
        map_height: 6,
        n_trees: 0,
        team_counts: [1, 1, 0],
        starting_locations: StartingLocations::Random,
        initial_random_kills: 0.0,
        hidden_roles: HiddenRoles::None,
        ..GameConfig::default()
    });
    let state = GameState::new(config, 3).map_err(|e| e.to_string())?;
    let red = state.players.iter().position(|p| p.team == Team::Red).unwrap();
    let observer = 1 - red;
    // red plays action A with 0.8, green plays A with 0.2; blue is indifferent
    let red_typical = [0.8, 0.2, 0.5];
    let green_typical = [0.2, 0.8, 0.5];
    let expected = [-(0.8f64 / 0.5).ln(), -(0.2f64 / 0.5).ln()];
    let mut got = [0.0; 2];
    for (k, lik) in [red_typical, green_typical].into_iter().enumerate() {
        let mut model = PredictedModel::new(2);
        model.set(red, observer, lik, RoleBelief::uniform());
        model.set(observer, red, [0.5; 3], RoleBelief::uniform());
        let mut rng = EpisodeRng::new(0);
        let raw = step_raw_bonus(&state, &model, &mut rng, 1.0).map_err(|e| e.to_string())?;
        got[k] = raw[red];
    }
    check(got[0] < 0.0 && got[1] > 0.0, || format!("signs wrong: {got:?}"))?;
    for k in 0..2 {
        check((got[k] - expected[k]).abs() <= 1e-9, || {
            format!("{} vs {}", got[k], expected[k])
        })?;
    }
    Ok(format!("red-typical {:.6}, green-typical {:+.6}", got[0], got[1]))
}

fn pipeline_constants() -> Outcome_ {
    let cfg = BonusConfig::default();
    let fresh = ReturnNormalizer::new(4, cfg.gamma);
    let teams = [Team::Red, Team::Red, Team::Green, Team::Blue];
    let out = postprocess(&[25.0, -31.0, 3.0, -7.0], &teams, 20_000_000, &fresh, &cfg);
    check(out == vec![20.0, -20.0, 0.0, 0.0], || format!("clip/mask: {out:?}"))?;
    check(phi(5_000_000, cfg.warmup_horizon) == 0.5, || "phi(5e6)".into())?;
    for t in [10_000_000u64, 10_000_001, 300_000_000] {
        check(phi(t, cfg.warmup_horizon) == 1.0, || format!("phi({t})"))?;
    }
    let half = postprocess(&[25.0], &[Team::Red], 5_000_000, &fresh, &cfg);
    check(half == vec![10.0], || format!("warm-up half: {half:?}"))?;
    let mut sigma2 = ReturnNormalizer::new(1, 0.0);
    sigma2.update(&[2.0], &[false]);
    sigma2.update(&[-2.0], &[false]);
    let scaled = postprocess(&[3.0], &[Team::Red], 10_000_000, &sigma2, &cfg);
    check(scaled == vec![1.5], || format!("sigma 2: {scaled:?}"))?;
    check(combine(1.0, 2.0, 0.5) == 2.0, || "combine".into())?;
    check(combine(-3.0, 9.0, 0.0) == -3.0, || "alpha 0".into())?;
    check(combine(0.0, 1.75, 1.0) == 1.75, || "identity".into())?;
    Ok("clip +-20, phi(5e6) = 0.5, phi(>=1e7) = 1, non-red zeroed, r = r_ext + alpha r_int".into())
}

fn normalizer_variance() -> Outcome_ {
    let mut rng = EpisodeRng::new(4242);
    let gamma = 0.99;
    let mut norm = ReturnNormalizer::new(1, gamma);
    let mut ret = 0.0;
    let mut moments = rtg_core::bbm::RunningMoments::default();
    for _ in 0..100_000 {
        // unit variance: uniform on [-sqrt3, sqrt3]
        let b = (2.0 * rng.unit() - 1.0) * 3f64.sqrt();
        norm.update(&[b], &[false]);
        ret = gamma * ret + b / norm.scale();
        moments.push(ret);
    }
    let var = moments.variance();
    check((var - 1.0).abs() <= 0.05, || {
        format!("post-normalization variance {var}")
    })?;
    Ok(format!("variance {var:.4} over 1e5 steps"))
}

fn random_config(rng: &mut EpisodeRng) -> GameConfig {
    let base = builtin_scenario(ScenarioName::ALL[rng.below(6)]);
    GameConfig {
        map_width: 12 + rng.below(21) as u32,
        map_height: 12 + rng.below(21) as u32,
        timeout: 20 + rng.below(200) as u32,
        auto_shooting: rng.bernoulli(0.3),
        zero_sum: rng.bernoulli(0.3),
        reveal_team_on_death: rng.bernoulli(0.3),
        ..base
    }
}

fn determinism() -> Outcome_ {
    let mut rng = EpisodeRng::new(99);
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    for k in 0..100 {
        let config = Arc::new(random_config(&mut rng));
        let seed = rng.next_u64();
        let n = config.n_players();
        let space = Action::space(config.auto_shooting);
        let steps = rng.below(config.timeout as usize + 1);
        let forced: Vec<Vec<Action>> = (0..steps)
            .map(|_| (0..n).map(|_| space[rng.below(space.len())]).collect())
            .collect();
        let opts = EpisodeOptions {
            record_beliefs: true,
            bonus: Some(BonusConfig::default()),
            forced_actions: Some(forced),
            ..EpisodeOptions::default()
        };
        let set = Assignment::ByRole(RoleConditionedPolicySet::scripted(0.1));
        let a = run_episode(Arc::clone(&config), &set, seed, &opts).map_err(|e| e.to_string())?;
        let b = run_episode(Arc::clone(&config), &set, seed, &opts).map_err(|e| e.to_string())?;
        check(a.to_json() == b.to_json(), || format!("triple {k}: records differ"))?;
        let bytes = write_replay(&a.replay);
        check(bytes == write_replay(&b.replay), || {
            format!("triple {k}: replay bytes differ")
        })?;
        check(read_replay(&bytes).map_err(|e| e.to_string())? == a.replay, || {
            "replay round trip".into()
        })?;
        let replayed = EpisodeOptions {
            forced_actions: Some(a.replay.actions.clone()),
            ..opts.clone()
        };
        let c = run_episode(Arc::clone(&config), &set, seed, &replayed).map_err(|e| e.to_string())?;
        check(c.to_json() == a.to_json(), || {
            format!("triple {k}: replayed record differs")
        })?;
        if k < 5 {
            let (d1, d2) = (dir.path().join(format!("{k}a")), dir.path().join(format!("{k}b")));
            let f1 = render_replay(&a.replay, &d1).map_err(|e| e.to_string())?;
            let f2 = render_replay(&a.replay, &d2).map_err(|e| e.to_string())?;
            check(f1.len() == a.len() + 1, || "frame count".into())?;
            for (x, y) in f1.iter().zip(&f2) {
                check(std::fs::read(x).unwrap() == std::fs::read(y).unwrap(), || {
                    format!("frame {x:?} differs")
                })?;
            }
        }
    }
    Ok("100 triples byte-identical (records, replays, re-simulation); frames identical".into())
}

fn baseline_metric() -> Outcome_ {
    // pinned by scripts/count_prior_metric.py
    const ALL_OBSERVERS: f64 = 0.550_224_768_656_339_7;
    const BLUE_OBSERVERS: f64 = 0.452_986_880_164_540_3;
    let config = Arc::new(GameConfig {
        initial_random_kills: 0.0,
        ..builtin_scenario(ScenarioName::Rescue)
    });
    for seed in 0..50 {
        let state = GameState::new(Arc::clone(&config), seed).map_err(|e| e.to_string())?;
        let tracker = BeliefTracker::new(&state);
        let all = true_role_metric(&tracker, &state).unwrap();
        let blue = true_role_metric_for(&tracker, &state, Team::Blue).unwrap();
        let red = true_role_metric_for(&tracker, &state, Team::Red).unwrap();
        check((all - ALL_OBSERVERS).abs() <= 1e-12, || format!("all observers {all}"))?;
        check((blue - BLUE_OBSERVERS).abs() <= 1e-12, || {
            format!("blue observers {blue}")
        })?;
        check(red == 1.0, || format!("red observer {red}"))?;
    }
    Ok(format!("all {ALL_OBSERVERS:.6}, blue {BLUE_OBSERVERS:.6}, red 1.0"))
}

fn throughput() -> Outcome_ {
    let report = bench(Arc::new(builtin_scenario(ScenarioName::Rescue)), 200_000, 1).map_err(|e| e.to_string())?;
    check(report.steps_per_sec >= 10_000.0, || {
        format!("{:.0} steps/s", report.steps_per_sec)
    })?;
    Ok(format!("{:.0} env-steps/s single-threaded", report.steps_per_sec))
}

fn main() {
    let criteria: [Criterion; 9] = [
        ("bayes oracle equivalence", bayes_oracle),
        ("rho telescoping", rho_telescoping),
        ("reward exactness", reward_exactness),
        ("bbm sign property", bbm_sign),
        ("pipeline constants", pipeline_constants),
        ("normalizer unit variance", normalizer_variance),
        ("determinism", determinism),
        ("baseline metric", baseline_metric),
        ("throughput", throughput),
    ];
    let mut failed = 0;
    for (name, run) in criteria {
        let result = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|p| {
            Err(p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panicked".into()))
        });
        match result {
            Ok(detail) => println!("PASS {name}: {detail}"),
            Err(why) => {
                failed += 1;
                println!("FAIL {name}: {why}");
            }
        }
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
