use std::sync::Arc;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::batch::{map_indexed, map_indexed_sequential, with_threads};
use crate::config::GameConfig;
use crate::engine::{Action, GameState};
use crate::error::Error;
use crate::obs::{local_dims, render_local_into, Observation};
use crate::policy::{make_scripted, sample, PolicyKind};

pub const MIN_BENCH_STEPS: u64 = 10_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub steps: u64,
    pub episodes: u64,
    pub threads: usize,
    pub seconds: f64,
    pub steps_per_sec: f64,
}

/// Play `n_steps` environment steps with wanderer policies, rendering every
/// living player's observation each step. Returns `(steps, episodes started)`.
pub fn simulate_steps(config: &Arc<GameConfig>, n_steps: u64, seed: u64) -> Result<(u64, u64), Error> {
    let n = config.n_players();
    let (h, w) = local_dims(config);
    let mut obs: Vec<Observation> = (0..n).map(|_| Observation::new(h, w)).collect();
    let mut policies = (0..n)
        .map(|_| make_scripted(crate::config::Team::Red, PolicyKind::Wanderer, 0.0, config))
        .collect::<Result<Vec<_>, _>>()?;
    let mut joint = vec![Action::NoOp; n];
    let mut episodes = 1;
    let mut state = GameState::new(Arc::clone(config), seed)?;
    for _ in 0..n_steps {
        if state.is_terminal() {
            state = GameState::new(Arc::clone(config), seed.wrapping_add(episodes))?;
            episodes += 1;
        }
        for i in 0..n {
            joint[i] = Action::NoOp;
            if state.players[i].alive {
                render_local_into(&state, i, &mut obs[i].pixels);
                let d = policies[i].act(&obs[i])?;
                joint[i] = Action::from_index(sample(&d, &mut state.rng), config.auto_shooting).unwrap_or(Action::NoOp);
            }
        }
        state.step(&joint)?;
    }
    Ok((n_steps, episodes))
}

/// Throughput over `threads` independent workers sharing `n_steps`.
pub fn bench(config: Arc<GameConfig>, n_steps: u64, threads: usize) -> Result<BenchReport, Error> {
    bench_with(config, n_steps, threads, true)
}

/// As [`bench`]; `parallel = false` runs the workers one after another.
pub fn bench_with(config: Arc<GameConfig>, n_steps: u64, threads: usize, parallel: bool) -> Result<BenchReport, Error> {
    if n_steps < MIN_BENCH_STEPS {
        return Err(Error::Usage(format!(
            "bench needs at least {MIN_BENCH_STEPS} steps, got {n_steps}"
        )));
    }
    config.validate()?;
    let threads = threads.max(1);
    let per = n_steps / threads as u64;
    let share = |k: usize| per + u64::from((k as u64) < n_steps % threads as u64);
    let work = |k: usize| simulate_steps(&config, share(k), 1 + k as u64 * 1_000_003);
    let start = Instant::now();
    let results = if parallel {
        with_threads(threads, || map_indexed(threads, work))
    } else {
        map_indexed_sequential(threads, work)
    };
    let seconds = start.elapsed().as_secs_f64();
    let mut episodes = 0;
    for r in results {
        episodes += r?.1;
    }
    Ok(BenchReport {
        steps: n_steps,
        episodes,
        threads,
        seconds,
        steps_per_sec: n_steps as f64 / seconds.max(1e-12),
    })
}
