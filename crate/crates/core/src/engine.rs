//! Game state and the deterministic transition function.
//!
//! A step resolves in fixed phases so the result never depends on player
//! order: simultaneous movement (with general dragging and harvesting),
//! simultaneous shooting against post-move positions, blue shaping rewards,
//! termination, the optional zero-sum transform, and finally reward broadcast
//! and cooldown ticks.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::config::{GameConfig, Team, NUM_TEAMS};
use crate::error::EngineError;
use crate::rng::EpisodeRng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Pos {
    pub x: i32,
    pub y: i32,
}

impl Pos {
    pub const fn new(x: i32, y: i32) -> Pos {
        Pos { x, y }
    }

    #[inline]
    pub fn step(self, dir: Direction) -> Pos {
        let (dx, dy) = dir.delta();
        Pos::new(self.x + dx, self.y + dy)
    }

    #[inline]
    pub fn offset(self, dx: i32, dy: i32) -> Pos {
        Pos::new(self.x + dx, self.y + dy)
    }

    #[inline]
    pub fn manhattan(self, other: Pos) -> u32 {
        self.x.abs_diff(other.x) + self.y.abs_diff(other.y)
    }

    #[inline]
    pub fn chebyshev(self, other: Pos) -> u32 {
        self.x.abs_diff(other.x).max(self.y.abs_diff(other.y))
    }

    #[inline]
    pub fn dist2(self, other: Pos) -> u32 {
        let dx = self.x.abs_diff(other.x);
        let dy = self.y.abs_diff(other.y);
        dx * dx + dy * dy
    }
}

/// Cardinal direction. North is toward y = 0.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Direction {
    North,
    South,
    East,
    West,
}

impl Direction {
    pub const ALL: [Direction; 4] = [Direction::North, Direction::South, Direction::East, Direction::West];

    #[inline]
    pub fn delta(self) -> (i32, i32) {
        match self {
            Direction::North => (0, -1),
            Direction::South => (0, 1),
            Direction::East => (1, 0),
            Direction::West => (-1, 0),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Action {
    NoOp,
    MoveN,
    MoveS,
    MoveE,
    MoveW,
    ShootN,
    ShootS,
    ShootE,
    ShootW,
    AutoShoot,
}

const CARDINAL_ACTIONS: [Action; 9] = [
    Action::NoOp,
    Action::MoveN,
    Action::MoveS,
    Action::MoveE,
    Action::MoveW,
    Action::ShootN,
    Action::ShootS,
    Action::ShootE,
    Action::ShootW,
];

const AUTO_ACTIONS: [Action; 6] = [
    Action::NoOp,
    Action::MoveN,
    Action::MoveS,
    Action::MoveE,
    Action::MoveW,
    Action::AutoShoot,
];

impl Action {
    /// The action set, in index order, for a given shooting mode.
    pub fn space(auto_shooting: bool) -> &'static [Action] {
        if auto_shooting {
            &AUTO_ACTIONS
        } else {
            &CARDINAL_ACTIONS
        }
    }

    pub fn from_index(index: usize, auto_shooting: bool) -> Option<Action> {
        Action::space(auto_shooting).get(index).copied()
    }

    pub fn index(self, auto_shooting: bool) -> Option<usize> {
        Action::space(auto_shooting).iter().position(|&a| a == self)
    }

    pub fn move_direction(self) -> Option<Direction> {
        match self {
            Action::MoveN => Some(Direction::North),
            Action::MoveS => Some(Direction::South),
            Action::MoveE => Some(Direction::East),
            Action::MoveW => Some(Direction::West),
            _ => None,
        }
    }

    pub fn shoot_direction(self) -> Option<Direction> {
        match self {
            Action::ShootN => Some(Direction::North),
            Action::ShootS => Some(Direction::South),
            Action::ShootE => Some(Direction::East),
            Action::ShootW => Some(Direction::West),
            _ => None,
        }
    }

    pub fn is_shot(self) -> bool {
        self.shoot_direction().is_some() || self == Action::AutoShoot
    }

    pub fn moving(dir: Direction) -> Action {
        match dir {
            Direction::North => Action::MoveN,
            Direction::South => Action::MoveS,
            Direction::East => Action::MoveE,
            Direction::West => Action::MoveW,
        }
    }

    pub fn shooting(dir: Direction) -> Action {
        match dir {
            Direction::North => Action::ShootN,
            Direction::South => Action::ShootS,
            Direction::East => Action::ShootE,
            Direction::West => Action::ShootW,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct General {
    pub pos: Pos,
    pub health: u32,
    /// Lowest Manhattan distance to a map edge reached so far this episode.
    pub min_edge_distance: u32,
}

impl General {
    pub fn alive(&self) -> bool {
        self.health > 0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Player {
    pub index: usize,
    /// Index into the id-colour palette.
    pub id_color: usize,
    pub team: Team,
    pub pos: Pos,
    pub health: u32,
    pub shoot_cooldown: u32,
    pub alive: bool,
    pub has_seen_general: bool,
    /// Where the body lies once dead.
    pub body: Option<Pos>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Outcome {
    GeneralKilled,
    GeneralRescued,
    Timeout,
    /// Battle royale ended; `None` when nobody survived.
    LastTeamStanding(Option<Team>),
}

impl Outcome {
    pub fn code(self) -> u8 {
        match self {
            Outcome::GeneralKilled => 1,
            Outcome::GeneralRescued => 2,
            Outcome::Timeout => 3,
            Outcome::LastTeamStanding(None) => 4,
            Outcome::LastTeamStanding(Some(t)) => 5 + t.index() as u8,
        }
    }

    pub fn from_code(code: u8) -> Option<Outcome> {
        Some(match code {
            1 => Outcome::GeneralKilled,
            2 => Outcome::GeneralRescued,
            3 => Outcome::Timeout,
            4 => Outcome::LastTeamStanding(None),
            5..=7 => Outcome::LastTeamStanding(Team::from_index((code - 5) as usize)),
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ShotTarget {
    Player(usize),
    General,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Event {
    Moved { player: usize, from: Pos, to: Pos },
    Harvested { player: usize, at: Pos },
    Shot { shooter: usize, target: Option<ShotTarget> },
    GeneralDragged { from: Pos, to: Pos, by: Vec<usize> },
    BlueAdjacency,
    GeneralShaping { edge_distance: u32, reward: f64 },
    Killed { player: usize, by: Vec<usize> },
    Terminal(Outcome),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepResult {
    /// Extrinsic reward per player (the team reward, broadcast).
    pub rewards: Vec<f64>,
    pub team_rewards: [f64; NUM_TEAMS],
    pub events: Vec<Event>,
    pub done: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GameState {
    pub config: Arc<GameConfig>,
    pub seed: u64,
    pub t: u32,
    /// Row-major tree layer, `map_width * map_height`.
    pub trees: Vec<bool>,
    /// `None` in battle royale.
    pub general: Option<General>,
    pub players: Vec<Player>,
    pub team_cumulative_reward: [f64; NUM_TEAMS],
    pub blue_adjacency_awarded: bool,
    pub rng: EpisodeRng,
    pub outcome: Option<Outcome>,
}

/// Manhattan distance from a tile to the nearest map edge.
#[inline]
pub fn edge_distance(pos: Pos, width: u32, height: u32) -> u32 {
    let (w, h) = (width as i32, height as i32);
    pos.x.min(pos.y).min(w - 1 - pos.x).min(h - 1 - pos.y).max(0) as u32
}

impl GameState {
    /// Build the opening position. Pure function of `(config, seed)`.
    pub fn new(config: Arc<GameConfig>, seed: u64) -> Result<GameState, EngineError> {
        let mut rng = EpisodeRng::new(seed);
        let (w, h) = (config.map_width as i32, config.map_height as i32);
        let n_tiles = (w * h) as usize;
        let tile_at = |i: usize| Pos::new(i as i32 % w, i as i32 / w);

        let general = if config.has_general() {
            let x = 2 + rng.below((w - 4) as usize) as i32;
            let y = 2 + rng.below((h - 4) as usize) as i32;
            let pos = Pos::new(x, y);
            Some(General {
                pos,
                health: config.general_initial_health,
                min_edge_distance: edge_distance(pos, config.map_width, config.map_height),
            })
        } else {
            None
        };
        let general_pos = general.as_ref().map(|g| g.pos);

        let mut trees = vec![false; n_tiles];
        let mut pool: Vec<usize> = (0..n_tiles).filter(|&i| Some(tile_at(i)) != general_pos).collect();
        let chosen = rng
            .choose_distinct(&mut pool, config.n_trees as usize)
            .ok_or(EngineError::PlacementInfeasible { what: "trees" })?;
        for i in chosen {
            trees[i] = true;
        }

        let mut roles: Vec<Team> = Team::ALL
            .iter()
            .flat_map(|&t| std::iter::repeat_n(t, config.team_counts[t.index()] as usize))
            .collect();
        rng.shuffle(&mut roles);
        let n = roles.len();

        let allowed = |i: usize| {
            let p = tile_at(i);
            !trees[i] && general_pos.is_none_or(|g| p.chebyshev(g) > 2)
        };
        let spots: Vec<usize> = match config.starting_locations {
            crate::config::StartingLocations::Random => {
                let mut pool: Vec<usize> = (0..n_tiles).filter(|&i| allowed(i)).collect();
                rng.choose_distinct(&mut pool, n)
                    .ok_or(EngineError::PlacementInfeasible { what: "players" })?
            }
            crate::config::StartingLocations::Together => {
                const CLUSTER_RADIUS: i32 = 3;
                const MAX_ANCHOR_DRAWS: usize = 256;
                let mut found = None;
                for _ in 0..MAX_ANCHOR_DRAWS {
                    let anchor = tile_at(rng.below(n_tiles));
                    let mut pool: Vec<usize> = Vec::new();
                    for y in (anchor.y - CLUSTER_RADIUS).max(0)..=(anchor.y + CLUSTER_RADIUS).min(h - 1) {
                        for x in (anchor.x - CLUSTER_RADIUS).max(0)..=(anchor.x + CLUSTER_RADIUS).min(w - 1) {
                            let i = (y * w + x) as usize;
                            if allowed(i) {
                                pool.push(i);
                            }
                        }
                    }
                    if pool.len() >= n {
                        found = rng.choose_distinct(&mut pool, n);
                        break;
                    }
                }
                found.ok_or(EngineError::PlacementInfeasible { what: "players" })?
            }
        };

        let mut players: Vec<Player> = roles
            .iter()
            .zip(&spots)
            .enumerate()
            .map(|(index, (&team, &spot))| Player {
                index,
                id_color: index,
                team,
                pos: tile_at(spot),
                health: config.player_initial_health,
                shoot_cooldown: 0,
                alive: true,
                has_seen_general: false,
                body: None,
            })
            .collect();

        if rng.bernoulli(config.initial_random_kills) && n > 0 {
            let teams: Vec<Team> = Team::ALL
                .iter()
                .copied()
                .filter(|t| config.team_counts[t.index()] > 0)
                .collect();
            let team = teams[rng.below(teams.len())];
            let members: Vec<usize> = players.iter().filter(|p| p.team == team).map(|p| p.index).collect();
            let victim = members[rng.below(members.len())];
            let p = &mut players[victim];
            p.health = 0;
            p.alive = false;
            p.body = Some(p.pos);
        }

        let mut state = GameState {
            config,
            seed,
            t: 0,
            trees,
            general,
            players,
            team_cumulative_reward: [0.0; NUM_TEAMS],
            blue_adjacency_awarded: false,
            rng,
            outcome: None,
        };
        state.update_general_sightings();
        Ok(state)
    }

    #[inline]
    pub fn width(&self) -> u32 {
        self.config.map_width
    }

    #[inline]
    pub fn height(&self) -> u32 {
        self.config.map_height
    }

    #[inline]
    pub fn in_bounds(&self, p: Pos) -> bool {
        p.x >= 0 && p.y >= 0 && (p.x as u32) < self.width() && (p.y as u32) < self.height()
    }

    #[inline]
    pub fn tile_index(&self, p: Pos) -> usize {
        p.y as usize * self.width() as usize + p.x as usize
    }

    #[inline]
    pub fn has_tree(&self, p: Pos) -> bool {
        self.in_bounds(p) && self.trees[self.tile_index(p)]
    }

    pub fn tree_count(&self) -> usize {
        self.trees.iter().filter(|&&t| t).count()
    }

    pub fn n_players(&self) -> usize {
        self.players.len()
    }

    pub fn is_terminal(&self) -> bool {
        self.outcome.is_some()
    }

    pub fn living_general(&self) -> Option<&General> {
        self.general.as_ref().filter(|g| g.alive())
    }

    pub fn player_team(&self, i: usize) -> Team {
        self.players[i].team
    }

    fn update_general_sightings(&mut self) {
        let Some(g) = self.living_general().map(|g| g.pos) else {
            return;
        };
        let sight = self.config.team_general_view_distance;
        for p in self.players.iter_mut().filter(|p| p.alive) {
            if p.pos.chebyshev(g) <= sight[p.team.index()] {
                p.has_seen_general = true;
            }
        }
    }

    /// Entity hit by a shot from `shooter`, or `None` on a miss.
    ///
    /// Cardinal shots travel up to the team's range and stop at the nearest
    /// living player or the general; a player standing on the general's tile
    /// absorbs the shot first. Auto shots pick the nearest visible living
    /// player by Euclidean distance within range, ties to the lowest index.
    pub fn resolve_shot(&self, shooter: usize, action: Action) -> Option<ShotTarget> {
        let s = &self.players[shooter];
        let range = self.config.team_shoot_range[s.team.index()];
        if let Some(dir) = action.shoot_direction() {
            let general = self.living_general().map(|g| g.pos);
            let mut tile = s.pos;
            for _ in 0..range {
                tile = tile.step(dir);
                if !self.in_bounds(tile) {
                    return None;
                }
                if let Some(p) = self
                    .players
                    .iter()
                    .find(|p| p.alive && p.index != shooter && p.pos == tile)
                {
                    return Some(ShotTarget::Player(p.index));
                }
                if general == Some(tile) {
                    return Some(ShotTarget::General);
                }
            }
            None
        } else if action == Action::AutoShoot {
            let view = self.config.team_view_distance[s.team.index()];
            self.players
                .iter()
                .filter(|p| p.alive && p.index != shooter)
                .filter(|p| p.pos.chebyshev(s.pos) <= view && p.pos.dist2(s.pos) <= range * range)
                .min_by_key(|p| (p.pos.dist2(s.pos), p.index))
                .map(|p| ShotTarget::Player(p.index))
        } else {
            None
        }
    }

    /// Whether `mover` stepping in `dir` would drag the general, judged on
    /// the current (pre-move) positions.
    pub fn resolve_drag(&self, mover: usize, dir: Direction) -> bool {
        let Some(g) = self.living_general() else {
            return false;
        };
        let m = &self.players[mover];
        if !m.alive || m.pos.manhattan(g.pos) != 1 {
            return false;
        }
        let helpers = self
            .players
            .iter()
            .filter(|p| p.alive && p.pos.manhattan(g.pos) <= self.config.help_distance)
            .count();
        helpers >= self.config.players_to_move_general as usize && self.in_bounds(g.pos.step(dir))
    }

    fn check_actions(&self, actions: &[Action]) -> Result<(), EngineError> {
        if self.is_terminal() {
            return Err(EngineError::GameOver);
        }
        if actions.len() != self.players.len() {
            return Err(EngineError::Arity {
                expected: self.players.len(),
                got: actions.len(),
            });
        }
        let auto = self.config.auto_shooting;
        for (p, &a) in self.players.iter().zip(actions) {
            if a.index(auto).is_none() {
                return Err(EngineError::UnavailableAction { action: a });
            }
            if !p.alive && a != Action::NoOp {
                return Err(EngineError::DeadPlayerActed { player: p.index });
            }
        }
        Ok(())
    }

    /// Advance one step with one action per player.
    pub fn step(&mut self, actions: &[Action]) -> Result<StepResult, EngineError> {
        self.check_actions(actions)?;
        let cfg = Arc::clone(&self.config);
        let mut events = Vec::new();
        let mut team_r = [0.0f64; NUM_TEAMS];
        const RED: usize = 0;
        const GREEN: usize = 1;
        const BLUE: usize = 2;

        // Phase 1: movement.
        let general_before = self.living_general().map(|g| g.pos);
        let intents: Vec<Option<(Direction, Pos)>> = self
            .players
            .iter()
            .zip(actions)
            .map(|(p, a)| {
                let dir = a.move_direction().filter(|_| p.alive)?;
                let to = p.pos.step(dir);
                self.in_bounds(to).then_some((dir, to))
            })
            .collect();
        let draggers: Vec<usize> = intents
            .iter()
            .enumerate()
            .filter_map(|(i, it)| it.filter(|(d, _)| self.resolve_drag(i, *d)).map(|_| i))
            .collect();
        let drag_dir = match draggers.split_first() {
            Some((&first, rest)) => {
                let d = intents[first].unwrap().0;
                rest.iter().all(|&i| intents[i].unwrap().0 == d).then_some(d)
            }
            None => None,
        };
        let general_after = match (general_before, drag_dir) {
            (Some(g), Some(d)) => Some(g.step(d)),
            (g, _) => g,
        };
        let mut moved = vec![false; self.players.len()];
        for (i, intent) in intents.iter().enumerate() {
            let Some((_, to)) = *intent else { continue };
            let dragging = drag_dir.is_some() && draggers.contains(&i);
            if !dragging && (Some(to) == general_before || Some(to) == general_after) {
                continue;
            }
            let from = self.players[i].pos;
            self.players[i].pos = to;
            moved[i] = true;
            events.push(Event::Moved { player: i, from, to });
        }
        if let (Some(from), Some(to), Some(_)) = (general_before, general_after, drag_dir) {
            if let Some(g) = self.general.as_mut() {
                g.pos = to;
            }
            events.push(Event::GeneralDragged {
                from,
                to,
                by: draggers.clone(),
            });
        }
        for i in 0..self.players.len() {
            let p = &self.players[i];
            if moved[i] && p.team == Team::Green && self.has_tree(p.pos) {
                let (at, idx) = (p.pos, self.tile_index(p.pos));
                self.trees[idx] = false;
                team_r[GREEN] += cfg.reward_per_tree;
                events.push(Event::Harvested { player: i, at });
            }
        }
        self.update_general_sightings();

        // Phase 2: shooting, resolved against post-move positions.
        let mut hits: Vec<(usize, ShotTarget)> = Vec::new();
        for i in 0..self.players.len() {
            let a = actions[i];
            let p = &self.players[i];
            if !p.alive || !a.is_shot() || p.shoot_cooldown > 0 {
                continue;
            }
            let target = self.resolve_shot(i, a);
            if a == Action::AutoShoot && target.is_none() {
                continue;
            }
            events.push(Event::Shot { shooter: i, target });
            if let Some(t) = target {
                hits.push((i, t));
            }
            let team = self.players[i].team.index();
            self.players[i].shoot_cooldown = cfg.team_shoot_timeout[team];
        }
        let was_alive: Vec<bool> = self.players.iter().map(|p| p.alive).collect();
        for &(shooter, target) in &hits {
            let dmg = cfg.team_shoot_damage[self.players[shooter].team.index()];
            match target {
                ShotTarget::General => {
                    if let Some(g) = self.general.as_mut() {
                        g.health = g.health.saturating_sub(dmg);
                    }
                }
                ShotTarget::Player(v) => {
                    let p = &mut self.players[v];
                    p.health = p.health.saturating_sub(dmg);
                }
            }
        }
        for v in 0..self.players.len() {
            if !(was_alive[v] && self.players[v].health == 0) {
                continue;
            }
            let p = &mut self.players[v];
            p.alive = false;
            p.body = Some(p.pos);
            let victim_team = p.team.index();
            let by: Vec<usize> = hits
                .iter()
                .filter(|&&(_, t)| t == ShotTarget::Player(v))
                .map(|&(s, _)| s)
                .collect();
            for &s in &by {
                let shooter_team = self.players[s].team.index();
                team_r[shooter_team] += cfg.points_for_kill[shooter_team][victim_team];
            }
            events.push(Event::Killed { player: v, by });
        }

        // Phase 3: blue shaping. R_b includes everything earned before the event.
        let r_b = |team_r: &[f64; NUM_TEAMS], cum: &[f64; NUM_TEAMS]| cum[BLUE] + team_r[BLUE];
        if let Some(g) = self.living_general().map(|g| g.pos) {
            if !self.blue_adjacency_awarded
                && self
                    .players
                    .iter()
                    .any(|p| p.alive && p.team == Team::Blue && p.pos.chebyshev(g) <= 1)
            {
                self.blue_adjacency_awarded = true;
                team_r[BLUE] += 1.0;
                events.push(Event::BlueAdjacency);
            }
            let d = edge_distance(g, cfg.map_width, cfg.map_height);
            let min_d = self.general.as_ref().map_or(d, |g| g.min_edge_distance);
            if d < min_d {
                let reward = (10.0 - r_b(&team_r, &self.team_cumulative_reward)) / 20.0;
                team_r[BLUE] += reward;
                if let Some(g) = self.general.as_mut() {
                    g.min_edge_distance = d;
                }
                events.push(Event::GeneralShaping {
                    edge_distance: d,
                    reward,
                });
            }
        }

        // Phase 4: termination.
        let mut outcome = None;
        if let Some(g) = &self.general {
            if !g.alive() {
                outcome = Some(Outcome::GeneralKilled);
                team_r[RED] += 10.0;
                team_r[BLUE] -= 10.0;
            } else if edge_distance(g.pos, cfg.map_width, cfg.map_height) == 0 {
                outcome = Some(Outcome::GeneralRescued);
                team_r[RED] -= 10.0;
                team_r[BLUE] += 10.0 - r_b(&team_r, &self.team_cumulative_reward);
            }
        }
        if outcome.is_none() && cfg.battle_royale {
            let mut living = Team::ALL
                .iter()
                .copied()
                .filter(|&t| self.players.iter().any(|p| p.alive && p.team == t));
            let first = living.next();
            if living.next().is_none() {
                outcome = Some(Outcome::LastTeamStanding(first));
                if let Some(w) = first {
                    for t in Team::ALL {
                        if t == w {
                            team_r[t.index()] += 10.0;
                        } else if cfg.team_counts[t.index()] > 0 {
                            team_r[t.index()] -= 10.0;
                        }
                    }
                }
            }
        }
        if outcome.is_none() && self.t + 1 >= cfg.timeout {
            outcome = Some(Outcome::Timeout);
            for k in 0..NUM_TEAMS {
                team_r[k] += cfg.timeout_penalty[k];
            }
        }

        // Phase 5: zero-sum transform.
        if cfg.zero_sum {
            team_r = zero_sum_transform(team_r);
        }

        // Phase 6: broadcast and bookkeeping.
        for k in 0..NUM_TEAMS {
            self.team_cumulative_reward[k] += team_r[k];
        }
        let rewards = self.players.iter().map(|p| team_r[p.team.index()]).collect();
        self.t += 1;
        for p in self.players.iter_mut() {
            p.shoot_cooldown = p.shoot_cooldown.saturating_sub(1);
        }
        if let Some(o) = outcome {
            self.outcome = Some(o);
            events.push(Event::Terminal(o));
        }
        Ok(StepResult {
            rewards,
            team_rewards: team_r,
            events,
            done: outcome.is_some(),
        })
    }
}

/// `r'_k = r_k - sum_{j != k} r_j`.
pub fn zero_sum_transform(r: [f64; NUM_TEAMS]) -> [f64; NUM_TEAMS] {
    let total: f64 = r.iter().sum();
    std::array::from_fn(|k| r[k] - (total - r[k]))
}

pub fn init_game(config: Arc<GameConfig>, seed: u64) -> Result<GameState, EngineError> {
    GameState::new(config, seed)
}
