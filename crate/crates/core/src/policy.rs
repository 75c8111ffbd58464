//! Stochastic policies over local observations and the scripted baselines.
//!
//! Scripted policies read nothing but the pixels of their own observation,
//! so the same instance can be driven by any player's observation stream.
//! That is what lets the belief tracker ask "what would a red player have
//! done here" for every subject.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use crate::config::{GameConfig, Team, NUM_TEAMS};
use crate::engine::{Action, Direction, Pos};
use crate::error::PolicyError;
use crate::obs::{local_dims, palette, Observation, Rgb};
use crate::rng::EpisodeRng;

/// Probability per action, in `Action::space` order.
#[derive(Debug, Clone, PartialEq)]
pub struct ActionDistribution {
    probs: Vec<f64>,
}

impl ActionDistribution {
    pub const TOLERANCE: f64 = 1e-9;

    pub fn new(probs: Vec<f64>) -> Option<Self> {
        let d = ActionDistribution { probs };
        d.is_valid().then_some(d)
    }

    pub fn uniform(n: usize) -> Self {
        ActionDistribution {
            probs: vec![1.0 / n as f64; n],
        }
    }

    pub fn one_hot(n: usize, index: usize) -> Self {
        let mut probs = vec![0.0; n];
        probs[index] = 1.0;
        ActionDistribution { probs }
    }

    /// `(1 - eps) * self + eps * uniform`.
    pub fn with_epsilon(mut self, eps: f64) -> Self {
        let floor = eps / self.probs.len() as f64;
        for p in &mut self.probs {
            *p = (1.0 - eps) * *p + floor;
        }
        self
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    #[inline]
    pub fn prob(&self, index: usize) -> f64 {
        self.probs[index]
    }

    pub fn is_valid(&self) -> bool {
        !self.probs.is_empty()
            && self.probs.iter().all(|&p| p >= 0.0 && p.is_finite())
            && (self.probs.iter().sum::<f64>() - 1.0).abs() <= Self::TOLERANCE
    }

    /// Inverse-CDF draw in action-index order.
    pub fn sample(&self, rng: &mut EpisodeRng) -> usize {
        let u = rng.unit();
        let mut acc = 0.0;
        for (i, &p) in self.probs.iter().enumerate() {
            acc += p;
            if u < acc {
                return i;
            }
        }
        // u landed in the rounding gap above the final partial sum
        self.probs.iter().rposition(|&p| p > 0.0).unwrap_or(0)
    }
}

pub fn sample(dist: &ActionDistribution, rng: &mut EpisodeRng) -> usize {
    dist.sample(rng)
}

/// A policy instance owned by one player (or by one counterfactual slot).
pub trait Policy: Send {
    /// Action distribution for this observation; updates internal memory.
    fn act(&mut self, obs: &Observation) -> Result<ActionDistribution, PolicyError>;

    /// Return memory to its initial state.
    fn reset(&mut self);
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PolicyKind {
    Hunter,
    Rescuer,
    Harvester,
    Wanderer,
    Stationary,
}

impl PolicyKind {
    pub fn name(self) -> &'static str {
        match self {
            PolicyKind::Hunter => "hunter",
            PolicyKind::Rescuer => "rescuer",
            PolicyKind::Harvester => "harvester",
            PolicyKind::Wanderer => "wanderer",
            PolicyKind::Stationary => "stationary",
        }
    }

    pub fn compatible_with(self, role: Team) -> bool {
        match self {
            PolicyKind::Hunter => role == Team::Red,
            PolicyKind::Rescuer => role == Team::Blue,
            PolicyKind::Harvester => role == Team::Green,
            PolicyKind::Wanderer | PolicyKind::Stationary => true,
        }
    }

    /// The objective-driven kind for a team.
    pub fn default_for(role: Team) -> PolicyKind {
        match role {
            Team::Red => PolicyKind::Hunter,
            Team::Green => PolicyKind::Harvester,
            Team::Blue => PolicyKind::Rescuer,
        }
    }
}

/// Kind plus exploration rate, e.g. `hunter:0.05`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolicySpec {
    pub kind: PolicyKind,
    pub epsilon: f64,
}

impl PolicySpec {
    pub const DEFAULT_EPSILON: f64 = 0.05;

    pub fn new(kind: PolicyKind, epsilon: f64) -> Self {
        PolicySpec { kind, epsilon }
    }

    pub fn build(&self, role: Team, config: &Arc<GameConfig>) -> Result<Box<dyn Policy>, PolicyError> {
        make_scripted(role, self.kind, self.epsilon, config)
    }
}

impl fmt::Display for PolicySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.kind.name(), self.epsilon)
    }
}

impl FromStr for PolicySpec {
    type Err = PolicyError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || PolicyError::BadSpec(s.to_string());
        let (kind, eps) = match s.split_once(':') {
            Some((k, e)) => (k, e.parse::<f64>().map_err(|_| bad())?),
            None => (s, Self::DEFAULT_EPSILON),
        };
        let kind = match kind.trim().to_ascii_lowercase().as_str() {
            "hunter" => PolicyKind::Hunter,
            "rescuer" => PolicyKind::Rescuer,
            "harvester" => PolicyKind::Harvester,
            "wanderer" => PolicyKind::Wanderer,
            "stationary" => PolicyKind::Stationary,
            _ => return Err(bad()),
        };
        if !(0.0..=1.0).contains(&eps) {
            return Err(PolicyError::BadEpsilon(eps));
        }
        Ok(PolicySpec { kind, epsilon: eps })
    }
}

/// One policy constructor per role: the set of role policies every player is
/// assumed to know.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RoleConditionedPolicySet {
    pub specs: [PolicySpec; NUM_TEAMS],
}

impl RoleConditionedPolicySet {
    pub fn new(red: PolicySpec, green: PolicySpec, blue: PolicySpec) -> Self {
        RoleConditionedPolicySet {
            specs: [red, green, blue],
        }
    }

    /// Objective-driven kinds for every role with a shared epsilon.
    pub fn scripted(epsilon: f64) -> Self {
        let s = |t| PolicySpec::new(PolicyKind::default_for(t), epsilon);
        RoleConditionedPolicySet::new(s(Team::Red), s(Team::Green), s(Team::Blue))
    }

    pub fn spec(&self, role: Team) -> PolicySpec {
        self.specs[role.index()]
    }

    pub fn build(&self, role: Team, config: &Arc<GameConfig>) -> Result<Box<dyn Policy>, PolicyError> {
        self.spec(role).build(role, config)
    }

    pub fn validate(&self) -> Result<(), PolicyError> {
        for t in Team::ALL {
            let s = self.spec(t);
            if !s.kind.compatible_with(t) {
                return Err(PolicyError::IncompatibleRole {
                    kind: s.kind.name(),
                    role: t,
                });
            }
            if !(0.0..=1.0).contains(&s.epsilon) {
                return Err(PolicyError::BadEpsilon(s.epsilon));
            }
        }
        Ok(())
    }
}

/// Build a scripted policy instance for `role`.
pub fn make_scripted(
    role: Team,
    kind: PolicyKind,
    epsilon: f64,
    config: &Arc<GameConfig>,
) -> Result<Box<dyn Policy>, PolicyError> {
    if !kind.compatible_with(role) {
        return Err(PolicyError::IncompatibleRole {
            kind: kind.name(),
            role,
        });
    }
    if !(0.0..=1.0).contains(&epsilon) {
        return Err(PolicyError::BadEpsilon(epsilon));
    }
    Ok(Box::new(ScriptedPolicy::new(role, kind, epsilon, Arc::clone(config))))
}

/// What a tile of a local observation shows.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Seen {
    Unknown,
    Grass,
    Tree,
    General,
    Player,
    Body,
}

fn classify(corner: Rgb) -> Seen {
    const ID_LEVELS: [u8; 3] = [80, 160, 240];
    const BODY_LEVELS: [u8; 3] = [40, 80, 120];
    match corner {
        palette::BLACK => Seen::Unknown,
        palette::GRASS => Seen::Grass,
        palette::TREE => Seen::Tree,
        palette::GENERAL => Seen::General,
        c if c.iter().all(|v| ID_LEVELS.contains(v)) => Seen::Player,
        c if c.iter().all(|v| BODY_LEVELS.contains(v)) => Seen::Body,
        _ => Seen::Unknown,
    }
}

/// Structured reading of one observation.
struct Perception {
    pos: Pos,
    can_shoot: bool,
    /// General-direction octant from the blue indicator.
    indicator: Option<usize>,
    /// General offset from the observer, when rendered.
    general: Option<(i32, i32)>,
    /// Offsets of other living players.
    others: Vec<(i32, i32)>,
    trees: Vec<(i32, i32)>,
    grass: Vec<(i32, i32)>,
}

struct Decoder {
    radius: i32,
    x_levels: Vec<u8>,
    y_levels: Vec<u8>,
    dims: (usize, usize),
}

impl Decoder {
    fn new(cfg: &GameConfig) -> Self {
        let level = |v: u32, den: u32| ((510 * v as u64 + den as u64) / (2 * den as u64)) as u8;
        Decoder {
            radius: cfg.window_radius() as i32,
            x_levels: (0..cfg.map_width).map(|x| level(x, cfg.map_width)).collect(),
            y_levels: (0..cfg.map_height).map(|y| level(y, cfg.map_height)).collect(),
            dims: local_dims(cfg),
        }
    }

    fn coord(levels: &[u8], v: u8) -> i32 {
        levels
            .iter()
            .enumerate()
            .min_by_key(|(_, &l)| l.abs_diff(v))
            .map_or(0, |(i, _)| i as i32)
    }

    fn check(&self, obs: &Observation) -> Result<(), PolicyError> {
        if (obs.height, obs.width) != self.dims {
            return Err(PolicyError::DimensionMismatch {
                expected: self.dims,
                got: (obs.height, obs.width),
            });
        }
        Ok(())
    }

    fn read(&self, obs: &Observation) -> Result<Perception, PolicyError> {
        self.check(obs)?;
        let side = (2 * self.radius + 1) as usize;
        let status = |k: usize| obs.tile_center(k, side);
        let indicator = palette::DIRECTION.iter().position(|&c| c == status(6));
        let mut p = Perception {
            pos: Pos::new(
                Self::coord(&self.x_levels, status(1)[0]),
                Self::coord(&self.y_levels, status(2)[0]),
            ),
            can_shoot: status(4)[0] == 0,
            indicator,
            general: None,
            others: Vec::new(),
            trees: Vec::new(),
            grass: Vec::new(),
        };
        for ty in 0..side {
            for tx in 0..side {
                let off = (tx as i32 - self.radius, ty as i32 - self.radius);
                match classify(obs.tile_corner(tx, ty)) {
                    Seen::Grass => p.grass.push(off),
                    Seen::Tree => p.trees.push(off),
                    Seen::General => p.general = Some(off),
                    Seen::Player if off != (0, 0) => p.others.push(off),
                    _ => {}
                }
            }
        }
        Ok(p)
    }
}

/// Lawnmower route whose rows are `2 * sight + 1` apart.
fn sweep_route(width: u32, height: u32, sight: u32) -> Vec<Pos> {
    let (w, h, s) = (width as i32, height as i32, sight as i32);
    let left = s.min(w - 1);
    let right = (w - 1 - s).max(left);
    let mut rows = Vec::new();
    let mut y = s.min(h - 1);
    loop {
        rows.push(y);
        if y + s >= h - 1 {
            break;
        }
        y = (y + 2 * s + 1).min((h - 1 - s).max(0));
    }
    rows.dedup();
    rows.iter()
        .enumerate()
        .flat_map(|(k, &y)| {
            if k % 2 == 0 {
                [Pos::new(left, y), Pos::new(right, y)]
            } else {
                [Pos::new(right, y), Pos::new(left, y)]
            }
        })
        .collect()
}

#[derive(Debug, Clone, Default)]
struct Memory {
    waypoint: Option<usize>,
    known_trees: BTreeSet<Pos>,
    /// Alternates the axis when following a diagonal indicator.
    toggle: bool,
}

pub struct ScriptedPolicy {
    role: Team,
    kind: PolicyKind,
    epsilon: f64,
    config: Arc<GameConfig>,
    decoder: Decoder,
    route: Vec<Pos>,
    memory: Memory,
}

impl ScriptedPolicy {
    pub fn new(role: Team, kind: PolicyKind, epsilon: f64, config: Arc<GameConfig>) -> Self {
        let sight = match kind {
            PolicyKind::Hunter => config.team_general_view_distance[role.index()],
            _ => config.team_view_distance[role.index()],
        };
        ScriptedPolicy {
            role,
            kind,
            epsilon,
            decoder: Decoder::new(&config),
            route: sweep_route(config.map_width, config.map_height, sight),
            config,
            memory: Memory::default(),
        }
    }

    pub fn kind(&self) -> PolicyKind {
        self.kind
    }

    pub fn role(&self) -> Team {
        self.role
    }

    fn n_actions(&self) -> usize {
        self.config.n_actions()
    }

    fn index(&self, a: Action) -> usize {
        a.index(self.config.auto_shooting).unwrap_or(0)
    }

    /// Greedy step from the origin toward `(dx, dy)`, preferring the longer
    /// axis and skipping the general's tile.
    fn step_toward(&self, dx: i32, dy: i32, general: Option<(i32, i32)>) -> Action {
        let horiz = (dx != 0).then_some(if dx > 0 { Direction::East } else { Direction::West });
        let vert = (dy != 0).then_some(if dy > 0 { Direction::South } else { Direction::North });
        let order = if dx.abs() >= dy.abs() {
            [horiz, vert]
        } else {
            [vert, horiz]
        };
        for d in order.into_iter().flatten() {
            if Some(d.delta()) != general {
                return Action::moving(d);
            }
        }
        Action::NoOp
    }

    fn follow_route(&mut self, pos: Pos, general: Option<(i32, i32)>) -> Action {
        let idx = match self.memory.waypoint {
            Some(i) => i,
            None => (0..self.route.len())
                .min_by_key(|&i| self.route[i].manhattan(pos))
                .unwrap_or(0),
        };
        let idx = if self.route[idx] == pos {
            (idx + 1) % self.route.len()
        } else {
            idx
        };
        self.memory.waypoint = Some(idx);
        let target = self.route[idx];
        self.step_toward(target.x - pos.x, target.y - pos.y, general)
    }

    fn hunt(&mut self, p: &Perception) -> Action {
        let range = self.config.team_shoot_range[self.role.index()] as i32;
        match p.general {
            Some((dx, dy)) => {
                let aligned = dx == 0 || dy == 0;
                let dist = dx.abs() + dy.abs();
                if aligned && dist <= range {
                    if !p.can_shoot {
                        return Action::NoOp;
                    }
                    return if self.config.auto_shooting {
                        Action::AutoShoot
                    } else {
                        let dir = match (dx.signum(), dy.signum()) {
                            (1, _) => Direction::East,
                            (-1, _) => Direction::West,
                            (_, 1) => Direction::South,
                            _ => Direction::North,
                        };
                        Action::shooting(dir)
                    };
                }
                if !aligned {
                    // close the shorter gap to line up a shot
                    return if dx.abs() <= dy.abs() {
                        self.step_toward(dx, 0, p.general)
                    } else {
                        self.step_toward(0, dy, p.general)
                    };
                }
                self.step_toward(dx, dy, p.general)
            }
            None => self.follow_route(p.pos, None),
        }
    }

    /// True when a stray shot from offset `me` could hit the general at `g`.
    fn exposed(&self, me: (i32, i32), g: (i32, i32)) -> bool {
        let range = self.config.team_shoot_range[self.role.index()] as i32;
        let (dx, dy) = (g.0 - me.0, g.1 - me.1);
        (dx == 0 || dy == 0) && dx.abs() + dy.abs() <= range
    }

    /// Like `step_toward`, but prefers a move that keeps out of the
    /// general's firing lines when one makes equal progress.
    fn step_toward_safely(&self, dx: i32, dy: i32, general: Option<(i32, i32)>) -> Action {
        let Some(g) = general else {
            return self.step_toward(dx, dy, None);
        };
        let horiz = (dx != 0).then_some(if dx > 0 { Direction::East } else { Direction::West });
        let vert = (dy != 0).then_some(if dy > 0 { Direction::South } else { Direction::North });
        let order = if dx.abs() >= dy.abs() {
            [horiz, vert]
        } else {
            [vert, horiz]
        };
        let candidates: Vec<Direction> = order.into_iter().flatten().filter(|d| d.delta() != g).collect();
        let arrives = |d: &Direction| d.delta() == (dx, dy);
        candidates
            .iter()
            .find(|d| arrives(d) || !self.exposed(d.delta(), g))
            .or(candidates.first())
            .map_or(Action::NoOp, |&d| Action::moving(d))
    }

    /// Near the general, fire into an empty lane so the weapon sits on
    /// cooldown and exploration noise cannot hit the general.
    fn safety_shot(&self, p: &Perception) -> Option<Action> {
        let (gx, gy) = p.general?;
        let range = self.config.team_shoot_range[self.role.index()] as i32;
        if self.config.auto_shooting || !p.can_shoot || gx.abs() + gy.abs() > range + 2 {
            return None;
        }
        let w = self.config.map_width as i32;
        let h = self.config.map_height as i32;
        let clear = |d: &Direction| {
            let (dx, dy) = d.delta();
            (1..=range).all(|k| {
                let off = (dx * k, dy * k);
                let at = p.pos.offset(off.0, off.1);
                let inside = at.x >= 0 && at.y >= 0 && at.x < w && at.y < h;
                // anything that could step into the lane this turn counts
                let reachable = |(x, y): (i32, i32)| (x - off.0).abs() + (y - off.1).abs() <= 1;
                !inside || (!reachable((gx, gy)) && !p.others.iter().any(|&o| reachable(o)))
            })
        };
        // lanes pointing away from the general first
        let mut dirs = Direction::ALL;
        dirs.sort_by_key(|d| {
            let (dx, dy) = d.delta();
            dx * gx + dy * gy
        });
        dirs.iter().find(|d| clear(d)).map(|&d| Action::shooting(d))
    }

    /// Push formation: one rescuer directly behind the general (away from
    /// the nearest edge) pushes, another waits diagonally behind and moves
    /// in step so it is never in line with the general.
    fn rescue(&mut self, p: &Perception) -> Action {
        let cfg = &self.config;
        if let Some((gx, gy)) = p.general {
            let g = p.pos.offset(gx, gy);
            let (w, h) = (cfg.map_width as i32, cfg.map_height as i32);
            let options = [
                (g.y, Direction::North),
                (h - 1 - g.y, Direction::South),
                (w - 1 - g.x, Direction::East),
                (g.x, Direction::West),
            ];
            let dir = options.iter().min_by_key(|(d, _)| *d).map(|&(_, d)| d).unwrap();
            let (ddx, ddy) = dir.delta();
            // offsets from me
            let pusher = (gx - ddx, gy - ddy);
            let flanks = [(pusher.0 + ddy, pusher.1 + ddx), (pusher.0 - ddy, pusher.1 - ddx)];
            let occupied = |o: (i32, i32)| p.others.contains(&o);
            // a partner sharing our tile is hidden under our own sprite, so
            // push regardless; a lone push is simply blocked by the general
            if pusher == (0, 0) {
                return Action::moving(dir);
            }
            if flanks.contains(&(0, 0)) {
                return if occupied(pusher) {
                    Action::moving(dir)
                } else {
                    self.step_toward(pusher.0, pusher.1, p.general)
                };
            }
            if occupied(pusher) {
                let target = *flanks
                    .iter()
                    .min_by_key(|(x, y)| (occupied((*x, *y)), x.abs() + y.abs()))
                    .unwrap();
                return self.step_toward_safely(target.0, target.1, p.general);
            }
            return self.step_toward_safely(pusher.0, pusher.1, p.general);
        }
        if let Some(k) = p.indicator {
            const DELTAS: [(i32, i32); 8] = [(0, -1), (1, -1), (1, 0), (1, 1), (0, 1), (-1, 1), (-1, 0), (-1, -1)];
            let (dx, dy) = DELTAS[k];
            self.memory.toggle = !self.memory.toggle;
            let (dx, dy) = match (dx != 0 && dy != 0, self.memory.toggle) {
                (true, true) => (dx, 0),
                (true, false) => (0, dy),
                _ => (dx, dy),
            };
            return self.step_toward(dx, dy, None);
        }
        self.follow_route(p.pos, None)
    }

    fn harvest(&mut self, p: &Perception) -> Action {
        let at = |(x, y): (i32, i32)| p.pos.offset(x, y);
        for &off in &p.grass {
            self.memory.known_trees.remove(&at(off));
        }
        self.memory.known_trees.remove(&p.pos);
        for &off in &p.trees {
            self.memory.known_trees.insert(at(off));
        }
        let target = self
            .memory
            .known_trees
            .iter()
            .min_by_key(|t| (t.manhattan(p.pos), t.y, t.x))
            .copied();
        match target {
            Some(t) => self.step_toward_safely(t.x - p.pos.x, t.y - p.pos.y, p.general),
            None => self.follow_route(p.pos, p.general),
        }
    }
}

impl Policy for ScriptedPolicy {
    fn act(&mut self, obs: &Observation) -> Result<ActionDistribution, PolicyError> {
        let n = self.n_actions();
        if self.kind == PolicyKind::Wanderer {
            self.decoder.check(obs)?;
            return Ok(ActionDistribution::uniform(n));
        }
        let perception = self.decoder.read(obs)?;
        let greedy = match self.kind {
            PolicyKind::Wanderer => unreachable!(),
            PolicyKind::Stationary => Action::NoOp,
            PolicyKind::Hunter => self.hunt(&perception),
            PolicyKind::Rescuer | PolicyKind::Harvester if self.safety_shot(&perception).is_some() => {
                self.safety_shot(&perception).unwrap()
            }
            PolicyKind::Rescuer => self.rescue(&perception),
            PolicyKind::Harvester => self.harvest(&perception),
        };
        Ok(ActionDistribution::one_hot(n, self.index(greedy)).with_epsilon(self.epsilon))
    }

    fn reset(&mut self) {
        self.memory = Memory::default();
    }
}
