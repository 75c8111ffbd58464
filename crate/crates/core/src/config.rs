//! Game configuration: the full option surface, the six built-in scenarios,
//! JSON loading with validation, and a canonical (key-sorted) serialization.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::ConfigError;

/// Number of teams. Index order everywhere is red, green, blue.
pub const NUM_TEAMS: usize = 3;

/// Upper bound on players per game; the id-colour palette is sized to it.
pub const MAX_PLAYERS: usize = 24;

/// A player's team, which is also the role whose policy it follows.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Team {
    Red = 0,
    Green = 1,
    Blue = 2,
}

impl Team {
    pub const ALL: [Team; NUM_TEAMS] = [Team::Red, Team::Green, Team::Blue];

    #[inline]
    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<Team> {
        Team::ALL.get(i).copied()
    }

    pub fn name(self) -> &'static str {
        match self {
            Team::Red => "red",
            Team::Green => "green",
            Team::Blue => "blue",
        }
    }
}

impl fmt::Display for Team {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum StartingLocations {
    Random,
    #[default]
    Together,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum GeneralIndicator {
    #[default]
    Direction,
    Distance,
}

/// Who can see whose team colour on local observations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum HiddenRoles {
    /// Red sees every role; green and blue see only their own.
    #[default]
    Default,
    /// Every player sees every role.
    All,
    /// Every player sees only their own role.
    None,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScenarioName {
    Rescue,
    Wolf,
    R2G2,
    Red2,
    Green2,
    Blue2,
}

impl ScenarioName {
    pub const ALL: [ScenarioName; 6] = [
        ScenarioName::Rescue,
        ScenarioName::Wolf,
        ScenarioName::R2G2,
        ScenarioName::Red2,
        ScenarioName::Green2,
        ScenarioName::Blue2,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ScenarioName::Rescue => "rescue",
            ScenarioName::Wolf => "wolf",
            ScenarioName::R2G2 => "r2g2",
            ScenarioName::Red2 => "red2",
            ScenarioName::Green2 => "green2",
            ScenarioName::Blue2 => "blue2",
        }
    }
}

impl fmt::Display for ScenarioName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ScenarioName {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let lower = s.to_ascii_lowercase();
        ScenarioName::ALL
            .into_iter()
            .find(|n| n.as_str() == lower)
            .ok_or_else(|| ConfigError::UnknownScenario {
                name: s.to_string(),
                valid: ScenarioName::ALL
                    .iter()
                    .map(|n| n.as_str())
                    .collect::<Vec<_>>()
                    .join(", "),
            })
    }
}

/// Every configurable game option. Field names match the external JSON keys.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GameConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scenario: Option<ScenarioName>,
    pub map_width: u32,
    pub map_height: u32,
    pub n_trees: u32,
    pub reward_per_tree: f64,
    pub max_view_distance: u32,
    pub team_view_distance: [u32; NUM_TEAMS],
    pub team_shoot_damage: [u32; NUM_TEAMS],
    pub team_general_view_distance: [u32; NUM_TEAMS],
    pub team_shoot_range: [u32; NUM_TEAMS],
    pub team_counts: [u32; NUM_TEAMS],
    pub team_shoot_timeout: [u32; NUM_TEAMS],
    pub enable_voting: bool,
    pub voting_button: bool,
    pub auto_shooting: bool,
    pub zero_sum: bool,
    pub timeout: u32,
    pub general_initial_health: u32,
    pub player_initial_health: u32,
    pub battle_royale: bool,
    pub help_distance: u32,
    pub starting_locations: StartingLocations,
    pub local_team_colors: bool,
    pub initial_random_kills: f64,
    pub blue_general_indicator: GeneralIndicator,
    pub players_to_move_general: u32,
    pub timeout_penalty: [f64; NUM_TEAMS],
    pub points_for_kill: [[f64; NUM_TEAMS]; NUM_TEAMS],
    pub hidden_roles: HiddenRoles,
    pub reveal_team_on_death: bool,
}

impl Default for GameConfig {
    fn default() -> Self {
        GameConfig {
            scenario: None,
            map_width: 32,
            map_height: 32,
            n_trees: 10,
            reward_per_tree: 1.0,
            max_view_distance: 6,
            team_view_distance: [6, 5, 5],
            team_shoot_damage: [10, 10, 10],
            team_general_view_distance: [3, 5, 5],
            team_shoot_range: [5, 5, 5],
            team_counts: [1, 1, 4],
            team_shoot_timeout: [10, 10, 10],
            enable_voting: false,
            voting_button: false,
            auto_shooting: false,
            zero_sum: false,
            timeout: 500,
            general_initial_health: 1,
            player_initial_health: 10,
            battle_royale: false,
            help_distance: 2,
            starting_locations: StartingLocations::Together,
            local_team_colors: true,
            initial_random_kills: 0.5,
            blue_general_indicator: GeneralIndicator::Direction,
            players_to_move_general: 2,
            timeout_penalty: [5.0, 0.0, -5.0],
            points_for_kill: [[0.0; NUM_TEAMS]; NUM_TEAMS],
            hidden_roles: HiddenRoles::Default,
            reveal_team_on_death: false,
        }
    }
}

impl GameConfig {
    pub fn n_players(&self) -> usize {
        self.team_counts.iter().map(|&c| c as usize).sum()
    }

    /// Number of discrete actions a player chooses from.
    pub fn n_actions(&self) -> usize {
        if self.auto_shooting {
            6
        } else {
            9
        }
    }

    pub fn has_general(&self) -> bool {
        !self.battle_royale
    }

    /// Window radius in tiles of every local observation.
    pub fn window_radius(&self) -> u32 {
        self.max_view_distance
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.enable_voting {
            return Err(ConfigError::Unsupported("enable_voting"));
        }
        if self.voting_button {
            return Err(ConfigError::Unsupported("voting_button"));
        }
        let invalid = |field: &'static str, reason: String| ConfigError::Invalid { field, reason };
        if self.map_width < 5 {
            return Err(invalid(
                "map_width",
                format!("must be at least 5, got {}", self.map_width),
            ));
        }
        if self.map_height < 5 {
            return Err(invalid(
                "map_height",
                format!("must be at least 5, got {}", self.map_height),
            ));
        }
        if let Some(k) = self.team_view_distance.iter().position(|&d| d > self.max_view_distance) {
            return Err(invalid(
                "team_view_distance",
                format!(
                    "entry {} ({}) exceeds max_view_distance ({})",
                    k, self.team_view_distance[k], self.max_view_distance
                ),
            ));
        }
        if !(0.0..=1.0).contains(&self.initial_random_kills) {
            return Err(invalid(
                "initial_random_kills",
                format!("must lie in [0, 1], got {}", self.initial_random_kills),
            ));
        }
        if self.team_counts.iter().all(|&c| c == 0) {
            return Err(invalid("team_counts", "at least one team must have players".into()));
        }
        if self.n_players() > MAX_PLAYERS {
            return Err(invalid(
                "team_counts",
                format!("{} players exceeds the maximum of {}", self.n_players(), MAX_PLAYERS),
            ));
        }
        if self.timeout == 0 {
            return Err(invalid("timeout", "must be at least 1".into()));
        }
        if self.general_initial_health == 0 {
            return Err(invalid("general_initial_health", "must be at least 1".into()));
        }
        if self.player_initial_health == 0 {
            return Err(invalid("player_initial_health", "must be at least 1".into()));
        }
        let finite = |field: &'static str, v: &[f64]| {
            if v.iter().all(|x| x.is_finite()) {
                Ok(())
            } else {
                Err(invalid(field, "values must be finite".into()))
            }
        };
        finite("reward_per_tree", &[self.reward_per_tree])?;
        finite("timeout_penalty", &self.timeout_penalty)?;
        finite("points_for_kill", self.points_for_kill.as_flattened())?;
        Ok(())
    }

    /// Parse a JSON document. Keys left out take the named scenario's values
    /// if a `scenario` key is present, the defaults otherwise.
    pub fn from_json(text: &str) -> Result<GameConfig, ConfigError> {
        let config: GameConfig = if text.trim().is_empty() {
            GameConfig::default()
        } else {
            let mut doc: serde_json::Value = serde_json::from_str(text).map_err(ConfigError::from_json)?;
            let name = doc
                .get("scenario")
                .and_then(|v| v.as_str())
                .map(str::parse::<ScenarioName>);
            if let (Some(name), Some(obj)) = (name, doc.as_object()) {
                let name = name?;
                let mut base = serde_json::to_value(builtin_scenario(name)).expect("config serializes");
                let merged = base.as_object_mut().expect("config is an object");
                for (k, v) in obj {
                    merged.insert(k.clone(), v.clone());
                }
                merged.insert("scenario".into(), name.as_str().into());
                doc = base;
            }
            serde_json::from_value(doc).map_err(ConfigError::from_json)?
        };
        config.validate()?;
        Ok(config)
    }

    /// Deterministic key-sorted JSON. `from_json(c.to_canonical_json()) == c`.
    pub fn to_canonical_json(&self) -> String {
        // serde_json::Value objects are BTreeMaps, so keys come out sorted.
        let value = serde_json::to_value(self).expect("config serializes");
        let mut out = serde_json::to_string_pretty(&value).expect("value serializes");
        out.push('\n');
        out
    }

    /// Apply `key=value` overrides. The value is parsed as JSON, falling back
    /// to a bare string (so `starting_locations=random` works unquoted).
    pub fn with_overrides<S: AsRef<str>>(&self, overrides: &[S]) -> Result<GameConfig, ConfigError> {
        let mut value = serde_json::to_value(self).expect("config serializes");
        let obj = value.as_object_mut().expect("config is an object");
        for item in overrides {
            let item = item.as_ref();
            let (key, raw) = item
                .split_once('=')
                .ok_or_else(|| ConfigError::BadOverride(item.to_string()))?;
            let parsed =
                serde_json::from_str(raw.trim()).unwrap_or_else(|_| serde_json::Value::String(raw.trim().to_string()));
            obj.insert(key.trim().to_string(), parsed);
        }
        let config: GameConfig = serde_json::from_value(value).map_err(ConfigError::from_json)?;
        config.validate()?;
        Ok(config)
    }
}

pub fn load_config(text: &str) -> Result<GameConfig, ConfigError> {
    GameConfig::from_json(text)
}

pub fn canonical_serialize(config: &GameConfig) -> String {
    config.to_canonical_json()
}

pub fn builtin_scenario(name: ScenarioName) -> GameConfig {
    let base = GameConfig {
        scenario: Some(name),
        ..GameConfig::default()
    };
    match name {
        ScenarioName::Rescue => GameConfig {
            team_counts: [1, 1, 4],
            hidden_roles: HiddenRoles::Default,
            ..base
        },
        ScenarioName::Wolf => GameConfig {
            team_counts: [1, 3, 0],
            battle_royale: true,
            hidden_roles: HiddenRoles::Default,
            ..base
        },
        ScenarioName::R2G2 => GameConfig {
            team_counts: [2, 2, 0],
            hidden_roles: HiddenRoles::All,
            ..base
        },
        ScenarioName::Red2 => GameConfig {
            team_counts: [2, 0, 0],
            hidden_roles: HiddenRoles::All,
            ..base
        },
        ScenarioName::Green2 => GameConfig {
            team_counts: [0, 2, 0],
            hidden_roles: HiddenRoles::All,
            ..base
        },
        ScenarioName::Blue2 => GameConfig {
            team_counts: [0, 0, 2],
            hidden_roles: HiddenRoles::All,
            ..base
        },
    }
}
