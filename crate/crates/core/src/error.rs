use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("unknown configuration key `{0}`")]
    UnknownKey(String),
    #[error("bad value in configuration document: {0}")]
    Type(String),
    #[error("invalid `{field}`: {reason}")]
    Invalid { field: &'static str, reason: String },
    #[error("`{0}` is not supported (the voting system is not implemented)")]
    Unsupported(&'static str),
    #[error("unknown scenario `{name}`; valid scenarios: {valid}")]
    UnknownScenario { name: String, valid: String },
    #[error("override `{0}` is not of the form key=value")]
    BadOverride(String),
}

impl ConfigError {
    pub(crate) fn from_json(err: serde_json::Error) -> ConfigError {
        use serde_json::error::Category;
        match err.classify() {
            Category::Syntax | Category::Eof | Category::Io => ConfigError::Syntax {
                line: err.line(),
                column: err.column(),
                message: err.to_string(),
            },
            Category::Data => {
                let msg = err.to_string();
                match msg
                    .strip_prefix("unknown field `")
                    .and_then(|rest| rest.split('`').next())
                {
                    Some(key) => ConfigError::UnknownKey(key.to_string()),
                    None => ConfigError::Type(msg),
                }
            }
        }
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum EngineError {
    #[error("cannot place {what}: map too small for the requested layout")]
    PlacementInfeasible { what: &'static str },
    #[error("step called on a finished game")]
    GameOver,
    #[error("joint action has {got} entries, expected {expected}")]
    Arity { expected: usize, got: usize },
    #[error("player {player} is dead and must submit NoOp")]
    DeadPlayerActed { player: usize },
    #[error("action {action:?} is not available in this configuration")]
    UnavailableAction { action: crate::engine::Action },
}

#[derive(Debug, Error, PartialEq)]
pub enum PolicyError {
    #[error("policy kind `{kind}` cannot play role {role}")]
    IncompatibleRole {
        kind: &'static str,
        role: crate::config::Team,
    },
    #[error("observation is {got:?} (h, w), policy expects {expected:?}")]
    DimensionMismatch {
        expected: (usize, usize),
        got: (usize, usize),
    },
    #[error("epsilon must lie in [0, 1], got {0}")]
    BadEpsilon(f64),
    #[error("cannot parse policy spec `{0}` (expected kind[:epsilon])")]
    BadSpec(String),
    #[error("distribution has {got} entries, expected {expected}")]
    Arity { expected: usize, got: usize },
}

#[derive(Debug, Error, PartialEq)]
pub enum BeliefError {
    #[error("all role likelihoods weighted by the prior are zero (policy without an epsilon floor?)")]
    ZeroEvidence,
    #[error("no counterfactual policy instance for subject {subject}, role {role}")]
    MissingCounterfactual { subject: usize, role: crate::config::Team },
}

#[derive(Debug, Error)]
pub enum ReplayError {
    #[error("not a replay file (bad magic)")]
    BadMagic,
    #[error("replay format version {found} is not supported (expected {expected})")]
    FormatVersion { found: u16, expected: u16 },
    #[error("replay was written by engine {found}, this is engine {expected}")]
    EngineVersion { found: String, expected: String },
    #[error("replay checksum mismatch (stored {stored:#010x}, computed {computed:#010x})")]
    Checksum { stored: u32, computed: u32 },
    #[error("replay is truncated")]
    Truncated,
    #[error("replay is malformed: {0}")]
    Malformed(String),
    #[error("replay diverged during re-simulation at step {step}: {detail}")]
    Divergence { step: usize, detail: String },
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Umbrella error for orchestration code that touches every subsystem.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error(transparent)]
    Policy(#[from] PolicyError),
    #[error(transparent)]
    Belief(#[from] BeliefError),
    #[error(transparent)]
    Replay(#[from] ReplayError),
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
