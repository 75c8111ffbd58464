//! Rescue the General: a hidden-role gridworld with exact Bayesian role
//! tracking and belief-manipulation rewards.

#![allow(clippy::needless_range_loop, clippy::neg_cmp_op_on_partial_ord)]

pub mod batch;
pub mod bbm;
pub mod belief;
pub mod config;
pub mod engine;
pub mod env;
pub mod error;
pub mod harness;
pub mod obs;
pub mod policy;
pub mod rng;

pub use config::{builtin_scenario, GameConfig, ScenarioName, Team};
pub use engine::{Action, GameState, Outcome};
pub use error::{Error, Result};
