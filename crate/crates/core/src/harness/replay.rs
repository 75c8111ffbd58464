//! `.rtgr` replay files.
//!
//! Layout, little-endian throughout:
//!
//! ```text
//! "RTGR"                    4 bytes
//! format version            u16
//! engine version            u16 length + UTF-8
//! canonical config          u32 length + UTF-8 JSON
//! seed                      u64
//! players                   u16
//! steps                     u32
//! actions                   ceil(steps * players / 2) bytes, one nibble per
//!                           action index, low nibble first, step-major
//! outcome code              u8
//! team scores               3 x f64
//! CRC32 of all prior bytes  u32
//! ```

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::config::{GameConfig, NUM_TEAMS};
use crate::engine::{Action, GameState, Outcome, StepResult};
use crate::error::ReplayError;

pub const MAGIC: &[u8; 4] = b"RTGR";
pub const FORMAT_VERSION: u16 = 1;
pub const ENGINE_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Replay {
    pub format_version: u16,
    pub engine_version: String,
    pub config: GameConfig,
    pub seed: u64,
    pub actions: Vec<Vec<Action>>,
    pub outcome: Outcome,
    pub team_scores: [f64; NUM_TEAMS],
}

impl Replay {
    pub fn len(&self) -> usize {
        self.actions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.actions.is_empty()
    }
}

pub fn write_replay(replay: &Replay) -> Vec<u8> {
    let auto = replay.config.auto_shooting;
    let config = replay.config.to_canonical_json();
    let n_players = replay.actions.first().map_or(replay.config.n_players(), Vec::len);
    let mut out = Vec::with_capacity(64 + config.len() + replay.actions.len() * n_players / 2);
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&replay.format_version.to_le_bytes());
    out.extend_from_slice(&(replay.engine_version.len() as u16).to_le_bytes());
    out.extend_from_slice(replay.engine_version.as_bytes());
    out.extend_from_slice(&(config.len() as u32).to_le_bytes());
    out.extend_from_slice(config.as_bytes());
    out.extend_from_slice(&replay.seed.to_le_bytes());
    out.extend_from_slice(&(n_players as u16).to_le_bytes());
    out.extend_from_slice(&(replay.actions.len() as u32).to_le_bytes());
    let mut nibbles = replay
        .actions
        .iter()
        .flatten()
        .map(|a| a.index(auto).expect("replay actions belong to the config's action set") as u8);
    while let Some(lo) = nibbles.next() {
        let hi = nibbles.next().unwrap_or(0);
        out.push(lo | (hi << 4));
    }
    out.push(replay.outcome.code());
    for s in replay.team_scores {
        out.extend_from_slice(&s.to_le_bytes());
    }
    let crc = crc32fast::hash(&out);
    out.extend_from_slice(&crc.to_le_bytes());
    out
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], ReplayError> {
        let end = self
            .pos
            .checked_add(n)
            .filter(|&e| e <= self.buf.len())
            .ok_or(ReplayError::Truncated)?;
        let s = &self.buf[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn array<const N: usize>(&mut self) -> Result<[u8; N], ReplayError> {
        Ok(self.take(N)?.try_into().expect("length checked"))
    }

    fn u16(&mut self) -> Result<u16, ReplayError> {
        Ok(u16::from_le_bytes(self.array()?))
    }

    fn u32(&mut self) -> Result<u32, ReplayError> {
        Ok(u32::from_le_bytes(self.array()?))
    }

    fn u64(&mut self) -> Result<u64, ReplayError> {
        Ok(u64::from_le_bytes(self.array()?))
    }

    fn text(&mut self, len: usize) -> Result<&'a str, ReplayError> {
        std::str::from_utf8(self.take(len)?).map_err(|e| ReplayError::Malformed(e.to_string()))
    }
}

pub fn read_replay(bytes: &[u8]) -> Result<Replay, ReplayError> {
    if bytes.len() < MAGIC.len() || &bytes[..4] != MAGIC {
        return Err(ReplayError::BadMagic);
    }
    if bytes.len() < 4 + 2 + 4 {
        return Err(ReplayError::Truncated);
    }
    let (body, tail) = bytes.split_at(bytes.len() - 4);
    let stored = u32::from_le_bytes(tail.try_into().expect("4 bytes"));
    let computed = crc32fast::hash(body);
    if stored != computed {
        return Err(ReplayError::Checksum { stored, computed });
    }

    let mut r = Reader { buf: body, pos: 4 };
    let format_version = r.u16()?;
    if format_version != FORMAT_VERSION {
        return Err(ReplayError::FormatVersion {
            found: format_version,
            expected: FORMAT_VERSION,
        });
    }
    let len = r.u16()? as usize;
    let engine_version = r.text(len)?.to_string();
    if engine_version != ENGINE_VERSION {
        return Err(ReplayError::EngineVersion {
            found: engine_version,
            expected: ENGINE_VERSION.to_string(),
        });
    }
    let len = r.u32()? as usize;
    let config = GameConfig::from_json(r.text(len)?)?;
    let seed = r.u64()?;
    let n_players = r.u16()? as usize;
    let n_steps = r.u32()? as usize;
    let total = n_steps
        .checked_mul(n_players)
        .ok_or_else(|| ReplayError::Malformed("action count overflows".into()))?;
    let packed = r.take(total.div_ceil(2))?;
    let auto = config.auto_shooting;
    let mut actions = Vec::with_capacity(n_steps);
    for s in 0..n_steps {
        let mut row = Vec::with_capacity(n_players);
        for p in 0..n_players {
            let k = s * n_players + p;
            let nibble = (packed[k / 2] >> (4 * (k % 2))) & 0x0f;
            let a = Action::from_index(nibble as usize, auto)
                .ok_or_else(|| ReplayError::Malformed(format!("action code {nibble} at step {s}")))?;
            row.push(a);
        }
        actions.push(row);
    }
    let code = r.array::<1>()?[0];
    let outcome = Outcome::from_code(code).ok_or_else(|| ReplayError::Malformed(format!("outcome code {code}")))?;
    let mut team_scores = [0.0; NUM_TEAMS];
    for s in team_scores.iter_mut() {
        *s = f64::from_le_bytes(r.array()?);
    }
    if r.pos != body.len() {
        return Err(ReplayError::Malformed(format!("{} trailing bytes", body.len() - r.pos)));
    }
    Ok(Replay {
        format_version,
        engine_version,
        config,
        seed,
        actions,
        outcome,
        team_scores,
    })
}

/// Per-step engine results from re-running a replay.
#[derive(Debug, Clone)]
pub struct Resimulation {
    pub initial: GameState,
    pub steps: Vec<StepResult>,
    pub final_state: GameState,
}

/// Re-run a replay, checking that the recorded outcome and scores come back
/// exactly. `visit` sees the state before the first step and after each one.
pub fn resimulate_with(replay: &Replay, mut visit: impl FnMut(&GameState)) -> Result<Resimulation, ReplayError> {
    replay.config.validate()?;
    let config = Arc::new(replay.config.clone());
    let mut state = GameState::new(config, replay.seed)?;
    let initial = state.clone();
    visit(&state);
    let mut steps = Vec::with_capacity(replay.actions.len());
    for (t, joint) in replay.actions.iter().enumerate() {
        if state.is_terminal() {
            return Err(ReplayError::Divergence {
                step: t,
                detail: "game ended before the recorded actions ran out".into(),
            });
        }
        let result = state.step(joint).map_err(|e| ReplayError::Divergence {
            step: t,
            detail: e.to_string(),
        })?;
        visit(&state);
        steps.push(result);
    }
    let last = replay.actions.len();
    if state.outcome != Some(replay.outcome) {
        return Err(ReplayError::Divergence {
            step: last,
            detail: format!("outcome {:?}, recorded {:?}", state.outcome, replay.outcome),
        });
    }
    if state.team_cumulative_reward != replay.team_scores {
        return Err(ReplayError::Divergence {
            step: last,
            detail: format!(
                "scores {:?}, recorded {:?}",
                state.team_cumulative_reward, replay.team_scores
            ),
        });
    }
    Ok(Resimulation {
        initial,
        steps,
        final_state: state,
    })
}

pub fn resimulate(replay: &Replay) -> Result<Resimulation, ReplayError> {
    resimulate_with(replay, |_| {})
}
