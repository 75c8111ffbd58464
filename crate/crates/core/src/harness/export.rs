use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use crate::error::{Error, ReplayError};
use crate::obs::{render_global, to_ppm};

use super::episode::EpisodeRecord;
use super::replay::{resimulate_with, Replay};

/// Write one global-view PPM per state (initial state plus one per step) as
/// `frame_00000.ppm`, `frame_00001.ppm`, ...
pub fn render_replay(replay: &Replay, out_dir: &Path) -> Result<Vec<PathBuf>, Error> {
    fs::create_dir_all(out_dir)?;
    let mut frames = Vec::with_capacity(replay.len() + 1);
    let mut io_err: Option<std::io::Error> = None;
    resimulate_with(replay, |state| {
        if io_err.is_some() {
            return;
        }
        let path = out_dir.join(format!("frame_{:05}.ppm", frames.len()));
        match fs::write(&path, to_ppm(&render_global(state))) {
            Ok(()) => frames.push(path),
            Err(e) => io_err = Some(e),
        }
    })
    .map_err(Error::from)?;
    match io_err {
        Some(e) => Err(ReplayError::Io(e).into()),
        None => Ok(frames),
    }
}

/// Belief rows `step, observer, subject, p_red, p_green, p_blue`. Step 0 is
/// the prior; step `k` is the belief after `k` steps. Requires a record made
/// with belief recording on.
pub fn write_beliefs_csv<W: Write>(record: &EpisodeRecord, out: W) -> Result<(), Error> {
    let prior = record
        .initial_beliefs
        .as_ref()
        .ok_or_else(|| Error::Usage("episode was run without belief recording".into()))?;
    let n = record.teams.len();
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["step", "observer", "subject", "p_red", "p_green", "p_blue"])?;
    let snapshots = std::iter::once(prior).chain(record.steps.iter().filter_map(|s| s.beliefs.as_ref()));
    for (step, snap) in snapshots.enumerate() {
        for (k, b) in snap.iter().enumerate() {
            w.serialize((step, k / n, k % n, b.0[0], b.0[1], b.0[2]))?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Reward rows `step, player, team, raw_bonus, r_int, r_total`.
pub fn write_bonuses_csv<W: Write>(record: &EpisodeRecord, out: W) -> Result<(), Error> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["step", "player", "team", "raw_bonus", "r_int", "r_total"])?;
    for s in &record.steps {
        let r = &s.rewards;
        for (p, team) in record.teams.iter().enumerate() {
            w.serialize((s.t, p, team.name(), r.raw_bonus[p], r.r_int[p], r.r_total[p]))?;
        }
    }
    w.flush()?;
    Ok(())
}
