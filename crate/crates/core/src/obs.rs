//! Egocentric RGB observations and the omniscient global frame.
//!
//! Every map tile is a 3x3 pixel block. Local observations are a square
//! window of `2 * max_view_distance + 1` tiles centred on the observer plus
//! one status row of 3x3 cells underneath. `docs/observation-layout.md`
//! describes the layout and palette byte for byte.

use crate::config::{GameConfig, GeneralIndicator, HiddenRoles, Team, MAX_PLAYERS};
use crate::engine::{GameState, Player, Pos};

pub const TILE: usize = 3;

pub type Rgb = [u8; 3];

/// Fixed colours shared by every renderer.
pub mod palette {
    use super::Rgb;

    pub const BLACK: Rgb = [0, 0, 0];
    pub const GRASS: Rgb = [24, 48, 24];
    pub const TREE: Rgb = [10, 110, 40];
    pub const GENERAL: Rgb = [255, 255, 0];
    pub const NEUTRAL: Rgb = [128, 128, 128];
    pub const BODY_CENTER: Rgb = [64, 64, 64];
    pub const TEAM: [Rgb; 3] = [[255, 0, 0], [0, 255, 0], [0, 0, 255]];

    /// General-direction codes, clockwise from north: N, NE, E, SE, S, SW, W, NW.
    pub const DIRECTION: [Rgb; 8] = [
        [255, 255, 255],
        [255, 128, 0],
        [255, 0, 255],
        [0, 255, 255],
        [128, 0, 255],
        [255, 0, 128],
        [0, 128, 255],
        [128, 255, 0],
    ];

    const LEVELS: [u8; 3] = [80, 160, 240];

    /// Player id colours: every triple over {80, 160, 240} except the greys.
    pub const ID: [Rgb; super::MAX_PLAYERS] = {
        let mut out = [[0u8; 3]; super::MAX_PLAYERS];
        let mut n = 0;
        let mut i = 0;
        while i < 27 {
            let (r, g, b) = (LEVELS[i / 9], LEVELS[(i / 3) % 3], LEVELS[i % 3]);
            if !(r == g && g == b) {
                out[n] = [r, g, b];
                n += 1;
            }
            i += 1;
        }
        out
    };

    /// Outline colour of a body: the id colour at half intensity.
    pub const fn body(id: Rgb) -> Rgb {
        [id[0] / 2, id[1] / 2, id[2] / 2]
    }
}

/// An H x W x 3 byte image, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Observation {
    pub height: usize,
    pub width: usize,
    pub pixels: Vec<u8>,
}

impl Observation {
    pub fn new(height: usize, width: usize) -> Self {
        Observation {
            height,
            width,
            pixels: vec![0; height * width * 3],
        }
    }

    #[inline]
    pub fn pixel(&self, row: usize, col: usize) -> Rgb {
        let i = (row * self.width + col) * 3;
        [self.pixels[i], self.pixels[i + 1], self.pixels[i + 2]]
    }

    /// Centre pixel of the 3x3 block at tile coordinates `(tx, ty)`.
    #[inline]
    pub fn tile_center(&self, tx: usize, ty: usize) -> Rgb {
        self.pixel(ty * TILE + 1, tx * TILE + 1)
    }

    /// Top-left pixel of the block, which carries the sprite outline colour.
    #[inline]
    pub fn tile_corner(&self, tx: usize, ty: usize) -> Rgb {
        self.pixel(ty * TILE, tx * TILE)
    }

    pub fn contains_color(&self, c: Rgb) -> bool {
        self.pixels.chunks_exact(3).any(|p| p == c)
    }
}

/// `(height, width)` in pixels of a local observation.
pub fn local_dims(config: &GameConfig) -> (usize, usize) {
    let side = 2 * config.window_radius() as usize + 1;
    ((side + 1) * TILE, side * TILE)
}

pub fn global_dims(config: &GameConfig) -> (usize, usize) {
    (config.map_height as usize * TILE, config.map_width as usize * TILE)
}

struct Canvas<'a> {
    buf: &'a mut [u8],
    width: usize,
}

impl Canvas<'_> {
    #[inline]
    fn put(&mut self, row: usize, col: usize, c: Rgb) {
        let i = (row * self.width + col) * 3;
        self.buf[i..i + 3].copy_from_slice(&c);
    }

    fn fill_tile(&mut self, tx: usize, ty: usize, c: Rgb) {
        for r in 0..TILE {
            let start = ((ty * TILE + r) * self.width + tx * TILE) * 3;
            for k in 0..TILE {
                self.buf[start + 3 * k..start + 3 * k + 3].copy_from_slice(&c);
            }
        }
    }

    /// 3x3 sprite: outline on the outer eight pixels, `center` in the middle.
    fn sprite(&mut self, tx: usize, ty: usize, outline: Rgb, center: Rgb) {
        self.fill_tile(tx, ty, outline);
        self.put(ty * TILE + 1, tx * TILE + 1, center);
    }
}

/// Whether `observer` is shown `subject`'s team colour.
pub fn role_visible(config: &GameConfig, observer: &Player, subject: &Player) -> bool {
    if !config.local_team_colors {
        return false;
    }
    if observer.index == subject.index {
        return true;
    }
    match config.hidden_roles {
        HiddenRoles::All => true,
        HiddenRoles::None => false,
        HiddenRoles::Default => observer.team == Team::Red,
    }
}

/// Players (living, or bodies) within the observer's team view distance,
/// observer included. Empty for a dead observer.
pub fn visible_players(state: &GameState, observer: usize) -> Vec<usize> {
    let mut out = Vec::with_capacity(state.players.len());
    visible_players_into(state, observer, &mut out);
    out
}

pub fn visible_players_into(state: &GameState, observer: usize, out: &mut Vec<usize>) {
    out.clear();
    let o = &state.players[observer];
    if !o.alive {
        return;
    }
    let view = state.config.team_view_distance[o.team.index()];
    out.extend(
        state
            .players
            .iter()
            .filter(|p| p.pos.chebyshev(o.pos) <= view)
            .map(|p| p.index),
    );
}

/// Whether `subject` is within `observer`'s view (false for dead observers).
#[inline]
pub fn can_see(state: &GameState, observer: usize, subject: usize) -> bool {
    let o = &state.players[observer];
    o.alive && state.players[subject].pos.chebyshev(o.pos) <= state.config.team_view_distance[o.team.index()]
}

#[inline]
fn intensity(num: u64, den: u64) -> u8 {
    if den == 0 {
        return 0;
    }
    let num = num.min(den);
    ((510 * num + den) / (2 * den)) as u8
}

/// Octant (0 = north, clockwise) of `to` as seen from `from`.
pub fn octant(from: Pos, to: Pos) -> Option<usize> {
    let dx = (to.x - from.x) as i64;
    let dn = (from.y - to.y) as i64; // north-positive
    if dx == 0 && dn == 0 {
        return None;
    }
    let s = (dx.abs() + dn.abs()).pow(2);
    // |dy| <= (sqrt 2 - 1)|dx|  <=>  (|dx| + |dy|)^2 <= 2 dx^2
    let horizontal = s <= 2 * dx * dx;
    let vertical = s <= 2 * dn * dn;
    Some(match (horizontal, vertical) {
        (true, _) if dx > 0 => 2,
        (true, _) => 6,
        (_, true) if dn > 0 => 0,
        (_, true) => 4,
        _ => match (dx > 0, dn > 0) {
            (true, true) => 1,
            (true, false) => 3,
            (false, false) => 5,
            (false, true) => 7,
        },
    })
}

fn status_cells(state: &GameState, o: &Player) -> [Rgb; 7] {
    let cfg = &state.config;
    let team = o.team.index();
    let grey = |v: u8| [v, v, v];
    let indicator = match (o.team, state.living_general()) {
        (Team::Blue, Some(g)) => match cfg.blue_general_indicator {
            GeneralIndicator::Direction => octant(o.pos, g.pos).map_or(palette::BLACK, |k| palette::DIRECTION[k]),
            GeneralIndicator::Distance => {
                let d = o.pos.manhattan(g.pos) as u64;
                let span = (cfg.map_width + cfg.map_height) as u64;
                grey(intensity(span - d.min(span), span))
            }
        },
        _ => palette::BLACK,
    };
    [
        palette::TEAM[team],
        grey(intensity(o.pos.x as u64, cfg.map_width as u64)),
        grey(intensity(o.pos.y as u64, cfg.map_height as u64)),
        grey(intensity(o.health as u64, cfg.player_initial_health as u64)),
        grey(intensity(o.shoot_cooldown as u64, cfg.team_shoot_timeout[team] as u64)),
        grey(intensity(
            cfg.timeout.saturating_sub(state.t) as u64,
            cfg.timeout as u64,
        )),
        indicator,
    ]
}

/// Render `observer`'s local view into `buf` (length `H * W * 3`).
pub fn render_local_into(state: &GameState, observer: usize, buf: &mut [u8]) {
    let cfg = &*state.config;
    let (h, w) = local_dims(cfg);
    assert_eq!(buf.len(), h * w * 3, "observation buffer has the wrong size");
    buf.fill(0);
    let radius = cfg.window_radius() as i32;
    let side = 2 * radius as usize + 1;
    let mut canvas = Canvas { buf, width: w };
    let o = &state.players[observer];

    if o.alive {
        let view = cfg.team_view_distance[o.team.index()] as i32;
        let to_window = |p: Pos| -> Option<(usize, usize)> {
            let (dx, dy) = (p.x - o.pos.x, p.y - o.pos.y);
            (dx.abs().max(dy.abs()) <= view).then(|| ((dx + radius) as usize, (dy + radius) as usize))
        };
        for dy in -view..=view {
            for dx in -view..=view {
                let p = o.pos.offset(dx, dy);
                if state.in_bounds(p) {
                    let c = if state.trees[state.tile_index(p)] {
                        palette::TREE
                    } else {
                        palette::GRASS
                    };
                    canvas.fill_tile((dx + radius) as usize, (dy + radius) as usize, c);
                }
            }
        }
        if let Some(g) = state.living_general() {
            if o.has_seen_general || o.team == Team::Blue {
                if let Some((tx, ty)) = to_window(g.pos) {
                    canvas.fill_tile(tx, ty, palette::GENERAL);
                }
            }
        }
        // Bodies under the living; lower indices on top; the observer last.
        for p in state.players.iter().rev().filter(|p| !p.alive) {
            if let Some((tx, ty)) = p.body.and_then(to_window) {
                let center = if cfg.reveal_team_on_death || role_visible(cfg, o, p) {
                    palette::TEAM[p.team.index()]
                } else {
                    palette::BODY_CENTER
                };
                canvas.sprite(tx, ty, palette::body(palette::ID[p.id_color]), center);
            }
        }
        for p in state.players.iter().rev().filter(|p| p.alive && p.index != observer) {
            if let Some((tx, ty)) = to_window(p.pos) {
                let center = if role_visible(cfg, o, p) {
                    palette::TEAM[p.team.index()]
                } else {
                    palette::NEUTRAL
                };
                canvas.sprite(tx, ty, palette::ID[p.id_color], center);
            }
        }
        let center = if role_visible(cfg, o, o) {
            palette::TEAM[o.team.index()]
        } else {
            palette::NEUTRAL
        };
        canvas.sprite(radius as usize, radius as usize, palette::ID[o.id_color], center);
    }

    for (k, c) in status_cells(state, o).into_iter().enumerate().take(side) {
        canvas.fill_tile(k, side, c);
    }
}

pub fn render_local(state: &GameState, observer: usize) -> Observation {
    let (h, w) = local_dims(&state.config);
    let mut obs = Observation::new(h, w);
    render_local_into(state, observer, &mut obs.pixels);
    obs
}

/// Full-map frame with every role and the general visible.
pub fn render_global(state: &GameState) -> Observation {
    let cfg = &*state.config;
    let (h, w) = global_dims(cfg);
    let mut obs = Observation::new(h, w);
    let mut canvas = Canvas {
        buf: &mut obs.pixels,
        width: w,
    };
    for y in 0..cfg.map_height as usize {
        for x in 0..cfg.map_width as usize {
            let c = if state.trees[y * cfg.map_width as usize + x] {
                palette::TREE
            } else {
                palette::GRASS
            };
            canvas.fill_tile(x, y, c);
        }
    }
    if let Some(g) = state.living_general() {
        canvas.fill_tile(g.pos.x as usize, g.pos.y as usize, palette::GENERAL);
    }
    for p in state.players.iter().rev().filter(|p| !p.alive) {
        if let Some(b) = p.body {
            canvas.sprite(
                b.x as usize,
                b.y as usize,
                palette::body(palette::ID[p.id_color]),
                palette::TEAM[p.team.index()],
            );
        }
    }
    for p in state.players.iter().rev().filter(|p| p.alive) {
        canvas.sprite(
            p.pos.x as usize,
            p.pos.y as usize,
            palette::ID[p.id_color],
            palette::TEAM[p.team.index()],
        );
    }
    obs
}

/// Binary PPM (P6) encoding.
pub fn to_ppm(obs: &Observation) -> Vec<u8> {
    let mut out = format!("P6\n{} {}\n255\n", obs.width, obs.height).into_bytes();
    out.extend_from_slice(&obs.pixels);
    out
}
