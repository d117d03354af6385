//! Indoor office scenarios: floor layout, user drops and channel gains.
//!
//! Path loss is a log-distance model plus a fixed loss per wall crossed. Walls either
//! follow the office floor plan (rows of 10 m rooms along two corridors that run through
//! the transmitters) or a uniform square grid. Fast fading is Rayleigh (exponential power
//! with unit mean).

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1, Poisson};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// TX coordinates of the office floor, in metres, floor centre at the origin.
pub const TX_POSITIONS: [[f64; 2]; 4] = [[25.0, 12.5], [25.0, -12.5], [-25.0, -12.5], [-25.0, 12.5]];
pub const FLOOR: [f64; 4] = [-50.0, 50.0, -25.0, 25.0];
/// Size of the rectangle around its transmitter in which a non-visiting user is dropped.
pub const HOME_AREA: [f64; 2] = [50.0, 25.0];
pub const CORRIDOR_WIDTH: f64 = 5.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Preset {
    /// TXs 1 and 3 belong to the first operator, TXs 2 and 4 to the second.
    TwoPlayer,
    /// One TX per operator.
    FourPlayer,
}

impl Preset {
    pub fn n_players(self) -> usize {
        match self {
            Preset::TwoPlayer => 2,
            Preset::FourPlayer => 4,
        }
    }

    pub fn from_players(n: usize) -> Result<Self> {
        match n {
            2 => Ok(Preset::TwoPlayer),
            4 => Ok(Preset::FourPlayer),
            _ => Err(Error::Config(format!("no scenario preset for {n} players"))),
        }
    }

    fn owners(self) -> [usize; 4] {
        match self {
            Preset::TwoPlayer => [0, 1, 0, 1],
            Preset::FourPlayer => [0, 1, 2, 3],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WallLayout {
    /// Four rows of rooms and two corridors along `y = ±12.5`; rooms are `wall_spacing_m` wide.
    #[default]
    Office,
    /// Walls on every line `x = k·spacing` and `y = k·spacing`.
    Grid,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ChannelParams {
    pub pl0_db: f64,
    pub d0_m: f64,
    pub eta: f64,
    pub wall_loss_db: f64,
    pub wall_layout: WallLayout,
    pub wall_spacing_m: f64,
    pub tx_power_dbm_hz: f64,
    pub noise_dbm_hz: f64,
    /// Interference from other floors, added to the noise. `None` means none.
    pub background_dbm_hz: Option<f64>,
}

impl Default for ChannelParams {
    fn default() -> Self {
        Self {
            pl0_db: 46.8,
            d0_m: 1.0,
            eta: 1.87,
            wall_loss_db: 12.0,
            wall_layout: WallLayout::Office,
            wall_spacing_m: 10.0,
            tx_power_dbm_hz: -53.0,
            noise_dbm_hz: -195.0,
            background_dbm_hz: None,
        }
    }
}

impl ChannelParams {
    pub fn validate(&self) -> Result<()> {
        let finite = [
            self.pl0_db,
            self.d0_m,
            self.eta,
            self.wall_loss_db,
            self.wall_spacing_m,
            self.tx_power_dbm_hz,
            self.noise_dbm_hz,
        ];
        if finite.iter().any(|v| !v.is_finite()) {
            return Err(Error::Config("channel parameters must be finite".into()));
        }
        if self.d0_m <= 0.0 || self.wall_spacing_m <= 0.0 {
            return Err(Error::Config(
                "reference distance and wall spacing must be positive".into(),
            ));
        }
        Ok(())
    }
}

pub fn dbm_to_watts(dbm: f64) -> f64 {
    10f64.powf((dbm - 30.0) / 10.0)
}

pub fn watts_to_dbm(w: f64) -> f64 {
    10.0 * w.log10() + 30.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Wall {
    pub start: [f64; 2],
    pub end: [f64; 2],
    pub loss_db: f64,
}

impl Wall {
    /// True when the open segment `a`–`b` properly crosses this wall.
    pub fn crossed_by(&self, a: [f64; 2], b: [f64; 2]) -> bool {
        let o1 = orient(self.start, self.end, a);
        let o2 = orient(self.start, self.end, b);
        let o3 = orient(a, b, self.start);
        let o4 = orient(a, b, self.end);
        o1 * o2 < 0.0 && o3 * o4 < 0.0
    }
}

fn orient(p: [f64; 2], q: [f64; 2], r: [f64; 2]) -> f64 {
    (q[0] - p[0]) * (r[1] - p[1]) - (q[1] - p[1]) * (r[0] - p[0])
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Transmitter {
    pub position: [f64; 2],
    pub owner: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Layout {
    /// `[x_min, x_max, y_min, y_max]`.
    pub floor: [f64; 4],
    pub walls: Vec<Wall>,
    pub transmitters: Vec<Transmitter>,
}

impl Layout {
    pub fn preset(preset: Preset, params: &ChannelParams) -> Self {
        let owners = preset.owners();
        let transmitters = TX_POSITIONS
            .iter()
            .zip(owners)
            .map(|(&position, owner)| Transmitter { position, owner })
            .collect();
        Self {
            floor: FLOOR,
            walls: match params.wall_layout {
                WallLayout::Office => office_walls(FLOOR, params.wall_spacing_m, params.wall_loss_db),
                WallLayout::Grid => grid_walls(FLOOR, params.wall_spacing_m, params.wall_loss_db),
            },
            transmitters,
        }
    }

    pub fn contains(&self, p: [f64; 2]) -> bool {
        let [x0, x1, y0, y1] = self.floor;
        (x0..=x1).contains(&p[0]) && (y0..=y1).contains(&p[1])
    }

    pub fn walls_crossed(&self, a: [f64; 2], b: [f64; 2]) -> usize {
        self.walls.iter().filter(|w| w.crossed_by(a, b)).count()
    }

    /// Rectangle of size [`HOME_AREA`] centred at the TX, clipped to the floor.
    pub fn home_area(&self, tx: usize) -> [f64; 4] {
        let [cx, cy] = self.transmitters[tx].position;
        let [x0, x1, y0, y1] = self.floor;
        [
            (cx - HOME_AREA[0] / 2.0).max(x0),
            (cx + HOME_AREA[0] / 2.0).min(x1),
            (cy - HOME_AREA[1] / 2.0).max(y0),
            (cy + HOME_AREA[1] / 2.0).min(y1),
        ]
    }

    pub fn operator_transmitters(&self, player: usize) -> Vec<usize> {
        (0..self.transmitters.len())
            .filter(|&v| self.transmitters[v].owner == player)
            .collect()
    }
}

/// Multiples of `spacing` strictly between `lo` and `hi`.
fn grid_lines(lo: f64, hi: f64, spacing: f64) -> impl Iterator<Item = f64> {
    let first = (lo / spacing).floor() as i64 + 1;
    (first..)
        .map(move |k| k as f64 * spacing)
        .take_while(move |&c| c < hi)
        .filter(move |&c| c > lo)
}

/// Office floor: corridors of [`CORRIDOR_WIDTH`] centred on `y = ±12.5`, rooms `spacing`
/// wide in the four bands they leave, and a wall between the two middle bands.
pub fn office_walls(floor: [f64; 4], spacing: f64, loss_db: f64) -> Vec<Wall> {
    let [x0, x1, y0, y1] = floor;
    let half = CORRIDOR_WIDTH / 2.0;
    let c = TX_POSITIONS[0][1];
    let mut walls: Vec<Wall> = [-c - half, -c + half, 0.0, c - half, c + half]
        .into_iter()
        .map(|y| Wall {
            start: [x0, y],
            end: [x1, y],
            loss_db,
        })
        .collect();
    let room_bands = [(y0, -c - half), (-c + half, c - half), (c + half, y1)];
    for x in grid_lines(x0, x1, spacing) {
        for &(lo, hi) in &room_bands {
            walls.push(Wall {
                start: [x, lo],
                end: [x, hi],
                loss_db,
            });
        }
    }
    walls
}

/// Room walls on the lines `x = k·spacing`, `y = k·spacing` strictly inside the floor.
pub fn grid_walls(floor: [f64; 4], spacing: f64, loss_db: f64) -> Vec<Wall> {
    let [x0, x1, y0, y1] = floor;
    let mut walls = Vec::new();
    let lines = |lo, hi| grid_lines(lo, hi, spacing);
    for x in lines(x0, x1) {
        walls.push(Wall {
            start: [x, y0],
            end: [x, y1],
            loss_db,
        });
    }
    for y in lines(y0, y1) {
        walls.push(Wall {
            start: [x0, y],
            end: [x1, y],
            loss_db,
        });
    }
    walls
}

pub fn path_loss_db(tx: [f64; 2], user: [f64; 2], layout: &Layout, params: &ChannelParams) -> f64 {
    let d = ((tx[0] - user[0]).powi(2) + (tx[1] - user[1]).powi(2)).sqrt();
    let walls: f64 = layout
        .walls
        .iter()
        .filter(|w| w.crossed_by(tx, user))
        .map(|w| w.loss_db)
        .sum();
    params.pl0_db + 10.0 * params.eta * (d.max(params.d0_m) / params.d0_m).log10() + walls
}

/// `|h̃|²/L` with Rayleigh fading power drawn from `rng`.
pub fn channel_gain<R: Rng + ?Sized>(path_loss_db: f64, rng: &mut R) -> f64 {
    let fading: f64 = Exp1.sample(rng);
    fading / 10f64.powf(path_loss_db / 10.0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct User {
    pub operator: usize,
    /// Transmitter around which the user was dropped.
    pub home_tx: usize,
    pub position: [f64; 2],
    /// Strongest-gain transmitter of the user's own operator.
    pub serving_tx: usize,
}

/// Drops the users of one transmitter: Poisson count, uniform positions in the home area
/// or, with probability `visiting_prob`, anywhere on the floor.
pub fn generate_users<R: Rng + ?Sized>(
    layout: &Layout,
    tx: usize,
    mean_users: f64,
    visiting_prob: f64,
    rng: &mut R,
) -> Result<Vec<[f64; 2]>> {
    if !(0.0..=1.0).contains(&visiting_prob) {
        return Err(Error::invalid(format!(
            "visiting probability must lie in [0, 1], got {visiting_prob}"
        )));
    }
    if !(mean_users > 0.0 && mean_users.is_finite()) {
        return Err(Error::invalid(format!(
            "mean user count must be positive, got {mean_users}"
        )));
    }
    if tx >= layout.transmitters.len() {
        return Err(Error::invalid(format!("transmitter {tx} not in layout")));
    }
    let poisson = Poisson::new(mean_users).map_err(|e| Error::invalid(e.to_string()))?;
    let count = poisson.sample(rng) as usize;
    let home = layout.home_area(tx);
    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        let visiting = rng.random_bool(visiting_prob);
        let [x0, x1, y0, y1] = if visiting { layout.floor } else { home };
        out.push([rng.random_range(x0..x1), rng.random_range(y0..y1)]);
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    pub preset: Preset,
    pub mean_users: f64,
    pub visiting_prob: f64,
    pub channel: ChannelParams,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            preset: Preset::TwoPlayer,
            mean_users: 5.0,
            visiting_prob: 0.0,
            channel: ChannelParams::default(),
        }
    }
}

/// A realized scenario. Gains are linear, indexed `[transmitter][user]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub n_players: usize,
    pub layout: Layout,
    pub channel: ChannelParams,
    pub users: Vec<User>,
    pub gains: Vec<Vec<f64>>,
    pub user_seed: u64,
    pub fading_seed: u64,
}

impl Scenario {
    /// Drops users with `user_seed` and draws fading with `fading_seed`.
    pub fn generate(config: &ScenarioConfig, user_seed: u64, fading_seed: u64) -> Result<Self> {
        config.channel.validate()?;
        let layout = Layout::preset(config.preset, &config.channel);
        let mut rng = ChaCha8Rng::seed_from_u64(user_seed);
        let mut drops = Vec::new();
        for tx in 0..layout.transmitters.len() {
            for p in generate_users(&layout, tx, config.mean_users, config.visiting_prob, &mut rng)? {
                drops.push((tx, p));
            }
        }
        let mut rng = ChaCha8Rng::seed_from_u64(fading_seed);
        let gains: Vec<Vec<f64>> = layout
            .transmitters
            .iter()
            .map(|t| {
                drops
                    .iter()
                    .map(|&(_, p)| {
                        let pl = path_loss_db(t.position, p, &layout, &config.channel);
                        channel_gain(pl, &mut rng)
                    })
                    .collect()
            })
            .collect();
        let users = drops
            .iter()
            .enumerate()
            .map(|(u, &(home_tx, position))| {
                let operator = layout.transmitters[home_tx].owner;
                let serving_tx = strongest(&layout, &gains, operator, u);
                User {
                    operator,
                    home_tx,
                    position,
                    serving_tx,
                }
            })
            .collect();
        Self::from_parts(
            config.preset.n_players(),
            layout,
            config.channel.clone(),
            users,
            gains,
        )
        .map(|s| Self {
            user_seed,
            fading_seed,
            ..s
        })
    }

    /// Assembles a scenario from explicit parts, checking its invariants.
    pub fn from_parts(
        n_players: usize,
        layout: Layout,
        channel: ChannelParams,
        users: Vec<User>,
        gains: Vec<Vec<f64>>,
    ) -> Result<Self> {
        if gains.len() != layout.transmitters.len() || gains.iter().any(|g| g.len() != users.len())
        {
            return Err(Error::invalid("gain matrix must be transmitters × users"));
        }
        if gains.iter().flatten().any(|&g| !(g > 0.0 && g.is_finite())) {
            return Err(Error::invalid("channel gains must be positive and finite"));
        }
        if layout.transmitters.iter().any(|t| t.owner >= n_players) {
            return Err(Error::invalid("transmitter owned by an unknown player"));
        }
        for (u, user) in users.iter().enumerate() {
            let Some(tx) = layout.transmitters.get(user.serving_tx) else {
                return Err(Error::invalid(format!("user {u} served by unknown transmitter")));
            };
            if tx.owner != user.operator {
                return Err(Error::invalid(format!(
                    "user {u} served by a transmitter of another operator"
                )));
            }
        }
        Ok(Self {
            n_players,
            layout,
            channel,
            users,
            gains,
            user_seed: 0,
            fading_seed: 0,
        })
    }

    pub fn tx_power_w_hz(&self) -> f64 {
        dbm_to_watts(self.channel.tx_power_dbm_hz)
    }

    /// Thermal noise plus background interference, W/Hz.
    pub fn noise_w_hz(&self) -> f64 {
        dbm_to_watts(self.channel.noise_dbm_hz)
            + self.channel.background_dbm_hz.map_or(0.0, dbm_to_watts)
    }

    pub fn users_of(&self, player: usize) -> Vec<usize> {
        (0..self.users.len())
            .filter(|&u| self.users[u].operator == player)
            .collect()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let raw: Scenario = serde_json::from_str(s)?;
        let (us, fs) = (raw.user_seed, raw.fading_seed);
        let s = Self::from_parts(raw.n_players, raw.layout, raw.channel, raw.users, raw.gains)?;
        Ok(Self {
            user_seed: us,
            fading_seed: fs,
            ..s
        })
    }
}

fn strongest(layout: &Layout, gains: &[Vec<f64>], operator: usize, user: usize) -> usize {
    layout
        .operator_transmitters(operator)
        .into_iter()
        .fold(None, |best: Option<usize>, v| match best {
            Some(b) if gains[b][user] >= gains[v][user] => Some(b),
            _ => Some(v),
        })
        .expect("every operator owns a transmitter")
}
