//! Run configuration. Every field has a default so a config file only needs
//! to name what it overrides; unknown keys are rejected.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::light::LightCycle;
use crate::telemetry::OrientationMap;

/// Experimental condition of a block.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Condition {
    /// No copilot: teach contacts destroy fruit silently.
    NoCp,
    /// Fixed cue-on-positive-prediction copilot.
    Pav,
    /// Copilot with a learned stochastic cue policy.
    Bandit,
}

impl Condition {
    pub const ALL: [Condition; 3] = [Condition::NoCp, Condition::Pav, Condition::Bandit];

    pub fn has_copilot(self) -> bool {
        !matches!(self, Condition::NoCp)
    }

    pub fn name(self) -> &'static str {
        match self {
            Condition::NoCp => "nocp",
            Condition::Pav => "pav",
            Condition::Bandit => "bandit",
        }
    }
}

impl std::str::FromStr for Condition {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "nocp" | "no_cp" => Ok(Condition::NoCp),
            "pav" => Ok(Condition::Pav),
            "bandit" => Ok(Condition::Bandit),
            other => Err(Error::InvalidConfig(format!("unknown condition '{other}'"))),
        }
    }
}

/// Fixed (per-run) parameters of the ripening mechanics. The per-trial random
/// parts (phase, hue start, hue direction) are drawn from the trial stream.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WorldConfig {
    pub amplitude: f64,
    pub offset: f64,
    pub n_periods: f64,
    pub cycle_duration: f64,
    pub hue_arc: f64,
    pub sat_range: (f64, f64),
    /// Respawn delay bounds in seconds, drawn uniformly.
    pub respawn_delay: (f64, f64),
    pub max_spawn_fraction: f64,
}

impl Default for WorldConfig {
    fn default() -> Self {
        Self {
            amplitude: 10.0,
            offset: 0.0,
            n_periods: 2.0,
            cycle_duration: 12.0,
            hue_arc: 0.75,
            sat_range: (0.25, 1.0),
            respawn_delay: (1.0, 3.0),
            max_spawn_fraction: 0.95,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CopilotConfig {
    pub grid_size: usize,
    pub alpha: f64,
    pub n_bins: usize,
    pub beta: f64,
    /// Seconds after a cue decision during which a harvest is credited to it.
    pub credit_window: f64,
    /// Minimum seconds between repeated Pavlovian cues for one fruit.
    pub refractory: f64,
}

impl Default for CopilotConfig {
    fn default() -> Self {
        Self {
            grid_size: 12,
            alpha: 0.5,
            n_bins: 8,
            beta: 0.1,
            credit_window: 5.0,
            refractory: 1.0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PilotKind {
    Learning,
    CueFollower,
    Random,
    /// A human connected through the live service.
    Live,
}

impl PilotKind {
    pub fn name(self) -> &'static str {
        match self {
            PilotKind::Learning => "learning",
            PilotKind::CueFollower => "cuefollower",
            PilotKind::Random => "random",
            PilotKind::Live => "live",
        }
    }
}

impl std::str::FromStr for PilotKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "learning" => Ok(PilotKind::Learning),
            "cuefollower" | "cue_follower" => Ok(PilotKind::CueFollower),
            "random" => Ok(PilotKind::Random),
            "live" => Ok(PilotKind::Live),
            other => Err(Error::InvalidConfig(format!("unknown pilot '{other}'"))),
        }
    }
}

/// Behavioural parameters of a simulated pilot.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PilotProfile {
    pub reaction_delay: f64,
    pub travel_time: f64,
    pub teach_probability: f64,
    /// Observations of a colour cell before the pilot trusts its estimate.
    pub uncertainty_threshold: u32,
    /// Preference weights for front, middle and back slots.
    pub position_bias: [f64; 3],
    /// Mean harvests per second for the random pilot.
    pub random_rate: f64,
    pub grid_size: usize,
    pub alpha: f64,
}

impl Default for PilotProfile {
    fn default() -> Self {
        Self {
            reaction_delay: 0.6,
            travel_time: 0.5,
            teach_probability: 0.2,
            uncertainty_threshold: 2,
            position_bias: [1.0, 0.8, 0.6],
            random_rate: 0.5,
            grid_size: 12,
            alpha: 0.5,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PilotConfig {
    pub kind: PilotKind,
    pub profile: PilotProfile,
}

impl Default for PilotConfig {
    fn default() -> Self {
        Self {
            kind: PilotKind::Learning,
            profile: PilotProfile::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SessionConfig {
    pub condition: Condition,
    pub seed: u64,
    /// Block index; part of the per-trial seed derivation.
    pub block: u32,
    pub trials_per_block: u32,
    pub trial_duration: f64,
    pub break_duration: f64,
    pub tick_rate: f64,
    pub world: WorldConfig,
    pub light: LightCycle,
    pub copilot: CopilotConfig,
    pub pilot: PilotConfig,
    pub orientation: OrientationMap,
}

impl Default for SessionConfig {
    fn default() -> Self {
        Self {
            condition: Condition::NoCp,
            seed: 0,
            block: 0,
            trials_per_block: 3,
            trial_duration: 180.0,
            break_duration: 20.0,
            tick_rate: 20.0,
            world: WorldConfig::default(),
            light: LightCycle::default(),
            copilot: CopilotConfig::default(),
            pilot: PilotConfig::default(),
            orientation: OrientationMap::default(),
        }
    }
}

impl SessionConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let config: SessionConfig = serde_json::from_str(text)?;
        config.validate()?;
        Ok(config)
    }

    pub fn dt(&self) -> f64 {
        1.0 / self.tick_rate
    }

    /// Number of ticks in one trial.
    pub fn trial_ticks(&self) -> u64 {
        (self.trial_duration * self.tick_rate).round() as u64
    }

    /// Converts a duration to a whole number of ticks, never less than one.
    pub fn ticks_for(&self, seconds: f64) -> u64 {
        ((seconds * self.tick_rate).round() as u64).max(1)
    }

    /// Simulated length of a block including the breaks between trials.
    pub fn block_duration(&self) -> f64 {
        let n = self.trials_per_block as f64;
        n * self.trial_duration + (n - 1.0).max(0.0) * self.break_duration
    }

    /// SHA-256 of the canonical JSON form, hex encoded.
    pub fn hash(&self) -> String {
        let canonical = serde_json::to_string(self).expect("config serializes");
        hex::encode(Sha256::digest(canonical.as_bytes()))
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if !(self.tick_rate > 0.0) {
            return bad(format!("tick_rate must be positive, got {}", self.tick_rate));
        }
        if !(self.trial_duration > 0.0) {
            return bad("trial_duration must be positive".into());
        }
        if self.break_duration < 0.0 {
            return bad("break_duration must be non-negative".into());
        }
        if self.trials_per_block == 0 {
            return bad("trials_per_block must be at least 1".into());
        }
        let w = &self.world;
        if !(w.cycle_duration > 0.0) {
            return bad("world.cycle_duration must be positive".into());
        }
        if !(w.amplitude > 0.0) {
            return bad("world.amplitude must be positive".into());
        }
        if !(w.sat_range.0 < w.sat_range.1) || w.sat_range.0 < 0.0 || w.sat_range.1 > 1.0 {
            return bad("world.sat_range must be increasing within [0, 1]".into());
        }
        if !(0.0..1.0).contains(&w.hue_arc) || w.hue_arc == 0.0 {
            return bad("world.hue_arc must lie in (0, 1)".into());
        }
        if w.respawn_delay.0 > w.respawn_delay.1 || w.respawn_delay.0 < 0.0 {
            return bad("world.respawn_delay must be an ordered non-negative range".into());
        }
        if !(0.0..1.0).contains(&w.max_spawn_fraction) {
            return bad("world.max_spawn_fraction must lie in [0, 1)".into());
        }
        if w.amplitude + w.offset <= 0.0 {
            return bad("amplitude + offset must be positive for the cue policy bins".into());
        }
        self.light.validate()?;
        let c = &self.copilot;
        if c.grid_size < 2 || c.n_bins == 0 {
            return bad("copilot grid_size must be >= 2 and n_bins >= 1".into());
        }
        if !(c.alpha > 0.0 && c.alpha <= 1.0) || !(c.beta > 0.0) {
            return bad("copilot alpha must lie in (0, 1] and beta be positive".into());
        }
        if c.credit_window < 0.0 || c.refractory < 0.0 {
            return bad("copilot windows must be non-negative".into());
        }
        let p = &self.pilot.profile;
        let dt = self.dt();
        if p.reaction_delay < dt || p.travel_time < dt {
            return bad(format!("pilot delays must be at least one tick ({dt} s)"));
        }
        if !(0.0..=1.0).contains(&p.teach_probability) {
            return bad("pilot.teach_probability must lie in [0, 1]".into());
        }
        if p.grid_size < 2 || !(p.alpha > 0.0 && p.alpha <= 1.0) {
            return bad("pilot grid_size must be >= 2 and alpha in (0, 1]".into());
        }
        if p.position_bias.iter().any(|w| *w < 0.0) || p.position_bias.iter().sum::<f64>() <= 0.0 {
            return bad("pilot.position_bias weights must be non-negative with a positive sum".into());
        }
        self.orientation.validate()?;
        Ok(())
    }
}
