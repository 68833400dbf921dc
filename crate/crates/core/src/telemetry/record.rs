use serde::{Deserialize, Serialize};

use crate::config::SessionConfig;
use crate::copilot::{Cell, CueAction};
use crate::mechanics::RipeningMechanics;
use crate::world::Hand;

pub const SCHEMA_VERSION: u32 = 1;

/// First line of every log.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LogHeader {
    pub kind: String,
    pub schema_version: u32,
    pub config_hash: String,
    pub seed: u64,
    pub config: SessionConfig,
}

impl LogHeader {
    pub const KIND: &'static str = "header";

    pub fn new(config: &SessionConfig) -> Self {
        Self {
            kind: Self::KIND.to_string(),
            schema_version: SCHEMA_VERSION,
            config_hash: config.hash(),
            seed: config.seed,
            config: config.clone(),
        }
    }
}

/// One telemetry atom. `tick` is trial-local; `t` is `tick / tick_rate`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EventRecord {
    pub trial: u32,
    pub tick: u64,
    pub t: f64,
    #[serde(flatten)]
    pub kind: EventKind,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EventKind {
    TrialStart {
        block: u32,
        trial_seed: u64,
        mechanics: RipeningMechanics,
    },
    LightSample {
        light: f64,
    },
    Spawned {
        slot: usize,
        spawn_fraction: f64,
    },
    TimedOut {
        slot: usize,
    },
    /// A cue sound played for a fruit.
    CueEmit {
        slot: usize,
        sound: String,
    },
    CueDecision {
        slot: usize,
        action: CueAction,
        p: f64,
        bin: usize,
        value: f64,
    },
    /// A pilot contact applied at this tick.
    Action {
        slot: usize,
        hand: Hand,
    },
    Harvested {
        slot: usize,
        points: i64,
        progress: f64,
        hue: f64,
        sat: f64,
    },
    Taught {
        slot: usize,
        hue: f64,
        sat: f64,
        true_points: i64,
        /// False when no copilot was present to learn from it.
        consumed: bool,
    },
    Ignored {
        slot: usize,
        hand: Hand,
    },
    ScoreDelta {
        delta: i64,
        score: i64,
    },
    ValueUpdate {
        slot: usize,
        cell: Cell,
        delta_v: f64,
        value: f64,
    },
    PolicyUpdate {
        slot: usize,
        bin: usize,
        action: CueAction,
        reward: f64,
        delta_pi: f64,
        p_cue: f64,
    },
    TrialEnd {
        score: i64,
        partial: bool,
    },
}

impl EventKind {
    pub fn name(&self) -> &'static str {
        match self {
            EventKind::TrialStart { .. } => "trial_start",
            EventKind::LightSample { .. } => "light_sample",
            EventKind::Spawned { .. } => "spawned",
            EventKind::TimedOut { .. } => "timed_out",
            EventKind::CueEmit { .. } => "cue_emit",
            EventKind::CueDecision { .. } => "cue_decision",
            EventKind::Action { .. } => "action",
            EventKind::Harvested { .. } => "harvested",
            EventKind::Taught { .. } => "taught",
            EventKind::Ignored { .. } => "ignored",
            EventKind::ScoreDelta { .. } => "score_delta",
            EventKind::ValueUpdate { .. } => "value_update",
            EventKind::PolicyUpdate { .. } => "policy_update",
            EventKind::TrialEnd { .. } => "trial_end",
        }
    }

    /// Trial boundary records, as opposed to in-tick events.
    pub fn is_marker(&self) -> bool {
        matches!(self, EventKind::TrialStart { .. } | EventKind::TrialEnd { .. })
    }
}
