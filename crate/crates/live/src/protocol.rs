//! WebSocket wire messages. All frames are JSON text tagged by `type`.
//!
//! Server → client:
//!
//! ```json
//! {"type":"snapshot","tick":612,"light":0.0,"slots":[{"slot":0,"alive":true,"perceived":"masked","position":{"x":0.5,"y":0.866},"sparkle":false}, ...]}
//! {"type":"snapshot","tick":12,"light":1.0,"slots":[{"slot":0,"alive":true,"perceived":{"visible":{"hue":0.31,"sat":0.42}}, ...}, ...]}
//! {"type":"audio_event","tick":40,"sound_id":"gain"}
//! {"type":"score_update","tick":40,"score":7,"delta":7}
//! {"type":"trial_phase","phase":"running","trial":0}
//! ```
//!
//! Client → server:
//!
//! ```json
//! {"type":"contact","slot":2,"hand":"harvest"}
//! {"type":"control","command":"start"}
//! ```

use forage_core::pilot::{Perceived, PilotObservation};
use forage_core::world::{Contact, Hand, N_SLOTS};
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Position {
    pub x: f64,
    pub y: f64,
}

/// Slot `i` sits at 30° + 60°·i clockwise from the pilot's starting heading
/// (+y) on a unit circle.
pub fn slot_position(slot: usize) -> Position {
    let angle = (30.0 + 60.0 * slot as f64).to_radians();
    let round = |v: f64| (v * 1e6).round() / 1e6;
    Position {
        x: round(angle.sin()),
        y: round(angle.cos()),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SlotSnapshot {
    pub slot: usize,
    pub alive: bool,
    /// Already filtered: colour is only present in daylight.
    pub perceived: Perceived,
    pub position: Position,
    /// Brief mote of light where points were just gained.
    pub sparkle: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    Waiting,
    Running,
    Break,
    Done,
    Aborted,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ServerMessage {
    Snapshot {
        tick: u64,
        light: f64,
        slots: Vec<SlotSnapshot>,
    },
    AudioEvent {
        tick: u64,
        sound_id: String,
    },
    ScoreUpdate {
        tick: u64,
        score: i64,
        delta: i64,
    },
    TrialPhase {
        phase: Phase,
        trial: u32,
    },
}

impl ServerMessage {
    pub fn snapshot(obs: &PilotObservation, sparkle: &[bool; N_SLOTS]) -> Self {
        let slots = obs
            .slots
            .iter()
            .enumerate()
            .map(|(slot, view)| SlotSnapshot {
                slot,
                alive: view.alive,
                // the observation is already masked; this guards the wire as well
                perceived: if obs.can_see() { view.perceived } else { Perceived::Masked },
                position: slot_position(slot),
                sparkle: sparkle[slot],
            })
            .collect();
        ServerMessage::Snapshot {
            tick: obs.tick,
            light: obs.light,
            slots,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    Start,
    Abort,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ClientMessage {
    Contact { slot: usize, hand: Hand },
    Control { command: Command },
}

impl ClientMessage {
    pub fn contact(&self) -> Option<Contact> {
        match *self {
            ClientMessage::Contact { slot, hand } => Some(Contact { slot, hand }),
            ClientMessage::Control { .. } => None,
        }
    }
}
