//! Deterministic simulator for a pilot/copilot foraging task.
//!
//! A pilot harvests (or teaches) six ripening fruit whose colour predicts the
//! points they are worth, while a day/night cycle periodically hides colour
//! from the pilot. A machine copilot learns colour → points predictions from
//! taught fruit and cues the pilot either by a fixed rule or through a
//! learned contextual-bandit policy. Every run is reproducible from its
//! configuration and produces a JSONL event log.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod copilot;
pub mod error;
pub mod light;
pub mod mechanics;
pub mod pilot;
pub mod replay;
pub mod rng;
pub mod session;
pub mod telemetry;
pub mod world;

pub use config::{Condition, PilotKind, SessionConfig};
pub use error::{Error, Result};
pub use session::{run_block, BlockResult, PilotDriver, Session, TrialResult};
