//! The machine copilot: learned colour → points predictions plus the two cue
//! controllers (fixed Pavlovian rule and learned bandit policy).

mod bandit;
mod pavlov;
mod value;

pub use bandit::{logistic, CueAction, CueDecision, CuePolicy, Outcome, Resolution};
pub use pavlov::{cue_sound, pav_decide, CueLatch, PavDecision};
pub use value::{Cell, ValueTable};
