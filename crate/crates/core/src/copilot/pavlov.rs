//! Fixed cue rule: a fruit's cue sounds when its predicted value turns
//! positive, and repeats at most once per refractory period while it stays
//! positive.

use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum PavDecision {
    EmitCue { slot: usize },
    Nothing,
}

/// Per-fruit edge state for the cue rule.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct CueLatch {
    positive: bool,
    last_emit: Option<u64>,
}

impl CueLatch {
    /// Updates the latch with this tick's prediction. Returns true on a rising
    /// edge of `value > 0`.
    pub fn rising_edge(&mut self, value: f64) -> bool {
        let now = value > 0.0;
        let edge = now && !self.positive;
        self.positive = now;
        if !now {
            self.last_emit = None;
        }
        edge
    }

    /// Forget the current fruit (it was destroyed or timed out).
    pub fn clear(&mut self) {
        *self = CueLatch::default();
    }
}

/// Applies the Pavlovian rule for one fruit at `tick`.
pub fn pav_decide(value: f64, latch: &mut CueLatch, slot: usize, tick: u64, refractory_ticks: u64) -> PavDecision {
    let edge = latch.rising_edge(value);
    let due = edge
        || matches!(latch.last_emit, Some(last) if latch.positive && tick >= last + refractory_ticks.max(1));
    if due {
        latch.last_emit = Some(tick);
        PavDecision::EmitCue { slot }
    } else {
        PavDecision::Nothing
    }
}

/// Sound identifier for a slot's cue.
pub fn cue_sound(slot: usize) -> String {
    format!("cue_{slot}")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn non_positive_values_are_silent() {
        let mut latch = CueLatch::default();
        assert_eq!(pav_decide(-3.0, &mut latch, 0, 0, 20), PavDecision::Nothing);
        assert_eq!(pav_decide(0.0, &mut latch, 0, 1, 20), PavDecision::Nothing);
    }

    #[test]
    fn rising_edge_then_refractory() {
        let mut latch = CueLatch::default();
        let emits: Vec<u64> = (0..50)
            .filter(|t| pav_decide(2.0, &mut latch, 1, *t, 20) != PavDecision::Nothing)
            .collect();
        assert_eq!(emits, vec![0, 20, 40]);
    }

    #[test]
    fn re_arms_after_going_negative() {
        let mut latch = CueLatch::default();
        assert!(matches!(pav_decide(1.0, &mut latch, 2, 0, 20), PavDecision::EmitCue { slot: 2 }));
        assert_eq!(pav_decide(1.0, &mut latch, 2, 1, 20), PavDecision::Nothing);
        assert_eq!(pav_decide(-1.0, &mut latch, 2, 2, 20), PavDecision::Nothing);
        assert!(matches!(pav_decide(1.0, &mut latch, 2, 3, 20), PavDecision::EmitCue { .. }));
    }

    #[test]
    fn sounds_are_distinct() {
        let sounds: std::collections::HashSet<_> = (0..6).map(cue_sound).collect();
        assert_eq!(sounds.len(), 6);
    }
}
