//! Contextual cue policy. The context is the copilot's predicted value,
//! binned; each bin holds a two-action gradient bandit (cue or stay silent)
//! with a logistic policy and a shared running-mean reward baseline.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CueAction {
    Cue,
    Silent,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CueDecision {
    pub slot: usize,
    pub action: CueAction,
    pub context_bin: usize,
    /// π(Cue | bin) at the moment of the decision.
    pub p_cue: f64,
    pub decision_tick: u64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Outcome {
    HarvestPoints(i64),
    Expired,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Resolution {
    pub decision: CueDecision,
    /// Normalized reward `points / amplitude`; zero on expiry.
    pub reward: f64,
    /// Change of π(Cue | bin) caused by this update.
    pub delta_pi: f64,
    pub p_after: f64,
}

pub fn logistic(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CuePolicy {
    /// Per bin: `[H(Cue), H(Silent)]`.
    preferences: Vec<[f64; 2]>,
    value_span: f64,
    amplitude: f64,
    beta: f64,
    baseline: f64,
    resolved: u64,
    pending: Vec<CueDecision>,
}

impl CuePolicy {
    /// `value_span` is the top of the binned prediction range
    /// (amplitude + offset); rewards are normalized by `amplitude`.
    pub fn new(n_bins: usize, value_span: f64, amplitude: f64, beta: f64) -> Self {
        assert!(n_bins > 0 && value_span > 0.0 && amplitude > 0.0);
        Self {
            preferences: vec![[0.0; 2]; n_bins],
            value_span,
            amplitude,
            beta,
            baseline: 0.0,
            resolved: 0,
            pending: Vec::new(),
        }
    }

    pub fn n_bins(&self) -> usize {
        self.preferences.len()
    }

    pub fn baseline(&self) -> f64 {
        self.baseline
    }

    pub fn preferences(&self, bin: usize) -> [f64; 2] {
        self.preferences[bin]
    }

    pub fn set_preferences(&mut self, bin: usize, cue: f64, silent: f64) {
        self.preferences[bin] = [cue, silent];
    }

    pub fn pending(&self) -> &[CueDecision] {
        &self.pending
    }

    /// Bin of a positive prediction; uniform bins over `(0, value_span]`,
    /// values beyond the span fall into the top bin.
    pub fn bin(&self, value: f64) -> usize {
        let n = self.n_bins();
        let scaled = (value / self.value_span * n as f64).ceil();
        (scaled.max(1.0) as usize - 1).min(n - 1)
    }

    pub fn p_cue(&self, bin: usize) -> f64 {
        let [cue, silent] = self.preferences[bin];
        logistic(cue - silent)
    }

    /// Samples cue or silence for a fruit whose prediction just turned
    /// positive and records the decision as pending.
    pub fn decide<R: Rng + ?Sized>(&mut self, value: f64, slot: usize, tick: u64, rng: &mut R) -> CueDecision {
        let context_bin = self.bin(value);
        let p_cue = self.p_cue(context_bin);
        let action = if rng.random::<f64>() < p_cue {
            CueAction::Cue
        } else {
            CueAction::Silent
        };
        let decision = CueDecision {
            slot,
            action,
            context_bin,
            p_cue,
            decision_tick: tick,
        };
        self.pending.push(decision.clone());
        decision
    }

    /// Resolves the most recent pending decision for `slot`.
    pub fn resolve(&mut self, slot: usize, outcome: Outcome) -> Result<Resolution> {
        let idx = self
            .pending
            .iter()
            .rposition(|d| d.slot == slot)
            .ok_or(Error::NoPendingDecision { slot })?;
        let decision = self.pending.remove(idx);
        Ok(self.apply(decision, outcome))
    }

    /// Expires every pending decision whose credit window has closed at `tick`.
    pub fn expire_due(&mut self, tick: u64, window_ticks: u64) -> Vec<Resolution> {
        let (due, keep): (Vec<_>, Vec<_>) = std::mem::take(&mut self.pending)
            .into_iter()
            .partition(|d| tick >= d.decision_tick + window_ticks);
        self.pending = keep;
        due.into_iter().map(|d| self.apply(d, Outcome::Expired)).collect()
    }

    /// Expires every pending decision for `slot`, oldest first.
    pub fn expire_slot(&mut self, slot: usize) -> Vec<Resolution> {
        let (due, keep): (Vec<_>, Vec<_>) = std::mem::take(&mut self.pending)
            .into_iter()
            .partition(|d| d.slot == slot);
        self.pending = keep;
        due.into_iter().map(|d| self.apply(d, Outcome::Expired)).collect()
    }

    pub fn expire_all(&mut self) -> Vec<Resolution> {
        let due = std::mem::take(&mut self.pending);
        due.into_iter().map(|d| self.apply(d, Outcome::Expired)).collect()
    }

    fn apply(&mut self, decision: CueDecision, outcome: Outcome) -> Resolution {
        let reward = match outcome {
            Outcome::HarvestPoints(points) => points as f64 / self.amplitude,
            Outcome::Expired => 0.0,
        };
        let bin = decision.context_bin;
        let before = self.p_cue(bin);
        let chose_cue = if decision.action == CueAction::Cue { 1.0 } else { 0.0 };
        let step = self.beta * (reward - self.baseline) * (chose_cue - before);
        self.preferences[bin][0] += step;
        self.preferences[bin][1] -= step;
        self.resolved += 1;
        self.baseline += (reward - self.baseline) / self.resolved as f64;
        let p_after = self.p_cue(bin);
        Resolution {
            decision,
            reward,
            delta_pi: p_after - before,
            p_after,
        }
    }
}
