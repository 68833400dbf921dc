//! Simulated pilots. These are behavioural hypotheses standing in for the
//! human: they see colour only in daylight, hear copilot cues, reach with a
//! fixed latency, and (the learning pilot) build their own colour → points
//! table from harvests.

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::config::{PilotKind, PilotProfile};
use crate::copilot::ValueTable;
use crate::light::is_day;
use crate::mechanics::Color;
use crate::rng::SimRng;
use crate::telemetry::OrientationMap;
use crate::world::{Contact, Hand, WorldEvent, N_SLOTS};

/// What a pilot can perceive of a slot.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Perceived {
    Masked,
    Visible(Color),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SlotView {
    pub alive: bool,
    pub perceived: Perceived,
    /// A cue sound for this slot played this tick.
    pub cue: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PilotObservation {
    pub tick: u64,
    pub time: f64,
    pub light: f64,
    pub score: i64,
    pub copilot_present: bool,
    pub slots: [SlotView; N_SLOTS],
}

impl PilotObservation {
    pub fn can_see(&self) -> bool {
        is_day(self.light)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PilotAction {
    Contact(Contact),
    Idle,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Basis {
    Sight,
    Cue,
    Chance,
}

#[derive(Clone, Copy, Debug)]
struct Scheduled {
    due: u64,
    contact: Contact,
    basis: Basis,
}

/// Private state of a simulated pilot.
#[derive(Clone, Debug)]
pub struct PilotState {
    pub estimates: ValueTable,
    scheduled: Option<Scheduled>,
    rng: SimRng,
}

impl PilotState {
    pub fn new(profile: &PilotProfile, rng: SimRng) -> Self {
        Self {
            estimates: ValueTable::new(profile.grid_size, profile.alpha),
            scheduled: None,
            rng,
        }
    }

    pub fn is_busy(&self) -> bool {
        self.scheduled.is_some()
    }
}

#[derive(Clone, Debug)]
pub struct SimulatedPilot {
    pub kind: PilotKind,
    pub profile: PilotProfile,
    pub orientation: OrientationMap,
    tick_rate: f64,
    pub state: PilotState,
}

impl SimulatedPilot {
    pub fn new(kind: PilotKind, profile: PilotProfile, orientation: OrientationMap, tick_rate: f64, rng: SimRng) -> Self {
        assert!(kind != PilotKind::Live, "live pilots are driven over the network");
        let state = PilotState::new(&profile, rng);
        Self {
            kind,
            profile,
            orientation,
            tick_rate,
            state,
        }
    }

    /// Ticks from perceiving a stimulus to touching the fruit.
    pub fn reach_ticks(&self) -> u64 {
        (((self.profile.reaction_delay + self.profile.travel_time) * self.tick_rate).round() as u64).max(1)
    }

    /// Called once per tick. Returns a contact when a scheduled reach lands;
    /// otherwise may schedule a new reach and returns `Idle`.
    pub fn step(&mut self, obs: &PilotObservation) -> PilotAction {
        if let Some(s) = self.state.scheduled {
            if obs.tick < s.due {
                return PilotAction::Idle;
            }
            self.state.scheduled = None;
            // a reach planned on sight is abandoned once colour is lost
            if s.basis == Basis::Sight && !obs.can_see() {
                return PilotAction::Idle;
            }
            return PilotAction::Contact(s.contact);
        }
        if let Some((contact, basis)) = self.choose(obs) {
            self.state.scheduled = Some(Scheduled {
                due: obs.tick + self.reach_ticks(),
                contact,
                basis,
            });
        }
        PilotAction::Idle
    }

    fn choose(&mut self, obs: &PilotObservation) -> Option<(Contact, Basis)> {
        match self.kind {
            PilotKind::Learning if obs.can_see() => self.choose_by_sight(obs),
            PilotKind::Learning => self.choose_cued(obs),
            PilotKind::CueFollower => match self.choose_cued(obs) {
                None if obs.can_see() => self.choose_teach(obs),
                cued => cued,
            },
            PilotKind::Random => self.choose_random(obs),
            PilotKind::Live => None,
        }
    }

    fn choose_by_sight(&mut self, obs: &PilotObservation) -> Option<(Contact, Basis)> {
        let threshold = self.profile.uncertainty_threshold;
        let mut confident = Vec::new();
        let mut uncertain = Vec::new();
        for (slot, view) in obs.slots.iter().enumerate() {
            let Perceived::Visible(color) = view.perceived else { continue };
            if !view.alive {
                continue;
            }
            let cell = self.state.estimates.cell(color);
            if self.state.estimates.visits(cell) < threshold {
                uncertain.push(slot);
            } else if self.state.estimates.value(cell) > 0.0 {
                confident.push(slot);
            }
        }
        if let Some(slot) = self.pick(&confident) {
            return Some((Contact { slot, hand: Hand::Harvest }, Basis::Sight));
        }
        let slot = self.pick(&uncertain)?;
        let hand = if self.state.rng.random_bool(self.profile.teach_probability) {
            Hand::Teach
        } else {
            Hand::Harvest
        };
        Some((Contact { slot, hand }, Basis::Sight))
    }

    fn choose_cued(&mut self, obs: &PilotObservation) -> Option<(Contact, Basis)> {
        if !obs.copilot_present {
            return None;
        }
        let cued: Vec<usize> = (0..N_SLOTS).filter(|s| obs.slots[*s].cue).collect();
        let slot = self.pick(&cued)?;
        Some((Contact { slot, hand: Hand::Harvest }, Basis::Cue))
    }

    /// A cue follower harvests only on cues; by day it teaches colours it
    /// has seen fewer than `uncertainty_threshold` times so the copilot has
    /// something to learn from.
    fn choose_teach(&mut self, obs: &PilotObservation) -> Option<(Contact, Basis)> {
        let threshold = self.profile.uncertainty_threshold;
        let uncertain: Vec<usize> = (0..N_SLOTS)
            .filter(|s| match obs.slots[*s].perceived {
                Perceived::Visible(color) if obs.slots[*s].alive => {
                    self.state.estimates.visits(self.state.estimates.cell(color)) < threshold
                }
                _ => false,
            })
            .collect();
        if uncertain.is_empty() || !self.state.rng.random_bool(self.profile.teach_probability) {
            return None;
        }
        let slot = self.pick(&uncertain)?;
        Some((Contact { slot, hand: Hand::Teach }, Basis::Sight))
    }

    fn choose_random(&mut self, obs: &PilotObservation) -> Option<(Contact, Basis)> {
        let p = (self.profile.random_rate / self.tick_rate).min(1.0);
        if !self.state.rng.random_bool(p) {
            return None;
        }
        let alive: Vec<usize> = (0..N_SLOTS).filter(|s| obs.slots[*s].alive).collect();
        if alive.is_empty() {
            return None;
        }
        let slot = alive[self.state.rng.random_range(0..alive.len())];
        Some((Contact { slot, hand: Hand::Harvest }, Basis::Chance))
    }

    /// Picks a slot weighted by the front/middle/back bias.
    fn pick(&mut self, slots: &[usize]) -> Option<usize> {
        match slots {
            [] => None,
            [only] => Some(*only),
            _ => {
                let weights: Vec<f64> = slots
                    .iter()
                    .map(|s| self.profile.position_bias[self.orientation.position(*s).index()])
                    .collect();
                match WeightedIndex::new(&weights) {
                    Ok(dist) => Some(slots[dist.sample(&mut self.state.rng)]),
                    Err(_) => Some(slots[self.state.rng.random_range(0..slots.len())]),
                }
            }
        }
    }

    /// Updates the pilot's own estimates from an outcome it caused.
    /// `saw_color` is false when the outcome happened in twilight or night.
    pub fn learn(&mut self, event: &WorldEvent, saw_color: bool) {
        if !saw_color {
            return;
        }
        match event {
            WorldEvent::Harvested { points, color, .. } => {
                self.state.estimates.update(*color, *points as f64);
            }
            // teaching reveals no points to the pilot
            WorldEvent::Taught { color, .. } => self.state.estimates.record_visit(*color),
            _ => {}
        }
    }

    /// New mechanics make old estimates meaningless.
    pub fn reset(&mut self, rng: SimRng) {
        self.state = PilotState::new(&self.profile, rng);
    }
}
