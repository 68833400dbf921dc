//! The platform world: six fruit slots advanced on a fixed tick.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::config::WorldConfig;
use crate::error::{Error, Result};
use crate::light::LightCycle;
use crate::mechanics::{Color, Progress, RipeningMechanics};
use crate::rng::SimRng;

pub const N_SLOTS: usize = 6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Hand {
    /// Right hand: destroys the fruit and credits its points.
    Harvest,
    /// Left hand: destroys the fruit and labels its colour for the copilot.
    Teach,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Contact {
    pub slot: usize,
    pub hand: Hand,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum FruitStatus {
    Ripening { age_ticks: u64 },
    Respawning { remaining_ticks: u64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FruitState {
    pub slot: usize,
    pub status: FruitStatus,
    /// Progress at spawn, in `[0, max_spawn_fraction]`.
    pub spawn_fraction: f64,
}

impl FruitState {
    pub fn is_ripening(&self) -> bool {
        matches!(self.status, FruitStatus::Ripening { .. })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum WorldEvent {
    Harvested {
        slot: usize,
        points: i64,
        progress: f64,
        color: Color,
    },
    Taught {
        slot: usize,
        color: Color,
        true_points: i64,
    },
    TimedOut {
        slot: usize,
    },
    Spawned {
        slot: usize,
        spawn_fraction: f64,
    },
    /// Contact on a slot with no live fruit. Routine under human latency.
    Ignored {
        slot: usize,
        hand: Hand,
    },
}

#[derive(Clone, Debug)]
pub struct World {
    pub mechanics: RipeningMechanics,
    pub light: LightCycle,
    params: WorldConfig,
    tick_rate: f64,
    tick: u64,
    fruits: [FruitState; N_SLOTS],
    score: i64,
    rng: SimRng,
}

impl World {
    /// Creates the world and spawns all six fruit. Returns the initial
    /// `Spawned` events.
    pub fn start(
        mechanics: RipeningMechanics,
        light: LightCycle,
        params: WorldConfig,
        tick_rate: f64,
        rng: SimRng,
    ) -> (Self, Vec<WorldEvent>) {
        let fruits = std::array::from_fn(|slot| FruitState {
            slot,
            status: FruitStatus::Respawning { remaining_ticks: 0 },
            spawn_fraction: 0.0,
        });
        let mut world = World {
            mechanics,
            light,
            params,
            tick_rate,
            tick: 0,
            fruits,
            score: 0,
            rng,
        };
        let events = (0..N_SLOTS).map(|slot| world.spawn(slot)).collect();
        (world, events)
    }

    pub fn tick(&self) -> u64 {
        self.tick
    }

    /// Seconds since trial start.
    pub fn sim_time(&self) -> f64 {
        self.tick as f64 / self.tick_rate
    }

    pub fn score(&self) -> i64 {
        self.score
    }

    pub fn fruits(&self) -> &[FruitState; N_SLOTS] {
        &self.fruits
    }

    pub fn light_level(&self) -> f64 {
        self.light.level(self.sim_time())
    }

    fn progress_step(&self) -> f64 {
        1.0 / (self.tick_rate * self.mechanics.cycle_duration)
    }

    /// Current progress of a ripening fruit, `None` while respawning.
    pub fn progress(&self, slot: usize) -> Option<Progress> {
        match self.fruits.get(slot)?.status {
            FruitStatus::Ripening { age_ticks } => {
                let u = self.fruits[slot].spawn_fraction + age_ticks as f64 * self.progress_step();
                Some(Progress::new(u.min(1.0)).expect("progress stays in range"))
            }
            FruitStatus::Respawning { .. } => None,
        }
    }

    /// True colour of a ripening fruit, independent of light.
    pub fn color(&self, slot: usize) -> Option<Color> {
        self.progress(slot).map(|u| self.mechanics.color_at(u))
    }

    /// One tick: contacts are resolved against the current state, then time
    /// advances by one tick.
    pub fn step(&mut self, contacts: &[Contact]) -> Vec<WorldEvent> {
        let mut events = self.resolve_contacts(contacts);
        events.extend(self.advance());
        events
    }

    pub fn resolve_contacts(&mut self, contacts: &[Contact]) -> Vec<WorldEvent> {
        contacts
            .iter()
            .map(|c| match self.resolve_contact(c.slot, c.hand) {
                Ok(event) => event,
                Err(_) => WorldEvent::Ignored {
                    slot: c.slot,
                    hand: c.hand,
                },
            })
            .collect()
    }

    /// Destroys the fruit in `slot` with the given hand. Fails if the slot
    /// holds no ripening fruit; the world is unchanged in that case.
    pub fn resolve_contact(&mut self, slot: usize, hand: Hand) -> Result<WorldEvent> {
        let u = self.progress(slot).ok_or(Error::InvalidSlot(slot))?;
        let color = self.mechanics.color_at(u);
        let points = self.mechanics.reward_at(u);
        self.begin_respawn(slot);
        Ok(match hand {
            Hand::Harvest => {
                self.score += points;
                WorldEvent::Harvested {
                    slot,
                    points,
                    progress: u.get(),
                    color,
                }
            }
            Hand::Teach => WorldEvent::Taught {
                slot,
                color,
                true_points: points,
            },
        })
    }

    /// Advances time by one tick: ripening, timeouts and respawns.
    pub fn advance(&mut self) -> Vec<WorldEvent> {
        self.tick += 1;
        let step = self.progress_step();
        let mut events = Vec::new();
        for slot in 0..N_SLOTS {
            match self.fruits[slot].status {
                FruitStatus::Ripening { age_ticks } => {
                    let age_ticks = age_ticks + 1;
                    let u = self.fruits[slot].spawn_fraction + age_ticks as f64 * step;
                    if u >= 1.0 {
                        self.begin_respawn(slot);
                        events.push(WorldEvent::TimedOut { slot });
                    } else {
                        self.fruits[slot].status = FruitStatus::Ripening { age_ticks };
                    }
                }
                FruitStatus::Respawning { remaining_ticks } => {
                    if remaining_ticks <= 1 {
                        events.push(self.spawn(slot));
                    } else {
                        self.fruits[slot].status = FruitStatus::Respawning {
                            remaining_ticks: remaining_ticks - 1,
                        };
                    }
                }
            }
        }
        events
    }

    fn begin_respawn(&mut self, slot: usize) {
        let (lo, hi) = self.params.respawn_delay;
        let delay = if hi > lo { self.rng.random_range(lo..=hi) } else { lo };
        let remaining_ticks = ((delay * self.tick_rate).round() as u64).max(1);
        self.fruits[slot].status = FruitStatus::Respawning { remaining_ticks };
    }

    fn spawn(&mut self, slot: usize) -> WorldEvent {
        let spawn_fraction = self.rng.random_range(0.0..=self.params.max_spawn_fraction);
        self.fruits[slot] = FruitState {
            slot,
            status: FruitStatus::Ripening { age_ticks: 0 },
            spawn_fraction,
        };
        WorldEvent::Spawned { slot, spawn_fraction }
    }

    #[cfg(test)]
    pub(crate) fn set_fruit(&mut self, slot: usize, spawn_fraction: f64) {
        self.fruits[slot] = FruitState {
            slot,
            status: FruitStatus::Ripening { age_ticks: 0 },
            spawn_fraction,
        };
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mechanics::HueDirection;
    use crate::rng::{stream, Stream};

    fn world(seed: u64) -> (World, Vec<WorldEvent>) {
        let params = WorldConfig::default();
        let mechanics = RipeningMechanics::with_params(&params, 0.0, 0.2, HueDirection::Forward);
        World::start(mechanics, LightCycle::default(), params, 20.0, stream(seed, Stream::World))
    }

    #[test]
    fn start_spawns_six() {
        let (w, events) = world(1);
        assert_eq!(events.len(), N_SLOTS);
        assert!(w.fruits().iter().all(FruitState::is_ripening));
        for e in events {
            let WorldEvent::Spawned { spawn_fraction, .. } = e else { panic!() };
            assert!((0.0..=0.95).contains(&spawn_fraction));
        }
    }

    #[test]
    fn near_end_times_out() {
        let (mut w, _) = world(1);
        w.set_fruit(0, 0.999);
        let events = w.step(&[]);
        assert!(events.contains(&WorldEvent::TimedOut { slot: 0 }));
        assert!(!w.fruits()[0].is_ripening());
        assert_eq!(w.score(), 0);
    }

    #[test]
    fn harvest_credits_reward() {
        let (mut w, _) = world(1);
        // phase 0, u = 0.125 is the first maximum
        w.set_fruit(2, 0.125);
        let events = w.step(&[Contact { slot: 2, hand: Hand::Harvest }]);
        let WorldEvent::Harvested { points, .. } = events[0] else { panic!("{events:?}") };
        assert_eq!(points, 10);
        assert_eq!(w.score(), 10);
    }

    #[test]
    fn negative_harvest_decreases_score() {
        let (mut w, _) = world(1);
        // 10 sin(4π·0.3) = -5.87 -> -6; find a u with reward -4
        let u = (0..=1000)
            .map(|i| i as f64 / 1000.0)
            .find(|u| w.mechanics.reward_at(Progress::new(*u).unwrap()) == -4)
            .unwrap();
        w.set_fruit(1, u);
        w.resolve_contact(1, Hand::Harvest).unwrap();
        assert_eq!(w.score(), -4);
    }

    #[test]
    fn teach_leaves_score() {
        let (mut w, _) = world(1);
        w.set_fruit(3, 0.125);
        let event = w.resolve_contact(3, Hand::Teach).unwrap();
        assert_eq!(
            event,
            WorldEvent::Taught {
                slot: 3,
                color: w.mechanics.color_at(Progress::new(0.125).unwrap()),
                true_points: 10
            }
        );
        assert_eq!(w.score(), 0);
        assert!(!w.fruits()[3].is_ripening());
    }

    #[test]
    fn contact_on_respawning_slot_is_ignored() {
        let (mut w, _) = world(1);
        w.resolve_contact(4, Hand::Harvest).unwrap();
        let events = w.step(&[Contact { slot: 4, hand: Hand::Teach }]);
        assert_eq!(events[0], WorldEvent::Ignored { slot: 4, hand: Hand::Teach });
        assert!(w.resolve_contact(4, Hand::Harvest).is_err());
        assert!(w.resolve_contact(99, Hand::Harvest).is_err());
    }

    #[test]
    fn respawn_delay_in_bounds() {
        let (mut w, _) = world(5);
        for round in 0..50 {
            let slot = round % N_SLOTS;
            if w.progress(slot).is_none() {
                continue;
            }
            w.resolve_contact(slot, Hand::Harvest).unwrap();
            let mut ticks = 0;
            loop {
                ticks += 1;
                let events = w.advance();
                if events.iter().any(|e| matches!(e, WorldEvent::Spawned { slot: s, .. } if *s == slot)) {
                    break;
                }
            }
            assert!((20..=60).contains(&ticks), "respawn after {ticks} ticks");
        }
    }
}
