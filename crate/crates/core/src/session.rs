//! Experimental protocol: trials and blocks under one condition, wiring the
//! world, the copilot, a pilot driver and the event log together.

use thiserror::Error;

use crate::config::{Condition, PilotKind, SessionConfig};
use crate::copilot::{cue_sound, pav_decide, CueAction, CueLatch, CuePolicy, Outcome, PavDecision, Resolution, ValueTable};
use crate::error::Result;
use crate::light::is_day;
use crate::mechanics::{Color, RipeningMechanics};
use crate::pilot::{Perceived, PilotAction, PilotObservation, SimulatedPilot, SlotView};
use crate::rng::{self, SimRng, Stream};
use crate::telemetry::{aggregate_scores, to_jsonl, EventKind, EventRecord, LogHeader, ScoreSplit};
use crate::world::{Contact, World, WorldEvent, N_SLOTS};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DriverError {
    #[error("pilot disconnected")]
    Disconnected,
}

/// Facts a driver gets at the start of each trial.
#[derive(Clone, Debug)]
pub struct TrialInfo {
    pub trial: u32,
    pub block: u32,
    pub trial_seed: u64,
    pub condition: Condition,
    pub mechanics: RipeningMechanics,
    pub ticks: u64,
    pub tick_rate: f64,
}

/// Source of pilot contacts: a simulated pilot, a scripted action stream, or
/// a live human.
pub trait PilotDriver {
    fn begin_trial(&mut self, _info: &TrialInfo) {}

    /// Called once per tick with what the pilot perceives. Returns the
    /// contacts to apply at this tick.
    fn poll(&mut self, obs: &PilotObservation) -> Result<Vec<Contact>, DriverError>;

    /// Every record logged during the tick, after contacts were resolved.
    fn observe(&mut self, _records: &[EventRecord]) {}

    fn end_trial(&mut self, _result: &TrialResult) {}

    /// Pause between trials, in simulated seconds.
    fn on_break(&mut self, _seconds: f64) {}
}

/// Drives one of the simulated pilot models.
pub struct SimulatedDriver {
    pilot: SimulatedPilot,
}

impl SimulatedDriver {
    pub fn new(config: &SessionConfig) -> Self {
        let kind = match config.pilot.kind {
            PilotKind::Live => PilotKind::Learning,
            kind => kind,
        };
        // the real stream is installed by begin_trial
        let pilot = SimulatedPilot::new(
            kind,
            config.pilot.profile.clone(),
            config.orientation.clone(),
            config.tick_rate,
            rng::stream(0, Stream::Pilot),
        );
        Self { pilot }
    }

    pub fn pilot(&self) -> &SimulatedPilot {
        &self.pilot
    }
}

impl PilotDriver for SimulatedDriver {
    fn begin_trial(&mut self, info: &TrialInfo) {
        self.pilot.reset(rng::stream(info.trial_seed, Stream::Pilot));
    }

    fn poll(&mut self, obs: &PilotObservation) -> Result<Vec<Contact>, DriverError> {
        Ok(match self.pilot.step(obs) {
            PilotAction::Contact(c) => vec![c],
            PilotAction::Idle => Vec::new(),
        })
    }

    fn observe(&mut self, records: &[EventRecord]) {
        let mut saw_color = true;
        for record in records {
            match record.kind {
                EventKind::LightSample { light } => saw_color = is_day(light),
                EventKind::Harvested {
                    slot,
                    points,
                    progress,
                    hue,
                    sat,
                } => self.pilot.learn(
                    &WorldEvent::Harvested {
                        slot,
                        points,
                        progress,
                        color: Color { hue, sat },
                    },
                    saw_color,
                ),
                EventKind::Taught {
                    slot,
                    hue,
                    sat,
                    true_points,
                    ..
                } => self.pilot.learn(
                    &WorldEvent::Taught {
                        slot,
                        color: Color { hue, sat },
                        true_points,
                    },
                    saw_color,
                ),
                _ => {}
            }
        }
    }
}

/// Contacts of one trial as `(tick, contact)`, and the abort tick if any.
type TrialScript = (Vec<(u64, Contact)>, Option<u64>);

/// Replays the contacts recorded in a log, including where a live trial was
/// cut short.
pub struct ScriptedDriver {
    script: Vec<TrialScript>,
    current: usize,
    cursor: usize,
}

impl ScriptedDriver {
    pub fn from_records(records: &[EventRecord]) -> Self {
        let mut script: Vec<TrialScript> = Vec::new();
        for record in records {
            match record.kind {
                EventKind::TrialStart { .. } => script.push((Vec::new(), None)),
                EventKind::Action { slot, hand } => {
                    if let Some(trial) = script.last_mut() {
                        trial.0.push((record.tick, Contact { slot, hand }));
                    }
                }
                EventKind::TrialEnd { partial: true, .. } => {
                    if let Some(trial) = script.last_mut() {
                        trial.1 = Some(record.tick);
                    }
                }
                _ => {}
            }
        }
        Self {
            script,
            current: 0,
            cursor: 0,
        }
    }
}

impl PilotDriver for ScriptedDriver {
    fn begin_trial(&mut self, info: &TrialInfo) {
        self.current = info.trial as usize;
        self.cursor = 0;
    }

    fn poll(&mut self, obs: &PilotObservation) -> Result<Vec<Contact>, DriverError> {
        let Some((actions, abort)) = self.script.get(self.current) else {
            return Err(DriverError::Disconnected);
        };
        if *abort == Some(obs.tick) {
            return Err(DriverError::Disconnected);
        }
        let mut due = Vec::new();
        while let Some((tick, contact)) = actions.get(self.cursor) {
            if *tick > obs.tick {
                break;
            }
            if *tick == obs.tick {
                due.push(*contact);
            }
            self.cursor += 1;
        }
        Ok(due)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrialResult {
    pub trial: u32,
    pub trial_seed: u64,
    pub mechanics: RipeningMechanics,
    pub records: Vec<EventRecord>,
    pub final_score: i64,
    pub scores: ScoreSplit,
    /// Trial was cut short by a driver disconnect.
    pub partial: bool,
    /// Offset of the trial start within the block, simulated seconds.
    pub block_time: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BlockResult {
    pub config: SessionConfig,
    pub trials: Vec<TrialResult>,
}

impl BlockResult {
    pub fn aborted(&self) -> bool {
        self.trials.iter().any(|t| t.partial)
    }

    pub fn records(&self) -> impl Iterator<Item = &EventRecord> {
        self.trials.iter().flat_map(|t| t.records.iter())
    }

    pub fn to_jsonl(&self) -> String {
        let records: Vec<EventRecord> = self.records().cloned().collect();
        to_jsonl(&LogHeader::new(&self.config), &records)
    }

    pub fn scores(&self) -> ScoreSplit {
        let mut total = ScoreSplit::default();
        self.trials.iter().for_each(|t| total.add(&t.scores));
        total
    }
}

/// One block under one condition. The cue policy persists across the
/// block's trials; the copilot's value table does not.
pub struct Session {
    config: SessionConfig,
    policy: Option<CuePolicy>,
}

impl Session {
    pub fn new(config: SessionConfig) -> Result<Self> {
        config.validate()?;
        Ok(Self { config, policy: None })
    }

    pub fn config(&self) -> &SessionConfig {
        &self.config
    }

    pub fn policy(&self) -> Option<&CuePolicy> {
        self.policy.as_ref()
    }

    pub fn run_block(&mut self, driver: &mut dyn PilotDriver) -> BlockResult {
        let mut trials = Vec::new();
        for trial in 0..self.config.trials_per_block {
            if trial > 0 {
                driver.on_break(self.config.break_duration);
            }
            let result = self.run_trial(trial, driver);
            let partial = result.partial;
            trials.push(result);
            if partial {
                break;
            }
        }
        BlockResult {
            config: self.config.clone(),
            trials,
        }
    }

    pub fn run_trial(&mut self, trial: u32, driver: &mut dyn PilotDriver) -> TrialResult {
        let config = &self.config;
        let trial_seed = rng::trial_seed(config.seed, config.block, trial);
        let mechanics = RipeningMechanics::sample(&config.world, &mut rng::stream(trial_seed, Stream::Mechanics));
        if config.condition == Condition::Bandit && self.policy.is_none() {
            self.policy = Some(CuePolicy::new(
                config.copilot.n_bins,
                mechanics.value_span(),
                mechanics.amplitude,
                config.copilot.beta,
            ));
        }
        let info = TrialInfo {
            trial,
            block: config.block,
            trial_seed,
            condition: config.condition,
            mechanics: mechanics.clone(),
            ticks: config.trial_ticks(),
            tick_rate: config.tick_rate,
        };
        driver.begin_trial(&info);

        let (world, spawns) = World::start(
            mechanics.clone(),
            config.light.clone(),
            config.world.clone(),
            config.tick_rate,
            rng::stream(trial_seed, Stream::World),
        );
        let mut run = TrialRun {
            config,
            trial,
            world,
            table: ValueTable::new(config.copilot.grid_size, config.copilot.alpha),
            policy: self.policy.as_mut(),
            copilot_rng: rng::stream(trial_seed, Stream::Copilot),
            latches: [CueLatch::default(); N_SLOTS],
            records: Vec::new(),
        };
        run.push(
            0,
            EventKind::TrialStart {
                block: config.block,
                trial_seed,
                mechanics: mechanics.clone(),
            },
        );

        let mut partial = false;
        let mut last_tick = 0;
        let mut pending_world = spawns;
        for tick in 0..info.ticks {
            last_tick = tick;
            if tick > 0 {
                pending_world = run.world.advance();
            }
            let tick_start = run.records.len();
            if !run.tick(tick, std::mem::take(&mut pending_world), driver, tick_start) {
                partial = true;
                break;
            }
        }
        if let Some(policy) = run.policy.as_deref_mut() {
            let resolutions = policy.expire_all();
            run.log_resolutions(last_tick, resolutions);
        }
        let final_score = run.world.score();
        run.push(last_tick, EventKind::TrialEnd { score: final_score, partial });

        let scores = aggregate_scores(&run.records);
        let result = TrialResult {
            trial,
            trial_seed,
            mechanics,
            records: run.records,
            final_score,
            scores,
            partial,
            block_time: trial as f64 * (config.trial_duration + config.break_duration),
        };
        driver.end_trial(&result);
        result
    }
}

/// Mutable state of one trial in progress.
struct TrialRun<'a> {
    config: &'a SessionConfig,
    trial: u32,
    world: World,
    table: ValueTable,
    policy: Option<&'a mut CuePolicy>,
    copilot_rng: SimRng,
    latches: [CueLatch; N_SLOTS],
    records: Vec<EventRecord>,
}

impl TrialRun<'_> {
    fn push(&mut self, tick: u64, kind: EventKind) {
        self.records.push(EventRecord {
            trial: self.trial,
            tick,
            t: tick as f64 / self.config.tick_rate,
            kind,
        });
    }

    fn condition(&self) -> Condition {
        self.config.condition
    }

    /// One tick of the protocol. Returns false if the driver disconnected.
    fn tick(&mut self, tick: u64, advanced: Vec<WorldEvent>, driver: &mut dyn PilotDriver, tick_start: usize) -> bool {
        let light = self.world.light_level();
        self.push(tick, EventKind::LightSample { light });
        for event in advanced {
            self.log_world_event(tick, event);
        }

        let cues = self.copilot_perceive(tick);

        let obs = self.observation(tick, light, cues);
        let contacts = match driver.poll(&obs) {
            Ok(contacts) => contacts,
            Err(DriverError::Disconnected) => return false,
        };
        for c in &contacts {
            self.push(tick, EventKind::Action { slot: c.slot, hand: c.hand });
        }
        for event in self.world.resolve_contacts(&contacts) {
            self.log_world_event(tick, event);
        }

        let window = self.config.ticks_for(self.config.copilot.credit_window);
        if let Some(policy) = self.policy.as_deref_mut() {
            let resolutions = policy.expire_due(tick, window);
            self.log_resolutions(tick, resolutions);
        }
        driver.observe(&self.records[tick_start..]);
        true
    }

    /// Queries the value table for every live fruit and applies the
    /// condition's cue rule. Uses true colour regardless of light.
    fn copilot_perceive(&mut self, tick: u64) -> [bool; N_SLOTS] {
        let mut cues = [false; N_SLOTS];
        if !self.condition().has_copilot() {
            return cues;
        }
        let refractory = self.config.ticks_for(self.config.copilot.refractory);
        for slot in 0..N_SLOTS {
            let Some(color) = self.world.color(slot) else {
                self.latches[slot].clear();
                continue;
            };
            let value = self.table.query(color);
            match self.condition() {
                Condition::Pav => {
                    if let PavDecision::EmitCue { slot } = pav_decide(value, &mut self.latches[slot], slot, tick, refractory) {
                        cues[slot] = true;
                        self.push(tick, EventKind::CueEmit { slot, sound: cue_sound(slot) });
                    }
                }
                Condition::Bandit => {
                    if !self.latches[slot].rising_edge(value) {
                        continue;
                    }
                    let policy = self.policy.as_deref_mut().expect("bandit condition has a policy");
                    let decision = policy.decide(value, slot, tick, &mut self.copilot_rng);
                    self.push(
                        tick,
                        EventKind::CueDecision {
                            slot,
                            action: decision.action,
                            p: decision.p_cue,
                            bin: decision.context_bin,
                            value,
                        },
                    );
                    if decision.action == CueAction::Cue {
                        cues[slot] = true;
                        self.push(tick, EventKind::CueEmit { slot, sound: cue_sound(slot) });
                    }
                }
                Condition::NoCp => unreachable!(),
            }
        }
        cues
    }

    fn observation(&self, tick: u64, light: f64, cues: [bool; N_SLOTS]) -> PilotObservation {
        let visible = is_day(light);
        let slots = std::array::from_fn(|slot| {
            let color = self.world.color(slot);
            SlotView {
                alive: color.is_some(),
                perceived: match color {
                    Some(c) if visible => Perceived::Visible(c),
                    _ => Perceived::Masked,
                },
                cue: cues[slot],
            }
        });
        PilotObservation {
            tick,
            time: tick as f64 / self.config.tick_rate,
            light,
            score: self.world.score(),
            copilot_present: self.condition().has_copilot(),
            slots,
        }
    }

    fn log_world_event(&mut self, tick: u64, event: WorldEvent) {
        match event {
            WorldEvent::Spawned { slot, spawn_fraction } => {
                self.latches[slot].clear();
                self.push(tick, EventKind::Spawned { slot, spawn_fraction });
            }
            WorldEvent::TimedOut { slot } => {
                self.latches[slot].clear();
                self.push(tick, EventKind::TimedOut { slot });
                self.expire_slot(tick, slot);
            }
            WorldEvent::Ignored { slot, hand } => self.push(tick, EventKind::Ignored { slot, hand }),
            WorldEvent::Harvested {
                slot,
                points,
                progress,
                color,
            } => {
                self.latches[slot].clear();
                self.push(
                    tick,
                    EventKind::Harvested {
                        slot,
                        points,
                        progress,
                        hue: color.hue,
                        sat: color.sat,
                    },
                );
                let score = self.world.score();
                self.push(tick, EventKind::ScoreDelta { delta: points, score });
                if let Some(policy) = self.policy.as_deref_mut() {
                    if let Ok(resolution) = policy.resolve(slot, Outcome::HarvestPoints(points)) {
                        self.log_resolutions(tick, vec![resolution]);
                    }
                }
                self.expire_slot(tick, slot);
            }
            WorldEvent::Taught {
                slot,
                color,
                true_points,
            } => {
                self.latches[slot].clear();
                let consumed = self.condition().has_copilot();
                self.push(
                    tick,
                    EventKind::Taught {
                        slot,
                        hue: color.hue,
                        sat: color.sat,
                        true_points,
                        consumed,
                    },
                );
                if consumed {
                    let delta_v = self.table.update(color, true_points as f64);
                    let cell = self.table.cell(color);
                    let value = self.table.value(cell);
                    self.push(tick, EventKind::ValueUpdate { slot, cell, delta_v, value });
                }
                self.expire_slot(tick, slot);
            }
        }
    }

    fn expire_slot(&mut self, tick: u64, slot: usize) {
        if let Some(policy) = self.policy.as_deref_mut() {
            let resolutions = policy.expire_slot(slot);
            self.log_resolutions(tick, resolutions);
        }
    }

    fn log_resolutions(&mut self, tick: u64, resolutions: Vec<Resolution>) {
        for r in resolutions {
            self.push(
                tick,
                EventKind::PolicyUpdate {
                    slot: r.decision.slot,
                    bin: r.decision.context_bin,
                    action: r.decision.action,
                    reward: r.reward,
                    delta_pi: r.delta_pi,
                    p_cue: r.p_after,
                },
            );
        }
    }
}

/// Runs one block headless with the configured simulated pilot.
pub fn run_block(config: &SessionConfig) -> Result<BlockResult> {
    let mut session = Session::new(config.clone())?;
    let mut driver = SimulatedDriver::new(config);
    Ok(session.run_block(&mut driver))
}
