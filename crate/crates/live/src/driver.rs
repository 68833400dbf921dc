use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::mpsc::Receiver;
use std::sync::Arc;
use std::time::{Duration, Instant};

use forage_core::pilot::PilotObservation;
use forage_core::session::{DriverError, PilotDriver, TrialInfo, TrialResult};
use forage_core::telemetry::{EventKind, EventRecord};
use forage_core::world::{Contact, N_SLOTS};
use tokio::sync::mpsc::UnboundedSender;

use crate::protocol::{Phase, ServerMessage};

/// Bridges the tick loop to a connected human. Paces ticks to wall-clock,
/// publishes one snapshot per tick and forwards queued contacts at the next
/// tick boundary.
pub struct LiveDriver {
    outbound: UnboundedSender<ServerMessage>,
    inbound: Receiver<Contact>,
    disconnected: Arc<AtomicBool>,
    tick_period: Duration,
    deadline: Instant,
    speed: f64,
    sparkle: [bool; N_SLOTS],
    trial: u32,
}

impl LiveDriver {
    /// `speed` > 1 runs faster than real time.
    pub fn new(
        outbound: UnboundedSender<ServerMessage>,
        inbound: Receiver<Contact>,
        disconnected: Arc<AtomicBool>,
        tick_rate: f64,
        speed: f64,
    ) -> Self {
        Self {
            outbound,
            inbound,
            disconnected,
            tick_period: Duration::from_secs_f64(1.0 / (tick_rate * speed)),
            deadline: Instant::now(),
            speed,
            sparkle: [false; N_SLOTS],
            trial: 0,
        }
    }

    fn send(&self, message: ServerMessage) {
        // a closed channel means the socket is gone; the disconnect flag handles it
        let _ = self.outbound.send(message);
    }

    fn is_disconnected(&self) -> bool {
        self.disconnected.load(Ordering::SeqCst)
    }
}

impl PilotDriver for LiveDriver {
    fn begin_trial(&mut self, info: &TrialInfo) {
        self.trial = info.trial;
        self.sparkle = [false; N_SLOTS];
        self.deadline = Instant::now();
        // contacts sent during a break belong to no trial
        while self.inbound.try_recv().is_ok() {}
        self.send(ServerMessage::TrialPhase {
            phase: Phase::Running,
            trial: info.trial,
        });
    }

    fn poll(&mut self, obs: &PilotObservation) -> Result<Vec<Contact>, DriverError> {
        let now = Instant::now();
        if self.deadline > now {
            std::thread::sleep(self.deadline - now);
        }
        self.deadline += self.tick_period;
        if self.is_disconnected() {
            return Err(DriverError::Disconnected);
        }
        self.send(ServerMessage::snapshot(obs, &self.sparkle));
        self.sparkle = [false; N_SLOTS];
        Ok(self.inbound.try_iter().collect())
    }

    fn observe(&mut self, records: &[EventRecord]) {
        for record in records {
            let tick = record.tick;
            match &record.kind {
                EventKind::CueEmit { sound, .. } => self.send(ServerMessage::AudioEvent {
                    tick,
                    sound_id: sound.clone(),
                }),
                EventKind::Harvested { slot, points, .. } => {
                    let gained = *points > 0;
                    if gained {
                        self.sparkle[*slot] = true;
                    }
                    self.send(ServerMessage::AudioEvent {
                        tick,
                        sound_id: if gained { "gain" } else { "loss" }.to_string(),
                    });
                }
                EventKind::ScoreDelta { delta, score } => self.send(ServerMessage::ScoreUpdate {
                    tick,
                    score: *score,
                    delta: *delta,
                }),
                EventKind::Taught { consumed: true, .. } => self.send(ServerMessage::AudioEvent {
                    tick,
                    sound_id: "teach".to_string(),
                }),
                _ => {}
            }
        }
    }

    fn end_trial(&mut self, result: &TrialResult) {
        let phase = if result.partial { Phase::Aborted } else { Phase::Done };
        self.send(ServerMessage::TrialPhase {
            phase,
            trial: result.trial,
        });
    }

    fn on_break(&mut self, seconds: f64) {
        self.send(ServerMessage::TrialPhase {
            phase: Phase::Break,
            trial: self.trial,
        });
        let end = Instant::now() + Duration::from_secs_f64(seconds / self.speed);
        while Instant::now() < end && !self.is_disconnected() {
            std::thread::sleep(Duration::from_millis(20).min(end.saturating_duration_since(Instant::now())));
        }
    }
}
