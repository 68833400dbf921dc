use std::fmt::Write as _;

use serde::Serialize;

use crate::copilot::CueAction;

use super::record::{EventKind, EventRecord};

/// Per-trial plotting series. Dense columns have one entry per tick; the
/// event columns hold `(tick, value)` pairs.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct TrialSeries {
    pub trial: u32,
    pub tick: Vec<u64>,
    pub time: Vec<f64>,
    pub cumulative_score: Vec<i64>,
    pub delta_score: Vec<i64>,
    pub light: Vec<f64>,
    pub delta_v: Vec<(u64, f64)>,
    /// +1 for a cue, -1 for a decision to stay silent.
    pub cue_ticks: Vec<(u64, i8)>,
    pub delta_pi: Vec<(u64, f64)>,
}

pub fn export_series(records: &[EventRecord]) -> Vec<TrialSeries> {
    let mut out: Vec<TrialSeries> = Vec::new();
    let mut score = 0i64;
    for record in records {
        let tick = record.tick;
        match &record.kind {
            EventKind::TrialStart { .. } => {
                score = 0;
                out.push(TrialSeries {
                    trial: record.trial,
                    ..TrialSeries::default()
                });
            }
            EventKind::LightSample { light } => {
                let s = current(&mut out, record.trial);
                s.tick.push(tick);
                s.time.push(record.t);
                s.cumulative_score.push(score);
                s.delta_score.push(0);
                s.light.push(*light);
            }
            EventKind::ScoreDelta { delta, score: after } => {
                score = *after;
                let s = current(&mut out, record.trial);
                if let (Some(d), Some(c)) = (s.delta_score.last_mut(), s.cumulative_score.last_mut()) {
                    *d += delta;
                    *c = score;
                }
            }
            EventKind::ValueUpdate { delta_v, .. } => current(&mut out, record.trial).delta_v.push((tick, *delta_v)),
            EventKind::CueDecision { action, .. } => {
                let mark = match action {
                    CueAction::Cue => 1,
                    CueAction::Silent => -1,
                };
                current(&mut out, record.trial).cue_ticks.push((tick, mark));
            }
            EventKind::PolicyUpdate { delta_pi, .. } => current(&mut out, record.trial).delta_pi.push((tick, *delta_pi)),
            _ => {}
        }
    }
    out
}

fn current(out: &mut Vec<TrialSeries>, trial: u32) -> &mut TrialSeries {
    if out.last().map(|s| s.trial) != Some(trial) {
        out.push(TrialSeries {
            trial,
            ..TrialSeries::default()
        });
    }
    out.last_mut().expect("just pushed")
}

/// Long-format CSV: `trial,tick,time,series,value`.
pub fn series_to_csv(series: &[TrialSeries]) -> String {
    let mut csv = String::from("trial,tick,time,series,value\n");
    for s in series {
        // light samples are consecutive from tick 0
        let time_of = |tick: u64| s.time.get(tick as usize).copied().unwrap_or(f64::NAN);
        for i in 0..s.tick.len() {
            let (trial, tick, time) = (s.trial, s.tick[i], s.time[i]);
            let _ = writeln!(csv, "{trial},{tick},{time},cumulative_score,{}", s.cumulative_score[i]);
            let _ = writeln!(csv, "{trial},{tick},{time},delta_score,{}", s.delta_score[i]);
            let _ = writeln!(csv, "{trial},{tick},{time},light,{}", s.light[i]);
        }
        for (tick, v) in &s.delta_v {
            let _ = writeln!(csv, "{},{tick},{},delta_v,{v}", s.trial, time_of(*tick));
        }
        for (tick, v) in &s.cue_ticks {
            let _ = writeln!(csv, "{},{tick},{},cue,{v}", s.trial, time_of(*tick));
        }
        for (tick, v) in &s.delta_pi {
            let _ = writeln!(csv, "{},{tick},{},delta_pi,{v}", s.trial, time_of(*tick));
        }
    }
    csv
}
