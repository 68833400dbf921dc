//! Log replay: re-simulate a run from its configuration and compare the
//! result with the log record by record.

use crate::config::{PilotKind, SessionConfig};
use crate::error::Result;
use crate::session::{PilotDriver, ScriptedDriver, Session, SimulatedDriver};
use crate::telemetry::{parse_header, EventRecord};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ReplayVerdict {
    Match {
        records: usize,
    },
    Mismatch {
        /// 1-based line of the first record that differs.
        line: usize,
        expected: Option<String>,
        found: Option<String>,
        /// First differing line that is an in-tick event rather than a
        /// trial start/end marker.
        first_event_line: Option<usize>,
    },
}

impl ReplayVerdict {
    pub fn is_match(&self) -> bool {
        matches!(self, ReplayVerdict::Match { .. })
    }
}

/// Replays `log`. The configuration comes from the log header unless
/// `config` is given. Logs from live pilots are replayed from their recorded
/// contacts.
pub fn replay(log: &str, config: Option<&SessionConfig>) -> Result<ReplayVerdict> {
    let mut lines = log.lines();
    let header = parse_header(lines.next().unwrap_or_default())?;
    let config = match config {
        Some(c) => {
            c.validate()?;
            c.clone()
        }
        None => {
            header.config.validate()?;
            header.config.clone()
        }
    };
    let found: Vec<&str> = lines.collect();

    let mut driver: Box<dyn PilotDriver> = if config.pilot.kind == PilotKind::Live {
        // unparsable lines cannot carry actions; they will show up as mismatches
        let records: Vec<EventRecord> = found.iter().filter_map(|l| serde_json::from_str(l).ok()).collect();
        Box::new(ScriptedDriver::from_records(&records))
    } else {
        Box::new(SimulatedDriver::new(&config))
    };
    let block = Session::new(config)?.run_block(driver.as_mut());
    let expected: Vec<String> = block
        .records()
        .map(|r| serde_json::to_string(r).expect("records serialize"))
        .collect();

    let mut first: Option<usize> = None;
    let mut first_event: Option<usize> = None;
    for i in 0..expected.len().max(found.len()) {
        let (e, f) = (expected.get(i).map(String::as_str), found.get(i).copied());
        if e == f {
            continue;
        }
        first.get_or_insert(i);
        let is_marker = e.is_none_or(|e| e.contains(r#""kind":"trial_start""#) || e.contains(r#""kind":"trial_end""#));
        if !is_marker {
            first_event = Some(i);
            break;
        }
    }
    Ok(match first {
        None => ReplayVerdict::Match { records: found.len() },
        Some(i) => ReplayVerdict::Mismatch {
            line: i + 2,
            expected: expected.get(i).cloned(),
            found: found.get(i).map(|s| s.to_string()),
            first_event_line: first_event.map(|j| j + 2),
        },
    })
}
