use std::io::Write;

use crate::error::{Error, Result};

use super::record::{EventKind, EventRecord, LogHeader, SCHEMA_VERSION};

/// A parsed and validated JSONL log.
#[derive(Clone, Debug, PartialEq)]
pub struct TelemetryLog {
    pub header: LogHeader,
    pub records: Vec<EventRecord>,
}

/// Writes a header followed by records, one JSON object per line.
pub struct LogWriter<W: Write> {
    out: W,
}

impl<W: Write> LogWriter<W> {
    pub fn new(mut out: W, header: &LogHeader) -> Result<Self> {
        serde_json::to_writer(&mut out, header)?;
        out.write_all(b"\n")?;
        Ok(Self { out })
    }

    pub fn append(&mut self, record: &EventRecord) -> Result<()> {
        serde_json::to_writer(&mut self.out, record)?;
        self.out.write_all(b"\n")?;
        Ok(())
    }

    pub fn append_all<'a>(&mut self, records: impl IntoIterator<Item = &'a EventRecord>) -> Result<()> {
        records.into_iter().try_for_each(|r| self.append(r))
    }

    pub fn flush(&mut self) -> Result<()> {
        self.out.flush()?;
        Ok(())
    }

    pub fn into_inner(self) -> W {
        self.out
    }
}

pub fn to_jsonl(header: &LogHeader, records: &[EventRecord]) -> String {
    let mut writer = LogWriter::new(Vec::new(), header).expect("in-memory write");
    writer.append_all(records).expect("in-memory write");
    String::from_utf8(writer.into_inner()).expect("json is utf-8")
}

/// Reads only the header line, checking its schema version.
pub fn parse_header(line: &str) -> Result<LogHeader> {
    let value: serde_json::Value = serde_json::from_str(line).map_err(|e| malformed(1, e.to_string()))?;
    if value.get("kind").and_then(|k| k.as_str()) != Some(LogHeader::KIND) {
        return Err(malformed(1, "first record is not a header".into()));
    }
    if let Some(v) = value.get("schema_version").and_then(|v| v.as_u64()) {
        if v != SCHEMA_VERSION as u64 {
            return Err(Error::SchemaMismatch {
                found: v as u32,
                expected: SCHEMA_VERSION,
            });
        }
    }
    serde_json::from_value(value).map_err(|e| malformed(1, e.to_string()))
}

fn malformed(line: usize, reason: String) -> Error {
    Error::MalformedLog { line, reason }
}

impl TelemetryLog {
    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let (_, first) = lines.next().ok_or_else(|| malformed(1, "empty log".into()))?;
        let header = parse_header(first)?;
        let mut records = Vec::new();
        let mut line_numbers = Vec::new();
        for (i, line) in lines {
            let record: EventRecord = serde_json::from_str(line).map_err(|e| malformed(i + 1, e.to_string()))?;
            records.push(record);
            line_numbers.push(i + 1);
        }
        validate(&records, &line_numbers)?;
        Ok(Self { header, records })
    }

    pub fn to_jsonl(&self) -> String {
        to_jsonl(&self.header, &self.records)
    }

    /// Records grouped by trial, in log order.
    pub fn trials(&self) -> impl Iterator<Item = &[EventRecord]> {
        self.records.split_inclusive(|r| matches!(r.kind, EventKind::TrialEnd { .. }))
    }
}

/// Structural checks: trials are delimited by start/end markers, ticks never
/// decrease within a trial, each tick has exactly one light sample, and every
/// in-tick event follows the light sample of its tick.
fn validate(records: &[EventRecord], lines: &[usize]) -> Result<()> {
    let mut current: Option<u32> = None;
    let mut last_trial: Option<u32> = None;
    let mut last_tick = 0u64;
    let mut light_tick: Option<u64> = None;
    for (record, &line) in records.iter().zip(lines) {
        let fail = |reason: String| Err(malformed(line, reason));
        match (&record.kind, current) {
            (EventKind::TrialStart { .. }, None) => {
                if last_trial.is_some_and(|t| record.trial <= t) {
                    return fail(format!("trial {} starts out of order", record.trial));
                }
                if record.tick != 0 {
                    return fail("trial_start must be at tick 0".into());
                }
                current = Some(record.trial);
                last_tick = 0;
                light_tick = None;
                continue;
            }
            (EventKind::TrialStart { .. }, Some(open)) => {
                return fail(format!("trial {open} was not closed before the next trial_start"));
            }
            (_, None) => return fail(format!("{} outside of a trial", record.kind.name())),
            (_, Some(open)) if record.trial != open => {
                return fail(format!("record for trial {} inside trial {open}", record.trial));
            }
            _ => {}
        }
        if record.tick < last_tick {
            return fail(format!("tick {} after tick {last_tick}", record.tick));
        }
        last_tick = record.tick;
        match &record.kind {
            EventKind::LightSample { light } => {
                let expected = light_tick.map_or(0, |t| t + 1);
                if record.tick != expected {
                    return fail(format!("light sample for tick {} but expected tick {expected}", record.tick));
                }
                if !(0.0..=1.0).contains(light) {
                    return fail(format!("light level {light} outside [0, 1]"));
                }
                light_tick = Some(record.tick);
            }
            EventKind::TrialEnd { .. } => {
                last_trial = current.take();
            }
            kind => {
                if light_tick != Some(record.tick) {
                    return fail(format!("{} at tick {} precedes its light sample", kind.name(), record.tick));
                }
            }
        }
    }
    if let Some(open) = current {
        return Err(malformed(
            lines.last().copied().unwrap_or(1),
            format!("trial {open} has no trial_end"),
        ));
    }
    Ok(())
}
