//! Append-only event log and the score analytics computed from it.

mod aggregate;
mod log;
mod record;
mod series;

pub use aggregate::{aggregate_by_position, aggregate_scores, OrientationMap, Position, PositionTotals, ScoreSplit};
pub use log::{parse_header, to_jsonl, LogWriter, TelemetryLog};
pub use record::{EventKind, EventRecord, LogHeader, SCHEMA_VERSION};
pub use series::{export_series, series_to_csv, TrialSeries};
