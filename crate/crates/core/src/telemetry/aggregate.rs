use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::light::is_day;
use crate::world::N_SLOTS;

use super::record::{EventKind, EventRecord};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Position {
    Front,
    Middle,
    Back,
}

impl Position {
    pub fn index(self) -> usize {
        match self {
            Position::Front => 0,
            Position::Middle => 1,
            Position::Back => 2,
        }
    }
}

/// Assignment of the six slots to front/middle/back relative to the pilot's
/// starting heading, two slots per group.
///
/// Slot `i` sits at 30° + 60°·i from the heading, so the default puts slots
/// 0 and 5 in front, 1 and 4 at the sides and 2 and 3 behind.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct OrientationMap(pub Vec<Position>);

impl Default for OrientationMap {
    fn default() -> Self {
        use Position::*;
        OrientationMap(vec![Front, Middle, Back, Back, Middle, Front])
    }
}

impl OrientationMap {
    pub fn validate(&self) -> Result<()> {
        if self.0.len() != N_SLOTS {
            return Err(Error::InvalidOrientation(format!(
                "expected {N_SLOTS} slots, got {}",
                self.0.len()
            )));
        }
        let mut counts = [0usize; 3];
        self.0.iter().for_each(|p| counts[p.index()] += 1);
        if counts != [2, 2, 2] {
            return Err(Error::InvalidOrientation(format!(
                "each group needs exactly two slots, got front/middle/back = {counts:?}"
            )));
        }
        Ok(())
    }

    pub fn position(&self, slot: usize) -> Position {
        self.0[slot]
    }

    /// Parses a comma list such as `F,M,B,B,M,F`.
    pub fn parse(text: &str) -> Result<Self> {
        let positions = text
            .split(',')
            .map(|s| match s.trim().to_ascii_uppercase().as_str() {
                "F" | "FRONT" => Ok(Position::Front),
                "M" | "MIDDLE" => Ok(Position::Middle),
                "B" | "BACK" => Ok(Position::Back),
                other => Err(Error::InvalidOrientation(format!("unknown position '{other}'"))),
            })
            .collect::<Result<Vec<_>>>()?;
        let map = OrientationMap(positions);
        map.validate()?;
        Ok(map)
    }
}

/// Day/night score split; `*_plus` totals leave out negative harvests.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScoreSplit {
    pub day_total: i64,
    pub night_total: i64,
    pub day_plus: i64,
    pub night_plus: i64,
    pub day_harvests: u32,
    pub night_harvests: u32,
}

impl ScoreSplit {
    pub fn total(&self) -> i64 {
        self.day_total + self.night_total
    }

    pub fn add(&mut self, other: &ScoreSplit) {
        self.day_total += other.day_total;
        self.night_total += other.night_total;
        self.day_plus += other.day_plus;
        self.night_plus += other.night_plus;
        self.day_harvests += other.day_harvests;
        self.night_harvests += other.night_harvests;
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PositionTotals {
    pub front: i64,
    pub middle: i64,
    pub back: i64,
}

/// Splits harvested points by the light level logged at the harvest's tick.
pub fn aggregate_scores(records: &[EventRecord]) -> ScoreSplit {
    let mut split = ScoreSplit::default();
    let mut light = 1.0;
    for record in records {
        match record.kind {
            EventKind::LightSample { light: l } => light = l,
            EventKind::Harvested { points, .. } => {
                let plus = points.max(0);
                if is_day(light) {
                    split.day_total += points;
                    split.day_plus += plus;
                    split.day_harvests += 1;
                } else {
                    split.night_total += points;
                    split.night_plus += plus;
                    split.night_harvests += 1;
                }
            }
            _ => {}
        }
    }
    split
}

pub fn aggregate_by_position(records: &[EventRecord], map: &OrientationMap) -> Result<PositionTotals> {
    map.validate()?;
    let mut totals = [0i64; 3];
    for record in records {
        if let EventKind::Harvested { slot, points, .. } = record.kind {
            if slot >= N_SLOTS {
                return Err(Error::InvalidSlot(slot));
            }
            totals[map.position(slot).index()] += points;
        }
    }
    Ok(PositionTotals {
        front: totals[0],
        middle: totals[1],
        back: totals[2],
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn light(tick: u64, l: f64) -> EventRecord {
        EventRecord {
            trial: 0,
            tick,
            t: 0.0,
            kind: EventKind::LightSample { light: l },
        }
    }

    fn harvest(tick: u64, slot: usize, points: i64) -> EventRecord {
        EventRecord {
            trial: 0,
            tick,
            t: 0.0,
            kind: EventKind::Harvested {
                slot,
                points,
                progress: 0.5,
                hue: 0.1,
                sat: 0.5,
            },
        }
    }

    #[test]
    fn day_night_split() {
        let log = vec![
            light(0, 1.0),
            harvest(0, 0, 5),
            light(1, 0.0),
            harvest(1, 1, -3),
            harvest(1, 2, 2),
        ];
        let s = aggregate_scores(&log);
        assert_eq!((s.day_total, s.night_total, s.day_plus, s.night_plus), (5, -1, 5, 2));
    }

    #[test]
    fn empty_log_is_zero() {
        assert_eq!(aggregate_scores(&[]), ScoreSplit::default());
        assert_eq!(
            aggregate_by_position(&[], &OrientationMap::default()).unwrap(),
            PositionTotals::default()
        );
    }

    #[test]
    fn front_only() {
        let log = vec![light(0, 1.0), harvest(0, 0, 4), harvest(0, 5, 3)];
        let t = aggregate_by_position(&log, &OrientationMap::default()).unwrap();
        assert_eq!(t, PositionTotals { front: 7, middle: 0, back: 0 });
    }

    #[test]
    fn permuted_map_permutes_totals() {
        use Position::*;
        let log = vec![light(0, 1.0), harvest(0, 0, 4), harvest(0, 1, -2), harvest(0, 2, 9)];
        let a = aggregate_by_position(&log, &OrientationMap(vec![Front, Middle, Back, Back, Middle, Front])).unwrap();
        let b = aggregate_by_position(&log, &OrientationMap(vec![Back, Front, Middle, Middle, Front, Back])).unwrap();
        assert_eq!((a.front, a.middle, a.back), (b.back, b.front, b.middle));
    }

    #[test]
    fn invalid_maps_rejected() {
        use Position::*;
        assert!(OrientationMap(vec![Front; 6]).validate().is_err());
        assert!(OrientationMap(vec![Front, Middle, Back]).validate().is_err());
        assert!(aggregate_by_position(&[], &OrientationMap(vec![Front, Front, Back, Back, Middle, Middle, Front])).is_err());
        assert!(OrientationMap::parse("F,M,B,B,M,X").is_err());
        assert_eq!(OrientationMap::parse("f, m, b, b, m, f").unwrap(), OrientationMap::default());
    }
}
