use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Light level at or above which the pilot can see colour. Below it the
/// world is in twilight or night.
pub const VISIBILITY_THRESHOLD: f64 = 0.95;

/// Periodic day → dusk → night → dawn illumination, starting at full day.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LightCycle {
    pub day_duration: f64,
    pub dusk_duration: f64,
    pub night_duration: f64,
    pub dawn_duration: f64,
}

impl Default for LightCycle {
    fn default() -> Self {
        Self {
            day_duration: 30.0,
            dusk_duration: 5.0,
            night_duration: 20.0,
            dawn_duration: 5.0,
        }
    }
}

impl LightCycle {
    pub fn period(&self) -> f64 {
        self.day_duration + self.dusk_duration + self.night_duration + self.dawn_duration
    }

    pub fn validate(&self) -> Result<()> {
        let parts = [
            self.day_duration,
            self.dusk_duration,
            self.night_duration,
            self.dawn_duration,
        ];
        if parts.iter().any(|d| !(*d >= 0.0)) || self.period() <= 0.0 {
            return Err(Error::InvalidConfig(
                "light durations must be non-negative with a positive period".into(),
            ));
        }
        Ok(())
    }

    /// Light level in `[0, 1]` at `t` seconds since trial start.
    pub fn level(&self, t: f64) -> f64 {
        let period = self.period();
        // snap to 1 ns so t and t + period land on the same phase
        let mut x = ((t.rem_euclid(period) * 1e9).round() / 1e9) % period;
        if x < self.day_duration {
            return 1.0;
        }
        x -= self.day_duration;
        if x < self.dusk_duration {
            return 1.0 - x / self.dusk_duration;
        }
        x -= self.dusk_duration;
        if x < self.night_duration {
            return 0.0;
        }
        x -= self.night_duration;
        (x / self.dawn_duration).min(1.0)
    }

    pub fn is_visible(&self, t: f64) -> bool {
        is_day(self.level(t))
    }
}

/// Day/night classification shared by the pilot mask and the score split.
pub fn is_day(light: f64) -> bool {
    light >= VISIBILITY_THRESHOLD
}
