//! Ripening mechanics: how a fruit's age maps to its colour and to the points
//! a harvest is worth. One `RipeningMechanics` value is shared by all six fruit
//! of a trial.

use std::f64::consts::TAU;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::config::WorldConfig;
use crate::error::{Error, Result};

/// Fraction of the ripening cycle elapsed, in `[0, 1]`.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct Progress(f64);

impl Progress {
    pub const START: Progress = Progress(0.0);
    pub const END: Progress = Progress(1.0);

    pub fn new(u: f64) -> Result<Self> {
        if (0.0..=1.0).contains(&u) {
            Ok(Progress(u))
        } else {
            Err(Error::OutOfDomain {
                what: "progress",
                value: u,
                domain: "[0, 1]",
            })
        }
    }

    pub fn get(self) -> f64 {
        self.0
    }
}

impl TryFrom<f64> for Progress {
    type Error = Error;

    fn try_from(u: f64) -> Result<Self> {
        Progress::new(u)
    }
}

impl From<Progress> for f64 {
    fn from(p: Progress) -> f64 {
        p.0
    }
}

/// A point in hue/saturation space. Hue is a fraction of the colour wheel.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Color {
    pub hue: f64,
    pub sat: f64,
}

impl Color {
    pub fn new(hue: f64, sat: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&hue) {
            return Err(Error::OutOfDomain {
                what: "hue",
                value: hue,
                domain: "[0, 1)",
            });
        }
        if !(0.0..=1.0).contains(&sat) {
            return Err(Error::OutOfDomain {
                what: "saturation",
                value: sat,
                domain: "[0, 1]",
            });
        }
        Ok(Color { hue, sat })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum HueDirection {
    #[serde(rename = "+1")]
    Forward,
    #[serde(rename = "-1")]
    Backward,
}

impl HueDirection {
    pub fn sign(self) -> f64 {
        match self {
            HueDirection::Forward => 1.0,
            HueDirection::Backward => -1.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RipeningMechanics {
    /// Phase of the reward sinusoid, radians in `[0, 2π)`.
    pub phase: f64,
    pub amplitude: f64,
    pub offset: f64,
    /// Full sine periods per ripening cycle.
    pub n_periods: f64,
    /// Seconds from progress 0 to progress 1.
    pub cycle_duration: f64,
    pub hue_start: f64,
    pub hue_direction: HueDirection,
    pub hue_arc: f64,
    pub sat_range: (f64, f64),
}

impl RipeningMechanics {
    /// Mechanics with the configured constants and the given random parts.
    pub fn with_params(world: &WorldConfig, phase: f64, hue_start: f64, hue_direction: HueDirection) -> Self {
        Self {
            phase,
            amplitude: world.amplitude,
            offset: world.offset,
            n_periods: world.n_periods,
            cycle_duration: world.cycle_duration,
            hue_start,
            hue_direction,
            hue_arc: world.hue_arc,
            sat_range: world.sat_range,
        }
    }

    /// Draws the per-trial phase, hue start and hue direction.
    pub fn sample<R: Rng + ?Sized>(world: &WorldConfig, rng: &mut R) -> Self {
        let phase = rng.random_range(0.0..TAU);
        let hue_start = rng.random_range(0.0..1.0);
        let hue_direction = if rng.random_bool(0.5) {
            HueDirection::Forward
        } else {
            HueDirection::Backward
        };
        Self::with_params(world, phase, hue_start, hue_direction)
    }

    pub fn color_at(&self, u: Progress) -> Color {
        let u = u.get();
        let hue = frac(self.hue_start + self.hue_direction.sign() * self.hue_arc * u);
        let (s_min, s_max) = self.sat_range;
        Color {
            hue,
            sat: s_min + (s_max - s_min) * u,
        }
    }

    /// Points credited for a harvest at progress `u`, rounded half away from zero.
    pub fn reward_at(&self, u: Progress) -> i64 {
        let raw = self.amplitude * (TAU * self.n_periods * u.get() + self.phase).sin() + self.offset;
        // f64::round is half-away-from-zero
        raw.round() as i64
    }

    /// Largest prediction the cue policy bins need to cover.
    pub fn value_span(&self) -> f64 {
        self.amplitude + self.offset
    }
}

/// Fractional part in `[0, 1)`, also for negative inputs.
fn frac(x: f64) -> f64 {
    let f = x - x.floor();
    // x.floor() can round such that f == 1.0 for tiny negative x
    if f >= 1.0 {
        0.0
    } else {
        f
    }
}
