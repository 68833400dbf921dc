//! Reference implementations used to check the simulator from the outside.
//! None of them call into the code under test; logs are read as plain JSON.

#![allow(dead_code)]

use std::collections::HashMap;

use serde_json::Value;

// ---------------------------------------------------------------------------
// double-double arithmetic, enough for a ~1e-30 accurate sine

#[derive(Clone, Copy, Debug)]
pub struct Dd {
    pub hi: f64,
    pub lo: f64,
}

const TWO_PI: Dd = Dd {
    hi: std::f64::consts::TAU,
    lo: 2.4492935982947064e-16,
};

fn quick_two_sum(a: f64, b: f64) -> Dd {
    let s = a + b;
    Dd { hi: s, lo: b - (s - a) }
}

fn two_sum(a: f64, b: f64) -> Dd {
    let s = a + b;
    let bb = s - a;
    Dd {
        hi: s,
        lo: (a - (s - bb)) + (b - bb),
    }
}

fn two_prod(a: f64, b: f64) -> Dd {
    let p = a * b;
    Dd { hi: p, lo: a.mul_add(b, -p) }
}

impl Dd {
    pub fn from(x: f64) -> Dd {
        Dd { hi: x, lo: 0.0 }
    }

    pub fn add(self, o: Dd) -> Dd {
        let s = two_sum(self.hi, o.hi);
        let t = two_sum(self.lo, o.lo);
        let r = quick_two_sum(s.hi, s.lo + t.hi);
        quick_two_sum(r.hi, r.lo + t.lo)
    }

    pub fn neg(self) -> Dd {
        Dd { hi: -self.hi, lo: -self.lo }
    }

    pub fn mul(self, o: Dd) -> Dd {
        let p = two_prod(self.hi, o.hi);
        quick_two_sum(p.hi, p.lo + (self.hi * o.lo + self.lo * o.hi))
    }

    pub fn div_f(self, f: f64) -> Dd {
        let q1 = self.hi / f;
        let p = two_prod(q1, f);
        let r = (self.hi - p.hi - p.lo + self.lo) / f;
        quick_two_sum(q1, r)
    }

    pub fn floor(self) -> f64 {
        let f = self.hi.floor();
        if f == self.hi && self.lo < 0.0 {
            f - 1.0
        } else {
            f
        }
    }
}

/// sin(x) for a double-double argument by range reduction and Taylor series.
pub fn dd_sin(x: Dd) -> Dd {
    let n = (x.hi / TWO_PI.hi).round();
    let r = x.add(TWO_PI.mul(Dd::from(n)).neg());
    let r2 = r.mul(r);
    let mut term = r;
    let mut sum = r;
    for k in 1..40 {
        let k = k as f64;
        term = term.mul(r2).div_f(2.0 * k * (2.0 * k + 1.0)).neg();
        sum = sum.add(term);
    }
    sum
}

/// round(A·sin(2π·k·u + φ) + b), half away from zero, in double-double.
pub fn reward_oracle(amplitude: f64, offset: f64, k: f64, phase: f64, u: f64) -> i64 {
    let x = TWO_PI.mul(Dd::from(k)).mul(Dd::from(u)).add(Dd::from(phase));
    let v = dd_sin(x).mul(Dd::from(amplitude)).add(Dd::from(offset));
    if v.hi >= 0.0 {
        v.add(Dd::from(0.5)).floor() as i64
    } else {
        -(v.neg().add(Dd::from(0.5)).floor() as i64)
    }
}

// ---------------------------------------------------------------------------
// gradient bandit, written straight from the update rule

pub struct BanditOracle {
    pub h_cue: f64,
    pub h_silent: f64,
    pub baseline: f64,
    pub n: f64,
    pub beta: f64,
}

impl BanditOracle {
    pub fn new(beta: f64) -> Self {
        Self { h_cue: 0.0, h_silent: 0.0, baseline: 0.0, n: 0.0, beta }
    }

    pub fn p(&self) -> f64 {
        1.0 / (1.0 + (-(self.h_cue - self.h_silent)).exp())
    }

    /// Applies one resolution and returns π(Cue) afterwards.
    pub fn update(&mut self, cued: bool, reward: f64) -> f64 {
        let p = self.p();
        let step = self.beta * (reward - self.baseline) * (if cued { 1.0 } else { 0.0 } - p);
        self.h_cue += step;
        self.h_silent -= step;
        self.n += 1.0;
        self.baseline += (reward - self.baseline) / self.n;
        self.p()
    }
}

// ---------------------------------------------------------------------------
// log parsing helpers

pub fn parse_lines(jsonl: &str) -> (Value, Vec<Value>) {
    let mut lines = jsonl.lines().map(|l| serde_json::from_str::<Value>(l).expect("valid json line"));
    let header = lines.next().expect("header");
    (header, lines.collect())
}

fn kind(v: &Value) -> &str {
    v["kind"].as_str().unwrap_or("")
}

fn u(v: &Value, key: &str) -> u64 {
    v[key].as_u64().unwrap_or_else(|| panic!("missing {key} in {v}"))
}

fn f(v: &Value, key: &str) -> f64 {
    v[key].as_f64().unwrap_or_else(|| panic!("missing {key} in {v}"))
}

// ---------------------------------------------------------------------------
// score recount

#[derive(Debug, Default, PartialEq, Eq, Clone, Copy)]
pub struct Recount {
    pub day_total: i64,
    pub night_total: i64,
    pub day_plus: i64,
    pub night_plus: i64,
    pub day_harvests: u32,
    pub night_harvests: u32,
    /// Front, middle, back.
    pub positions: [i64; 3],
}

/// Brute-force recount of a log: every harvest is looked up against the
/// light sample with the same trial and tick. `orientation` holds one of
/// 'F', 'M', 'B' per slot.
pub fn recount(jsonl: &str, orientation: &[char]) -> Recount {
    let (_, records) = parse_lines(jsonl);
    let mut light: HashMap<(u64, u64), f64> = HashMap::new();
    for r in &records {
        if kind(r) == "light_sample" {
            light.insert((u(r, "trial"), u(r, "tick")), f(r, "light"));
        }
    }
    let mut out = Recount::default();
    for r in &records {
        if kind(r) != "harvested" {
            continue;
        }
        let points = r["points"].as_i64().unwrap();
        let l = light[&(u(r, "trial"), u(r, "tick"))];
        if l >= 0.95 {
            out.day_total += points;
            out.day_plus += points.max(0);
            out.day_harvests += 1;
        } else {
            out.night_total += points;
            out.night_plus += points.max(0);
            out.night_harvests += 1;
        }
        let pos = match orientation[u(r, "slot") as usize] {
            'F' => 0,
            'M' => 1,
            _ => 2,
        };
        out.positions[pos] += points;
    }
    out
}

// ---------------------------------------------------------------------------
// Pavlovian cue contract

#[derive(Debug, Default)]
pub struct PavScan {
    pub ticks: u64,
    pub positive_fruit_ticks: u64,
    pub emits: u64,
    pub violations: Vec<String>,
}

#[derive(Clone, Copy)]
struct Fruit {
    spawn_tick: u64,
    spawn_fraction: f64,
}

#[derive(Clone, Copy, Default)]
struct Latch {
    positive: bool,
    last_emit: Option<u64>,
}

struct Mech {
    hue_start: f64,
    sign: f64,
    hue_arc: f64,
    sat: (f64, f64),
    cycle: f64,
}

impl Mech {
    fn from_json(m: &Value) -> Self {
        Mech {
            hue_start: f(m, "hue_start"),
            sign: if m["hue_direction"] == "-1" { -1.0 } else { 1.0 },
            hue_arc: f(m, "hue_arc"),
            sat: (m["sat_range"][0].as_f64().unwrap(), m["sat_range"][1].as_f64().unwrap()),
            cycle: f(m, "cycle_duration"),
        }
    }

    fn color(&self, u: f64) -> (f64, f64) {
        let x = self.hue_start + self.sign * self.hue_arc * u;
        let mut hue = x - x.floor();
        if hue >= 1.0 {
            hue = 0.0;
        }
        (hue, self.sat.0 + (self.sat.1 - self.sat.0) * u)
    }
}

fn cell(n: usize, (hue, sat): (f64, f64)) -> (u64, u64) {
    let nf = n as f64;
    let h = (hue * nf).round() as u64 % n as u64;
    let s = ((sat * (nf - 1.0)).round() as u64).min(n as u64 - 1);
    (h, s)
}

/// Rebuilds the copilot's prediction for every live fruit on every tick from
/// the log alone (value updates + spawns + mechanics) and checks that cue
/// emissions happen exactly on rising edges of `V > 0` and on refractory
/// repeats while it stays positive.
pub fn pav_scan(jsonl: &str) -> PavScan {
    let (header, records) = parse_lines(jsonl);
    let config = &header["config"];
    let rate = f(config, "tick_rate");
    let grid = u(&config["copilot"], "grid_size") as usize;
    let refractory = ((f(&config["copilot"], "refractory") * rate).round() as u64).max(1);

    let mut scan = PavScan::default();
    let mut i = 0;
    while i < records.len() {
        assert_eq!(kind(&records[i]), "trial_start");
        let mech = Mech::from_json(&records[i]["mechanics"]);
        let step = 1.0 / (rate * mech.cycle);
        let trial = u(&records[i], "trial");
        let mut values: HashMap<(u64, u64), f64> = HashMap::new();
        let mut fruit: [Option<Fruit>; 6] = [None; 6];
        let mut latch = [Latch::default(); 6];
        i += 1;

        while kind(&records[i]) != "trial_end" {
            let tick = u(&records[i], "tick");
            let start = i;
            while i < records.len() && kind(&records[i]) != "trial_end" && u(&records[i], "tick") == tick {
                i += 1;
            }
            let group = &records[start..i];
            scan.ticks += 1;

            // world advance happens before the copilot looks
            for r in group {
                let slot = || u(r, "slot") as usize;
                match kind(r) {
                    "spawned" => {
                        fruit[slot()] = Some(Fruit { spawn_tick: tick, spawn_fraction: f(r, "spawn_fraction") });
                        latch[slot()] = Latch::default();
                    }
                    "timed_out" => {
                        fruit[slot()] = None;
                        latch[slot()] = Latch::default();
                    }
                    _ => {}
                }
            }

            let emitted: Vec<usize> = group
                .iter()
                .filter(|r| kind(r) == "cue_emit")
                .map(|r| u(r, "slot") as usize)
                .collect();
            for slot in 0..6 {
                let expected = match fruit[slot] {
                    None => false,
                    Some(fr) => {
                        let u = fr.spawn_fraction + (tick - fr.spawn_tick) as f64 * step;
                        let v = values.get(&cell(grid, mech.color(u))).copied().unwrap_or(0.0);
                        let l = &mut latch[slot];
                        if v > 0.0 {
                            scan.positive_fruit_ticks += 1;
                            let due = !l.positive || l.last_emit.is_some_and(|t| tick >= t + refractory);
                            l.positive = true;
                            if due {
                                l.last_emit = Some(tick);
                            }
                            due
                        } else {
                            *l = Latch::default();
                            false
                        }
                    }
                };
                let got = emitted.contains(&slot);
                if got {
                    scan.emits += 1;
                }
                if got != expected {
                    scan.violations.push(format!(
                        "trial {trial} tick {tick} slot {slot}: emitted {got}, expected {expected}"
                    ));
                }
            }

            // contacts and learning happen after the copilot looked
            for r in group {
                match kind(r) {
                    "harvested" | "taught" => {
                        let slot = u(r, "slot") as usize;
                        fruit[slot] = None;
                        latch[slot] = Latch::default();
                    }
                    "value_update" => {
                        let c = &r["cell"];
                        values.insert((u(c, "hue"), u(c, "sat")), f(r, "value"));
                    }
                    _ => {}
                }
            }
        }
        i += 1;
    }
    scan
}
