//! Python bindings: `import forage`.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

use forage_core::config::{SessionConfig, WorldConfig};
use forage_core::copilot::{CueAction, CuePolicy as CoreCuePolicy, Outcome, ValueTable as CoreValueTable};
use forage_core::light::LightCycle as CoreLightCycle;
use forage_core::mechanics::{Color, HueDirection, Progress, RipeningMechanics};
use forage_core::replay::ReplayVerdict;
use forage_core::rng::{stream, Stream};
use forage_core::telemetry::{aggregate_by_position as by_position, aggregate_scores as scores, OrientationMap, TelemetryLog};
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;

fn err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn color(hue: f64, sat: f64) -> PyResult<Color> {
    Color::new(hue, sat).map_err(err)
}

fn to_py<'py>(py: Python<'py>, value: &impl serde::Serialize) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(value).map_err(err)?;
    py.import("json")?.call_method1("loads", (text,))
}

/// Ripening mechanics of one trial: colour and reward as functions of
/// progress `u` in [0, 1].
#[pyclass(name = "Mechanics", module = "forage")]
struct Mechanics(RipeningMechanics);

#[pymethods]
impl Mechanics {
    #[new]
    #[pyo3(signature = (phase, hue_start=0.0, forward=true, world_json=None))]
    fn new(phase: f64, hue_start: f64, forward: bool, world_json: Option<&str>) -> PyResult<Self> {
        let world: WorldConfig = match world_json {
            Some(text) => serde_json::from_str(text).map_err(err)?,
            None => WorldConfig::default(),
        };
        let direction = if forward { HueDirection::Forward } else { HueDirection::Backward };
        Ok(Self(RipeningMechanics::with_params(&world, phase, hue_start, direction)))
    }

    /// `(hue, sat)` at progress `u`.
    fn color_at(&self, u: f64) -> PyResult<(f64, f64)> {
        let c = self.0.color_at(Progress::new(u).map_err(err)?);
        Ok((c.hue, c.sat))
    }

    /// Integer points for harvesting at progress `u`.
    fn reward_at(&self, u: f64) -> PyResult<i64> {
        Ok(self.0.reward_at(Progress::new(u).map_err(err)?))
    }

    #[getter]
    fn phase(&self) -> f64 {
        self.0.phase
    }

    fn __repr__(&self) -> String {
        format!("Mechanics({})", serde_json::to_string(&self.0).unwrap_or_default())
    }
}

#[pyclass(name = "LightCycle", module = "forage")]
struct LightCycle(CoreLightCycle);

#[pymethods]
impl LightCycle {
    #[new]
    #[pyo3(signature = (day=30.0, dusk=5.0, night=20.0, dawn=5.0))]
    fn new(day: f64, dusk: f64, night: f64, dawn: f64) -> PyResult<Self> {
        let cycle = CoreLightCycle {
            day_duration: day,
            dusk_duration: dusk,
            night_duration: night,
            dawn_duration: dawn,
        };
        cycle.validate().map_err(err)?;
        Ok(Self(cycle))
    }

    fn level(&self, t: f64) -> f64 {
        self.0.level(t)
    }

    fn is_visible(&self, t: f64) -> bool {
        self.0.is_visible(t)
    }

    #[getter]
    fn period(&self) -> f64 {
        self.0.period()
    }
}

/// The copilot's nearest-cell colour → points table.
#[pyclass(name = "ValueTable", module = "forage")]
struct ValueTable(CoreValueTable);

#[pymethods]
impl ValueTable {
    #[new]
    #[pyo3(signature = (size=12, alpha=0.5))]
    fn new(size: usize, alpha: f64) -> PyResult<Self> {
        if size < 2 || !(alpha > 0.0 && alpha <= 1.0) {
            return Err(PyValueError::new_err("size must be >= 2 and alpha in (0, 1]"));
        }
        Ok(Self(CoreValueTable::new(size, alpha)))
    }

    /// Moves the cell for `(hue, sat)` toward `target`; returns the change.
    fn update(&mut self, hue: f64, sat: f64, target: f64) -> PyResult<f64> {
        Ok(self.0.update(color(hue, sat)?, target))
    }

    fn query(&self, hue: f64, sat: f64) -> PyResult<f64> {
        Ok(self.0.query(color(hue, sat)?))
    }

    fn visits(&self, hue: f64, sat: f64) -> PyResult<u32> {
        let cell = self.0.cell(color(hue, sat)?);
        Ok(self.0.visits(cell))
    }

    /// `(hue_index, sat_index)` of the cell that `(hue, sat)` falls in.
    fn cell(&self, hue: f64, sat: f64) -> PyResult<(usize, usize)> {
        let cell = self.0.cell(color(hue, sat)?);
        Ok((cell.hue, cell.sat))
    }
}

/// Two-action gradient bandit deciding whether to cue, per predicted-value bin.
#[pyclass(name = "CuePolicy", module = "forage")]
struct CuePolicy {
    policy: CoreCuePolicy,
    rng: forage_core::rng::SimRng,
}

#[pymethods]
impl CuePolicy {
    #[new]
    #[pyo3(signature = (n_bins=8, value_span=10.0, amplitude=10.0, beta=0.1, seed=0))]
    fn new(n_bins: usize, value_span: f64, amplitude: f64, beta: f64, seed: u64) -> PyResult<Self> {
        if n_bins == 0 || !(value_span > 0.0) || !(amplitude > 0.0) {
            return Err(PyValueError::new_err("n_bins, value_span and amplitude must be positive"));
        }
        Ok(Self {
            policy: CoreCuePolicy::new(n_bins, value_span, amplitude, beta),
            rng: stream(seed, Stream::Copilot),
        })
    }

    fn bin(&self, value: f64) -> usize {
        self.policy.bin(value)
    }

    fn p_cue(&self, bin: usize) -> PyResult<f64> {
        self.check_bin(bin)?;
        Ok(self.policy.p_cue(bin))
    }

    /// `(H_cue, H_silent)` for `bin`.
    fn preferences(&self, bin: usize) -> PyResult<(f64, f64)> {
        self.check_bin(bin)?;
        let [cue, silent] = self.policy.preferences(bin);
        Ok((cue, silent))
    }

    #[getter]
    fn baseline(&self) -> f64 {
        self.policy.baseline()
    }

    #[getter]
    fn pending(&self) -> usize {
        self.policy.pending().len()
    }

    /// Samples cue or silence for a fruit whose value turned positive.
    /// Returns `(cued, bin, p_cue)`.
    fn decide(&mut self, value: f64, slot: usize, tick: u64) -> (bool, usize, f64) {
        let d = self.policy.decide(value, slot, tick, &mut self.rng);
        (d.action == CueAction::Cue, d.context_bin, d.p_cue)
    }

    /// Resolves the latest pending decision for `slot` with harvest points,
    /// or as expired when `points` is None. Returns `(reward, delta_pi, p_after)`.
    #[pyo3(signature = (slot, points=None))]
    fn resolve(&mut self, slot: usize, points: Option<i64>) -> PyResult<(f64, f64, f64)> {
        let outcome = points.map_or(Outcome::Expired, Outcome::HarvestPoints);
        let r = self.policy.resolve(slot, outcome).map_err(err)?;
        Ok((r.reward, r.delta_pi, r.p_after))
    }

    /// Expires every pending decision; returns how many there were.
    fn expire_all(&mut self) -> usize {
        self.policy.expire_all().len()
    }
}

impl CuePolicy {
    fn check_bin(&self, bin: usize) -> PyResult<()> {
        if bin >= self.policy.n_bins() {
            return Err(PyValueError::new_err(format!("bin {bin} out of range")));
        }
        Ok(())
    }
}

fn parse_config(config_json: Option<&str>) -> PyResult<SessionConfig> {
    match config_json {
        Some(text) => SessionConfig::from_json(text).map_err(err),
        None => Ok(SessionConfig::default()),
    }
}

/// Runs one simulated block. Returns `(jsonl_log, summary)` where the summary
/// holds the per-trial and total day/night score split.
#[pyfunction]
#[pyo3(signature = (config_json=None))]
fn run_block<'py>(py: Python<'py>, config_json: Option<&str>) -> PyResult<(String, Bound<'py, PyDict>)> {
    let config = parse_config(config_json)?;
    let block = py.detach(|| forage_core::run_block(&config)).map_err(err)?;
    let summary = PyDict::new(py);
    let trials = block
        .trials
        .iter()
        .map(|t| to_py(py, &t.scores))
        .collect::<PyResult<Vec<_>>>()?;
    summary.set_item("trials", trials)?;
    summary.set_item("total", to_py(py, &block.scores())?)?;
    summary.set_item("final_scores", block.trials.iter().map(|t| t.final_score).collect::<Vec<_>>())?;
    Ok((block.to_jsonl(), summary))
}

/// Day/night score split over a whole JSONL log.
#[pyfunction]
fn aggregate_scores<'py>(py: Python<'py>, jsonl: &str) -> PyResult<Bound<'py, PyAny>> {
    let log = TelemetryLog::parse(jsonl).map_err(err)?;
    to_py(py, &scores(&log.records))
}

/// Points by front/middle/back position; `orientation` like "F,M,B,B,M,F".
#[pyfunction]
#[pyo3(signature = (jsonl, orientation=None))]
fn aggregate_by_position<'py>(py: Python<'py>, jsonl: &str, orientation: Option<&str>) -> PyResult<Bound<'py, PyAny>> {
    let log = TelemetryLog::parse(jsonl).map_err(err)?;
    let map = match orientation {
        Some(text) => OrientationMap::parse(text).map_err(err)?,
        None => log.header.config.orientation.clone(),
    };
    to_py(py, &by_position(&log.records, &map).map_err(err)?)
}

/// Re-simulates a log. Returns `(matched, first_divergent_line)`.
#[pyfunction]
#[pyo3(signature = (jsonl, config_json=None))]
fn replay(py: Python<'_>, jsonl: &str, config_json: Option<&str>) -> PyResult<(bool, Option<usize>)> {
    let config = config_json.map(|c| parse_config(Some(c))).transpose()?;
    let verdict = py
        .detach(|| forage_core::replay::replay(jsonl, config.as_ref()))
        .map_err(err)?;
    Ok(match verdict {
        ReplayVerdict::Match { .. } => (true, None),
        ReplayVerdict::Mismatch { line, .. } => (false, Some(line)),
    })
}

#[pymodule]
fn forage(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Mechanics>()?;
    m.add_class::<LightCycle>()?;
    m.add_class::<ValueTable>()?;
    m.add_class::<CuePolicy>()?;
    m.add_function(wrap_pyfunction!(run_block, m)?)?;
    m.add_function(wrap_pyfunction!(aggregate_scores, m)?)?;
    m.add_function(wrap_pyfunction!(aggregate_by_position, m)?)?;
    m.add_function(wrap_pyfunction!(replay, m)?)?;
    Ok(())
}
