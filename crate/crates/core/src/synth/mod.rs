//! Discrete-time multi-zone thermal model of a small house, used as a
//! ground-truth data source.
//!
//! Each zone follows
//! `T(t+1) = T(t) + (sum_n c_n (T_n(t) - T(t)) + g * heater(t) + base_load) / capacity + noise`
//! at one-minute steps, where `n` ranges over coupled zones and the outside.

use std::collections::{BTreeMap, HashSet};
use std::f64::consts::PI;
use std::path::Path;

use chrono::{NaiveDateTime, TimeDelta, Timelike};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::frame::{ColumnKind, Frame};
use crate::sensor::{parse_sensor_id, SensorCode, ValueKind};

/// Coupling key naming the outside temperature.
pub const OUTSIDE: &str = "outside";

const HOUSE_A: &str = include_str!("../../fixtures/house-a.toml");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HouseSpec {
    pub name: String,
    #[serde(default = "default_noise")]
    pub noise_std: f64,
    /// Minutes simulated before the first emitted row.
    #[serde(default)]
    pub burn_in_minutes: usize,
    pub outside: OutsideSpec,
    pub zones: Vec<ZoneSpec>,
    #[serde(default)]
    pub signals: Vec<SignalSpec>,
    #[serde(default)]
    pub humidity: Vec<HumiditySpec>,
    /// Recorded noise-free warm-up times.
    #[serde(default)]
    pub checks: Vec<WarmupCheck>,
}

fn default_noise() -> f64 {
    0.05
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutsideSpec {
    pub sensor: String,
    pub mean: f64,
    pub amplitude: f64,
    pub peak_hour: f64,
    #[serde(default)]
    pub drift_phi: f64,
    #[serde(default)]
    pub drift_std: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ZoneSpec {
    pub id: String,
    pub sensor: String,
    pub initial: f64,
    #[serde(default = "one")]
    pub capacity: f64,
    #[serde(default)]
    pub base_load: f64,
    /// Coupling to other zones by id, or to [`OUTSIDE`].
    #[serde(default)]
    pub couplings: BTreeMap<String, f64>,
    pub heater: Option<HeaterSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HeaterSpec {
    pub sensor: String,
    pub gain: f64,
    pub schedule: Schedule,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum Schedule {
    On,
    Off,
    /// Alternating off/on blocks with uniformly drawn lengths in minutes.
    Blocks {
        min_on: usize,
        max_on: usize,
        min_off: usize,
        max_off: usize,
    },
}

/// A daily on/off signal, on between `from_hour` and `to_hour` (wrapping
/// past midnight) on days drawn with `probability`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SignalSpec {
    pub sensor: String,
    pub from_hour: f64,
    pub to_hour: f64,
    pub probability: f64,
}

/// Humidity as a noisy linear function of a temperature source.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HumiditySpec {
    pub sensor: String,
    pub source: String,
    pub base: f64,
    pub per_degree: f64,
    #[serde(default)]
    pub noise_std: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WarmupCheck {
    pub zone: String,
    pub delta: f64,
    pub minutes: usize,
}

impl HouseSpec {
    /// The bundled three-zone reference house.
    pub fn house_a() -> Self {
        Self::from_toml_str(HOUSE_A).expect("bundled house spec parses")
    }

    pub fn house_a_toml() -> &'static str {
        HOUSE_A
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let spec: HouseSpec = toml::from_str(text).map_err(|e| Error::Parse(format!("house spec: {}", e.message())))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text)
    }

    pub fn zone(&self, id: &str) -> Option<&ZoneSpec> {
        self.zones.iter().find(|z| z.id == id)
    }

    fn zone_index(&self, id: &str) -> Option<usize> {
        self.zones.iter().position(|z| z.id == id)
    }

    /// Check sensor names, coefficient signs and the convex-update bound
    /// `sum(couplings) / capacity <= 1`.
    pub fn validate(&self) -> Result<()> {
        let unstable = |msg: String| Err(Error::UnstableSpec(msg));
        let mut names = HashSet::new();
        let mut sensor = |name: &str, kind: ValueKind, code: Option<SensorCode>| -> Result<()> {
            let id = parse_sensor_id(name)?;
            if id.value_kind() != kind || code.is_some_and(|c| c != id.code) {
                return Err(Error::invalid(format!("sensor {name} has the wrong type for its role")));
            }
            if !names.insert(id.to_string()) {
                return Err(Error::DuplicateColumn(name.to_string()));
            }
            Ok(())
        };

        if !(self.noise_std >= 0.0 && self.noise_std.is_finite()) {
            return unstable(format!("noise_std must be non-negative, got {}", self.noise_std));
        }
        sensor(&self.outside.sensor, ValueKind::Numeric, Some(SensorCode::Tmp))?;
        if !(self.outside.drift_phi.abs() < 1.0) || self.outside.drift_std < 0.0 {
            return unstable("outside drift must have |phi| < 1 and non-negative std".into());
        }
        if self.zones.is_empty() {
            return Err(Error::invalid("house spec has no zones"));
        }
        let ids: HashSet<&str> = self.zones.iter().map(|z| z.id.as_str()).collect();
        if ids.len() != self.zones.len() {
            return Err(Error::invalid("zone ids must be unique"));
        }
        for z in &self.zones {
            sensor(&z.sensor, ValueKind::Numeric, Some(SensorCode::Tmp))?;
            if !(z.capacity > 0.0) {
                return unstable(format!("zone {} capacity must be positive", z.id));
            }
            let mut total = 0.0;
            for (to, c) in &z.couplings {
                if to == &z.id || (to != OUTSIDE && !ids.contains(to.as_str())) {
                    return Err(Error::invalid(format!("zone {} couples to unknown zone {to:?}", z.id)));
                }
                if !(*c >= 0.0 && c.is_finite()) {
                    return unstable(format!("zone {} coupling to {to} is negative", z.id));
                }
                total += c;
            }
            if total / z.capacity > 1.0 {
                return unstable(format!("zone {} couplings sum to {} above its capacity", z.id, total));
            }
            if let Some(h) = &z.heater {
                sensor(&h.sensor, ValueKind::Boolean, None)?;
                if !(h.gain > 0.0 && h.gain.is_finite()) {
                    return unstable(format!("heater {} gain must be positive", h.sensor));
                }
                if let Schedule::Blocks { min_on, max_on, min_off, max_off } = h.schedule {
                    if min_on == 0 || min_off == 0 || min_on > max_on || min_off > max_off {
                        return Err(Error::invalid(format!("heater {} has an invalid block schedule", h.sensor)));
                    }
                }
            }
        }
        for s in &self.signals {
            sensor(&s.sensor, ValueKind::Boolean, None)?;
            if !(0.0..=1.0).contains(&s.probability) {
                return Err(Error::invalid(format!("signal {} probability outside [0, 1]", s.sensor)));
            }
        }
        for h in &self.humidity {
            sensor(&h.sensor, ValueKind::Numeric, Some(SensorCode::Hygr))?;
            if h.source != OUTSIDE && !ids.contains(h.source.as_str()) {
                return Err(Error::invalid(format!("humidity {} has unknown source {:?}", h.sensor, h.source)));
            }
        }
        for c in &self.checks {
            if self.zone(&c.zone).and_then(|z| z.heater.as_ref()).is_none() {
                return Err(Error::invalid(format!("check names zone {} without a heater", c.zone)));
            }
        }
        Ok(())
    }

    fn outside_at(&self, ts: NaiveDateTime, drift: f64) -> f64 {
        let hour = ts.hour() as f64 + ts.minute() as f64 / 60.0;
        let o = &self.outside;
        o.mean + o.amplitude * (2.0 * PI * (hour - o.peak_hour) / 24.0).cos() + drift
    }
}

/// Coupling table in zone order: `(neighbour zone index or None for outside, c)`.
fn couplings(spec: &HouseSpec) -> Vec<Vec<(Option<usize>, f64)>> {
    spec.zones
        .iter()
        .map(|z| {
            z.couplings
                .iter()
                .map(|(to, c)| (if to == OUTSIDE { None } else { spec.zone_index(to) }, *c))
                .collect()
        })
        .collect()
}

/// One noise-free update of zone `i`.
fn step_zone(
    spec: &HouseSpec,
    links: &[Vec<(Option<usize>, f64)>],
    temps: &[f64],
    outside: f64,
    heater: f64,
    i: usize,
) -> f64 {
    let z = &spec.zones[i];
    let mut flow = z.base_load;
    for &(to, c) in &links[i] {
        let other = to.map_or(outside, |j| temps[j]);
        flow += c * (other - temps[i]);
    }
    if let Some(h) = &z.heater {
        flow += h.gain * heater;
    }
    temps[i] + flow / z.capacity
}

fn stream(seed: u64, id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(id);
    rng
}

fn schedule_series(schedule: &Schedule, n: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    match *schedule {
        Schedule::On => vec![1.0; n],
        Schedule::Off => vec![0.0; n],
        Schedule::Blocks { min_on, max_on, min_off, max_off } => {
            let mut out = Vec::with_capacity(n);
            let first_off = rng.random_range(0..=max_off);
            out.resize(first_off.min(n), 0.0);
            let mut on = true;
            while out.len() < n {
                let len = if on {
                    rng.random_range(min_on..=max_on)
                } else {
                    rng.random_range(min_off..=max_off)
                };
                let v = if on { 1.0 } else { 0.0 };
                let end = (out.len() + len).min(n);
                out.resize(end, v);
                on = !on;
            }
            out
        }
    }
}

fn in_window(hour: f64, from: f64, to: f64) -> bool {
    if from <= to {
        hour >= from && hour < to
    } else {
        hour >= from || hour < to
    }
}

/// Simulate the house from `start` to `end` inclusive at one-minute steps.
pub fn generate(spec: &HouseSpec, start: NaiveDateTime, end: NaiveDateTime, seed: u64) -> Result<Frame> {
    spec.validate()?;
    if end - start < TimeDelta::days(2) {
        return Err(Error::invalid("synthetic span must cover at least two days"));
    }
    if start.second() != 0 || end.second() != 0 {
        return Err(Error::invalid("synthetic span must start and end on whole minutes"));
    }
    let n = (end - start).num_minutes() as usize + 1;
    let burn = spec.burn_in_minutes;
    let total = burn + n;
    let sim_start = start - TimeDelta::minutes(burn as i64);
    let ts_at = |t: usize| sim_start + TimeDelta::minutes(t as i64);

    let heaters: Vec<Vec<f64>> = spec
        .zones
        .iter()
        .enumerate()
        .map(|(i, z)| match &z.heater {
            Some(h) => schedule_series(&h.schedule, total, &mut stream(seed, 10 + i as u64)),
            None => vec![0.0; total],
        })
        .collect();

    let mut drift_rng = stream(seed, 2);
    let drift_noise = Normal::new(0.0, spec.outside.drift_std.max(0.0)).map_err(|e| Error::invalid(e.to_string()))?;
    let mut drift = 0.0;
    let outside: Vec<f64> = (0..total)
        .map(|t| {
            let v = spec.outside_at(ts_at(t), drift);
            if spec.outside.drift_std > 0.0 {
                drift = spec.outside.drift_phi * drift + drift_noise.sample(&mut drift_rng);
            }
            v
        })
        .collect();

    let links = couplings(spec);
    let noise = Normal::new(0.0, spec.noise_std).map_err(|e| Error::invalid(e.to_string()))?;
    let mut noise_rng = stream(seed, 1);
    let mut temps: Vec<f64> = spec.zones.iter().map(|z| z.initial).collect();
    let mut history: Vec<Vec<f64>> = vec![Vec::with_capacity(n); spec.zones.len()];
    let mut next = temps.clone();
    for t in 0..total {
        if t >= burn {
            for (h, v) in history.iter_mut().zip(&temps) {
                h.push(*v);
            }
        }
        for i in 0..spec.zones.len() {
            next[i] = step_zone(spec, &links, &temps, outside[t], heaters[i][t], i);
            if spec.noise_std > 0.0 {
                next[i] += noise.sample(&mut noise_rng);
            }
        }
        std::mem::swap(&mut temps, &mut next);
    }

    let timestamps: Vec<NaiveDateTime> = (0..n).map(|t| start + TimeDelta::minutes(t as i64)).collect();
    let mut frame = Frame::new(timestamps.clone())?;
    frame.push_column(&spec.outside.sensor, ColumnKind::Numeric, outside[burn..].to_vec())?;
    for (z, h) in spec.zones.iter().zip(&history) {
        frame.push_column(&z.sensor, ColumnKind::Numeric, h.clone())?;
    }
    for (z, h) in spec.zones.iter().zip(&heaters) {
        if let Some(heater) = &z.heater {
            frame.push_column(&heater.sensor, ColumnKind::Boolean, h[burn..].to_vec())?;
        }
    }
    for (k, s) in spec.signals.iter().enumerate() {
        let mut rng = stream(seed, 100 + k as u64);
        let first_day = ts_at(0).date();
        let n_days = (ts_at(total - 1).date() - first_day).num_days() as usize + 1;
        let active: Vec<bool> = (0..n_days).map(|_| rng.random_bool(s.probability)).collect();
        let values = timestamps
            .iter()
            .map(|ts| {
                let day = (ts.date() - first_day).num_days() as usize;
                let hour = ts.hour() as f64 + ts.minute() as f64 / 60.0;
                if active[day] && in_window(hour, s.from_hour, s.to_hour) {
                    1.0
                } else {
                    0.0
                }
            })
            .collect();
        frame.push_column(&s.sensor, ColumnKind::Boolean, values)?;
    }
    for (k, h) in spec.humidity.iter().enumerate() {
        let mut rng = stream(seed, 200 + k as u64);
        let dist = Normal::new(0.0, h.noise_std.max(0.0)).map_err(|e| Error::invalid(e.to_string()))?;
        let source: Vec<f64> = if h.source == OUTSIDE {
            outside[burn..].to_vec()
        } else {
            history[spec.zone_index(&h.source).expect("validated source")].clone()
        };
        let values = source
            .iter()
            .map(|t| {
                let e = if h.noise_std > 0.0 { dist.sample(&mut rng) } else { 0.0 };
                (h.base + h.per_degree * t + e).clamp(0.0, 100.0)
            })
            .collect();
        frame.push_column(&h.sensor, ColumnKind::Numeric, values)?;
    }
    Ok(frame)
}

/// Fixed conditions for a noise-free warm-up run. Keys are sensor names:
/// zone temperature sensors are pinned to the value, heater sensors set the
/// heater level. Unmentioned heaters are off; unmentioned zones evolve.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct WarmupScenario {
    pub outside: f64,
    pub before: BTreeMap<String, f64>,
    pub after: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WarmupOutcome {
    /// Settled temperature of the zone under the `before` conditions.
    pub baseline: f64,
    /// Minutes from the switch until the zone first reaches
    /// `baseline + delta`; `None` if it never does within ten days.
    pub minutes: Option<usize>,
}

const SETTLE_LIMIT: usize = 2_000_000;
const HIT_LIMIT: usize = 10 * 1440;

struct Conditions {
    pinned: Vec<Option<f64>>,
    heater: Vec<f64>,
}

fn conditions(spec: &HouseSpec, map: &BTreeMap<String, f64>) -> Result<Conditions> {
    let mut pinned = vec![None; spec.zones.len()];
    let mut heater = vec![0.0; spec.zones.len()];
    for (name, v) in map {
        if let Some(i) = spec.zones.iter().position(|z| &z.sensor == name) {
            pinned[i] = Some(*v);
        } else if let Some(i) = spec
            .zones
            .iter()
            .position(|z| z.heater.as_ref().is_some_and(|h| &h.sensor == name))
        {
            heater[i] = *v;
        } else {
            return Err(Error::invalid(format!("scenario names unknown sensor {name:?}")));
        }
    }
    Ok(Conditions { pinned, heater })
}

fn apply_pins(temps: &mut [f64], c: &Conditions) {
    for (t, p) in temps.iter_mut().zip(&c.pinned) {
        if let Some(v) = p {
            *t = *v;
        }
    }
}

fn advance(spec: &HouseSpec, links: &[Vec<(Option<usize>, f64)>], temps: &[f64], outside: f64, c: &Conditions) -> Vec<f64> {
    (0..spec.zones.len())
        .map(|i| match c.pinned[i] {
            Some(v) => v,
            None => step_zone(spec, links, temps, outside, c.heater[i], i),
        })
        .collect()
}

/// Noise-free warm-up time of `zone` when conditions change from `before`
/// to `after` at minute 0, starting from the settled `before` state.
pub fn true_warmup(spec: &HouseSpec, zone: &str, scenario: &WarmupScenario, delta: f64) -> Result<WarmupOutcome> {
    spec.validate()?;
    let target = spec
        .zone_index(zone)
        .ok_or_else(|| Error::invalid(format!("unknown zone {zone:?}")))?;
    if !delta.is_finite() {
        return Err(Error::invalid("warm-up delta must be finite"));
    }
    let before = conditions(spec, &scenario.before)?;
    let after = conditions(spec, &scenario.after)?;
    if before.pinned[target].is_some() || after.pinned[target].is_some() {
        return Err(Error::invalid("the target zone cannot be pinned"));
    }
    let links = couplings(spec);

    let mut temps: Vec<f64> = spec.zones.iter().map(|z| z.initial).collect();
    apply_pins(&mut temps, &before);
    let mut settled = false;
    for _ in 0..SETTLE_LIMIT {
        let next = advance(spec, &links, &temps, scenario.outside, &before);
        let change = next.iter().zip(&temps).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        temps = next;
        if change < 1e-13 {
            settled = true;
            break;
        }
    }
    if !settled {
        return Err(Error::UnstableSpec("zone temperatures do not settle under the initial conditions".into()));
    }
    let baseline = temps[target];
    let goal = baseline + delta;

    apply_pins(&mut temps, &after);
    for k in 0..=HIT_LIMIT {
        if temps[target] >= goal - 1e-9 {
            return Ok(WarmupOutcome { baseline, minutes: Some(k) });
        }
        temps = advance(spec, &links, &temps, scenario.outside, &after);
    }
    Ok(WarmupOutcome { baseline, minutes: None })
}
