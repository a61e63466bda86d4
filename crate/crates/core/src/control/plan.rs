use std::fmt;
use std::path::Path;
use std::str::FromStr;

use chrono::{NaiveDateTime, TimeDelta};
use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use super::scenario::{predict_future, ControlScenario, ControlValue, IndoorModel};
use super::smoothing::{find_sustained_hit, moving_average};
use crate::ar::AmbientModel;
use crate::error::{Error, Result};
use crate::frame::TIMESTAMP_FORMAT;
use crate::sensor::{parse_sensor_id, ValueKind};

const EVENT_TIME_FORMATS: [&str; 3] = [TIMESTAMP_FORMAT, "%Y-%m-%dT%H:%M:%S", "%Y-%m-%d %H:%M"];

/// A calendar heating request: reach `target_temperature` in `target_zone` by `target_time`.
#[derive(Debug, Clone, PartialEq)]
pub struct HeatingEvent {
    pub event: String,
    pub target_zone: String,
    pub target_time: NaiveDateTime,
    pub target_temperature: f64,
    /// Control column and its value once heating starts.
    pub controls: IndexMap<String, ControlValue>,
}

impl HeatingEvent {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        text.parse()
    }

    pub fn to_text(&self) -> String {
        let controls: Vec<String> = self.controls.iter().map(|(k, v)| format!("{k}={v}")).collect();
        format!(
            "Event: {}\nTarget Zone: {}\nTarget Timestamp: {}\nTarget Temperature: {}°C\nControls: {}\n",
            self.event,
            self.target_zone,
            self.target_time.format(TIMESTAMP_FORMAT),
            self.target_temperature,
            controls.join(", ")
        )
    }
}

/// `id` alone means a Boolean control switched 0 to 1; `id=v` holds `v`
/// throughout and `id=a/b` steps from `a` to `b`.
pub fn parse_control(entry: &str) -> Result<(String, ControlValue)> {
    let entry = entry.trim();
    match entry.split_once('=') {
        Some((id, value)) => {
            let id = id.trim();
            if id.is_empty() {
                return Err(Error::Parse(format!("control {entry:?} has no column")));
            }
            Ok((id.to_string(), value.parse()?))
        }
        None => {
            let id = parse_sensor_id(entry)?;
            if id.value_kind() != ValueKind::Boolean {
                return Err(Error::Parse(format!("numeric control {entry} needs a value, e.g. {entry}=22/23")));
            }
            Ok((entry.to_string(), ControlValue::Step { before: 0.0, after: 1.0 }))
        }
    }
}

fn normalize_key(key: &str) -> String {
    key.chars().filter(|c| c.is_alphanumeric()).collect::<String>().to_ascii_lowercase()
}

impl FromStr for HeatingEvent {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        let mut fields: IndexMap<String, String> = IndexMap::new();
        for (n, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once(':')
                .ok_or_else(|| Error::Parse(format!("event line {}: expected `Key: Value`", n + 1)))?;
            let key = normalize_key(key);
            if fields.insert(key.clone(), value.trim().to_string()).is_some() {
                return Err(Error::Parse(format!("event key {key:?} given twice")));
            }
        }
        let mut take = |key: &str| fields.shift_remove(key).ok_or_else(|| Error::Parse(format!("event lacks {key}")));
        let event = take("event")?;
        let target_zone = take("targetzone")?;
        let ts = take("targettimestamp")?;
        let temp = take("targettemperature")?;
        let controls_text = take("controls")?;
        if let Some(extra) = fields.keys().next() {
            return Err(Error::Parse(format!("unknown event key {extra:?}")));
        }

        let target_time = EVENT_TIME_FORMATS
            .iter()
            .find_map(|f| NaiveDateTime::parse_from_str(&ts, f).ok())
            .ok_or_else(|| Error::Parse(format!("cannot read target timestamp {ts:?}")))?;
        let target_temperature = temp
            .trim_end_matches("°C")
            .trim_end_matches('C')
            .trim()
            .parse::<f64>()
            .ok()
            .filter(|v| v.is_finite())
            .ok_or_else(|| Error::Parse(format!("cannot read target temperature {temp:?}")))?;
        let mut controls = IndexMap::new();
        for entry in controls_text.split(',').filter(|e| !e.trim().is_empty()) {
            let (id, value) = parse_control(entry)?;
            if controls.insert(id.clone(), value).is_some() {
                return Err(Error::Parse(format!("control {id} listed twice")));
            }
        }
        if controls.is_empty() {
            return Err(Error::Parse("event lists no controls".into()));
        }
        let target_zone = target_zone
            .strip_prefix("Room ")
            .or_else(|| target_zone.strip_prefix("room "))
            .unwrap_or(&target_zone)
            .trim()
            .to_string();
        Ok(HeatingEvent {
            event,
            target_zone,
            target_time,
            target_temperature,
            controls,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PlanMode {
    Static,
    Iterative,
}

impl fmt::Display for PlanMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PlanMode::Static => "static",
            PlanMode::Iterative => "iterative",
        })
    }
}

impl FromStr for PlanMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "static" => Ok(PlanMode::Static),
            "iterative" => Ok(PlanMode::Iterative),
            other => Err(Error::Parse(format!("unknown plan mode {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlanConfig {
    pub mode: PlanMode,
    pub hold_minutes: usize,
    pub buffer_minutes: i64,
    pub window: usize,
    /// Simulation start; `now` when unset.
    pub t0: Option<NaiveDateTime>,
    pub max_iterations: usize,
}

impl Default for PlanConfig {
    fn default() -> Self {
        Self {
            mode: PlanMode::Static,
            hold_minutes: 20,
            buffer_minutes: 5,
            window: super::DEFAULT_SMOOTHING_WINDOW,
            t0: None,
            max_iterations: 20,
        }
    }
}

impl PlanConfig {
    pub fn validate(&self) -> Result<()> {
        if self.hold_minutes == 0 {
            return Err(Error::invalid("hold must be at least 1 minute"));
        }
        if self.buffer_minutes < 0 {
            return Err(Error::invalid("buffer must be non-negative"));
        }
        if self.window == 0 {
            return Err(Error::invalid("smoothing window must be at least 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ControlPlan {
    pub mode: PlanMode,
    pub now: NaiveDateTime,
    pub target_time: NaiveDateTime,
    pub target_temperature: f64,
    pub t0: NaiveDateTime,
    pub t1: NaiveDateTime,
    pub delta_t_minutes: i64,
    pub switch_on_time: NaiveDateTime,
    /// Requested buffer; less is applied when the slack is shorter.
    pub buffer_minutes: i64,
    pub iterations: usize,
    pub timestamps: Vec<NaiveDateTime>,
    pub predicted: Vec<f64>,
    pub smoothed: Vec<f64>,
}

impl ControlPlan {
    pub fn to_text(&self) -> String {
        let f = |t: NaiveDateTime| t.format(TIMESTAMP_FORMAT).to_string();
        format!(
            "mode: {}\nnow: {}\ntarget_time: {}\ntarget_temperature: {}\nt0: {}\nt1: {}\ndelta_t_minutes: {}\nswitch_on_time: {}\nbuffer_minutes: {}\niterations: {}\n",
            self.mode,
            f(self.now),
            f(self.target_time),
            self.target_temperature,
            f(self.t0),
            f(self.t1),
            self.delta_t_minutes,
            f(self.switch_on_time),
            self.buffer_minutes,
            self.iterations
        )
    }

    pub fn trajectory_csv(&self) -> String {
        let mut out = String::from("timestamp,predicted,smoothed\n");
        for ((ts, p), s) in self.timestamps.iter().zip(&self.predicted).zip(&self.smoothed) {
            out.push_str(&format!("{},{p},{s}\n", ts.format(TIMESTAMP_FORMAT)));
        }
        out
    }
}

/// `t - Δt - buffer`, with the buffer cut to the available slack and `now`
/// when the warm-up fills the whole gap.
pub fn schedule_static(now: NaiveDateTime, target_time: NaiveDateTime, delta_t: TimeDelta, buffer: TimeDelta) -> NaiveDateTime {
    let gap = target_time - now;
    if delta_t >= gap {
        return now;
    }
    target_time - delta_t - buffer.min(gap - delta_t)
}

/// Latest start `t0` in `[lo, target]` whose sustained hit still lands by
/// `target`, found by bisection. `hit_at` returns the hit time for a start.
/// `lo` must itself hit by `target`. Returns `(t0, t1, evaluations)`.
pub fn bisect_start(
    lo: NaiveDateTime,
    lo_hit: NaiveDateTime,
    target: NaiveDateTime,
    max_iterations: usize,
    mut hit_at: impl FnMut(NaiveDateTime) -> Result<Option<NaiveDateTime>>,
) -> Result<(NaiveDateTime, NaiveDateTime, usize)> {
    let (mut lo, mut lo_hit, mut hi) = (lo, lo_hit, target);
    let mut iterations = 0;
    while iterations < max_iterations && (hi - lo).num_minutes() > 1 && (target - lo_hit).num_minutes() > 1 {
        let mid = lo + TimeDelta::minutes((hi - lo).num_minutes() / 2);
        iterations += 1;
        match hit_at(mid)? {
            Some(t1) if t1 <= target => {
                lo = mid;
                lo_hit = t1;
            }
            _ => hi = mid,
        }
    }
    Ok((lo, lo_hit, iterations))
}

struct Run {
    timestamps: Vec<NaiveDateTime>,
    predicted: Vec<f64>,
    smoothed: Vec<f64>,
    t1: Option<NaiveDateTime>,
}

/// Warm-up estimation and switch-on scheduling for one heating event.
pub fn plan_heating(
    event: &HeatingEvent,
    now: NaiveDateTime,
    ambient: &AmbientModel,
    model: &IndoorModel,
    config: &PlanConfig,
) -> Result<ControlPlan> {
    config.validate()?;
    let t = event.target_time;
    if now >= t {
        return Err(Error::invalid(format!("target time {t} is not after now ({now})")));
    }
    if now <= ambient.last_timestamp() {
        return Err(Error::invalid(format!(
            "now ({now}) must be after the end of the ambient history ({})",
            ambient.last_timestamp()
        )));
    }
    let start = config.t0.unwrap_or(now);
    if start < now || start >= t {
        return Err(Error::invalid(format!("t0 {start} must lie in [{now}, {t})")));
    }
    let end = t + TimeDelta::minutes(config.hold_minutes as i64);
    let future = ambient.forecast_until(end)?;
    let timestamps = future.timestamps().to_vec();
    let index_of = |ts: NaiveDateTime| {
        future
            .position(ts)
            .ok_or_else(|| Error::invalid(format!("{ts} is not a whole minute inside the forecast")))
    };
    let target = event.target_temperature;
    let run = |t0: NaiveDateTime| -> Result<Run> {
        let scenario = ControlScenario {
            assignments: event.controls.clone(),
            switch_time: t0,
        };
        let predicted = predict_future(model, &future, &scenario)?;
        let smoothed = moving_average(&predicted, config.window)?;
        let t1 = find_sustained_hit(&smoothed, index_of(t0)?, target, config.hold_minutes).map(|i| timestamps[i]);
        Ok(Run {
            timestamps: timestamps.clone(),
            predicted,
            smoothed,
            t1,
        })
    };

    let first = run(start)?;
    let Some(first_hit) = first.t1 else {
        return Err(Error::TargetUnreachable {
            target,
            from: start.format(TIMESTAMP_FORMAT).to_string(),
        });
    };
    let buffer = TimeDelta::minutes(config.buffer_minutes);
    let delta = first_hit - start;
    let plan = |r: Run, t0: NaiveDateTime, t1: NaiveDateTime, switch_on_time, iterations| ControlPlan {
        mode: config.mode,
        now,
        target_time: t,
        target_temperature: target,
        t0,
        t1,
        delta_t_minutes: (t1 - t0).num_minutes(),
        switch_on_time,
        buffer_minutes: config.buffer_minutes,
        iterations,
        timestamps: r.timestamps,
        predicted: r.predicted,
        smoothed: r.smoothed,
    };
    if delta >= t - now || config.mode == PlanMode::Static {
        let on = schedule_static(now, t, delta, buffer);
        return Ok(plan(first, start, first_hit, on, 0));
    }

    let (t0, t1, iterations) = bisect_start(start, first_hit, t, config.max_iterations, |t0| Ok(run(t0)?.t1))?;
    let last = if t0 == start { first } else { run(t0)? };
    let on = t0 - buffer.min(t0 - now);
    Ok(plan(last, t0, t1, on, iterations))
}
