use std::path::{Path, PathBuf};

use anyhow::Context;
use log::{info, warn};
use serde_json::json;
use thermocast_core::ar::{AmbientModel, ForecastMode, LagSelectionConfig};
use thermocast_core::control::{
    candidate_features, fit_ambient, plan_heating, prepare as prepare_frames, run_control_experiments,
    select as select_features, standardizable, train_indoor, CasesFile, HeatingEvent, IndoorModel, PipelineConfig,
    PlanConfig,
};
use thermocast_core::frame::{ingest_csv, write_csv, KindOverrides, TIMESTAMP_FORMAT};
use thermocast_core::gbm::{ForestConfig, ParamGrid};
use thermocast_core::synth::generate;
use thermocast_core::{Error, Frame, HouseSpec, Standardizer};

use crate::plot::{bar_chart, line_chart, Series};
use crate::{Common, ExperimentOpts, ForecastOpts, PlanOpts, PrepareOpts, SelectOpts, SynthOpts, TrainOpts};

pub const DATA_CSV: &str = "data.csv";
const TRAIN_CSV: &str = "train.csv";
const TEST_CSV: &str = "test.csv";
const FEATURES_TXT: &str = "features.txt";
const ENSEMBLE_JSON: &str = "ensemble.json";
const INDOOR_STANDARDIZER_JSON: &str = "indoor_standardizer.json";
const AMBIENT_JSON: &str = "ambient.json";
const AMBIENT_FORECAST_CSV: &str = "ambient_forecast.csv";

const DEFAULT_GRID: &str = include_str!("../../core/fixtures/grid.toml");
const DEFAULT_EVENT: &str = include_str!("../../core/fixtures/event.txt");

fn write(path: &Path, text: &str) -> thermocast_core::Result<()> {
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn write_json(path: &Path, value: &serde_json::Value) -> thermocast_core::Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| Error::Format(e.to_string()))?;
    text.push('\n');
    write(path, &text)
}

fn fmt_ts(ts: chrono::NaiveDateTime) -> String {
    ts.format(TIMESTAMP_FORMAT).to_string()
}

fn read_frame(path: &Path) -> anyhow::Result<Frame> {
    let frame = ingest_csv(path, &KindOverrides::new()).with_context(|| format!("reading {}", path.display()))?;
    if frame.is_empty() {
        return Err(Error::EmptyFrame).with_context(|| format!("reading {}", path.display()));
    }
    Ok(frame)
}

fn read_features(path: &Path) -> anyhow::Result<Vec<String>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let features: Vec<String> = text.lines().map(str::trim).filter(|l| !l.is_empty()).map(String::from).collect();
    if features.is_empty() {
        return Err(Error::invalid(format!("{} lists no features", path.display())).into());
    }
    Ok(features)
}

fn config(c: &Common, split: chrono::NaiveDateTime) -> PipelineConfig {
    let mut cfg = PipelineConfig::new(c.response.clone(), c.controls.clone(), split);
    cfg.seed = c.seed;
    cfg
}

fn or_default(path: Option<&Path>, dir: &Path, name: &str) -> PathBuf {
    path.map_or_else(|| dir.join(name), Path::to_path_buf)
}

pub fn synth(c: &Common, o: &SynthOpts) -> anyhow::Result<()> {
    let spec = match &o.spec {
        Some(p) => HouseSpec::load(p)?,
        None => HouseSpec::house_a(),
    };
    let frame = generate(&spec, o.start, o.end, c.seed)?;
    write_csv(&frame, c.output_dir.join(DATA_CSV))?;
    write_json(
        &c.output_dir.join("synth.json"),
        &json!({
            "house": spec.name,
            "seed": c.seed,
            "start": fmt_ts(o.start),
            "end": fmt_ts(o.end),
            "rows": frame.len(),
            "columns": frame.n_columns(),
        }),
    )?;
    info!("synthesized {} rows x {} columns", frame.len(), frame.n_columns());
    Ok(())
}

pub fn prepare(c: &Common, input: Option<&Path>, o: &PrepareOpts) -> anyhow::Result<()> {
    let input = or_default(input, &c.output_dir, DATA_CSV);
    let raw = read_frame(&input)?;
    let mut cfg = config(c, o.split);
    cfg.outlier_k = o.outlier_k;
    let p = prepare_frames(&raw, &cfg)?;
    if let Some(w) = &p.outliers.warning {
        warn!("{w}");
    }
    let dir = &c.output_dir;
    write_csv(&p.train, dir.join(TRAIN_CSV))?;
    write_csv(&p.test, dir.join(TEST_CSV))?;
    let mut outliers = String::from("timestamp,value\n");
    for (ts, v) in &p.outliers.removed {
        outliers.push_str(&format!("{},{v}\n", fmt_ts(*ts)));
    }
    write(&dir.join("outliers.csv"), &outliers)?;
    let features = candidate_features(&p.train, &cfg.response);
    Standardizer::fit(&p.train, &standardizable(&p.train, &features)?)?.save(dir.join("standardizer.json"))?;
    write_json(
        &dir.join("prepare.json"),
        &json!({
            "input": input.display().to_string(),
            "response": cfg.response,
            "split": fmt_ts(o.split),
            "outlier_k": o.outlier_k,
            "train_rows": p.train.len(),
            "test_rows": p.test.len(),
            "outliers_removed": p.outliers.removed.len(),
            "response_median": p.outliers.median,
            "response_robust_std": p.outliers.robust_std,
            "warning": p.outliers.warning,
        }),
    )?;
    info!("train {} rows, test {} rows, {} outliers", p.train.len(), p.test.len(), p.outliers.removed.len());
    Ok(())
}

pub fn select(c: &Common, input: Option<&Path>, o: &SelectOpts) -> anyhow::Result<()> {
    let dir = &c.output_dir;
    let train = read_frame(&or_default(input, dir, TRAIN_CSV))?;
    let split = train.last_timestamp().expect("non-empty frame");
    let mut cfg = config(c, split);
    cfg.top_k = o.top_k;
    cfg.importance_repeats = o.repeats;
    cfg.forest = ForestConfig {
        n_trees: o.forest_trees,
        max_samples: (o.max_samples > 0).then_some(o.max_samples),
        ..ForestConfig::default()
    };
    let s = select_features(&train, &cfg)?;
    write(&dir.join("importance.csv"), &s.importance.to_csv())?;
    write(&dir.join(FEATURES_TXT), &(s.features.join("\n") + "\n"))?;
    let shown: Vec<String> = s.importance.ranking.iter().take(25).cloned().collect();
    let stats: Vec<_> = shown.iter().map(|n| s.importance.get(n).expect("ranked feature")).collect();
    let svg = bar_chart(
        "Permutation importance",
        "RMSE increase",
        &shown,
        &stats.iter().map(|f| f.mean).collect::<Vec<_>>(),
        &stats.iter().map(|f| f.std).collect::<Vec<_>>(),
    );
    write(&dir.join("importance.svg"), &svg)?;
    info!("selected {} features: {}", s.features.len(), s.features.join(", "));
    Ok(())
}

pub fn train(c: &Common, input: Option<&Path>, features: Option<&Path>, o: &TrainOpts) -> anyhow::Result<()> {
    let dir = &c.output_dir;
    let train = read_frame(&or_default(input, dir, TRAIN_CSV))?;
    let features = read_features(&or_default(features, dir, FEATURES_TXT))?;
    let grid = match &o.grid {
        Some(p) => ParamGrid::load(p)?,
        None => ParamGrid::from_toml_str(DEFAULT_GRID)?,
    };
    let split = train.last_timestamp().expect("non-empty frame");
    let mut cfg = config(c, split);
    cfg.grid = grid;
    cfg.gbm.min_child_weight = o.min_child_weight;
    let t = train_indoor(&train, &features, &cfg)?;
    t.model.save(dir.join(ENSEMBLE_JSON), dir.join(INDOOR_STANDARDIZER_JSON))?;
    write(&dir.join("grid.csv"), &t.grid.to_csv())?;
    write(&dir.join("tree_0.txt"), &t.model.ensemble.dump_tree(0, 6)?)?;
    let test_path = dir.join(TEST_CSV);
    let test_rmse = if test_path.exists() {
        let test = read_frame(&test_path)?;
        let pred = t.model.predict(&test)?;
        let y = test.values(&cfg.response)?;
        let sse: f64 = pred.iter().zip(y).map(|(p, t)| (p - t) * (p - t)).sum();
        Some((sse / y.len() as f64).sqrt())
    } else {
        None
    };
    write_json(
        &dir.join("train.json"),
        &json!({
            "response": cfg.response,
            "features": features,
            "grid_cells": t.grid.table.len(),
            "best": t.grid.best,
            "validation_rmse": t.grid.best_rmse,
            "test_rmse_observed_inputs": test_rmse,
        }),
    )?;
    info!("best validation rmse {}", t.grid.best_rmse);
    Ok(())
}

pub fn forecast(c: &Common, input: Option<&Path>, features: Option<&Path>, o: &ForecastOpts) -> anyhow::Result<()> {
    let dir = &c.output_dir;
    let train = read_frame(&or_default(input, dir, TRAIN_CSV))?;
    let features = read_features(&or_default(features, dir, FEATURES_TXT))?;
    if o.horizon == 0 {
        return Err(Error::invalid("horizon must be at least 1 minute").into());
    }
    let split = train.last_timestamp().expect("non-empty frame");
    let mut cfg = config(c, split);
    cfg.lags = LagSelectionConfig {
        pacf_threshold: o.pacf_threshold,
        max_lag: o.max_lag,
    };
    cfg.forecast_mode = if o.refit { ForecastMode::Refit } else { ForecastMode::Fixed };
    let ambient = fit_ambient(&train, &features, &cfg)?;
    ambient.save(dir.join(AMBIENT_JSON))?;
    let future = ambient.forecast(o.horizon)?;
    write_csv(&future, dir.join(AMBIENT_FORECAST_CSV))?;
    write(&dir.join("ar_diagnostics.txt"), &ambient.diagnostics())?;
    info!("forecast {} ambient columns {} minutes ahead", future.n_columns(), future.len());
    Ok(())
}

fn load_model(dir: &Path) -> anyhow::Result<IndoorModel> {
    Ok(IndoorModel::load(dir.join(ENSEMBLE_JSON), dir.join(INDOOR_STANDARDIZER_JSON))?)
}

pub fn experiments(c: &Common, models: Option<&Path>, o: &ExperimentOpts) -> anyhow::Result<()> {
    let dir = &c.output_dir;
    let models = models.unwrap_or(dir);
    let model = load_model(models)?;
    let future = read_frame(&models.join(AMBIENT_FORECAST_CSV))?;
    let cases = match &o.cases {
        Some(p) => CasesFile::load(p)?,
        None => CasesFile::table_cases(),
    };
    let switch = cases.resolve_switch_time(future.timestamps())?;
    let report = run_control_experiments(&model, &future, &cases.cases, switch, cases.window)?;
    write(&dir.join("experiments.csv"), &report.trajectories_csv())?;
    write(&dir.join("lifts.csv"), &report.lifts_csv())?;
    let labels: Vec<String> = report.timestamps.iter().map(|t| t.format("%H:%M").to_string()).collect();
    for case in &report.cases {
        let svg = line_chart(
            &format!("{}: switch at {}", case.name, switch.format("%H:%M")),
            "smoothed indoor temperature",
            &labels,
            &[
                Series { label: "with control", values: &case.with_smoothed },
                Series { label: "without control", values: &case.without_smoothed },
            ],
        );
        write(&dir.join(format!("experiment_{}.svg", case.name)), &svg)?;
        info!("{}: mean lift {}", case.name, case.mean_lift);
    }
    Ok(())
}

pub fn plan(c: &Common, models: Option<&Path>, o: &PlanOpts) -> anyhow::Result<()> {
    let dir = &c.output_dir;
    let models = models.unwrap_or(dir);
    let event = match &o.event {
        Some(p) => HeatingEvent::load(p)?,
        None => DEFAULT_EVENT.parse()?,
    };
    let ambient = AmbientModel::load(models.join(AMBIENT_JSON))?;
    let model = load_model(models)?;
    let cfg = PlanConfig {
        mode: o.mode,
        hold_minutes: o.hold_minutes,
        buffer_minutes: o.buffer_minutes,
        window: o.window,
        t0: o.t0,
        ..PlanConfig::default()
    };
    match plan_heating(&event, o.now, &ambient, &model, &cfg) {
        Ok(p) => {
            write(&dir.join("plan.txt"), &format!("status: ok\n{}", p.to_text()))?;
            write(&dir.join("plan_trajectory.csv"), &p.trajectory_csv())?;
            let labels: Vec<String> = p.timestamps.iter().map(|t| t.format("%H:%M").to_string()).collect();
            let target = vec![p.target_temperature; p.timestamps.len()];
            let svg = line_chart(
                &format!("Room {} warm-up, switch on at {}", event.target_zone, p.switch_on_time.format("%H:%M")),
                "indoor temperature",
                &labels,
                &[
                    Series { label: "predicted", values: &p.predicted },
                    Series { label: "smoothed", values: &p.smoothed },
                    Series { label: "target", values: &target },
                ],
            );
            write(&dir.join("plan.svg"), &svg)?;
            info!("switch on at {} (warm-up {} min)", fmt_ts(p.switch_on_time), p.delta_t_minutes);
            Ok(())
        }
        Err(e) => {
            let report = format!(
                "status: failed\nerror: {}\nmessage: {e}\nmode: {}\nnow: {}\ntarget_time: {}\ntarget_temperature: {}\n",
                e.kind(),
                o.mode,
                fmt_ts(o.now),
                fmt_ts(event.target_time),
                event.target_temperature
            );
            write(&dir.join("plan.txt"), &report)?;
            Err(e.into())
        }
    }
}
