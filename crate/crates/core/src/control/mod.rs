//! Scenario prediction, control experiments, smoothing and heating schedules.

mod experiments;
mod pipeline;
mod plan;
mod scenario;
mod smoothing;

pub use experiments::{run_control_experiments, CaseResult, CasesFile, ControlCase, ExperimentReport, DEFAULT_SMOOTHING_WINDOW};
pub use pipeline::{candidate_features, fit_ambient, prepare, select, standardizable, train_indoor, PipelineConfig, Prepared, Selection, Trained};
pub use plan::{bisect_start, parse_control, plan_heating, schedule_static, ControlPlan, HeatingEvent, PlanConfig, PlanMode};
pub use scenario::{predict_future, ControlScenario, ControlValue, IndoorModel};
pub use smoothing::{find_sustained_hit, moving_average};
