//! Two-stage indoor temperature forecasting and learning-based heating control.
//!
//! Stage one forecasts every ambient (non-control) sensor signal with a
//! subset-lag autoregressive model. Stage two feeds those forecasts, together
//! with planned control values, into a gradient-boosted regression tree
//! ensemble that predicts the indoor temperature. The [`control`] module uses
//! the predicted trajectories to estimate warm-up times and schedule the
//! heating switch-on.

pub mod ar;
pub mod control;
pub mod error;
pub mod frame;
pub mod gbm;
pub mod sensor;
pub mod synth;

pub use error::{Error, Result};
pub use frame::{ColumnKind, Frame, Standardizer};
pub use ar::{AmbientModel, ArModel, LagSelectionConfig};
pub use control::{ControlPlan, ControlScenario, HeatingEvent, IndoorModel, PlanConfig, PlanMode};
pub use gbm::{GbmConfig, TreeEnsemble};
pub use sensor::{parse_sensor_id, SensorCode, SensorId, Space, ValueKind};
pub use synth::HouseSpec;
