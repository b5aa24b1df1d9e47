//! Two-sensor Monte Carlo tracking benchmarks.
//!
//! A [`ScenarioConfig`] selects the motion/measurement models and a set of
//! (base filter, fusion mode) combinations. [`run_experiment`] draws one truth
//! trajectory and one measurement stream per sensor for every trial, runs every
//! combination on that shared data and collects a [`TrialEnsemble`]. The
//! reporting helpers reduce an ensemble to RMSE series, fusing-weight traces and
//! CSV/JSON tables.

mod config;
mod generate;
mod harness;
mod models;
mod report;

pub use config::{BaseFilter, FilterSpec, FusionMode, ProcessNoise, ScenarioConfig, ScenarioKind, SensorParams};
pub use generate::{gen_ct_scenario, gen_linear_scenario, generate, ScenarioData};
pub use harness::{run_experiment, FilterTrace, TrialEnsemble, TrialRecord};
pub use models::{ct_transition_matrix, CoordinatedTurnModel, ScenarioModels};
pub use report::{
    rmse, rmse_components, summarize, weight_trace, write_ensemble_jsonl, write_steps_csv,
    write_summary_csv, write_summary_json, Metric, RmseSeries, StepRow, SummaryRow, WeightTrace,
};
