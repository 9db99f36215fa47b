//! Deterministic simulation: workloads, the engine loop, metrics, sweeps
//! and predictor tuning.

pub mod bench;
pub mod engine;
pub mod metrics;
pub mod sweep;
pub mod training;
pub mod tune;
pub mod workload;

pub use engine::{run, ClassifierMode, CostModel, Invocation, Models, RunConfig, RunOutcome};
pub use metrics::{responsiveness_gain, single_shot_precision_recall, GainSummary, RunMetrics};
pub use sweep::{baseline_of, sweep_thresholds, SweepCell};
pub use training::{train_models, TrainReport, TrainingOptions};
pub use tune::{tune_threshold, ThresholdChoice};
pub use workload::{generate_workload, WorkloadConfig};
