//! Seeded batch studies over a tuning file and their aggregate reports.

mod config;
mod output;
mod runner;
mod stats;
mod studies;

use std::path::PathBuf;

use thiserror::Error;

use crate::agents::{HeuristicError, PolicyError, TrainError};
use crate::sim::SimError;
use crate::tuning::TuningError;

pub use config::{parse_suite, AgentSpec, CareerTarget, ExperimentConfig, Study, TuningRef};
pub use output::{
    inputs_digest, write_outputs, ChartData, ChartGroup, ChartSeries, ExperimentReport,
    OutputFiles, TrialRow, TRIALS_CSV_HEADER,
};
pub use runner::{Runner, TrialAgent};
pub use stats::{running_mean, Accumulator, AggregateStats};
pub use studies::{
    agent_comparison, build_comparison, career_progression, load_game, object_impact,
    relationship_balance, run_experiment, AgentRow, BuildRow, CareerRow, ExperimentOutcome,
    ObjectRow, RelationshipGroup, SoftmaxRow, StudyResult,
};

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("invalid experiment: {0}")]
    Config(String),
    #[error("cannot read {path}: {message}")]
    Io { path: PathBuf, message: String },
    #[error("{path}: {source}")]
    Tuning {
        path: PathBuf,
        #[source]
        source: TuningError,
    },
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Heuristic(#[from] HeuristicError),
    #[error("softmax policy: {0}")]
    Policy(#[from] PolicyError),
    #[error("softmax training: {0}")]
    Train(#[from] TrainError),
    #[error("config declares no relationship events")]
    NoRelationshipEvents,
    #[error("unknown career `{0}`")]
    UnknownCareer(String),
    #[error("target level {target} for `{career}` is above its cap of {max}")]
    TargetAboveCap {
        career: String,
        target: u32,
        max: u32,
    },
    #[error("career `{career}` is missing from build `{build}`")]
    CareerMissingInBuild { career: String, build: String },
    #[error("thread pool: {0}")]
    Pool(String),
}
