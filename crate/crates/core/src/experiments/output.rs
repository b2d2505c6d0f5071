use std::io;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use super::config::ExperimentConfig;
use super::studies::{ExperimentOutcome, StudyResult};
use super::ExperimentError;
use crate::agents::TrialRecord;

/// Column order of `trials.csv`.
pub const TRIALS_CSV_HEADER: [&str; 20] = [
    "experiment",
    "group",
    "build",
    "agent",
    "trial",
    "seed",
    "goal_reached",
    "stop_reason",
    "total_actions",
    "event_actions",
    "sessions",
    "wait_count",
    "mean_wait",
    "final_clock",
    "relationship_category",
    "first_decision",
    "final_digest",
    "decisions",
    "max_expanded",
    "max_decision_micros",
];

/// One `trials.csv` line.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialRow {
    pub experiment: String,
    pub group: String,
    pub build: String,
    pub agent: String,
    pub trial: u32,
    pub seed: u64,
    pub goal_reached: bool,
    pub stop_reason: String,
    pub total_actions: u32,
    pub event_actions: u32,
    pub sessions: u32,
    pub wait_count: usize,
    pub mean_wait: Option<f64>,
    pub final_clock: u64,
    pub relationship_category: Option<String>,
    pub first_decision: Option<String>,
    pub final_digest: String,
    pub decisions: u32,
    pub max_expanded: usize,
    pub max_decision_micros: u64,
}

impl TrialRow {
    pub fn new(experiment: &str, group: &str, build: &str, agent: &str, r: &TrialRecord) -> Self {
        TrialRow {
            experiment: experiment.into(),
            group: group.into(),
            build: build.into(),
            agent: agent.into(),
            trial: r.trial,
            seed: r.seed,
            goal_reached: r.goal_reached,
            stop_reason: r.stop_reason.as_str().into(),
            total_actions: r.total_actions,
            event_actions: r.event_actions,
            sessions: r.sessions,
            wait_count: r.wait_intervals.len(),
            mean_wait: r.mean_wait(),
            final_clock: r.final_clock,
            relationship_category: r.relationship_category.clone(),
            first_decision: r.first_decision.clone(),
            final_digest: r.final_digest.clone(),
            decisions: r.decisions,
            max_expanded: r.max_expanded,
            max_decision_micros: r.max_decision_micros,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChartGroup {
    pub key: String,
    pub metric: String,
    pub mean: f64,
    pub variance: f64,
    pub count: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChartSeries {
    pub name: String,
    pub running_mean: Vec<f64>,
}

/// Plot-ready data: bar groups with variance whiskers, plus line series.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChartData {
    pub id: String,
    pub study: String,
    pub legend: String,
    pub groups: Vec<ChartGroup>,
    pub series: Vec<ChartSeries>,
}

/// Content of `stats.json`. Holds nothing that depends on wall time or
/// thread count.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentReport<'a> {
    pub id: &'a str,
    pub study: &'a str,
    pub status: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub trials: u32,
    pub base_seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_expanded: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub result: Option<&'a StudyResult>,
}

impl<'a> ExperimentReport<'a> {
    pub fn new(
        xc: &'a ExperimentConfig,
        outcome: Result<&'a ExperimentOutcome, &ExperimentError>,
    ) -> Self {
        let (status, error, max_expanded, result) = match outcome {
            Ok(o) => ("ok", None, Some(o.max_expanded), Some(&o.result)),
            Err(e) => ("failed", Some(e.to_string()), None, None),
        };
        ExperimentReport {
            id: &xc.id,
            study: xc.study.as_str(),
            status,
            error,
            trials: xc.trials,
            base_seed: xc.base_seed,
            max_expanded,
            result,
        }
    }
}

/// Files written for one experiment.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct OutputFiles {
    pub stats: PathBuf,
    pub trials: Option<PathBuf>,
    pub chartdata: Option<PathBuf>,
}

fn json_file(path: &Path, value: &impl Serialize) -> io::Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(io::Error::other)?;
    text.push('\n');
    std::fs::write(path, text)
}

/// Writes `stats.json` and, for a successful run, `trials.csv` and
/// `chartdata.json` into `dir`.
pub fn write_outputs(
    dir: &Path,
    xc: &ExperimentConfig,
    outcome: Result<&ExperimentOutcome, &ExperimentError>,
) -> io::Result<OutputFiles> {
    std::fs::create_dir_all(dir)?;
    let mut files = OutputFiles {
        stats: dir.join("stats.json"),
        ..Default::default()
    };
    json_file(&files.stats, &ExperimentReport::new(xc, outcome))?;
    if let Ok(o) = outcome {
        let path = dir.join("trials.csv");
        let mut w = csv::WriterBuilder::new()
            .has_headers(false)
            .from_path(&path)?;
        w.write_record(TRIALS_CSV_HEADER)?;
        for row in &o.rows {
            w.serialize(row)?;
        }
        w.flush()?;
        files.trials = Some(path);

        let path = dir.join("chartdata.json");
        json_file(&path, &o.charts)?;
        files.chartdata = Some(path);
    }
    Ok(files)
}

/// SHA-256 over the given file contents, each length-prefixed so that moving
/// bytes between files changes the digest.
pub fn inputs_digest<'a>(contents: impl IntoIterator<Item = &'a [u8]>) -> String {
    let mut h = Sha256::new();
    for c in contents {
        h.update((c.len() as u64).to_le_bytes());
        h.update(c);
    }
    hex::encode(h.finalize())
}
