use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::ExperimentError;
use crate::agents::{GoalSpec, HardLimits, HeuristicSpec, TrainConfig, DEFAULT_NODE_BUDGET};
use crate::sim::ScenarioOverrides;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Study {
    RelationshipBalance,
    CareerProgression,
    ObjectImpact,
    BuildComparison,
    AgentComparison,
}

impl Study {
    pub fn as_str(self) -> &'static str {
        match self {
            Study::RelationshipBalance => "relationship_balance",
            Study::CareerProgression => "career_progression",
            Study::ObjectImpact => "object_impact",
            Study::BuildComparison => "build_comparison",
            Study::AgentComparison => "agent_comparison",
        }
    }
}

/// One tuning file, or two for a build comparison.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TuningRef {
    One(PathBuf),
    Many(Vec<PathBuf>),
}

impl TuningRef {
    pub fn paths(&self) -> Vec<&Path> {
        match self {
            TuningRef::One(p) => vec![p.as_path()],
            TuningRef::Many(ps) => ps.iter().map(PathBuf::as_path).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CareerTarget {
    pub career: String,
    pub target_level: u32,
}

fn default_budget() -> usize {
    DEFAULT_NODE_BUDGET
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum AgentSpec {
    Astar {
        #[serde(default = "default_budget")]
        node_budget: usize,
    },
    /// Exactly one of a stored policy or training parameters.
    Softmax {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        policy: Option<PathBuf>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        train: Option<TrainConfig>,
    },
}

impl Default for AgentSpec {
    fn default() -> Self {
        AgentSpec::Astar {
            node_budget: DEFAULT_NODE_BUDGET,
        }
    }
}

/// One study as it appears in a suite file. Relative paths resolve against
/// the suite file's directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub id: String,
    pub study: Study,
    pub tuning: TuningRef,
    #[serde(default)]
    pub scenario: ScenarioOverrides,
    /// Defaults to the career or relationship default for the study.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub heuristic: Option<HeuristicSpec>,
    /// Required by the relationship study. Career studies build one goal per
    /// career and take only the hard limits from here.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub goal: Option<GoalSpec>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub careers: Vec<CareerTarget>,
    pub trials: u32,
    #[serde(default)]
    pub base_seed: u64,
    #[serde(default)]
    pub agent: AgentSpec,
    /// Softmax temperatures evaluated by the agent comparison; the policy's
    /// own temperature when empty.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub softmax_temperatures: Vec<f64>,
}

impl ExperimentConfig {
    pub fn check(&self) -> Result<(), ExperimentError> {
        let bad = |msg: String| Err(ExperimentError::Config(msg));
        if self.id.is_empty() || self.id.contains(['/', '\\']) || self.id.starts_with('.') {
            return bad(format!("`{}` is not usable as an output directory name", self.id));
        }
        if self.trials == 0 {
            return bad("trials must be at least 1".into());
        }
        let want = if self.study == Study::BuildComparison { 2 } else { 1 };
        let got = self.tuning.paths().len();
        if got != want {
            return bad(format!(
                "{} takes {want} tuning file(s), got {got}",
                self.study.as_str()
            ));
        }
        match self.study {
            Study::RelationshipBalance if self.goal.is_none() => {
                return bad("relationship_balance needs a goal".into())
            }
            Study::AgentComparison => match &self.agent {
                AgentSpec::Softmax { policy, train } if policy.is_some() != train.is_some() => {}
                AgentSpec::Softmax { .. } => {
                    return bad("softmax agent needs exactly one of `policy` or `train`".into())
                }
                AgentSpec::Astar { .. } => {
                    return bad("agent_comparison needs a softmax agent to compare against".into())
                }
            },
            _ => {}
        }
        if let AgentSpec::Astar { node_budget: 0 } = self.agent {
            return bad("node_budget must be at least 1".into());
        }
        if self
            .softmax_temperatures
            .iter()
            .any(|t| !(t.is_finite() && *t > 0.0))
        {
            return bad("softmax temperatures must be finite and positive".into());
        }
        Ok(())
    }

    pub fn hard_limits(&self) -> HardLimits {
        self.goal.as_ref().map(|g| g.hard_limits).unwrap_or_default()
    }
}

/// Parses a suite file: a JSON list of experiment configs.
pub fn parse_suite(text: &str) -> Result<Vec<ExperimentConfig>, serde_json::Error> {
    serde_json::from_str(text)
}
