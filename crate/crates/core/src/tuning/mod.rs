//! Declarative game definition: the data a build ships as tuning files.
//!
//! A [`TuningConfig`] is plain data. It is parsed from JSON by
//! [`parse_tuning`], checked by [`validate`], compared across builds with
//! [`diff_builds`] and linted for reward-curve anomalies with
//! [`flag_step_anomalies`]. The simulator compiles a validated config into an
//! indexed [`crate::sim::Game`].

mod curve;
mod diff;
mod parse;
mod validate;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

pub use curve::{event_step_curve, flag_step_anomalies, StepPoint, DEFAULT_ANOMALY_RATIO};
pub use diff::{diff_builds, BuildDiff, DiffEntry, DiffKind};
pub use parse::{parse_tuning, parse_unchecked, to_json, TuningError, REQUIRED_TOP_LEVEL};
pub use validate::{lint, validate, Diagnostic, EntityKind, Rule, Severity};

/// Only schema version this crate understands.
pub const SCHEMA_VERSION: u32 = 1;

fn schema_version() -> u32 {
    SCHEMA_VERSION
}

fn is_false(b: &bool) -> bool {
    !*b
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TuningConfig {
    #[serde(default = "schema_version")]
    pub schema_version: u32,
    pub build_id: String,
    pub resources: Vec<ResourceSpec>,
    pub actions: Vec<ActionSpec>,
    pub events: Vec<EventSpec>,
    pub careers: Vec<CareerSpec>,
    pub relationships: Vec<RelationshipCategorySpec>,
    pub objects: Vec<ObjectSpec>,
}

impl TuningConfig {
    pub fn action(&self, id: &str) -> Option<&ActionSpec> {
        self.actions.iter().find(|a| a.id == id)
    }

    pub fn action_mut(&mut self, id: &str) -> Option<&mut ActionSpec> {
        self.actions.iter_mut().find(|a| a.id == id)
    }

    pub fn event(&self, id: &str) -> Option<&EventSpec> {
        self.events.iter().find(|e| e.id == id)
    }

    pub fn event_mut(&mut self, id: &str) -> Option<&mut EventSpec> {
        self.events.iter_mut().find(|e| e.id == id)
    }

    pub fn career(&self, id: &str) -> Option<&CareerSpec> {
        self.careers.iter().find(|c| c.id == id)
    }

    pub fn career_mut(&mut self, id: &str) -> Option<&mut CareerSpec> {
        self.careers.iter_mut().find(|c| c.id == id)
    }

    pub fn resource(&self, id: &str) -> Option<&ResourceSpec> {
        self.resources.iter().find(|r| r.id == id)
    }

    pub fn resource_mut(&mut self, id: &str) -> Option<&mut ResourceSpec> {
        self.resources.iter_mut().find(|r| r.id == id)
    }
}

/// Regeneration rate in units per in-game minute, as an exact fraction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Rational {
    pub num: u64,
    pub den: u64,
}

impl Rational {
    pub const ZERO: Rational = Rational { num: 0, den: 1 };

    pub fn new(num: u64, den: u64) -> Self {
        Rational { num, den }
    }

    pub fn as_f64(self) -> f64 {
        if self.den == 0 {
            f64::NAN
        } else {
            self.num as f64 / self.den as f64
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResourceSpec {
    pub id: String,
    pub capacity: u32,
    pub regen_rate: Rational,
    pub initial: u32,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RewardBundle {
    #[serde(default)]
    pub career_xp: u64,
    #[serde(default)]
    pub event_xp: u64,
    #[serde(default)]
    pub relationship_xp: u64,
    #[serde(default)]
    pub resources: BTreeMap<String, u32>,
    #[serde(default)]
    pub items: BTreeMap<String, u32>,
}

impl RewardBundle {
    pub fn is_empty(&self) -> bool {
        self.career_xp == 0
            && self.event_xp == 0
            && self.relationship_xp == 0
            && self.resources.values().all(|&v| v == 0)
            && self.items.values().all(|&v| v == 0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CareerRequirement {
    pub id: String,
    #[serde(default = "one")]
    pub min_level: u32,
}

fn one() -> u32 {
    1
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RequirementSet {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub career: Option<CareerRequirement>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub owned_object: Option<String>,
    /// Legal only while an event that lists this action is running.
    #[serde(default, skip_serializing_if = "is_false")]
    pub during_event: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ActionSpec {
    pub id: String,
    #[serde(default)]
    pub costs: BTreeMap<String, u32>,
    #[serde(default)]
    pub consumes_items: BTreeMap<String, u32>,
    pub duration: u64,
    pub cooldown: u64,
    #[serde(default)]
    pub rewards: RewardBundle,
    #[serde(default)]
    pub requires: RequirementSet,
    #[serde(default)]
    pub category_tag: String,
    /// Marks an event action that intentionally grants no event XP.
    #[serde(default, skip_serializing_if = "is_false")]
    pub filler: bool,
    /// Category-dependent effect resolved outside the simulated slice; the
    /// simulator treats the action as ordinary.
    #[serde(default, skip_serializing_if = "is_false")]
    pub delayed_effect: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    Career,
    Relationship,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EventStep {
    pub xp_threshold: u64,
    #[serde(default)]
    pub reward: RewardBundle,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EventSpec {
    pub id: String,
    pub kind: EventKind,
    pub owner_id: String,
    pub time_limit: u64,
    pub action_ids: Vec<String>,
    pub steps: Vec<EventStep>,
    #[serde(default)]
    pub start_requires: RequirementSet,
}

impl EventSpec {
    pub fn final_threshold(&self) -> u64 {
        self.steps.last().map_or(0, |s| s.xp_threshold)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObjectUnlock {
    pub object_id: String,
    pub unlock_level: u32,
    pub price_rho: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CareerSpec {
    pub id: String,
    pub max_level: u32,
    /// Cumulative XP: entry `k - 1` is what it takes to finish level `k`
    /// (and so reach level `k + 1`); the last entry marks the top level as
    /// mastered.
    pub xp_per_level: Vec<u64>,
    #[serde(default)]
    pub events_by_level: BTreeMap<u32, Vec<String>>,
    #[serde(default)]
    pub craft_items: Vec<String>,
    #[serde(default)]
    pub object_unlocks: Vec<ObjectUnlock>,
}

impl CareerSpec {
    /// Cumulative career XP needed to stand at `level`.
    pub fn xp_for_level(&self, level: u32) -> u64 {
        if level <= 1 {
            0
        } else {
            self.xp_per_level
                .get(level as usize - 2)
                .copied()
                .unwrap_or(u64::MAX)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RelationshipCategorySpec {
    pub id: String,
    pub event_chain: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObjectSpec {
    pub id: String,
    pub unlocked_action_ids: Vec<String>,
}
