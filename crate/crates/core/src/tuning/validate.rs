use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use super::{flag_step_anomalies, EventKind, RequirementSet, RewardBundle, TuningConfig, SCHEMA_VERSION};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Warning,
    Error,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EntityKind {
    Build,
    Resource,
    Action,
    Event,
    Career,
    Relationship,
    Object,
}

impl EntityKind {
    pub fn as_str(self) -> &'static str {
        match self {
            EntityKind::Build => "build",
            EntityKind::Resource => "resource",
            EntityKind::Action => "action",
            EntityKind::Event => "event",
            EntityKind::Career => "career",
            EntityKind::Relationship => "relationship",
            EntityKind::Object => "object",
        }
    }
}

impl fmt::Display for EntityKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Named invariant a diagnostic reports on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Rule {
    UnsupportedSchemaVersion,
    DuplicateId,
    DanglingReference,
    InitialAboveCapacity,
    ZeroDenominator,
    ThresholdsNotIncreasing,
    ZeroThreshold,
    EmptySteps,
    ZeroTimeLimit,
    EventActionWithoutXp,
    OwnerKindMismatch,
    XpPerLevelNotIncreasing,
    XpPerLevelLength,
    ZeroMaxLevel,
    LevelOutOfRange,
    EmptyChain,
    ChainEventMismatch,
    ObjectRequirementMismatch,
    ItemNeverProduced,
    StepRewardAnomaly,
}

impl Rule {
    pub fn as_str(self) -> &'static str {
        match self {
            Rule::UnsupportedSchemaVersion => "unsupported_schema_version",
            Rule::DuplicateId => "duplicate_id",
            Rule::DanglingReference => "dangling_reference",
            Rule::InitialAboveCapacity => "initial_above_capacity",
            Rule::ZeroDenominator => "zero_denominator",
            Rule::ThresholdsNotIncreasing => "thresholds_not_increasing",
            Rule::ZeroThreshold => "zero_threshold",
            Rule::EmptySteps => "empty_steps",
            Rule::ZeroTimeLimit => "zero_time_limit",
            Rule::EventActionWithoutXp => "event_action_without_xp",
            Rule::OwnerKindMismatch => "owner_kind_mismatch",
            Rule::XpPerLevelNotIncreasing => "xp_per_level_not_increasing",
            Rule::XpPerLevelLength => "xp_per_level_length",
            Rule::ZeroMaxLevel => "zero_max_level",
            Rule::LevelOutOfRange => "level_out_of_range",
            Rule::EmptyChain => "empty_chain",
            Rule::ChainEventMismatch => "chain_event_mismatch",
            Rule::ObjectRequirementMismatch => "object_requirement_mismatch",
            Rule::ItemNeverProduced => "item_never_produced",
            Rule::StepRewardAnomaly => "step_reward_anomaly",
        }
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Diagnostic {
    pub severity: Severity,
    pub rule: Rule,
    pub entity_kind: EntityKind,
    pub entity_id: String,
    pub message: String,
    /// Unresolved identifier, for dangling references.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target: Option<String>,
}

impl Diagnostic {
    pub fn error(rule: Rule, kind: EntityKind, id: &str, message: impl Into<String>) -> Self {
        Diagnostic {
            severity: Severity::Error,
            rule,
            entity_kind: kind,
            entity_id: id.to_string(),
            message: message.into(),
            target: None,
        }
    }

    pub fn warning(rule: Rule, kind: EntityKind, id: &str, message: impl Into<String>) -> Self {
        Diagnostic {
            severity: Severity::Warning,
            ..Diagnostic::error(rule, kind, id, message)
        }
    }

    fn dangling(kind: EntityKind, id: &str, what: &str, target: &str) -> Self {
        Diagnostic {
            target: Some(target.to_string()),
            ..Diagnostic::error(
                Rule::DanglingReference,
                kind,
                id,
                format!("references unknown {what} \"{target}\""),
            )
        }
    }

    pub fn is_error(&self) -> bool {
        self.severity == Severity::Error
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sev = match self.severity {
            Severity::Error => "error",
            Severity::Warning => "warning",
        };
        write!(
            f,
            "{sev}[{}] {} \"{}\": {}",
            self.rule, self.entity_kind, self.entity_id, self.message
        )
    }
}

struct Ids<'a> {
    resources: HashSet<&'a str>,
    actions: HashMap<&'a str, usize>,
    events: HashMap<&'a str, usize>,
    careers: HashMap<&'a str, usize>,
    categories: HashMap<&'a str, usize>,
    objects: HashSet<&'a str>,
}

/// Checks every declared invariant of a config. Returns an empty list iff the
/// config is well formed; warnings never make a config invalid.
pub fn validate(config: &TuningConfig) -> Vec<Diagnostic> {
    let mut out = Vec::new();

    if config.schema_version != SCHEMA_VERSION {
        out.push(Diagnostic::error(
            Rule::UnsupportedSchemaVersion,
            EntityKind::Build,
            &config.build_id,
            format!(
                "schema_version {} is not supported (expected {SCHEMA_VERSION})",
                config.schema_version
            ),
        ));
    }

    let ids = collect_ids(config, &mut out);
    check_resources(config, &mut out);
    check_actions(config, &ids, &mut out);
    check_events(config, &ids, &mut out);
    check_careers(config, &ids, &mut out);
    check_relationships(config, &ids, &mut out);
    check_objects(config, &ids, &mut out);
    out
}

/// Advisory checks that never invalidate a config: items nothing produces and
/// reward-curve anomalies (see [`flag_step_anomalies`]).
pub fn lint(config: &TuningConfig, anomaly_ratio: f64) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    check_items(config, &mut out);
    out.extend(flag_step_anomalies(config, anomaly_ratio));
    out
}

fn unique<'a, I>(kind: EntityKind, ids: I, out: &mut Vec<Diagnostic>) -> HashMap<&'a str, usize>
where
    I: IntoIterator<Item = &'a str>,
{
    let mut seen = HashMap::new();
    for (i, id) in ids.into_iter().enumerate() {
        if seen.insert(id, i).is_some() {
            out.push(Diagnostic::error(
                Rule::DuplicateId,
                kind,
                id,
                format!("{kind} id declared more than once"),
            ));
        }
    }
    seen
}

fn collect_ids<'a>(config: &'a TuningConfig, out: &mut Vec<Diagnostic>) -> Ids<'a> {
    let resources = unique(
        EntityKind::Resource,
        config.resources.iter().map(|r| r.id.as_str()),
        out,
    );
    let actions = unique(
        EntityKind::Action,
        config.actions.iter().map(|a| a.id.as_str()),
        out,
    );
    let events = unique(
        EntityKind::Event,
        config.events.iter().map(|e| e.id.as_str()),
        out,
    );
    let careers = unique(
        EntityKind::Career,
        config.careers.iter().map(|c| c.id.as_str()),
        out,
    );
    let categories = unique(
        EntityKind::Relationship,
        config.relationships.iter().map(|r| r.id.as_str()),
        out,
    );
    let objects = unique(
        EntityKind::Object,
        config.objects.iter().map(|o| o.id.as_str()),
        out,
    );
    Ids {
        resources: resources.into_keys().collect(),
        actions,
        events,
        careers,
        categories,
        objects: objects.into_keys().collect(),
    }
}

fn check_resources(config: &TuningConfig, out: &mut Vec<Diagnostic>) {
    for r in &config.resources {
        if r.initial > r.capacity {
            out.push(Diagnostic::error(
                Rule::InitialAboveCapacity,
                EntityKind::Resource,
                &r.id,
                format!("initial {} exceeds capacity {}", r.initial, r.capacity),
            ));
        }
        if r.regen_rate.den == 0 {
            out.push(Diagnostic::error(
                Rule::ZeroDenominator,
                EntityKind::Resource,
                &r.id,
                "regen_rate denominator is zero",
            ));
        }
    }
}

fn check_reward(
    reward: &RewardBundle,
    kind: EntityKind,
    id: &str,
    ids: &Ids<'_>,
    out: &mut Vec<Diagnostic>,
) {
    for r in reward.resources.keys() {
        if !ids.resources.contains(r.as_str()) {
            out.push(Diagnostic::dangling(kind, id, "resource", r));
        }
    }
}

fn check_requirements(
    req: &RequirementSet,
    kind: EntityKind,
    id: &str,
    config: &TuningConfig,
    ids: &Ids<'_>,
    out: &mut Vec<Diagnostic>,
) {
    if let Some(c) = &req.career {
        match ids.careers.get(c.id.as_str()) {
            None => out.push(Diagnostic::dangling(kind, id, "career", &c.id)),
            Some(&ix) => {
                let max = config.careers[ix].max_level;
                if c.min_level == 0 || c.min_level > max {
                    out.push(Diagnostic::error(
                        Rule::LevelOutOfRange,
                        kind,
                        id,
                        format!(
                            "required level {} outside 1..={max} of career \"{}\"",
                            c.min_level, c.id
                        ),
                    ));
                }
            }
        }
    }
    if let Some(o) = &req.owned_object {
        if !ids.objects.contains(o.as_str()) {
            out.push(Diagnostic::dangling(kind, id, "object", o));
        }
    }
}

fn check_actions(config: &TuningConfig, ids: &Ids<'_>, out: &mut Vec<Diagnostic>) {
    for a in &config.actions {
        for r in a.costs.keys() {
            if !ids.resources.contains(r.as_str()) {
                out.push(Diagnostic::dangling(EntityKind::Action, &a.id, "resource", r));
            }
        }
        check_reward(&a.rewards, EntityKind::Action, &a.id, ids, out);
        check_requirements(&a.requires, EntityKind::Action, &a.id, config, ids, out);
    }
}

fn check_events(config: &TuningConfig, ids: &Ids<'_>, out: &mut Vec<Diagnostic>) {
    for e in &config.events {
        let owner_ok = match e.kind {
            EventKind::Career => ids.careers.contains_key(e.owner_id.as_str()),
            EventKind::Relationship => ids.categories.contains_key(e.owner_id.as_str()),
        };
        if !owner_ok {
            let what = match e.kind {
                EventKind::Career => "career",
                EventKind::Relationship => "relationship category",
            };
            out.push(Diagnostic::dangling(EntityKind::Event, &e.id, what, &e.owner_id));
        }
        if e.time_limit == 0 {
            out.push(Diagnostic::error(
                Rule::ZeroTimeLimit,
                EntityKind::Event,
                &e.id,
                "time_limit must be positive",
            ));
        }
        if e.steps.is_empty() {
            out.push(Diagnostic::error(
                Rule::EmptySteps,
                EntityKind::Event,
                &e.id,
                "event has no steps",
            ));
        }
        if e.steps.iter().any(|s| s.xp_threshold == 0) {
            out.push(Diagnostic::error(
                Rule::ZeroThreshold,
                EntityKind::Event,
                &e.id,
                "step xp_threshold must be positive",
            ));
        }
        if e
            .steps
            .windows(2)
            .any(|w| w[1].xp_threshold <= w[0].xp_threshold)
        {
            out.push(Diagnostic::error(
                Rule::ThresholdsNotIncreasing,
                EntityKind::Event,
                &e.id,
                "thresholds not strictly increasing",
            ));
        }
        for s in &e.steps {
            check_reward(&s.reward, EntityKind::Event, &e.id, ids, out);
        }
        for a in &e.action_ids {
            match ids.actions.get(a.as_str()) {
                None => out.push(Diagnostic::dangling(EntityKind::Event, &e.id, "action", a)),
                Some(&ix) => {
                    let action = &config.actions[ix];
                    if action.rewards.event_xp == 0 && !action.filler {
                        out.push(Diagnostic::error(
                            Rule::EventActionWithoutXp,
                            EntityKind::Event,
                            &e.id,
                            format!(
                                "action \"{a}\" grants no event_xp and is not marked as filler"
                            ),
                        ));
                    }
                }
            }
        }
        check_requirements(&e.start_requires, EntityKind::Event, &e.id, config, ids, out);
    }
}

fn check_careers(config: &TuningConfig, ids: &Ids<'_>, out: &mut Vec<Diagnostic>) {
    for c in &config.careers {
        if c.max_level == 0 {
            out.push(Diagnostic::error(
                Rule::ZeroMaxLevel,
                EntityKind::Career,
                &c.id,
                "max_level must be at least 1",
            ));
        }
        if c.xp_per_level.len() != c.max_level as usize {
            out.push(Diagnostic::error(
                Rule::XpPerLevelLength,
                EntityKind::Career,
                &c.id,
                format!(
                    "xp_per_level has {} entries, expected max_level = {}",
                    c.xp_per_level.len(),
                    c.max_level
                ),
            ));
        }
        if c.xp_per_level.first() == Some(&0) {
            out.push(Diagnostic::error(
                Rule::ZeroThreshold,
                EntityKind::Career,
                &c.id,
                "xp_per_level entries must be positive",
            ));
        }
        if c.xp_per_level.windows(2).any(|w| w[1] <= w[0]) {
            out.push(Diagnostic::error(
                Rule::XpPerLevelNotIncreasing,
                EntityKind::Career,
                &c.id,
                "xp_per_level not strictly increasing",
            ));
        }
        for (&level, events) in &c.events_by_level {
            if level == 0 || level > c.max_level {
                out.push(Diagnostic::error(
                    Rule::LevelOutOfRange,
                    EntityKind::Career,
                    &c.id,
                    format!("events_by_level key {level} outside 1..={}", c.max_level),
                ));
            }
            for e in events {
                match ids.events.get(e.as_str()) {
                    None => out.push(Diagnostic::dangling(EntityKind::Career, &c.id, "event", e)),
                    Some(&ix) => {
                        let ev = &config.events[ix];
                        if ev.kind != EventKind::Career || ev.owner_id != c.id {
                            out.push(Diagnostic::error(
                                Rule::OwnerKindMismatch,
                                EntityKind::Career,
                                &c.id,
                                format!("event \"{e}\" is not a career event owned by this career"),
                            ));
                        }
                    }
                }
            }
        }
        for u in &c.object_unlocks {
            if !ids.objects.contains(u.object_id.as_str()) {
                out.push(Diagnostic::dangling(
                    EntityKind::Career,
                    &c.id,
                    "object",
                    &u.object_id,
                ));
            }
            if u.unlock_level == 0 || u.unlock_level > c.max_level {
                out.push(Diagnostic::error(
                    Rule::LevelOutOfRange,
                    EntityKind::Career,
                    &c.id,
                    format!(
                        "object \"{}\" unlock_level {} outside 1..={}",
                        u.object_id, u.unlock_level, c.max_level
                    ),
                ));
            }
        }
    }
}

fn check_relationships(config: &TuningConfig, ids: &Ids<'_>, out: &mut Vec<Diagnostic>) {
    for r in &config.relationships {
        if r.event_chain.is_empty() {
            out.push(Diagnostic::error(
                Rule::EmptyChain,
                EntityKind::Relationship,
                &r.id,
                "event_chain is empty",
            ));
        }
        for e in &r.event_chain {
            match ids.events.get(e.as_str()) {
                None => out.push(Diagnostic::dangling(
                    EntityKind::Relationship,
                    &r.id,
                    "event",
                    e,
                )),
                Some(&ix) => {
                    let ev = &config.events[ix];
                    if ev.kind != EventKind::Relationship || ev.owner_id != r.id {
                        out.push(Diagnostic::error(
                            Rule::ChainEventMismatch,
                            EntityKind::Relationship,
                            &r.id,
                            format!("event \"{e}\" is not a relationship event of this category"),
                        ));
                    }
                }
            }
        }
        let distinct: BTreeSet<&str> = r.event_chain.iter().map(String::as_str).collect();
        if distinct.len() != r.event_chain.len() {
            out.push(Diagnostic::error(
                Rule::ChainEventMismatch,
                EntityKind::Relationship,
                &r.id,
                "event_chain repeats an event",
            ));
        }
    }
}

fn check_objects(config: &TuningConfig, ids: &Ids<'_>, out: &mut Vec<Diagnostic>) {
    for o in &config.objects {
        for a in &o.unlocked_action_ids {
            match ids.actions.get(a.as_str()) {
                None => out.push(Diagnostic::dangling(EntityKind::Object, &o.id, "action", a)),
                Some(&ix) => {
                    let req = &config.actions[ix].requires.owned_object;
                    if req.as_deref() != Some(o.id.as_str()) {
                        out.push(Diagnostic::error(
                            Rule::ObjectRequirementMismatch,
                            EntityKind::Object,
                            &o.id,
                            format!("unlocked action \"{a}\" does not require owning this object"),
                        ));
                    }
                }
            }
        }
    }
}

fn check_items(config: &TuningConfig, out: &mut Vec<Diagnostic>) {
    let mut produced: BTreeSet<&str> = BTreeSet::new();
    for a in &config.actions {
        produced.extend(a.rewards.items.keys().map(String::as_str));
    }
    for e in &config.events {
        for s in &e.steps {
            produced.extend(s.reward.items.keys().map(String::as_str));
        }
    }
    for a in &config.actions {
        for item in a.consumes_items.keys() {
            if !produced.contains(item.as_str()) {
                out.push(Diagnostic::warning(
                    Rule::ItemNeverProduced,
                    EntityKind::Action,
                    &a.id,
                    format!("consumes item \"{item}\" that nothing produces"),
                ));
            }
        }
    }
}
