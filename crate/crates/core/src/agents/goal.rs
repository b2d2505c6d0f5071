use serde::{Deserialize, Serialize};

use crate::sim::{CareerId, CategoryId, EventId, EventOwner, Game, SimError, SimState};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum GoalPredicate {
    CareerLevelReached { career: String, level: u32 },
    RelationshipChainDone { category: String, events: u32 },
    AnyRelationshipChainDone { events: u32 },
    EventCompleted { event: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HardLimits {
    pub max_minutes: u64,
    pub max_actions: u32,
}

impl Default for HardLimits {
    fn default() -> Self {
        HardLimits {
            max_minutes: 60 * 24 * 365,
            max_actions: 5_000,
        }
    }
}

/// Termination predicate plus the limits beyond which an episode gives up.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GoalSpec {
    pub predicate: GoalPredicate,
    #[serde(default)]
    pub hard_limits: HardLimits,
}

impl GoalSpec {
    pub fn career_level(career: &str, level: u32) -> Self {
        GoalSpec {
            predicate: GoalPredicate::CareerLevelReached {
                career: career.into(),
                level,
            },
            hard_limits: HardLimits::default(),
        }
    }

    pub fn any_relationship_chain(events: u32) -> Self {
        GoalSpec {
            predicate: GoalPredicate::AnyRelationshipChainDone { events },
            hard_limits: HardLimits::default(),
        }
    }

    pub fn with_limits(mut self, max_minutes: u64, max_actions: u32) -> Self {
        self.hard_limits = HardLimits {
            max_minutes,
            max_actions,
        };
        self
    }

    pub fn compile(&self, game: &Game) -> Result<Goal, SimError> {
        let predicate = match &self.predicate {
            GoalPredicate::CareerLevelReached { career, level } => {
                let id = game
                    .career_id(career)
                    .ok_or_else(|| SimError::UnknownCareer(career.clone()))?;
                Target::CareerLevel(id, *level)
            }
            GoalPredicate::RelationshipChainDone { category, events } => {
                let id = game
                    .category_id(category)
                    .ok_or_else(|| SimError::UnknownCategory(category.clone()))?;
                Target::Chain(Some(id), *events)
            }
            GoalPredicate::AnyRelationshipChainDone { events } => Target::Chain(None, *events),
            GoalPredicate::EventCompleted { event } => Target::Event(
                game.event_id(event)
                    .ok_or_else(|| SimError::UnknownEvent(event.clone()))?,
            ),
        };
        Ok(Goal {
            target: predicate,
            limits: self.hard_limits,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Target {
    CareerLevel(CareerId, u32),
    /// `events` completed in the given category, or in whichever category the
    /// avatar locks into.
    Chain(Option<CategoryId>, u32),
    Event(EventId),
}

/// A goal resolved against one compiled game.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Goal {
    pub target: Target,
    pub limits: HardLimits,
}

impl Goal {
    pub fn satisfied(&self, s: &SimState) -> bool {
        match self.target {
            Target::CareerLevel(career, level) => {
                s.career().is_some_and(|c| c.career == career && c.level >= level)
            }
            Target::Chain(category, k) => s.relationship().is_some_and(|r| {
                category.is_none_or(|c| c == r.category) && r.completed >= k
            }),
            Target::Event(e) => s.times_completed(e) > 0,
        }
    }

    pub fn within_limits(&self, clock: u64, actions: u32) -> bool {
        clock <= self.limits.max_minutes && actions <= self.limits.max_actions
    }

    /// Career the goal concerns, if any.
    pub fn career(&self, game: &Game) -> Option<CareerId> {
        match self.target {
            Target::CareerLevel(c, _) => Some(c),
            Target::Event(e) => match game.event(e).owner {
                EventOwner::Career(c) => Some(c),
                EventOwner::Category(_) => None,
            },
            Target::Chain(..) => None,
        }
    }
}
