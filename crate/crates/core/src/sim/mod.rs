//! Deterministic game mechanics over a compiled [`Game`].

mod game;
mod rules;
mod scenario;
mod state;

use thiserror::Error;

use crate::tuning::Diagnostic;

pub use game::{
    ActionDef, ActionId, CareerDef, CareerId, CategoryDef, CategoryId, EventDef, EventId,
    EventOwner, Game, ItemId, ObjectDef, ObjectId, ObjectUnlockDef, Requirement, ResourceDef,
    ResourceId, Reward, StepDef,
};
pub use scenario::ScenarioOverrides;
pub use state::{
    ActiveEvent, ActiveEventView, CareerProgress, CareerView, Counters, Detail, EventAttempt,
    EventOutcome, GameState, Journal, RelationshipProgress, RelationshipView, SimState,
    StateView, TraceEntry, TraceKind, TraceRecord, WaitKind,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error("unknown career `{0}`")]
    UnknownCareer(String),
    #[error("unknown object `{0}`")]
    UnknownObject(String),
    #[error("unknown relationship category `{0}`")]
    UnknownCategory(String),
    #[error("unknown resource `{0}`")]
    UnknownResource(String),
    #[error("unknown action `{0}`")]
    UnknownAction(String),
    #[error("unknown event `{0}`")]
    UnknownEvent(String),
    #[error("initial `{resource}` = {value} exceeds capacity {capacity}")]
    ResourceAboveCapacity {
        resource: String,
        value: u32,
        capacity: u32,
    },
    #[error("action `{0}` is not legal in this state")]
    IllegalAction(String),
    #[error("cannot move clock back from {clock} to {until}")]
    ClockRegression { clock: u64, until: u64 },
    #[error("event `{0}` is still in progress")]
    EventInProgress(String),
    #[error("relationship is locked to category `{locked}`, cannot start `{event}`")]
    CategoryLocked { locked: String, event: String },
    #[error("event `{event}` is out of chain order (expected `{expected}`)")]
    ChainOrderViolation { event: String, expected: String },
    #[error("requirements for `{0}` are not met")]
    RequirementsUnmet(String),
    #[error("actions are still available; the session is not idle")]
    NotIdle,
    #[error("no action can ever become legal again")]
    Deadlock,
    #[error("invalid tuning config ({} errors)", .0.len())]
    InvalidConfig(Vec<Diagnostic>),
}
