use std::collections::BTreeMap;
use std::io::{self, Write};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use smallvec::SmallVec;

use super::game::{ActionId, CareerId, CategoryId, EventId, Game, ItemId, ObjectId, ResourceId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct CareerProgress {
    pub career: CareerId,
    pub level: u32,
    pub xp: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RelationshipProgress {
    pub category: CategoryId,
    pub completed: u32,
    pub xp: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ActiveEvent {
    pub event: EventId,
    pub xp: u64,
    pub deadline: u64,
    pub steps_paid: u32,
}

/// Everything that influences future dynamics. Two states that compare equal
/// behave identically from here on, so search uses this as its node key.
///
/// Expired cooldowns and locks are stored as 0 so that equal futures hash
/// equal.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SimState {
    pub(crate) clock: u64,
    pub(crate) locked_until: u64,
    pub(crate) career: Option<CareerProgress>,
    pub(crate) relationship: Option<RelationshipProgress>,
    pub(crate) active_event: Option<ActiveEvent>,
    pub(crate) grant_objects: bool,
    pub(crate) resources: SmallVec<[u32; 4]>,
    /// Fractional regeneration carried between advances, in units of
    /// 1/regen_den. Always 0 while the resource sits at capacity.
    pub(crate) regen_carry: SmallVec<[u64; 4]>,
    pub(crate) cooldown_until: SmallVec<[u64; 16]>,
    pub(crate) inventory: SmallVec<[u32; 8]>,
    pub(crate) owned_objects: SmallVec<[bool; 8]>,
    pub(crate) completed_events: SmallVec<[u32; 16]>,
}

impl SimState {
    pub fn clock(&self) -> u64 {
        self.clock
    }

    pub fn locked_until(&self) -> u64 {
        self.locked_until
    }

    pub fn is_locked(&self) -> bool {
        self.locked_until > self.clock
    }

    pub fn resource(&self, r: ResourceId) -> u32 {
        self.resources[r.ix()]
    }

    pub fn resources(&self) -> &[u32] {
        &self.resources
    }

    pub fn regen_carry(&self, r: ResourceId) -> u64 {
        self.regen_carry[r.ix()]
    }

    pub fn cooldown_until(&self, a: ActionId) -> u64 {
        self.cooldown_until[a.ix()]
    }

    pub fn item(&self, i: ItemId) -> u32 {
        self.inventory[i.ix()]
    }

    pub fn owns(&self, o: ObjectId) -> bool {
        self.owned_objects[o.ix()]
    }

    pub fn career(&self) -> Option<CareerProgress> {
        self.career
    }

    pub fn relationship(&self) -> Option<RelationshipProgress> {
        self.relationship
    }

    pub fn active_event(&self) -> Option<ActiveEvent> {
        self.active_event
    }

    pub fn times_completed(&self, e: EventId) -> u32 {
        self.completed_events[e.ix()]
    }

    pub fn grants_objects(&self) -> bool {
        self.grant_objects
    }

    /// Serializable view with entities addressed by name.
    pub fn view(&self, game: &Game) -> StateView {
        let named = |names: &mut dyn Iterator<Item = (&String, u64)>| -> BTreeMap<String, u64> {
            names.map(|(n, v)| (n.clone(), v)).collect()
        };
        StateView {
            clock: self.clock,
            locked_until: self.locked_until,
            resources: named(
                &mut game
                    .resources
                    .iter()
                    .zip(&self.resources)
                    .map(|(d, &v)| (&d.name, v as u64)),
            ),
            regen_carry: named(
                &mut game
                    .resources
                    .iter()
                    .zip(&self.regen_carry)
                    .filter(|(_, &c)| c > 0)
                    .map(|(d, &c)| (&d.name, c)),
            ),
            cooldown_until: named(
                &mut game
                    .actions
                    .iter()
                    .zip(&self.cooldown_until)
                    .filter(|(_, &t)| t > self.clock)
                    .map(|(d, &t)| (&d.name, t)),
            ),
            career: self.career.map(|c| CareerView {
                id: game.career(c.career).name.clone(),
                level: c.level,
                xp: c.xp,
            }),
            relationship: self.relationship.map(|r| RelationshipView {
                category: game.category(r.category).name.clone(),
                completed: r.completed,
                xp: r.xp,
            }),
            active_event: self.active_event.map(|e| ActiveEventView {
                id: game.event(e.event).name.clone(),
                xp: e.xp,
                deadline: e.deadline,
                steps_paid: e.steps_paid,
            }),
            inventory: named(
                &mut game
                    .items
                    .iter()
                    .zip(&self.inventory)
                    .filter(|(_, &v)| v > 0)
                    .map(|(n, &v)| (n, v as u64)),
            ),
            owned_objects: game
                .objects
                .iter()
                .zip(&self.owned_objects)
                .filter(|(_, &o)| o)
                .map(|(d, _)| d.name.clone())
                .collect(),
            completed_events: named(
                &mut game
                    .events
                    .iter()
                    .zip(&self.completed_events)
                    .filter(|(_, &v)| v > 0)
                    .map(|(d, &v)| (&d.name, v as u64)),
            ),
        }
    }

    /// Short content hash of the state, stable across runs and platforms.
    pub fn digest(&self, game: &Game) -> String {
        let json = serde_json::to_vec(&self.view(game)).expect("state view serializes");
        let hash = Sha256::digest(&json);
        hex::encode(&hash[..8])
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CareerView {
    pub id: String,
    pub level: u32,
    pub xp: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RelationshipView {
    pub category: String,
    pub completed: u32,
    pub xp: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActiveEventView {
    pub id: String,
    pub xp: u64,
    pub deadline: u64,
    pub steps_paid: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateView {
    pub clock: u64,
    pub locked_until: u64,
    pub resources: BTreeMap<String, u64>,
    /// Fractional regeneration, in units of 1/den of the resource's rate.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub regen_carry: BTreeMap<String, u64>,
    pub cooldown_until: BTreeMap<String, u64>,
    pub career: Option<CareerView>,
    pub relationship: Option<RelationshipView>,
    pub active_event: Option<ActiveEventView>,
    pub inventory: BTreeMap<String, u64>,
    pub owned_objects: Vec<String>,
    pub completed_events: BTreeMap<String, u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TraceKind {
    Act,
    Wait,
    EventStart,
    EventEnd,
    LevelUp,
    SessionEnd,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EventOutcome {
    Completed,
    Timeout,
}

impl EventOutcome {
    pub fn as_str(self) -> &'static str {
        match self {
            EventOutcome::Completed => "completed",
            EventOutcome::Timeout => "timeout",
        }
    }
}

/// Why the clock was fast-forwarded.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum WaitKind {
    /// Idle until some action becomes legal again.
    Availability,
    /// Let the running event time out.
    Deadline,
}

impl WaitKind {
    pub fn as_str(self) -> &'static str {
        match self {
            WaitKind::Availability => "availability",
            WaitKind::Deadline => "deadline",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Detail {
    Action(ActionId),
    Wait(WaitKind, u64),
    Event(EventId),
    EventEnd(EventId, EventOutcome),
    Level(CareerId, u32),
    Session(u64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct TraceEntry {
    pub clock: u64,
    pub kind: TraceKind,
    pub detail: Detail,
}

impl TraceEntry {
    pub fn detail_string(&self, game: &Game) -> String {
        match self.detail {
            Detail::Action(a) => game.action(a).name.clone(),
            Detail::Wait(kind, until) => format!("{}:{until}", kind.as_str()),
            Detail::Event(e) => game.event(e).name.clone(),
            Detail::EventEnd(e, o) => format!("{}:{}", game.event(e).name, o.as_str()),
            Detail::Level(c, l) => format!("{}:{l}", game.career(c).name),
            Detail::Session(w) => format!("wait:{w}"),
        }
    }

    pub fn record(&self, game: &Game) -> TraceRecord {
        TraceRecord {
            clock: self.clock,
            kind: self.kind,
            detail: self.detail_string(game),
        }
    }
}

/// One exported trace line.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub clock: u64,
    pub kind: TraceKind,
    pub detail: String,
}

/// Actions spent on one event attempt.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EventAttempt {
    pub event: EventId,
    pub started_at: u64,
    pub ended_at: Option<u64>,
    pub event_actions: u32,
    pub completed: bool,
}

/// Receives notifications about what a transition did. Search runs with the
/// no-op `()` journal; recorded play uses [`Counters`].
pub trait Journal {
    fn act(&mut self, _clock: u64, _action: ActionId, _event_action: bool) {}
    fn wait(&mut self, _clock: u64, _until: u64, _kind: WaitKind) {}
    fn event_start(&mut self, _clock: u64, _event: EventId) {}
    fn event_end(&mut self, _clock: u64, _event: EventId, _outcome: EventOutcome) {}
    fn level_up(&mut self, _clock: u64, _career: CareerId, _level: u32) {}
    fn session_end(&mut self, _clock: u64, _wait: u64) {}
}

impl Journal for () {}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Counters {
    pub total_actions: u32,
    pub event_actions: u32,
    /// Session ends plus the opening session once any action was taken.
    pub sessions: u32,
    pub wait_intervals: Vec<u64>,
    pub trace: Vec<TraceEntry>,
    pub event_log: Vec<EventAttempt>,
}

impl Counters {
    fn push(&mut self, clock: u64, kind: TraceKind, detail: Detail) {
        self.trace.push(TraceEntry {
            clock,
            kind,
            detail,
        });
    }

    pub fn session_ends(&self) -> usize {
        self.trace
            .iter()
            .filter(|t| t.kind == TraceKind::SessionEnd)
            .count()
    }

    pub fn mean_wait(&self) -> Option<f64> {
        if self.wait_intervals.is_empty() {
            None
        } else {
            Some(self.wait_intervals.iter().sum::<u64>() as f64 / self.wait_intervals.len() as f64)
        }
    }

    /// Newline-delimited JSON, one `{clock, kind, detail}` object per entry.
    pub fn write_trace_ndjson<W: Write>(&self, game: &Game, mut out: W) -> io::Result<()> {
        for entry in &self.trace {
            serde_json::to_writer(&mut out, &entry.record(game))?;
            out.write_all(b"\n")?;
        }
        Ok(())
    }
}

impl Journal for Counters {
    fn act(&mut self, clock: u64, action: ActionId, event_action: bool) {
        if self.total_actions == 0 {
            self.sessions += 1;
        }
        self.total_actions += 1;
        if event_action {
            self.event_actions += 1;
            if let Some(attempt) = self.event_log.last_mut() {
                if attempt.ended_at.is_none() {
                    attempt.event_actions += 1;
                }
            }
        }
        self.push(clock, TraceKind::Act, Detail::Action(action));
    }

    fn wait(&mut self, clock: u64, until: u64, kind: WaitKind) {
        self.push(clock, TraceKind::Wait, Detail::Wait(kind, until));
    }

    fn event_start(&mut self, clock: u64, event: EventId) {
        self.event_log.push(EventAttempt {
            event,
            started_at: clock,
            ended_at: None,
            event_actions: 0,
            completed: false,
        });
        self.push(clock, TraceKind::EventStart, Detail::Event(event));
    }

    fn event_end(&mut self, clock: u64, event: EventId, outcome: EventOutcome) {
        if let Some(attempt) = self.event_log.last_mut() {
            if attempt.event == event && attempt.ended_at.is_none() {
                attempt.ended_at = Some(clock);
                attempt.completed = outcome == EventOutcome::Completed;
            }
        }
        self.push(clock, TraceKind::EventEnd, Detail::EventEnd(event, outcome));
    }

    fn level_up(&mut self, clock: u64, career: CareerId, level: u32) {
        self.push(clock, TraceKind::LevelUp, Detail::Level(career, level));
    }

    fn session_end(&mut self, clock: u64, wait: u64) {
        self.sessions += 1;
        self.wait_intervals.push(wait);
        self.push(clock, TraceKind::SessionEnd, Detail::Session(wait));
    }
}

/// Full per-avatar state: dynamics plus bookkeeping.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GameState {
    pub sim: SimState,
    pub counters: Counters,
    pub rng_seed: u64,
}

impl GameState {
    pub fn clock(&self) -> u64 {
        self.sim.clock
    }
}
