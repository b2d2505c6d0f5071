use smallvec::SmallVec;

use crate::sim::{ActionId, EventId, Game, Journal, SimError, SimState, WaitKind};

/// An edge of the playtest state graph.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Move {
    /// Perform an action and let its duration elapse. Costs one action.
    Act(ActionId),
    /// Begin an event. Free.
    Start(EventId),
    /// Nothing is legal: end the session and skip to the next availability.
    WaitAvailability,
    /// Skip to the running event's deadline.
    WaitDeadline,
}

impl Move {
    pub fn cost(self) -> u32 {
        matches!(self, Move::Act(_)) as u32
    }

    pub fn is_wait(self) -> bool {
        matches!(self, Move::WaitAvailability | Move::WaitDeadline)
    }

    pub fn label(self, game: &Game) -> String {
        match self {
            Move::Act(a) => format!("act:{}", game.action(a).name),
            Move::Start(e) => format!("start:{}", game.event(e).name),
            Move::WaitAvailability => "wait:availability".into(),
            Move::WaitDeadline => "wait:deadline".into(),
        }
    }
}

pub type Moves = SmallVec<[Move; 16]>;

/// Every move available in `s`: legal actions, startable events, and the wait
/// edges. When nothing is legal the only wait is to the next availability;
/// while an event runs and actions are legal the agent may instead let the
/// event time out.
pub fn moves(game: &Game, s: &SimState) -> Moves {
    let mut out = Moves::new();
    out.extend(game.legal_actions(s).into_iter().map(Move::Act));
    let any_legal = !out.is_empty();
    out.extend(game.startable_events(s).into_iter().map(Move::Start));
    if !any_legal {
        if game.next_availability(s).is_some() {
            out.push(Move::WaitAvailability);
        }
    } else if s.active_event().is_some() {
        out.push(Move::WaitDeadline);
    }
    out
}

/// Target clock of a wait move, if `m` is one.
pub fn wait_target(game: &Game, s: &SimState, m: Move) -> Option<(u64, WaitKind)> {
    match m {
        Move::WaitAvailability => game
            .next_availability(s)
            .map(|t| (t, WaitKind::Availability)),
        Move::WaitDeadline => s.active_event().map(|e| (e.deadline, WaitKind::Deadline)),
        _ => None,
    }
}

pub fn apply_move<J: Journal>(
    game: &Game,
    s: &mut SimState,
    m: Move,
    journal: &mut J,
) -> Result<(), SimError> {
    match m {
        Move::Act(a) => game.act_mut(s, a, journal),
        Move::Start(e) => game.start_event_mut(s, e, journal),
        Move::WaitAvailability => game.close_session_if_idle_mut(s, journal).map(drop),
        Move::WaitDeadline => game.wait_for_deadline_mut(s, journal).map(drop),
    }
}
