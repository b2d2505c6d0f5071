use std::fmt;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::goal::Goal;
use super::moves::{wait_target, Move};
use crate::sim::{
    ActionId, Counters, EventId, Game, GameState, ScenarioOverrides, SimError, SimState, WaitKind,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    GoalReached,
    /// No move exists and none ever will.
    Deadlock,
    /// Every continuation breaks the goal's hard limits.
    HardLimit,
    /// The whole reachable space within limits was searched without a goal.
    Unreachable,
}

impl StopReason {
    pub fn as_str(self) -> &'static str {
        match self {
            StopReason::GoalReached => "goal_reached",
            StopReason::Deadlock => "deadlock",
            StopReason::HardLimit => "hard_limit",
            StopReason::Unreachable => "unreachable",
        }
    }
}

impl fmt::Display for StopReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// What a planner wants to do next.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Decision {
    Act(ActionId),
    /// Begin an event; free and instantaneous.
    Start(EventId),
    Wait { until: u64, kind: WaitKind },
    Stop(StopReason),
}

impl Decision {
    pub fn from_move(game: &Game, s: &SimState, m: Move) -> Decision {
        match m {
            Move::Act(a) => Decision::Act(a),
            Move::Start(e) => Decision::Start(e),
            Move::WaitAvailability | Move::WaitDeadline => match wait_target(game, s, m) {
                Some((until, kind)) => Decision::Wait { until, kind },
                None => Decision::Stop(StopReason::Deadlock),
            },
        }
    }

    pub fn label(&self, game: &Game) -> String {
        match *self {
            Decision::Act(a) => format!("act:{}", game.action(a).name),
            Decision::Start(e) => format!("start:{}", game.event(e).name),
            Decision::Wait { until, kind } => format!("wait:{}:{until}", kind.as_str()),
            Decision::Stop(r) => format!("stop:{r}"),
        }
    }
}

pub trait Planner {
    fn decide(&mut self, game: &Game, state: &GameState, rng: &mut ChaCha8Rng) -> Decision;

    /// Nodes expanded by the most recent decision, for planners that search.
    fn last_expanded(&self) -> usize {
        0
    }
}

/// Outcome of one seeded episode.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub trial: u32,
    pub seed: u64,
    pub goal_reached: bool,
    pub stop_reason: StopReason,
    pub total_actions: u32,
    pub event_actions: u32,
    pub sessions: u32,
    pub wait_intervals: Vec<u64>,
    pub final_clock: u64,
    pub final_digest: String,
    pub first_decision: Option<String>,
    pub relationship_category: Option<String>,
    pub decisions: u32,
    pub max_expanded: usize,
    /// Wall time of the slowest decision; varies between runs.
    pub max_decision_micros: u64,
    #[serde(skip)]
    pub counters: Counters,
}

impl TrialRecord {
    pub fn mean_wait(&self) -> Option<f64> {
        self.counters.mean_wait().or_else(|| {
            (!self.wait_intervals.is_empty()).then(|| {
                self.wait_intervals.iter().sum::<u64>() as f64 / self.wait_intervals.len() as f64
            })
        })
    }
}

/// Plays one episode: decide, apply, repeat until the goal holds or the
/// planner stops. Actions run to the end of their duration before the next
/// decision.
pub fn run_episode(
    game: &Game,
    scenario: &ScenarioOverrides,
    seed: u64,
    planner: &mut dyn Planner,
    goal: &Goal,
) -> Result<TrialRecord, SimError> {
    let mut state = game.initial_state(scenario, seed)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut first_decision = None;
    let mut decisions = 0u32;
    let mut max_expanded = 0usize;
    let mut max_micros = 0u64;

    let reason = loop {
        if goal.satisfied(&state.sim) {
            break StopReason::GoalReached;
        }
        if !goal.within_limits(state.sim.clock(), state.counters.total_actions) {
            break StopReason::HardLimit;
        }
        let started = Instant::now();
        let decision = planner.decide(game, &state, &mut rng);
        max_micros = max_micros.max(started.elapsed().as_micros() as u64);
        max_expanded = max_expanded.max(planner.last_expanded());
        if first_decision.is_none() {
            first_decision = Some(decision.label(game));
        }
        decisions += 1;
        let sim = &mut state.sim;
        let journal = &mut state.counters;
        let step = match decision {
            Decision::Act(a) => game.act_mut(sim, a, journal),
            Decision::Start(e) => game.start_event_mut(sim, e, journal),
            Decision::Wait {
                kind: WaitKind::Availability,
                ..
            } => game.close_session_if_idle_mut(sim, journal).map(drop),
            Decision::Wait {
                kind: WaitKind::Deadline,
                ..
            } => game.wait_for_deadline_mut(sim, journal).map(drop),
            Decision::Stop(reason) => break reason,
        };
        match step {
            Ok(()) => {}
            Err(SimError::Deadlock) => break StopReason::Deadlock,
            Err(e) => return Err(e),
        }
    };

    let relationship_category = state
        .sim
        .relationship()
        .map(|r| game.category(r.category).name.clone());
    Ok(TrialRecord {
        trial: 0,
        seed,
        goal_reached: reason == StopReason::GoalReached,
        stop_reason: reason,
        total_actions: state.counters.total_actions,
        event_actions: state.counters.event_actions,
        sessions: state.counters.sessions,
        wait_intervals: state.counters.wait_intervals.clone(),
        final_clock: state.sim.clock(),
        final_digest: state.sim.digest(game),
        first_decision,
        relationship_category,
        decisions,
        max_expanded,
        max_decision_micros: max_micros,
        counters: state.counters,
    })
}
