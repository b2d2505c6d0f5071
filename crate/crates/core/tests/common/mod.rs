//! Test-only helpers: an exhaustive shortest-path oracle over the simulator,
//! a generator of small random tuning configs and invariant checkers.
#![allow(dead_code)]

use std::collections::{HashMap, VecDeque};

use playtest_core::agents::{apply_move, moves, wait_target, Goal, GoalSpec, Move};
use playtest_core::sim::{Counters, EventOwner, TraceKind};
use playtest_core::tuning::EventKind;
use playtest_core::{parse_tuning, Game, ScenarioOverrides, SimError, SimState};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

pub const STATE_CAP: usize = 10_000;

pub struct Oracle {
    /// Fewest actions to any goal state, if one is reachable within limits.
    pub optimum: Option<u32>,
    /// Distinct states reachable within the goal's hard limits.
    pub states: usize,
}

/// Successors of `s` as (state, action cost), built straight from the
/// simulator's public transitions.
fn successors(game: &Game, s: &SimState) -> Vec<(SimState, u32)> {
    let mut out = Vec::new();
    let legal = game.legal_actions(s);
    for &a in &legal {
        let mut t = s.clone();
        game.act_mut(&mut t, a, &mut ()).expect("legal action applies");
        out.push((t, 1));
    }
    for e in game.startable_events(s) {
        let mut t = s.clone();
        game.start_event_mut(&mut t, e, &mut ()).expect("startable event starts");
        out.push((t, 0));
    }
    if legal.is_empty() {
        let mut t = s.clone();
        match game.close_session_if_idle_mut(&mut t, &mut ()) {
            Ok(_) => out.push((t, 0)),
            Err(SimError::Deadlock) => {}
            Err(e) => panic!("idle wait failed: {e}"),
        }
    } else if s.active_event().is_some() {
        let mut t = s.clone();
        game.wait_for_deadline_mut(&mut t, &mut ()).expect("deadline wait");
        out.push((t, 0));
    }
    out
}

/// 0-1 breadth-first enumeration of every state reachable within the goal's
/// hard limits. Goal states are terminal. Returns `None` when more than
/// `STATE_CAP` states are reachable.
pub fn bfs(game: &Game, root: SimState, goal: &Goal) -> Option<Oracle> {
    let mut dist: HashMap<SimState, u32> = HashMap::new();
    let mut dq = VecDeque::new();
    dist.insert(root.clone(), 0);
    dq.push_back((root, 0u32));
    let mut optimum: Option<u32> = None;
    while let Some((s, d)) = dq.pop_front() {
        if dist[&s] < d {
            continue;
        }
        if goal.satisfied(&s) {
            optimum = Some(optimum.map_or(d, |o| o.min(d)));
            continue;
        }
        for (t, c) in successors(game, &s) {
            let nd = d + c;
            if !goal.within_limits(t.clock(), nd) {
                continue;
            }
            if dist.get(&t).is_some_and(|&old| old <= nd) {
                continue;
            }
            dist.insert(t.clone(), nd);
            if dist.len() > STATE_CAP {
                return None;
            }
            if c == 0 {
                dq.push_front((t, nd));
            } else {
                dq.push_back((t, nd));
            }
        }
    }
    Some(Oracle {
        optimum,
        states: dist.len(),
    })
}

/// A small single-career config drawn from `seed`: one resource, two or
/// three actions and, half the time, a career event with two steps.
pub fn random_config(seed: u64) -> String {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cap = rng.random_range(3..=6u32);
    let den = rng.random_range(2..=6u64);
    let levels = rng.random_range(2..=3u32);
    let first = 10 * rng.random_range(2..=4u64);
    let xp: Vec<u64> = (0..levels as u64).map(|k| first * (k + 1)).collect();
    let with_event = rng.random_bool(0.5);

    let n_actions = rng.random_range(2..=3);
    let mut actions = Vec::new();
    for i in 0..n_actions {
        let cxp = if i == 0 { 10 } else { 5 * rng.random_range(0..=2u64) };
        actions.push(json!({
            "id": format!("a{i}"),
            "costs": { "energy": rng.random_range(1..=2u32) },
            "duration": rng.random_range(1..=2u64),
            "cooldown": rng.random_range(0..=3u64),
            "rewards": { "career_xp": cxp },
            "requires": { "career": { "id": "c", "min_level": 1 } },
            "category_tag": "c"
        }));
    }
    let mut events = Vec::new();
    let mut by_level = json!({});
    if with_event {
        actions.push(json!({
            "id": "e0",
            "costs": { "energy": 1 },
            "duration": 1,
            "cooldown": 0,
            "rewards": { "event_xp": 10 },
            "requires": { "career": { "id": "c", "min_level": 1 }, "during_event": true },
            "category_tag": "c"
        }));
        events.push(json!({
            "id": "ev",
            "kind": "career",
            "owner_id": "c",
            "time_limit": rng.random_range(8..=20u64),
            "action_ids": ["e0"],
            "steps": [
                { "xp_threshold": 10, "reward": { "career_xp": 10 } },
                { "xp_threshold": 20, "reward": { "career_xp": 10 } }
            ]
        }));
        by_level = json!({ "1": ["ev"] });
    }
    json!({
        "schema_version": 1,
        "build_id": format!("random_{seed}"),
        "resources": [{ "id": "energy", "capacity": cap,
                        "regen_rate": { "num": 1, "den": den }, "initial": cap }],
        "actions": actions,
        "events": events,
        "careers": [{ "id": "c", "max_level": levels, "xp_per_level": xp,
                      "events_by_level": by_level }],
        "relationships": [],
        "objects": []
    })
    .to_string()
}

pub fn career_scenario() -> ScenarioOverrides {
    ScenarioOverrides::career("c")
}

/// The first `n` random configs whose max-level goal is reachable with at
/// most `STATE_CAP` states: seed, game, goal, oracle optimum, state count.
pub fn oracle_fixtures(n: usize) -> Vec<(u64, Game, GoalSpec, u32, usize)> {
    let mut out = Vec::new();
    for seed in 0..500u64 {
        let game = Game::new(parse_tuning(&random_config(seed)).unwrap()).unwrap();
        let top = game.careers()[0].max_level;
        let spec = GoalSpec::career_level("c", top).with_limits(90, 16);
        let goal = spec.compile(&game).unwrap();
        let root = game.initial_sim(&career_scenario()).unwrap();
        if let Some(Oracle { optimum: Some(opt), states }) = bfs(&game, root, &goal) {
            out.push((seed, game, spec, opt, states));
        }
        if out.len() == n {
            break;
        }
    }
    assert_eq!(out.len(), n, "not enough small fixtures");
    out
}

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

/// Every resource within capacity, carry below the denominator and zero at
/// capacity.
pub fn check_resources(game: &Game, s: &SimState) -> Result<(), String> {
    for def in game.resources() {
        let r = game.resource_id(&def.name).unwrap();
        let (v, carry) = (s.resource(r), s.regen_carry(r));
        ensure(v <= def.capacity, || format!("{} = {v} above {}", def.name, def.capacity))?;
        ensure(carry < def.regen_den.max(1), || format!("{} carry {carry}", def.name))?;
        ensure(v < def.capacity || carry == 0, || format!("{} carry {carry} at capacity", def.name))?;
    }
    Ok(())
}

/// Career XP an event close pays out, given the event's final XP.
fn close_payout(game: &Game, s: &SimState, final_xp: u64) -> u64 {
    let ev = s.active_event().unwrap();
    let def = game.event(ev.event);
    def.steps[..def.steps_reached(final_xp)]
        .iter()
        .map(|st| st.reward.career_xp)
        .sum()
}

pub struct Walk {
    pub steps: usize,
    pub counters: Counters,
}

/// Follows `choices` through the move graph from `s`, checking resource
/// bounds, payout conservation and the category lock after every move and
/// counter conservation at the end.
pub fn check_walk(game: &Game, mut s: SimState, choices: &[u16]) -> Result<Walk, String> {
    let mut counters = Counters::default();
    let (mut acts, mut act_minutes, mut wait_minutes, mut steps) = (0u32, 0u64, 0u64, 0);
    let mut locked = s.relationship().map(|r| r.category);
    for &c in choices {
        let ms = moves(game, &s);
        if ms.is_empty() {
            break;
        }
        let m = ms[c as usize % ms.len()];
        let before = s.clone();
        steps += 1;

        let mut expected = 0;
        let mut event_xp = before.active_event().map(|e| e.xp);
        if let Move::Act(a) = m {
            let def = game.action(a);
            expected += def.reward.career_xp;
            if let Some(ev) = before.active_event() {
                if game.event(ev.event).lists(a) {
                    event_xp = Some(ev.xp + def.reward.event_xp);
                }
            }
        }

        apply_move(game, &mut s, m, &mut counters).map_err(|e| e.to_string())?;
        match m {
            Move::Act(a) => {
                acts += 1;
                act_minutes += game.action(a).duration;
            }
            Move::Start(_) => {}
            _ => {
                let (until, _) = wait_target(game, &before, m).unwrap();
                wait_minutes += until - before.clock();
            }
        }

        check_resources(game, &s)?;
        if before.active_event().is_some() && s.active_event().is_none() {
            expected += close_payout(game, &before, event_xp.unwrap());
        }
        if let (Some(x0), Some(x1)) = (before.career().map(|c| c.xp), s.career().map(|c| c.xp)) {
            ensure(x1 - x0 == expected, || {
                format!("{} paid {} career xp, expected {expected}", m.label(game), x1 - x0)
            })?;
        }

        match (locked, s.relationship()) {
            (Some(cat), r) => ensure(r.map(|r| r.category) == Some(cat), || {
                format!("category moved after {}", m.label(game))
            })?,
            (None, Some(r)) => locked = Some(r.category),
            (None, None) => {}
        }
        if let (Some(cat), Some(ev)) = (locked, s.active_event()) {
            let def = game.event(ev.event);
            if def.kind == EventKind::Relationship {
                ensure(def.owner == EventOwner::Category(cat), || {
                    format!("{} runs outside the locked category", def.name)
                })?;
            }
        }
        ensure(s.clock() >= before.clock(), || "clock ran backwards".into())?;
    }

    let c = &counters;
    ensure(c.total_actions == acts, || format!("total_actions {} != {acts}", c.total_actions))?;
    let logged: u32 = c.event_log.iter().map(|e| e.event_actions).sum();
    ensure(logged == c.event_actions, || format!("event log {logged} != {}", c.event_actions))?;
    ensure(c.wait_intervals.len() == c.session_ends(), || "wait intervals != session ends".into())?;
    ensure(
        c.sessions as usize == c.session_ends() + (acts > 0) as usize,
        || format!("sessions {} with {} session ends", c.sessions, c.session_ends()),
    )?;
    let traced = c.trace.iter().filter(|t| t.kind == TraceKind::Act).count();
    ensure(traced == acts as usize, || format!("{traced} act trace entries for {acts} acts"))?;
    ensure(s.clock() == act_minutes + wait_minutes, || {
        format!("clock {} != {act_minutes} acting + {wait_minutes} waiting", s.clock())
    })?;
    Ok(Walk { steps, counters })
}

/// Advancing to `a` then `a + b` lands on the same state as one jump, and the
/// whole units match the closed form.
pub fn check_regen_split(game: &Game, start: u32, a: u64, b: u64) -> Result<(), String> {
    let def = &game.resources()[0];
    let start = start.min(def.capacity);
    let mut sc = career_scenario();
    sc.initial_resources.insert(def.name.clone(), start);
    let s = game.initial_state(&sc, 0).map_err(|e| e.to_string())?;
    let whole = game.advance_time(&s, a + b).map_err(|e| e.to_string())?;
    let split = game
        .advance_time(&game.advance_time(&s, a).unwrap(), a + b)
        .map_err(|e| e.to_string())?;
    ensure(whole.sim == split.sim, || format!("split at {a} of {}", a + b))?;
    check_resources(game, &whole.sim)?;
    let r = game.resource_id(&def.name).unwrap();
    let exact = (start as u64 + (a + b) * def.regen_num / def.regen_den).min(def.capacity as u64);
    ensure(whole.sim.resource(r) as u64 == exact, || {
        format!("{} after {} minutes, expected {exact}", whole.sim.resource(r), a + b)
    })
}
