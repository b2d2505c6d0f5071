use super::game::{ActionId, EventId, EventOwner, Game, Requirement, Reward};
use super::state::{ActiveEvent, EventOutcome, GameState, Journal, RelationshipProgress, SimState, WaitKind};
use super::SimError;
use crate::tuning::EventKind;

impl Game {
    fn requirement_met(&self, s: &SimState, req: &Requirement) -> bool {
        if let Some((career, min_level)) = req.career {
            match s.career {
                Some(c) if c.career == career && c.level >= min_level => {}
                _ => return false,
            }
        }
        if let Some(o) = req.object {
            if !s.owned_objects[o.ix()] {
                return false;
            }
        }
        true
    }

    /// Legality ignoring the busy lock.
    fn action_ready(&self, s: &SimState, a: ActionId) -> bool {
        let def = &self.actions[a.ix()];
        if s.cooldown_until[a.ix()] > s.clock {
            return false;
        }
        if def.costs.iter().any(|&(r, n)| s.resources[r.ix()] < n) {
            return false;
        }
        if def.consumes.iter().any(|&(i, n)| s.inventory[i.ix()] < n) {
            return false;
        }
        if !self.requirement_met(s, &def.requires) {
            return false;
        }
        if def.requires.during_event {
            match s.active_event {
                Some(ev) if self.events[ev.event.ix()].lists(a) => {}
                _ => return false,
            }
        }
        true
    }

    pub fn is_legal(&self, s: &SimState, a: ActionId) -> bool {
        !s.is_locked() && self.action_ready(s, a)
    }

    /// Legal actions in lexicographic id order.
    pub fn legal_actions(&self, s: &SimState) -> Vec<ActionId> {
        if s.is_locked() {
            return Vec::new();
        }
        self.action_ids().filter(|&a| self.action_ready(s, a)).collect()
    }

    pub fn any_legal(&self, s: &SimState) -> bool {
        !s.is_locked() && self.action_ids().any(|a| self.action_ready(s, a))
    }

    /// Whether `a` would count as an event action right now.
    pub fn is_event_action(&self, s: &SimState, a: ActionId) -> bool {
        self.actions[a.ix()].reward.event_xp > 0
            && s
                .active_event
                .is_some_and(|ev| self.events[ev.event.ix()].lists(a))
    }

    pub fn apply_action_mut<J: Journal>(
        &self,
        s: &mut SimState,
        a: ActionId,
        journal: &mut J,
    ) -> Result<(), SimError> {
        if !self.is_legal(s, a) {
            return Err(SimError::IllegalAction(self.actions[a.ix()].name.clone()));
        }
        let def = &self.actions[a.ix()];
        for &(r, n) in &def.costs {
            s.resources[r.ix()] -= n;
        }
        for &(i, n) in &def.consumes {
            s.inventory[i.ix()] -= n;
        }
        s.locked_until = s.clock + def.duration;
        s.cooldown_until[a.ix()] = s.clock + def.duration + def.cooldown;
        journal.act(s.clock, a, self.is_event_action(s, a));

        self.grant(s, &def.reward, journal);
        if let Some(ev) = s.active_event.as_mut() {
            if self.events[ev.event.ix()].lists(a) {
                ev.xp += def.reward.event_xp;
            }
        }
        if let Some(ev) = s.active_event {
            if ev.xp >= self.events[ev.event.ix()].final_threshold() {
                self.close_event(s, journal);
            }
        }
        self.canonicalize(s);
        Ok(())
    }

    /// Grants every reward field except event XP, which only the action path
    /// accrues.
    fn grant<J: Journal>(&self, s: &mut SimState, reward: &Reward, journal: &mut J) {
        for &(r, n) in &reward.resources {
            let cap = self.resources[r.ix()].capacity;
            let v = &mut s.resources[r.ix()];
            *v = v.saturating_add(n).min(cap);
            if *v == cap {
                s.regen_carry[r.ix()] = 0;
            }
        }
        for &(i, n) in &reward.items {
            s.inventory[i.ix()] = s.inventory[i.ix()].saturating_add(n);
        }
        if reward.career_xp > 0 {
            if let Some(c) = s.career.as_mut() {
                c.xp += reward.career_xp;
                let def = &self.careers[c.career.ix()];
                while c.level < def.max_level && c.xp >= def.xp_for_level(c.level + 1) {
                    c.level += 1;
                    journal.level_up(s.clock, c.career, c.level);
                    if s.grant_objects {
                        for u in def.unlocks.iter().filter(|u| u.unlock_level == c.level) {
                            s.owned_objects[u.object.ix()] = true;
                        }
                    }
                }
            }
        }
        if reward.relationship_xp > 0 {
            if let Some(r) = s.relationship.as_mut() {
                r.xp += reward.relationship_xp;
            }
        }
    }

    /// Pays every reached but unpaid step and clears the active event.
    fn close_event<J: Journal>(&self, s: &mut SimState, journal: &mut J) {
        let Some(ev) = s.active_event.take() else {
            return;
        };
        let def = &self.events[ev.event.ix()];
        let reached = def.steps_reached(ev.xp);
        for step in &def.steps[ev.steps_paid as usize..reached] {
            self.grant(s, &step.reward, journal);
        }
        let completed = reached == def.steps.len();
        if completed {
            s.completed_events[ev.event.ix()] += 1;
            if def.kind == EventKind::Relationship {
                if let Some(r) = s.relationship.as_mut() {
                    r.completed += 1;
                }
            }
        }
        let outcome = if completed {
            EventOutcome::Completed
        } else {
            EventOutcome::Timeout
        };
        journal.event_end(s.clock, ev.event, outcome);
    }

    /// Stores expired timers as 0 so equivalent futures compare equal.
    fn canonicalize(&self, s: &mut SimState) {
        if s.locked_until <= s.clock {
            s.locked_until = 0;
        }
        let clock = s.clock;
        for t in s.cooldown_until.iter_mut() {
            if *t <= clock {
                *t = 0;
            }
        }
    }

    fn regenerate(&self, s: &mut SimState, until: u64) {
        let dt = until - s.clock;
        s.clock = until;
        if dt == 0 {
            return;
        }
        for (i, def) in self.resources.iter().enumerate() {
            let v = &mut s.resources[i];
            if *v >= def.capacity {
                s.regen_carry[i] = 0;
                continue;
            }
            if def.regen_num == 0 {
                continue;
            }
            let total = s.regen_carry[i] + def.regen_num * dt;
            let gain = total / def.regen_den;
            let room = (def.capacity - *v) as u64;
            if gain >= room {
                *v = def.capacity;
                s.regen_carry[i] = 0;
            } else {
                *v += gain as u32;
                s.regen_carry[i] = total % def.regen_den;
            }
        }
    }

    pub fn advance_time_mut<J: Journal>(
        &self,
        s: &mut SimState,
        until: u64,
        journal: &mut J,
    ) -> Result<(), SimError> {
        if until < s.clock {
            return Err(SimError::ClockRegression {
                clock: s.clock,
                until,
            });
        }
        if until == s.clock {
            return Ok(());
        }
        if let Some(ev) = s.active_event {
            if ev.deadline <= until {
                self.regenerate(s, ev.deadline);
                self.close_event(s, journal);
            }
        }
        self.regenerate(s, until);
        self.canonicalize(s);
        Ok(())
    }

    /// Why `e` cannot start now, if it cannot.
    pub fn start_blocker(&self, s: &SimState, e: EventId) -> Option<SimError> {
        let def = &self.events[e.ix()];
        if let Some(ev) = s.active_event {
            return Some(SimError::EventInProgress(
                self.events[ev.event.ix()].name.clone(),
            ));
        }
        let unmet = || SimError::RequirementsUnmet(def.name.clone());
        if !self.requirement_met(s, &def.start) {
            return Some(unmet());
        }
        match def.owner {
            EventOwner::Career(career) => {
                let min_level = self.careers[career.ix()].event_min_level(e);
                match (s.career, min_level) {
                    (Some(c), Some(min)) if c.career == career && c.level >= min => None,
                    _ => Some(unmet()),
                }
            }
            EventOwner::Category(category) => {
                let chain = &self.categories[category.ix()].chain;
                let done = match s.relationship {
                    Some(r) if r.category != category => {
                        return Some(SimError::CategoryLocked {
                            locked: self.categories[r.category.ix()].name.clone(),
                            event: def.name.clone(),
                        })
                    }
                    Some(r) => r.completed as usize,
                    None => 0,
                };
                match chain.get(done) {
                    Some(&next) if next == e => None,
                    Some(&next) => Some(SimError::ChainOrderViolation {
                        event: def.name.clone(),
                        expected: self.events[next.ix()].name.clone(),
                    }),
                    None => Some(SimError::ChainOrderViolation {
                        event: def.name.clone(),
                        expected: "(chain complete)".into(),
                    }),
                }
            }
        }
    }

    pub fn can_start_event(&self, s: &SimState, e: EventId) -> bool {
        self.start_blocker(s, e).is_none()
    }

    /// Events that could be started right now, in id order.
    pub fn startable_events(&self, s: &SimState) -> Vec<EventId> {
        if s.active_event.is_some() {
            return Vec::new();
        }
        self.event_ids().filter(|&e| self.can_start_event(s, e)).collect()
    }

    pub fn start_event_mut<J: Journal>(
        &self,
        s: &mut SimState,
        e: EventId,
        journal: &mut J,
    ) -> Result<(), SimError> {
        if let Some(err) = self.start_blocker(s, e) {
            return Err(err);
        }
        let def = &self.events[e.ix()];
        if let EventOwner::Category(category) = def.owner {
            if s.relationship.is_none() {
                s.relationship = Some(RelationshipProgress {
                    category,
                    completed: 0,
                    xp: 0,
                });
            }
        }
        s.active_event = Some(ActiveEvent {
            event: e,
            xp: 0,
            deadline: s.clock + def.time_limit,
            steps_paid: 0,
        });
        journal.event_start(s.clock, e);
        Ok(())
    }

    /// Earliest clock time ≥ now at which some action is legal.
    pub fn next_availability(&self, s: &SimState) -> Option<u64> {
        if self.any_legal(s) {
            return Some(s.clock);
        }
        let mut probe = s.clone();
        loop {
            let t = self.next_candidate(&probe)?;
            self.advance_time_mut(&mut probe, t, &mut ())
                .expect("candidate lies in the future");
            if self.any_legal(&probe) {
                return Some(t);
            }
        }
    }

    /// Next moment at which any blocker could lift: a timer expiry, the active
    /// deadline, or a resource regenerating up to some action's cost.
    fn next_candidate(&self, s: &SimState) -> Option<u64> {
        let now = s.clock;
        let mut best: Option<u64> = None;
        let mut offer = |t: u64| {
            if t > now {
                best = Some(best.map_or(t, |b| b.min(t)));
            }
        };
        offer(s.locked_until);
        for &t in &s.cooldown_until {
            offer(t);
        }
        if let Some(ev) = s.active_event {
            offer(ev.deadline);
        }
        for def in &self.actions {
            for &(r, need) in &def.costs {
                let have = s.resources[r.ix()];
                let res = &self.resources[r.ix()];
                if have >= need || need > res.capacity || res.regen_num == 0 {
                    continue;
                }
                let missing = (need - have) as u64 * res.regen_den;
                let dt = (missing - s.regen_carry[r.ix()]).div_ceil(res.regen_num);
                offer(now + dt);
            }
        }
        best
    }

    /// Ends the session: records the gap and fast-forwards to when the next
    /// action becomes legal.
    pub fn close_session_if_idle_mut<J: Journal>(
        &self,
        s: &mut SimState,
        journal: &mut J,
    ) -> Result<u64, SimError> {
        if self.any_legal(s) {
            return Err(SimError::NotIdle);
        }
        let until = self.next_availability(s).ok_or(SimError::Deadlock)?;
        let wait = until - s.clock;
        journal.session_end(s.clock, wait);
        journal.wait(s.clock, until, WaitKind::Availability);
        self.advance_time_mut(s, until, journal)?;
        Ok(until)
    }

    /// Lets the active event run out its clock.
    pub fn wait_for_deadline_mut<J: Journal>(
        &self,
        s: &mut SimState,
        journal: &mut J,
    ) -> Result<u64, SimError> {
        let ev = s
            .active_event
            .ok_or_else(|| SimError::RequirementsUnmet("no active event".into()))?;
        journal.wait(s.clock, ev.deadline, WaitKind::Deadline);
        self.advance_time_mut(s, ev.deadline, journal)?;
        Ok(ev.deadline)
    }

    /// Applies an action and lets its duration elapse.
    pub fn act_mut<J: Journal>(
        &self,
        s: &mut SimState,
        a: ActionId,
        journal: &mut J,
    ) -> Result<(), SimError> {
        self.apply_action_mut(s, a, journal)?;
        if s.locked_until > s.clock {
            self.advance_time_mut(s, s.locked_until, journal)?;
        }
        Ok(())
    }

    pub fn legal_action_names(&self, state: &GameState) -> Vec<&str> {
        self.legal_actions(&state.sim)
            .into_iter()
            .map(|a| self.actions[a.ix()].name.as_str())
            .collect()
    }

    pub fn apply_action(&self, state: &GameState, action: &str) -> Result<GameState, SimError> {
        let a = self
            .action_id(action)
            .ok_or_else(|| SimError::UnknownAction(action.into()))?;
        let mut next = state.clone();
        self.apply_action_mut(&mut next.sim, a, &mut next.counters)?;
        Ok(next)
    }

    pub fn advance_time(&self, state: &GameState, until: u64) -> Result<GameState, SimError> {
        let mut next = state.clone();
        self.advance_time_mut(&mut next.sim, until, &mut next.counters)?;
        Ok(next)
    }

    pub fn start_event(&self, state: &GameState, event: &str) -> Result<GameState, SimError> {
        let e = self
            .event_id(event)
            .ok_or_else(|| SimError::UnknownEvent(event.into()))?;
        let mut next = state.clone();
        self.start_event_mut(&mut next.sim, e, &mut next.counters)?;
        Ok(next)
    }

    pub fn close_session_if_idle(&self, state: &GameState) -> Result<GameState, SimError> {
        let mut next = state.clone();
        self.close_session_if_idle_mut(&mut next.sim, &mut next.counters)?;
        Ok(next)
    }
}
