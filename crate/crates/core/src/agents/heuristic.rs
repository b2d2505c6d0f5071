use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::goal::{Goal, Target};
use crate::sim::{ActionId, CareerId, EventDef, EventOwner, Game, ItemId, ObjectId, SimState};
use crate::tuning::EventKind;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum HeuristicError {
    #[error("unknown heuristic term `{0}`")]
    UnknownTerm(String),
    #[error("unknown item `{0}` in crafted_item term")]
    UnknownItem(String),
    #[error("weight for `{0}` is not finite")]
    NonFinite(String),
    #[error("normalization for `{0}` must be finite and positive")]
    BadScale(String),
    #[error("every heuristic weight is zero")]
    AllZero,
}

/// Weight of every term in the shipped default specs.
pub const DEFAULT_WEIGHT: f64 = 2.0;

/// Weighted state-evaluation terms, keyed by term name. Item terms are written
/// `crafted_item:<item id>`. A `goal` term adds its weight whenever the goal is
/// not yet met.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HeuristicSpec {
    pub weights: BTreeMap<String, f64>,
    /// Per-term divisor replacing the yield computed from the config.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub normalization: BTreeMap<String, f64>,
}

impl HeuristicSpec {
    pub fn new<'a>(weights: impl IntoIterator<Item = (&'a str, f64)>) -> Self {
        HeuristicSpec {
            weights: weights.into_iter().map(|(k, w)| (k.to_string(), w)).collect(),
            normalization: BTreeMap::new(),
        }
    }

    /// Pure goal indicator: with integer action costs a weight below 1 never
    /// overestimates, so search returns shortest paths.
    pub fn goal_only() -> Self {
        Self::new([("goal", 0.5)])
    }

    /// Career XP plus one crafted-item term per item any career crafts.
    ///
    /// Weighted above 1 so that progress lowers f: otherwise f is flat along
    /// good paths and the least-g frontier rule favours free moves that change
    /// nothing.
    pub fn career_default(game: &Game) -> Self {
        let mut spec = Self::new([("career_xp", DEFAULT_WEIGHT)]);
        for c in game.careers() {
            for &i in &c.craft_items {
                spec.weights
                    .insert(format!("crafted_item:{}", game.items()[i.ix()]), DEFAULT_WEIGHT);
            }
        }
        spec
    }

    pub fn relationship_default() -> Self {
        Self::new([("relationship_xp", DEFAULT_WEIGHT)])
    }

    pub fn compile(&self, game: &Game, goal: &Goal) -> Result<Heuristic, HeuristicError> {
        let mut terms = Vec::new();
        for (key, &weight) in &self.weights {
            if !weight.is_finite() {
                return Err(HeuristicError::NonFinite(key.clone()));
            }
            let term = Term::parse(key, game)?;
            let scale = match self.normalization.get(key) {
                Some(&s) if s.is_finite() && s > 0.0 => Some(s),
                Some(_) => return Err(HeuristicError::BadScale(key.clone())),
                None => None,
            };
            if weight != 0.0 {
                terms.push((term, weight, scale));
            }
        }
        for key in self.normalization.keys() {
            Term::parse(key, game)?;
        }
        if terms.is_empty() {
            return Err(HeuristicError::AllZero);
        }
        Ok(Heuristic::new(game, *goal, terms))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Term {
    CareerXp,
    CareerLevel,
    CareerEventComplete,
    EventXp,
    RelationshipXp,
    RelationshipEventComplete,
    CraftedItem(ItemId),
    Goal,
}

impl Term {
    fn parse(key: &str, game: &Game) -> Result<Term, HeuristicError> {
        Ok(match key {
            "career_xp" => Term::CareerXp,
            "career_level" => Term::CareerLevel,
            "career_event_complete" => Term::CareerEventComplete,
            "event_xp" => Term::EventXp,
            "relationship_xp" => Term::RelationshipXp,
            "relationship_event_complete" => Term::RelationshipEventComplete,
            "goal" => Term::Goal,
            _ => match key.strip_prefix("crafted_item:") {
                Some(item) => Term::CraftedItem(
                    game.item_id(item)
                        .ok_or_else(|| HeuristicError::UnknownItem(item.into()))?,
                ),
                None => return Err(HeuristicError::UnknownTerm(key.into())),
            },
        })
    }
}

/// One way of earning career XP, with what it takes to use it.
#[derive(Debug, Clone)]
struct XpSource {
    xp: f64,
    min_level: u32,
    object: Option<ObjectId>,
    consumes: Vec<(ItemId, u32)>,
}

#[derive(Debug, Clone, Default)]
struct CareerTables {
    /// Best first.
    sources: Vec<XpSource>,
    /// Largest career XP one event completion pays.
    best_event_payout: f64,
}

/// A [`HeuristicSpec`] bound to a game and goal: estimates the number of
/// actions still needed.
#[derive(Debug, Clone)]
pub struct Heuristic {
    goal: Goal,
    terms: Vec<(Term, f64, Option<f64>)>,
    careers: Vec<CareerTables>,
    /// Best item yield of any single action, per item.
    item_yield: Vec<f64>,
    /// Nominal XP per relationship event.
    relationship_event_xp: f64,
    best_relationship_action_xp: f64,
}

/// Career XP paid by the time `xp` event XP is accrued, interpolating linearly
/// between step thresholds.
fn interpolated_payout(event: &EventDef, xp: u64) -> f64 {
    let (mut t0, mut c0) = (0u64, 0u64);
    for step in &event.steps {
        let c1 = c0 + step.reward.career_xp;
        if xp < step.threshold {
            let frac = (xp - t0) as f64 / (step.threshold - t0) as f64;
            return c0 as f64 + frac * (c1 - c0) as f64;
        }
        (t0, c0) = (step.threshold, c1);
    }
    c0 as f64
}

fn paid_career_xp(event: &EventDef, steps: u32) -> u64 {
    event.steps[..steps as usize]
        .iter()
        .map(|s| s.reward.career_xp)
        .sum()
}

/// Steepest career XP per event XP over any step segment.
fn max_slope(event: &EventDef) -> f64 {
    let mut prev = 0u64;
    let mut best = 0f64;
    for s in &event.steps {
        let dt = (s.threshold - prev).max(1) as f64;
        best = best.max(s.reward.career_xp as f64 / dt);
        prev = s.threshold;
    }
    best
}

impl Heuristic {
    fn new(game: &Game, goal: Goal, terms: Vec<(Term, f64, Option<f64>)>) -> Heuristic {
        let mut item_yield = vec![0f64; game.items().len()];
        for a in game.actions() {
            for &(i, n) in &a.reward.items {
                item_yield[i.ix()] = item_yield[i.ix()].max(n as f64);
            }
        }

        let careers = game
            .careers()
            .iter()
            .enumerate()
            .map(|(ci, c)| {
                let cid = CareerId(ci as u16);
                let own_events: Vec<&EventDef> = c.events.iter().map(|&(e, _)| game.event(e)).collect();
                let slope = own_events.iter().map(|e| max_slope(e)).fold(0.0, f64::max);
                let best_event_payout = own_events
                    .iter()
                    .map(|e| paid_career_xp(e, e.steps.len() as u32) as f64)
                    .fold(0.0, f64::max);
                let mut sources: Vec<XpSource> = game
                    .action_ids()
                    .filter_map(|a: ActionId| {
                        let def = game.action(a);
                        let min_level = match def.requires.career {
                            Some((rc, _)) if rc != cid => return None,
                            Some((_, l)) => l,
                            None => 1,
                        };
                        let in_own_event = def.events.iter().any(|&e| {
                            matches!(game.event(e).owner, EventOwner::Career(o) if o == cid)
                        });
                        let mut xp = def.reward.career_xp as f64;
                        if in_own_event {
                            xp += def.reward.event_xp as f64 * slope;
                        }
                        (xp > 0.0).then(|| XpSource {
                            xp,
                            min_level,
                            object: def.requires.object,
                            consumes: def.consumes.clone(),
                        })
                    })
                    .collect();
                sources.sort_by(|a, b| b.xp.total_cmp(&a.xp));
                CareerTables {
                    sources,
                    best_event_payout,
                }
            })
            .collect();

        let rel_events: Vec<&EventDef> = game
            .events()
            .iter()
            .filter(|e| e.kind == EventKind::Relationship)
            .collect();
        let relationship_event_xp = rel_events
            .iter()
            .map(|e| e.final_threshold() as f64)
            .fold(f64::INFINITY, f64::min);
        let best_relationship_action_xp = rel_events
            .iter()
            .flat_map(|e| e.actions.iter())
            .map(|&a| game.action(a).reward.event_xp as f64)
            .fold(0.0, f64::max);

        Heuristic {
            goal,
            terms,
            careers,
            item_yield,
            relationship_event_xp: if relationship_event_xp.is_finite() {
                relationship_event_xp
            } else {
                0.0
            },
            best_relationship_action_xp,
        }
    }

    pub fn goal(&self) -> &Goal {
        &self.goal
    }

    pub fn eval(&self, game: &Game, s: &SimState) -> f64 {
        if self.goal.satisfied(s) {
            return 0.0;
        }
        let career = CareerView::of(self, game, s);
        self.terms
            .iter()
            .map(|&(term, w, scale)| w * self.term_value(term, scale, game, s, &career))
            .sum::<f64>()
            .max(0.0)
    }

    /// Per-term values before weighting, for reporting and tests.
    pub fn breakdown(&self, game: &Game, s: &SimState) -> Vec<(Term, f64)> {
        let career = CareerView::of(self, game, s);
        self.terms
            .iter()
            .map(|&(term, _, scale)| (term, self.term_value(term, scale, game, s, &career)))
            .collect()
    }

    fn term_value(
        &self,
        term: Term,
        scale: Option<f64>,
        game: &Game,
        s: &SimState,
        career: &CareerView,
    ) -> f64 {
        let div = |raw: f64, computed: f64| {
            let d = scale.unwrap_or(computed);
            if raw <= 0.0 {
                0.0
            } else if d > 0.0 {
                raw / d
            } else {
                raw
            }
        };
        match term {
            Term::Goal => 1.0,
            Term::CareerXp => div(career.remaining_xp, career.best_yield),
            Term::CareerLevel => match self.goal.target {
                Target::CareerLevel(c, level) => {
                    let now = s.career().filter(|p| p.career == c).map_or(0, |p| p.level);
                    div(level.saturating_sub(now) as f64, 1.0)
                }
                _ => 0.0,
            },
            Term::CareerEventComplete => match self.goal.target {
                Target::Event(e) => div((s.times_completed(e) == 0) as u8 as f64, 1.0),
                Target::CareerLevel(c, _) => div(
                    career.remaining_xp,
                    self.careers[c.ix()].best_event_payout,
                ),
                Target::Chain(..) => 0.0,
            },
            Term::EventXp => {
                let Some(ev) = s.active_event() else {
                    return 0.0;
                };
                let def = game.event(ev.event);
                let relationship_goal = matches!(self.goal.target, Target::Chain(..));
                let next = def
                    .steps
                    .iter()
                    .skip(ev.steps_paid as usize)
                    .find(|st| {
                        st.threshold > ev.xp
                            && (relationship_goal
                                || st.reward.career_xp > 0
                                || st.reward.relationship_xp > 0
                                || !st.reward.items.is_empty()
                                || !st.reward.resources.is_empty())
                    })
                    .map(|st| st.threshold);
                let target = if relationship_goal {
                    Some(def.final_threshold())
                } else {
                    next
                };
                let best = def
                    .actions
                    .iter()
                    .map(|&a| game.action(a).reward.event_xp as f64)
                    .fold(0.0, f64::max);
                target.map_or(0.0, |t| div(t.saturating_sub(ev.xp) as f64, best))
            }
            Term::RelationshipXp => {
                let Target::Chain(_, k) = self.goal.target else {
                    return 0.0;
                };
                let (left, accrued) = self.chain_progress(game, s, k);
                let x = self.relationship_event_xp;
                // XP past the nominal event size does not count as progress
                let raw = if left > 0.0 {
                    (left * x - accrued).max((left - 1.0) * x)
                } else {
                    0.0
                };
                div(raw, self.best_relationship_action_xp)
            }
            Term::RelationshipEventComplete => {
                let Target::Chain(_, k) = self.goal.target else {
                    return 0.0;
                };
                div(self.chain_progress(game, s, k).0, 1.0)
            }
            Term::CraftedItem(item) => {
                let demand = career.item_demand(item);
                let have = s.item(item) as f64;
                div(demand - have, self.item_yield[item.ix()])
            }
        }
    }

    /// Events still missing from the goal chain and XP accrued in the running
    /// relationship event.
    fn chain_progress(&self, game: &Game, s: &SimState, k: u32) -> (f64, f64) {
        let done = s.relationship().map_or(0, |r| r.completed);
        let accrued = s
            .active_event()
            .filter(|ev| game.event(ev.event).kind == EventKind::Relationship)
            .map_or(0, |ev| ev.xp);
        (k.saturating_sub(done) as f64, accrued as f64)
    }
}

/// Career-side quantities shared by several terms.
struct CareerView<'a> {
    remaining_xp: f64,
    best_yield: f64,
    best: Option<&'a XpSource>,
}

impl<'a> CareerView<'a> {
    fn of(h: &'a Heuristic, game: &Game, s: &SimState) -> CareerView<'a> {
        let none = CareerView {
            remaining_xp: 0.0,
            best_yield: 0.0,
            best: None,
        };
        let Some(goal_career) = h.goal.career(game) else {
            return none;
        };
        let target_xp = match h.goal.target {
            Target::CareerLevel(c, level) => game.career(c).xp_for_level(level),
            _ => 0,
        };
        let progress = s.career().filter(|c| c.career == goal_career);
        let (level, xp) = progress.map_or((0, 0), |c| (c.level, c.xp));
        let pending = s
            .active_event()
            .filter(|ev| {
                matches!(game.event(ev.event).owner, EventOwner::Career(o) if o == goal_career)
            })
            .map_or(0.0, |ev| {
                let def = game.event(ev.event);
                interpolated_payout(def, ev.xp) - paid_career_xp(def, ev.steps_paid) as f64
            });
        let best = h.careers[goal_career.ix()].sources.iter().find(|src| {
            level >= src.min_level && src.object.is_none_or(|o| s.owns(o))
        });
        CareerView {
            remaining_xp: (target_xp as f64 - xp as f64 - pending).max(0.0),
            best_yield: best.map_or(0.0, |b| b.xp),
            best,
        }
    }

    /// Units of `item` the best XP source will still consume before the goal.
    fn item_demand(&self, item: ItemId) -> f64 {
        let Some(best) = self.best else { return 0.0 };
        let per_use = best
            .consumes
            .iter()
            .find(|&&(i, _)| i == item)
            .map_or(0, |&(_, n)| n);
        if per_use == 0 || self.best_yield <= 0.0 {
            return 0.0;
        }
        (self.remaining_xp / self.best_yield).ceil() * per_use as f64
    }
}
