use std::collections::{BTreeSet, HashMap};

use crate::tuning::{
    validate, Diagnostic, EventKind, RequirementSet, RewardBundle, TuningConfig,
};

use super::SimError;

macro_rules! index_type {
    ($(#[$meta:meta])* $name:ident) => {
        $(#[$meta])*
        #[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
        pub struct $name(pub u16);

        impl $name {
            #[inline]
            pub fn ix(self) -> usize {
                self.0 as usize
            }
        }
    };
}

index_type!(
    /// Index of an action; ids are ordered lexicographically by name.
    ActionId
);
index_type!(ResourceId);
index_type!(EventId);
index_type!(CareerId);
index_type!(CategoryId);
index_type!(ItemId);
index_type!(ObjectId);

#[derive(Debug, Clone)]
pub struct ResourceDef {
    pub name: String,
    pub capacity: u32,
    pub regen_num: u64,
    pub regen_den: u64,
    pub initial: u32,
}

#[derive(Debug, Clone, Default)]
pub struct Reward {
    pub career_xp: u64,
    pub event_xp: u64,
    pub relationship_xp: u64,
    pub resources: Vec<(ResourceId, u32)>,
    pub items: Vec<(ItemId, u32)>,
}

#[derive(Debug, Clone, Default)]
pub struct Requirement {
    pub career: Option<(CareerId, u32)>,
    pub object: Option<ObjectId>,
    pub during_event: bool,
}

#[derive(Debug, Clone)]
pub struct ActionDef {
    pub name: String,
    pub costs: Vec<(ResourceId, u32)>,
    pub consumes: Vec<(ItemId, u32)>,
    pub duration: u64,
    pub cooldown: u64,
    pub reward: Reward,
    pub requires: Requirement,
    pub delayed_effect: bool,
    /// Events whose action list contains this action.
    pub events: Vec<EventId>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EventOwner {
    Career(CareerId),
    Category(CategoryId),
}

#[derive(Debug, Clone)]
pub struct StepDef {
    pub threshold: u64,
    pub reward: Reward,
}

#[derive(Debug, Clone)]
pub struct EventDef {
    pub name: String,
    pub kind: EventKind,
    pub owner: EventOwner,
    pub time_limit: u64,
    pub actions: Vec<ActionId>,
    pub steps: Vec<StepDef>,
    pub start: Requirement,
    /// 0-based position in the owning relationship chain.
    pub chain_index: Option<u32>,
}

impl EventDef {
    pub fn final_threshold(&self) -> u64 {
        self.steps.last().map_or(0, |s| s.threshold)
    }

    /// Number of steps whose threshold `xp` reaches.
    pub fn steps_reached(&self, xp: u64) -> usize {
        self.steps.iter().take_while(|s| s.threshold <= xp).count()
    }

    pub fn lists(&self, action: ActionId) -> bool {
        self.actions.contains(&action)
    }
}

#[derive(Debug, Clone)]
pub struct ObjectUnlockDef {
    pub object: ObjectId,
    pub unlock_level: u32,
    pub price: u64,
}

#[derive(Debug, Clone)]
pub struct CareerDef {
    pub name: String,
    pub max_level: u32,
    pub xp_per_level: Vec<u64>,
    /// Career events with the lowest level at which each becomes available.
    pub events: Vec<(EventId, u32)>,
    pub craft_items: Vec<ItemId>,
    pub unlocks: Vec<ObjectUnlockDef>,
}

impl CareerDef {
    /// Cumulative XP needed to stand at `level`.
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

    pub fn event_min_level(&self, event: EventId) -> Option<u32> {
        self.events
            .iter()
            .find(|(e, _)| *e == event)
            .map(|&(_, l)| l)
    }
}

#[derive(Debug, Clone)]
pub struct CategoryDef {
    pub name: String,
    pub chain: Vec<EventId>,
}

#[derive(Debug, Clone)]
pub struct ObjectDef {
    pub name: String,
    pub unlocks: Vec<ActionId>,
}

/// A validated tuning config compiled into index-addressed tables. Immutable
/// and shareable across threads.
#[derive(Debug, Clone)]
pub struct Game {
    config: TuningConfig,
    pub(crate) resources: Vec<ResourceDef>,
    pub(crate) actions: Vec<ActionDef>,
    pub(crate) events: Vec<EventDef>,
    pub(crate) careers: Vec<CareerDef>,
    pub(crate) categories: Vec<CategoryDef>,
    pub(crate) objects: Vec<ObjectDef>,
    pub(crate) items: Vec<String>,
    names: Names,
}

#[derive(Debug, Clone, Default)]
struct Names {
    resources: HashMap<String, ResourceId>,
    actions: HashMap<String, ActionId>,
    events: HashMap<String, EventId>,
    careers: HashMap<String, CareerId>,
    categories: HashMap<String, CategoryId>,
    objects: HashMap<String, ObjectId>,
    items: HashMap<String, ItemId>,
}

fn index<'a, I>(names: impl Iterator<Item = &'a String>, make: impl Fn(u16) -> I) -> HashMap<String, I> {
    names
        .enumerate()
        .map(|(i, n)| (n.clone(), make(i as u16)))
        .collect()
}

fn sorted<T: Clone>(items: &[T], key: impl Fn(&T) -> &String) -> Vec<T> {
    let mut v = items.to_vec();
    v.sort_by(|a, b| key(a).cmp(key(b)));
    v
}

impl Game {
    /// Compiles a config. Fails with the full diagnostic list if the config
    /// violates any invariant.
    pub fn new(config: TuningConfig) -> Result<Game, SimError> {
        let errors: Vec<Diagnostic> = validate(&config)
            .into_iter()
            .filter(Diagnostic::is_error)
            .collect();
        if !errors.is_empty() {
            return Err(SimError::InvalidConfig(errors));
        }

        let resources_src = sorted(&config.resources, |r| &r.id);
        let actions_src = sorted(&config.actions, |a| &a.id);
        let events_src = sorted(&config.events, |e| &e.id);
        let careers_src = sorted(&config.careers, |c| &c.id);
        let categories_src = sorted(&config.relationships, |c| &c.id);
        let objects_src = sorted(&config.objects, |o| &o.id);

        let mut item_names = BTreeSet::new();
        for a in &config.actions {
            item_names.extend(a.consumes_items.keys().cloned());
            item_names.extend(a.rewards.items.keys().cloned());
        }
        for e in &config.events {
            for s in &e.steps {
                item_names.extend(s.reward.items.keys().cloned());
            }
        }
        for c in &config.careers {
            item_names.extend(c.craft_items.iter().cloned());
        }
        let items: Vec<String> = item_names.into_iter().collect();

        let names = Names {
            resources: index(resources_src.iter().map(|r| &r.id), ResourceId),
            actions: index(actions_src.iter().map(|a| &a.id), ActionId),
            events: index(events_src.iter().map(|e| &e.id), EventId),
            careers: index(careers_src.iter().map(|c| &c.id), CareerId),
            categories: index(categories_src.iter().map(|c| &c.id), CategoryId),
            objects: index(objects_src.iter().map(|o| &o.id), ObjectId),
            items: index(items.iter(), ItemId),
        };

        let reward = |r: &RewardBundle| Reward {
            career_xp: r.career_xp,
            event_xp: r.event_xp,
            relationship_xp: r.relationship_xp,
            resources: r
                .resources
                .iter()
                .filter(|(_, &v)| v > 0)
                .map(|(k, &v)| (names.resources[k], v))
                .collect(),
            items: r
                .items
                .iter()
                .filter(|(_, &v)| v > 0)
                .map(|(k, &v)| (names.items[k], v))
                .collect(),
        };
        let requirement = |r: &RequirementSet| Requirement {
            career: r
                .career
                .as_ref()
                .map(|c| (names.careers[&c.id], c.min_level)),
            object: r.owned_object.as_ref().map(|o| names.objects[o]),
            during_event: r.during_event,
        };

        let resources = resources_src
            .iter()
            .map(|r| ResourceDef {
                name: r.id.clone(),
                capacity: r.capacity,
                regen_num: r.regen_rate.num,
                regen_den: r.regen_rate.den,
                initial: r.initial,
            })
            .collect();

        let mut actions: Vec<ActionDef> = actions_src
            .iter()
            .map(|a| ActionDef {
                name: a.id.clone(),
                costs: a
                    .costs
                    .iter()
                    .filter(|(_, &v)| v > 0)
                    .map(|(k, &v)| (names.resources[k], v))
                    .collect(),
                consumes: a
                    .consumes_items
                    .iter()
                    .filter(|(_, &v)| v > 0)
                    .map(|(k, &v)| (names.items[k], v))
                    .collect(),
                duration: a.duration,
                cooldown: a.cooldown,
                reward: reward(&a.rewards),
                requires: requirement(&a.requires),
                delayed_effect: a.delayed_effect,
                events: Vec::new(),
            })
            .collect();

        let categories: Vec<CategoryDef> = categories_src
            .iter()
            .map(|c| CategoryDef {
                name: c.id.clone(),
                chain: c.event_chain.iter().map(|e| names.events[e]).collect(),
            })
            .collect();

        let events: Vec<EventDef> = events_src
            .iter()
            .enumerate()
            .map(|(i, e)| {
                let id = EventId(i as u16);
                let owner = match e.kind {
                    EventKind::Career => EventOwner::Career(names.careers[&e.owner_id]),
                    EventKind::Relationship => {
                        EventOwner::Category(names.categories[&e.owner_id])
                    }
                };
                let chain_index = match owner {
                    EventOwner::Category(c) => categories[c.ix()]
                        .chain
                        .iter()
                        .position(|&x| x == id)
                        .map(|p| p as u32),
                    EventOwner::Career(_) => None,
                };
                let mut acts: Vec<ActionId> =
                    e.action_ids.iter().map(|a| names.actions[a]).collect();
                acts.sort();
                acts.dedup();
                EventDef {
                    name: e.id.clone(),
                    kind: e.kind,
                    owner,
                    time_limit: e.time_limit,
                    actions: acts,
                    steps: e
                        .steps
                        .iter()
                        .map(|s| StepDef {
                            threshold: s.xp_threshold,
                            reward: reward(&s.reward),
                        })
                        .collect(),
                    start: requirement(&e.start_requires),
                    chain_index,
                }
            })
            .collect();
        for (i, e) in events.iter().enumerate() {
            for a in &e.actions {
                actions[a.ix()].events.push(EventId(i as u16));
            }
        }

        let careers = careers_src
            .iter()
            .map(|c| {
                let mut evs: Vec<(EventId, u32)> = Vec::new();
                for (&level, list) in &c.events_by_level {
                    for e in list {
                        let id = names.events[e];
                        match evs.iter_mut().find(|(x, _)| *x == id) {
                            Some(entry) => entry.1 = entry.1.min(level),
                            None => evs.push((id, level)),
                        }
                    }
                }
                evs.sort();
                CareerDef {
                    name: c.id.clone(),
                    max_level: c.max_level,
                    xp_per_level: c.xp_per_level.clone(),
                    events: evs,
                    craft_items: c.craft_items.iter().map(|i| names.items[i]).collect(),
                    unlocks: c
                        .object_unlocks
                        .iter()
                        .map(|u| ObjectUnlockDef {
                            object: names.objects[&u.object_id],
                            unlock_level: u.unlock_level,
                            price: u.price_rho,
                        })
                        .collect(),
                }
            })
            .collect();

        let objects = objects_src
            .iter()
            .map(|o| ObjectDef {
                name: o.id.clone(),
                unlocks: o
                    .unlocked_action_ids
                    .iter()
                    .map(|a| names.actions[a])
                    .collect(),
            })
            .collect();

        Ok(Game {
            config,
            resources,
            actions,
            events,
            careers,
            categories,
            objects,
            items,
            names,
        })
    }

    pub fn config(&self) -> &TuningConfig {
        &self.config
    }

    pub fn resources(&self) -> &[ResourceDef] {
        &self.resources
    }

    pub fn actions(&self) -> &[ActionDef] {
        &self.actions
    }

    pub fn events(&self) -> &[EventDef] {
        &self.events
    }

    pub fn careers(&self) -> &[CareerDef] {
        &self.careers
    }

    pub fn categories(&self) -> &[CategoryDef] {
        &self.categories
    }

    pub fn objects(&self) -> &[ObjectDef] {
        &self.objects
    }

    pub fn items(&self) -> &[String] {
        &self.items
    }

    pub fn action(&self, id: ActionId) -> &ActionDef {
        &self.actions[id.ix()]
    }

    pub fn event(&self, id: EventId) -> &EventDef {
        &self.events[id.ix()]
    }

    pub fn career(&self, id: CareerId) -> &CareerDef {
        &self.careers[id.ix()]
    }

    pub fn category(&self, id: CategoryId) -> &CategoryDef {
        &self.categories[id.ix()]
    }

    pub fn resource_id(&self, name: &str) -> Option<ResourceId> {
        self.names.resources.get(name).copied()
    }

    pub fn action_id(&self, name: &str) -> Option<ActionId> {
        self.names.actions.get(name).copied()
    }

    pub fn event_id(&self, name: &str) -> Option<EventId> {
        self.names.events.get(name).copied()
    }

    pub fn career_id(&self, name: &str) -> Option<CareerId> {
        self.names.careers.get(name).copied()
    }

    pub fn category_id(&self, name: &str) -> Option<CategoryId> {
        self.names.categories.get(name).copied()
    }

    pub fn object_id(&self, name: &str) -> Option<ObjectId> {
        self.names.objects.get(name).copied()
    }

    pub fn item_id(&self, name: &str) -> Option<ItemId> {
        self.names.items.get(name).copied()
    }

    pub fn action_ids(&self) -> impl Iterator<Item = ActionId> {
        (0..self.actions.len() as u16).map(ActionId)
    }

    pub fn event_ids(&self) -> impl Iterator<Item = EventId> {
        (0..self.events.len() as u16).map(EventId)
    }
}
