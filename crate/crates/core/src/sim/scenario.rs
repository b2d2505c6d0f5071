use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use smallvec::smallvec;

use super::game::Game;
use super::state::{CareerProgress, Counters, GameState, RelationshipProgress, SimState};
use super::SimError;

/// Per-experiment adjustments applied when building the initial state.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioOverrides {
    /// Career assigned at no cost, starting at level 1.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub career: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub relationship_category: Option<String>,
    /// Hand out career objects for free as soon as their unlock level is hit.
    #[serde(default)]
    pub grant_objects: bool,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub initial_resources: BTreeMap<String, u32>,
}

impl ScenarioOverrides {
    pub fn career(id: &str) -> Self {
        ScenarioOverrides {
            career: Some(id.into()),
            ..Default::default()
        }
    }
}

impl Game {
    pub fn initial_sim(&self, scenario: &ScenarioOverrides) -> Result<SimState, SimError> {
        let mut s = SimState {
            clock: 0,
            locked_until: 0,
            career: None,
            relationship: None,
            active_event: None,
            grant_objects: scenario.grant_objects,
            resources: self.resources.iter().map(|r| r.initial).collect(),
            regen_carry: smallvec![0; self.resources.len()],
            cooldown_until: smallvec![0; self.actions.len()],
            inventory: smallvec![0; self.items.len()],
            owned_objects: smallvec![false; self.objects.len()],
            completed_events: smallvec![0; self.events.len()],
        };
        for (name, &value) in &scenario.initial_resources {
            let r = self
                .resource_id(name)
                .ok_or_else(|| SimError::UnknownResource(name.clone()))?;
            let capacity = self.resources[r.ix()].capacity;
            if value > capacity {
                return Err(SimError::ResourceAboveCapacity {
                    resource: name.clone(),
                    value,
                    capacity,
                });
            }
            s.resources[r.ix()] = value;
        }
        if let Some(name) = &scenario.career {
            let career = self
                .career_id(name)
                .ok_or_else(|| SimError::UnknownCareer(name.clone()))?;
            s.career = Some(CareerProgress {
                career,
                level: 1,
                xp: 0,
            });
            if scenario.grant_objects {
                for u in &self.careers[career.ix()].unlocks {
                    if u.unlock_level <= 1 {
                        s.owned_objects[u.object.ix()] = true;
                    }
                }
            }
        }
        if let Some(name) = &scenario.relationship_category {
            let category = self
                .category_id(name)
                .ok_or_else(|| SimError::UnknownCategory(name.clone()))?;
            s.relationship = Some(RelationshipProgress {
                category,
                completed: 0,
                xp: 0,
            });
        }
        Ok(s)
    }

    pub fn initial_state(
        &self,
        scenario: &ScenarioOverrides,
        seed: u64,
    ) -> Result<GameState, SimError> {
        Ok(GameState {
            sim: self.initial_sim(scenario)?,
            counters: Counters::default(),
            rng_seed: seed,
        })
    }
}
