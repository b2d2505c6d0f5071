use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::{EntityKind, TuningConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DiffKind {
    Added,
    Removed,
    Changed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiffEntry {
    pub kind: DiffKind,
    pub entity_kind: EntityKind,
    pub entity_id: String,
    /// Dotted field path for `Changed` entries.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub field: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub old: Option<Value>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub new: Option<Value>,
}

impl fmt::Display for DiffEntry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            DiffKind::Added => write!(f, "+ {} {}", self.entity_kind, self.entity_id),
            DiffKind::Removed => write!(f, "- {} {}", self.entity_kind, self.entity_id),
            DiffKind::Changed => write!(
                f,
                "~ {} {}.{}: {} -> {}",
                self.entity_kind,
                self.entity_id,
                self.field.as_deref().unwrap_or(""),
                show(self.old.as_ref()),
                show(self.new.as_ref()),
            ),
        }
    }
}

fn show(v: Option<&Value>) -> String {
    v.map_or_else(|| "(absent)".to_string(), Value::to_string)
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct BuildDiff {
    pub from_build: String,
    pub to_build: String,
    pub entries: Vec<DiffEntry>,
}

impl BuildDiff {
    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Structural diff between two builds, keyed by entity kind and id. Nested
/// objects are compared per leaf field; lists are compared whole.
pub fn diff_builds(a: &TuningConfig, b: &TuningConfig) -> BuildDiff {
    let mut entries = Vec::new();
    diff_kind(EntityKind::Resource, &a.resources, &b.resources, |r| &r.id, &mut entries);
    diff_kind(EntityKind::Action, &a.actions, &b.actions, |x| &x.id, &mut entries);
    diff_kind(EntityKind::Event, &a.events, &b.events, |x| &x.id, &mut entries);
    diff_kind(EntityKind::Career, &a.careers, &b.careers, |x| &x.id, &mut entries);
    diff_kind(
        EntityKind::Relationship,
        &a.relationships,
        &b.relationships,
        |x| &x.id,
        &mut entries,
    );
    diff_kind(EntityKind::Object, &a.objects, &b.objects, |x| &x.id, &mut entries);
    BuildDiff {
        from_build: a.build_id.clone(),
        to_build: b.build_id.clone(),
        entries,
    }
}

fn diff_kind<T: Serialize>(
    kind: EntityKind,
    a: &[T],
    b: &[T],
    id: impl Fn(&T) -> &String,
    out: &mut Vec<DiffEntry>,
) {
    let left: BTreeMap<&String, &T> = a.iter().map(|x| (id(x), x)).collect();
    let right: BTreeMap<&String, &T> = b.iter().map(|x| (id(x), x)).collect();
    for (key, l) in &left {
        match right.get(key) {
            None => out.push(DiffEntry {
                kind: DiffKind::Removed,
                entity_kind: kind,
                entity_id: key.to_string(),
                field: None,
                old: Some(to_value(l)),
                new: None,
            }),
            Some(r) => {
                let mut lf = BTreeMap::new();
                let mut rf = BTreeMap::new();
                flatten("", to_value(l), &mut lf);
                flatten("", to_value(r), &mut rf);
                let fields: std::collections::BTreeSet<&String> =
                    lf.keys().chain(rf.keys()).collect();
                for f in fields {
                    let (o, n) = (lf.get(f), rf.get(f));
                    if o != n {
                        out.push(DiffEntry {
                            kind: DiffKind::Changed,
                            entity_kind: kind,
                            entity_id: key.to_string(),
                            field: Some(f.clone()),
                            old: o.cloned(),
                            new: n.cloned(),
                        });
                    }
                }
            }
        }
    }
    for (key, r) in &right {
        if !left.contains_key(key) {
            out.push(DiffEntry {
                kind: DiffKind::Added,
                entity_kind: kind,
                entity_id: key.to_string(),
                field: None,
                old: None,
                new: Some(to_value(r)),
            });
        }
    }
}

fn to_value<T: Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("tuning entity serializes")
}

fn flatten(prefix: &str, value: Value, out: &mut BTreeMap<String, Value>) {
    match value {
        Value::Object(map) if !map.is_empty() => {
            for (k, v) in map {
                if prefix.is_empty() && k == "id" {
                    continue;
                }
                let path = if prefix.is_empty() {
                    k
                } else {
                    format!("{prefix}.{k}")
                };
                flatten(&path, v, out);
            }
        }
        // empty maps and absent optional fields are equivalent
        Value::Object(_) | Value::Null => {}
        other => {
            out.insert(prefix.to_string(), other);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tuning::{ActionSpec, Rational, ResourceSpec};

    fn base() -> TuningConfig {
        TuningConfig {
            schema_version: 1,
            build_id: "a".into(),
            resources: vec![ResourceSpec {
                id: "energy".into(),
                capacity: 10,
                regen_rate: Rational::new(1, 6),
                initial: 10,
            }],
            actions: vec![ActionSpec {
                id: "brew".into(),
                costs: [("energy".to_string(), 2)].into(),
                consumes_items: Default::default(),
                duration: 1,
                cooldown: 0,
                rewards: Default::default(),
                requires: Default::default(),
                category_tag: String::new(),
                filler: false,
                delayed_effect: false,
            }],
            events: vec![],
            careers: vec![],
            relationships: vec![],
            objects: vec![],
        }
    }

    #[test]
    fn identity_is_empty() {
        assert!(diff_builds(&base(), &base()).is_empty());
    }

    #[test]
    fn single_field_change() {
        let a = base();
        let mut b = base();
        b.actions[0].cooldown = 30;
        let d = diff_builds(&a, &b);
        assert_eq!(d.entries.len(), 1);
        let e = &d.entries[0];
        assert_eq!(e.kind, DiffKind::Changed);
        assert_eq!(e.entity_id, "brew");
        assert_eq!(e.field.as_deref(), Some("cooldown"));
        assert_eq!(e.old, Some(Value::from(0)));
        assert_eq!(e.new, Some(Value::from(30)));
    }

    #[test]
    fn nested_fields_use_dotted_paths() {
        let a = base();
        let mut b = base();
        b.resources[0].regen_rate = Rational::new(1, 2);
        let d = diff_builds(&a, &b);
        assert_eq!(d.entries.len(), 1);
        assert_eq!(d.entries[0].field.as_deref(), Some("regen_rate.den"));
    }

    #[test]
    fn added_and_removed_entities() {
        let a = base();
        let mut b = base();
        b.actions[0].id = "pour".into();
        let d = diff_builds(&a, &b);
        let kinds: Vec<_> = d.entries.iter().map(|e| (e.kind, e.entity_id.as_str())).collect();
        assert_eq!(
            kinds,
            vec![(DiffKind::Removed, "brew"), (DiffKind::Added, "pour")]
        );
    }
}
