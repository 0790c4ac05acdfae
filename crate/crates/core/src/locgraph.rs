//! Approximate state hashing from location structure.
//!
//! The current location is fingerprinted by trying every direction from a
//! snapshot and recording where each world-changing move leads, down to a
//! bounded depth. A per-episode map remembers the most recent look text seen
//! at each fingerprint. Both structures are serialized canonically and hashed.

use std::collections::{BTreeMap, HashMap};

use serde_json::Value;

use crate::engine::{Direction, Env};
use crate::error::{Error, Result};
use crate::hashrep::{hash_vec, HashConfig, HashVector};

pub const DEFAULT_DEPTH: usize = 1;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Neighbor {
    Name(String),
    Profile(Box<NearbyProfile>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NearbyProfile {
    pub room_name: String,
    /// Sorted by direction; only directions whose step changed the world.
    pub nearby: Vec<(Direction, Neighbor)>,
}

impl NearbyProfile {
    fn to_value(&self) -> Value {
        let nearby = self
            .nearby
            .iter()
            .map(|(d, n)| {
                let n = match n {
                    Neighbor::Name(s) => Value::String(s.clone()),
                    Neighbor::Profile(p) => p.to_value(),
                };
                Value::Array(vec![Value::String(d.to_string()), n])
            })
            .collect();
        Value::Array(vec![
            Value::String(self.room_name.clone()),
            Value::Array(nearby),
        ])
    }

    /// Depth-1 view of a deeper profile.
    pub fn truncate(&self) -> NearbyProfile {
        NearbyProfile {
            room_name: self.room_name.clone(),
            nearby: self
                .nearby
                .iter()
                .map(|(d, n)| {
                    let name = match n {
                        Neighbor::Name(s) => s.clone(),
                        Neighbor::Profile(p) => p.room_name.clone(),
                    };
                    (*d, Neighbor::Name(name))
                })
                .collect(),
        }
    }
}

/// Canonical serialization of a profile as JSON:
/// `[room_name, [[direction, name | nested profile], ...]]`.
pub fn serialize_profile(p: &NearbyProfile) -> String {
    p.to_value().to_string()
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LocationKey(pub String);

impl LocationKey {
    pub fn from_profile(p: &NearbyProfile) -> Self {
        Self(serialize_profile(p))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

/// Fingerprints the current location by exploring every direction up to
/// `depth` moves away. The environment is restored after each probe, so
/// its state hash and current observation are unchanged on return.
///
/// A probe that ends the episode records the room name without recursing.
pub fn locate(env: &mut Env, depth: usize) -> Result<NearbyProfile> {
    if env.is_done() {
        return Err(Error::EnvDone);
    }
    if depth == 0 {
        return Err(Error::Config("locate depth must be at least 1".into()));
    }
    let snap = env.snapshot();
    let room_name = env.room_name().to_string();
    let mut nearby = Vec::new();
    for dir in Direction::ALL {
        let res = env.step(dir.as_str())?;
        if res.world_changed {
            let n = if depth > 1 && !env.is_done() {
                Neighbor::Profile(Box::new(locate(env, depth - 1)?))
            } else {
                Neighbor::Name(env.room_name().to_string())
            };
            nearby.push((dir, n));
        }
        env.restore(&snap)?;
    }
    Ok(NearbyProfile { room_name, nearby })
}

/// Last-look memory: location key to the look text at the latest visit.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LocationMap {
    entries: Vec<(LocationKey, String)>,
    index: HashMap<LocationKey, usize>,
}

impl LocationMap {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, key: &LocationKey) -> Option<&str> {
        self.index.get(key).map(|&i| self.entries[i].1.as_str())
    }

    pub fn insert(&mut self, key: LocationKey, look: String) {
        match self.index.get(&key) {
            Some(&i) => self.entries[i].1 = look,
            None => {
                self.index.insert(key.clone(), self.entries.len());
                self.entries.push((key, look));
            }
        }
    }

    /// Entries in insertion order.
    pub fn iter(&self) -> impl Iterator<Item = (&LocationKey, &str)> {
        self.entries.iter().map(|(k, v)| (k, v.as_str()))
    }
}

/// Canonical serialization: a JSON object with sorted keys; `{}` when empty.
pub fn serialize_map(m: &LocationMap) -> String {
    let sorted: BTreeMap<&str, &str> = m.iter().map(|(k, v)| (k.as_str(), v)).collect();
    serde_json::to_string(&sorted).expect("string map serializes")
}

/// Inverse of [`serialize_map`]. Entries come back in key order.
pub fn parse_map(s: &str) -> Result<LocationMap> {
    let sorted: BTreeMap<String, String> = serde_json::from_str(s)?;
    let mut m = LocationMap::new();
    for (k, v) in sorted {
        m.insert(LocationKey(k), v);
    }
    Ok(m)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KeyMode {
    /// Key by the serialized nearby profile at the given depth.
    Locate(usize),
    /// Key by the ground-truth room id.
    GtRoom,
}

impl Default for KeyMode {
    fn default() -> Self {
        KeyMode::Locate(DEFAULT_DEPTH)
    }
}

#[derive(Debug, Clone)]
pub struct LocationUpdate {
    pub key: LocationKey,
    /// Present in `Locate` mode.
    pub profile: Option<NearbyProfile>,
}

/// Records the current look text under the current location key.
pub fn update_and_get_state(
    env: &mut Env,
    map: &mut LocationMap,
    mode: KeyMode,
) -> Result<LocationUpdate> {
    if env.is_done() {
        return Err(Error::EnvDone);
    }
    let (key, profile) = match mode {
        KeyMode::Locate(depth) => {
            let p = locate(env, depth)?;
            (LocationKey::from_profile(&p), Some(p))
        }
        KeyMode::GtRoom => (LocationKey(env.gt_room_id().to_string()), None),
    };
    map.insert(key.clone(), env.look_text());
    Ok(LocationUpdate { key, profile })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ApproxState {
    pub po1_vec: HashVector,
    pub po2_vec: HashVector,
}

impl ApproxState {
    pub fn from_parts(profile: &NearbyProfile, map: &LocationMap, cfg: &HashConfig) -> Self {
        Self {
            po1_vec: hash_vec(&serialize_profile(profile), cfg),
            po2_vec: hash_vec(&serialize_map(map), cfg),
        }
    }
}

/// Hash vectors of the current nearby profile and of the location map.
/// Expects `update_and_get_state` to have run for the current step.
pub fn approx_state(
    env: &mut Env,
    map: &LocationMap,
    depth: usize,
    cfg: &HashConfig,
) -> Result<ApproxState> {
    let profile = locate(env, depth)?;
    Ok(ApproxState::from_parts(&profile, map, cfg))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_map_serializes_to_braces() {
        assert_eq!(serialize_map(&LocationMap::new()), "{}");
    }

    #[test]
    fn map_overwrites_keep_position() {
        let mut m = LocationMap::new();
        m.insert(LocationKey("b".into()), "1".into());
        m.insert(LocationKey("a".into()), "2".into());
        m.insert(LocationKey("b".into()), "3".into());
        assert_eq!(m.len(), 2);
        let order: Vec<_> = m.iter().map(|(k, v)| (k.as_str(), v)).collect();
        assert_eq!(order, vec![("b", "3"), ("a", "2")]);
        assert_eq!(serialize_map(&m), r#"{"a":"2","b":"3"}"#);
    }

    #[test]
    fn insertion_order_does_not_change_serialization() {
        let mut a = LocationMap::new();
        let mut b = LocationMap::new();
        for (k, v) in [("x", "1"), ("y", "2"), ("z", "3")] {
            a.insert(LocationKey(k.into()), v.into());
        }
        for (k, v) in [("z", "3"), ("x", "1"), ("y", "2")] {
            b.insert(LocationKey(k.into()), v.into());
        }
        assert_eq!(serialize_map(&a), serialize_map(&b));
    }

    #[test]
    fn profile_serialization_layout() {
        let p = NearbyProfile {
            room_name: "Field".into(),
            nearby: vec![(Direction::East, Neighbor::Name("Cellar entrance".into()))],
        };
        assert_eq!(
            serialize_profile(&p),
            r#"["Field",[["east","Cellar entrance"]]]"#
        );
        let nested = NearbyProfile {
            room_name: "A".into(),
            nearby: vec![(Direction::Up, Neighbor::Profile(Box::new(p.clone())))],
        };
        assert_eq!(
            serialize_profile(&nested),
            r#"["A",[["up",["Field",[["east","Cellar entrance"]]]]]]"#
        );
        assert_eq!(
            nested.truncate().nearby[0].1,
            Neighbor::Name("Field".into())
        );
    }
}
