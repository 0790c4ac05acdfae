//! Game-definition documents and their validated, index-resolved form.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hashrep::str_hash;

/// The ten navigation directions, declared in alphabetical order so that the
/// derived `Ord` sorts them by name.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Down,
    East,
    North,
    Northeast,
    Northwest,
    South,
    Southeast,
    Southwest,
    Up,
    West,
}

impl Direction {
    pub const ALL: [Direction; 10] = [
        Direction::Down,
        Direction::East,
        Direction::North,
        Direction::Northeast,
        Direction::Northwest,
        Direction::South,
        Direction::Southeast,
        Direction::Southwest,
        Direction::Up,
        Direction::West,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Direction::Down => "down",
            Direction::East => "east",
            Direction::North => "north",
            Direction::Northeast => "northeast",
            Direction::Northwest => "northwest",
            Direction::South => "south",
            Direction::Southeast => "southeast",
            Direction::Southwest => "southwest",
            Direction::Up => "up",
            Direction::West => "west",
        }
    }

    /// Accepts the canonical word, the usual one/two-letter abbreviation,
    /// and either form prefixed with `go `.
    pub fn parse_command(cmd: &str) -> Option<Direction> {
        let word = cmd.strip_prefix("go ").unwrap_or(cmd);
        let dir = match word {
            "down" | "d" => Direction::Down,
            "east" | "e" => Direction::East,
            "north" | "n" => Direction::North,
            "northeast" | "ne" => Direction::Northeast,
            "northwest" | "nw" => Direction::Northwest,
            "south" | "s" => Direction::South,
            "southeast" | "se" => Direction::Southeast,
            "southwest" | "sw" => Direction::Southwest,
            "up" | "u" => Direction::Up,
            "west" | "w" => Direction::West,
            _ => return None,
        };
        Some(dir)
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Direction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Direction::ALL
            .into_iter()
            .find(|d| d.as_str() == s)
            .ok_or_else(|| Error::Validation(format!("unknown direction '{s}'")))
    }
}

/// Lower-cases and collapses whitespace; direction aliases become the
/// canonical direction word.
pub fn normalize_command(action: &str) -> String {
    let cmd = action
        .split_whitespace()
        .map(str::to_lowercase)
        .collect::<Vec<_>>()
        .join(" ");
    match Direction::parse_command(&cmd) {
        Some(d) => d.as_str().to_string(),
        None => cmd,
    }
}

// ---------------------------------------------------------------------------
// Document schema

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawGame {
    pub meta: RawMeta,
    pub rooms: Vec<RawRoom>,
    #[serde(default)]
    pub objects: Vec<RawObject>,
    #[serde(default)]
    pub triggers: Vec<RawTrigger>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawMeta {
    pub name: String,
    pub max_score: i64,
    pub start_room: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawRoom {
    pub id: String,
    pub name: String,
    pub desc: String,
    #[serde(default)]
    pub exits: BTreeMap<Direction, String>,
    #[serde(default)]
    pub dark: bool,
    /// Sentences appended to the description while their conditions hold.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub details: Vec<RawDetail>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawDetail {
    #[serde(default)]
    pub when: Vec<RawCondition>,
    pub text: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawObject {
    pub id: String,
    pub name: String,
    /// A room id, an object id (contained, hidden), `inventory` or `nowhere`.
    pub location: String,
    #[serde(default = "yes")]
    pub portable: bool,
    #[serde(default)]
    pub light_source: bool,
    #[serde(default)]
    pub switchable: bool,
    #[serde(default)]
    pub on: bool,
}

fn yes() -> bool {
    true
}

fn any_room() -> String {
    "any".to_string()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawTrigger {
    pub id: String,
    pub verb: String,
    #[serde(default = "any_room")]
    pub room: String,
    #[serde(default)]
    pub requires: Vec<RawCondition>,
    #[serde(default)]
    pub effects: Vec<RawEffect>,
    #[serde(default = "yes")]
    pub once: bool,
    #[serde(default)]
    pub message: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum RawCondition {
    Flag(String),
    NotFlag(String),
    Carrying(String),
    NotCarrying(String),
    On(String),
    Off(String),
    /// `true`: the player has light; `false`: the player is in the dark.
    Lit(bool),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum RawEffect {
    SetFlag(String),
    MovePlayer(String),
    RevealExit {
        room: String,
        direction: Direction,
        to: String,
    },
    MoveObject {
        object: String,
        to: String,
    },
    Reward(i64),
    EndEpisode,
    KillPlayer,
}

// ---------------------------------------------------------------------------
// Resolved form

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Loc {
    Room(usize),
    Inventory,
    Inside(usize),
    Nowhere,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Condition {
    Flag(String),
    NotFlag(String),
    Carrying(usize),
    NotCarrying(usize),
    On(usize),
    Off(usize),
    Lit(bool),
}

#[derive(Debug, Clone, PartialEq)]
pub enum Effect {
    SetFlag(String),
    MovePlayer(usize),
    RevealExit {
        room: usize,
        direction: Direction,
        to: usize,
    },
    MoveObject {
        object: usize,
        to: Loc,
    },
    Reward(i64),
    EndEpisode,
    KillPlayer,
}

#[derive(Debug, Clone)]
pub struct RoomDef {
    pub id: String,
    pub name: String,
    pub desc: String,
    pub exits: BTreeMap<Direction, usize>,
    pub dark: bool,
    pub details: Vec<(Vec<Condition>, String)>,
}

#[derive(Debug, Clone)]
pub struct ObjectDef {
    pub id: String,
    pub name: String,
    pub initial_location: Loc,
    pub portable: bool,
    pub light_source: bool,
    pub switchable: bool,
    pub initially_on: bool,
}

#[derive(Debug, Clone)]
pub struct TriggerDef {
    pub id: String,
    /// Normalized action text.
    pub verb_phrase: String,
    /// `None` means the trigger works in any room.
    pub room: Option<usize>,
    pub requires: Vec<Condition>,
    pub effects: Vec<Effect>,
    pub once: bool,
    pub message: String,
}

impl TriggerDef {
    pub fn total_reward(&self) -> i64 {
        self.effects
            .iter()
            .map(|e| match e {
                Effect::Reward(r) => *r,
                _ => 0,
            })
            .sum()
    }
}

/// A validated game.
#[derive(Debug, Clone)]
pub struct GameDef {
    pub name: String,
    pub max_score: i64,
    pub start_room: usize,
    pub rooms: Vec<RoomDef>,
    pub objects: Vec<ObjectDef>,
    pub triggers: Vec<TriggerDef>,
    /// FNV-1a of the canonical re-serialization of the document.
    pub game_id: u64,
    room_index: HashMap<String, usize>,
}

impl GameDef {
    pub fn room_by_id(&self, id: &str) -> Option<usize> {
        self.room_index.get(id).copied()
    }

    pub fn object_by_name(&self, name: &str) -> Option<usize> {
        self.objects.iter().position(|o| o.name == name)
    }

    /// Every string the engine can emit or accept, for vocabulary building.
    pub fn text_corpus(&self) -> Vec<String> {
        let mut out: Vec<String> = super::FIXED_TEXTS.iter().map(|s| s.to_string()).collect();
        out.extend(Direction::ALL.iter().map(|d| d.as_str().to_string()));
        for r in &self.rooms {
            out.push(r.name.clone());
            out.push(r.desc.clone());
            out.extend(r.details.iter().map(|(_, t)| t.clone()));
        }
        for o in &self.objects {
            out.push(o.name.clone());
        }
        for t in &self.triggers {
            out.push(t.verb_phrase.clone());
            out.push(t.message.clone());
        }
        out
    }
}

fn valid_ident(s: &str) -> bool {
    !s.is_empty()
        && s.chars()
            .all(|c| c.is_ascii_lowercase() || c.is_ascii_digit() || c == '_' || c == '-')
}

/// Parses and validates a game-definition document.
pub fn load_game(text: &str) -> Result<GameDef> {
    let raw: RawGame = serde_json::from_str(text).map_err(|e| Error::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    compile(raw)
}

pub fn load_game_file(path: impl AsRef<std::path::Path>) -> Result<GameDef> {
    let text = std::fs::read_to_string(path)?;
    load_game(&text)
}

pub fn compile(raw: RawGame) -> Result<GameDef> {
    let invalid = |msg: String| Err(Error::Validation(msg));
    let game_id = str_hash(&serde_json::to_string(&raw)?);

    let mut room_index = HashMap::new();
    let mut object_index = HashMap::new();
    let mut seen = HashSet::new();
    for (i, r) in raw.rooms.iter().enumerate() {
        if !valid_ident(&r.id) {
            return invalid(format!("room id '{}' must match [a-z0-9_-]+", r.id));
        }
        if !seen.insert(r.id.as_str()) {
            return invalid(format!("duplicate id '{}'", r.id));
        }
        room_index.insert(r.id.clone(), i);
    }
    for (i, o) in raw.objects.iter().enumerate() {
        if !valid_ident(&o.id) || o.id == "inventory" || o.id == "nowhere" || o.id == "any" {
            return invalid(format!("object id '{}' is not a usable identifier", o.id));
        }
        if !seen.insert(o.id.as_str()) {
            return invalid(format!("duplicate id '{}'", o.id));
        }
        object_index.insert(o.id.clone(), i);
    }
    if raw.rooms.is_empty() {
        return invalid("a game needs at least one room".into());
    }
    let Some(&start_room) = room_index.get(&raw.meta.start_room) else {
        return invalid(format!(
            "start room '{}' is not a declared room",
            raw.meta.start_room
        ));
    };

    let room = |id: &str, ctx: &str| -> Result<usize> {
        room_index
            .get(id)
            .copied()
            .ok_or_else(|| Error::Validation(format!("{ctx}: undeclared room '{id}'")))
    };
    let object = |id: &str, ctx: &str| -> Result<usize> {
        object_index
            .get(id)
            .copied()
            .ok_or_else(|| Error::Validation(format!("{ctx}: undeclared object '{id}'")))
    };
    let location = |id: &str, ctx: &str| -> Result<Loc> {
        match id {
            "inventory" => Ok(Loc::Inventory),
            "nowhere" => Ok(Loc::Nowhere),
            _ => {
                if let Some(&r) = room_index.get(id) {
                    Ok(Loc::Room(r))
                } else if let Some(&o) = object_index.get(id) {
                    Ok(Loc::Inside(o))
                } else {
                    Err(Error::Validation(format!(
                        "{ctx}: undeclared location '{id}'"
                    )))
                }
            }
        }
    };
    let condition = |c: &RawCondition, ctx: &str| -> Result<Condition> {
        Ok(match c {
            RawCondition::Flag(f) | RawCondition::NotFlag(f) if !valid_ident(f) => {
                return Err(Error::Validation(format!("{ctx}: bad flag name '{f}'")))
            }
            RawCondition::Flag(f) => Condition::Flag(f.clone()),
            RawCondition::NotFlag(f) => Condition::NotFlag(f.clone()),
            RawCondition::Carrying(o) => Condition::Carrying(object(o, ctx)?),
            RawCondition::NotCarrying(o) => Condition::NotCarrying(object(o, ctx)?),
            RawCondition::On(o) => Condition::On(object(o, ctx)?),
            RawCondition::Off(o) => Condition::Off(object(o, ctx)?),
            RawCondition::Lit(b) => Condition::Lit(*b),
        })
    };

    let mut rooms = Vec::with_capacity(raw.rooms.len());
    for r in &raw.rooms {
        let mut exits = BTreeMap::new();
        for (dir, target) in &r.exits {
            let ctx = format!("room '{}' exit '{}'", r.id, dir);
            exits.insert(*dir, room(target, &ctx)?);
        }
        let details = r
            .details
            .iter()
            .map(|d| {
                let ctx = format!("room '{}' detail", r.id);
                let when = d
                    .when
                    .iter()
                    .map(|c| condition(c, &ctx))
                    .collect::<Result<Vec<_>>>()?;
                Ok((when, d.text.clone()))
            })
            .collect::<Result<Vec<_>>>()?;
        rooms.push(RoomDef {
            id: r.id.clone(),
            name: r.name.clone(),
            desc: r.desc.clone(),
            exits,
            dark: r.dark,
            details,
        });
    }

    let mut names = HashSet::new();
    let mut objects = Vec::with_capacity(raw.objects.len());
    for o in &raw.objects {
        let name = normalize_command(&o.name);
        if name.is_empty() || !names.insert(name.clone()) {
            return invalid(format!(
                "object '{}': name '{}' is empty or not unique",
                o.id, o.name
            ));
        }
        let ctx = format!("object '{}'", o.id);
        let initial_location = location(&o.location, &ctx)?;
        if initial_location == Loc::Inside(object_index[&o.id]) {
            return invalid(format!("object '{}' contains itself", o.id));
        }
        objects.push(ObjectDef {
            id: o.id.clone(),
            name,
            initial_location,
            portable: o.portable,
            light_source: o.light_source,
            switchable: o.switchable,
            initially_on: o.on,
        });
    }
    // containment must be acyclic
    for start in 0..objects.len() {
        let mut cur = objects[start].initial_location;
        let mut hops = 0;
        while let Loc::Inside(p) = cur {
            hops += 1;
            if hops > objects.len() {
                return invalid(format!(
                    "object '{}' is in a containment cycle",
                    objects[start].id
                ));
            }
            cur = objects[p].initial_location;
        }
    }

    let mut trigger_ids = HashSet::new();
    let mut triggers = Vec::with_capacity(raw.triggers.len());
    for t in &raw.triggers {
        if !valid_ident(&t.id) || !trigger_ids.insert(t.id.as_str()) {
            return invalid(format!("trigger id '{}' is invalid or duplicated", t.id));
        }
        let ctx = format!("trigger '{}'", t.id);
        let verb_phrase = normalize_command(&t.verb);
        if verb_phrase.is_empty() {
            return invalid(format!("{ctx}: empty verb"));
        }
        let trigger_room = if t.room == "any" {
            None
        } else {
            Some(room(&t.room, &ctx)?)
        };
        let requires = t
            .requires
            .iter()
            .map(|c| condition(c, &ctx))
            .collect::<Result<Vec<_>>>()?;
        let mut effects = Vec::with_capacity(t.effects.len());
        for e in &t.effects {
            effects.push(match e {
                RawEffect::SetFlag(f) => {
                    if !valid_ident(f) {
                        return invalid(format!("{ctx}: bad flag name '{f}'"));
                    }
                    Effect::SetFlag(f.clone())
                }
                RawEffect::MovePlayer(r) => Effect::MovePlayer(room(r, &ctx)?),
                RawEffect::RevealExit {
                    room: r,
                    direction,
                    to,
                } => Effect::RevealExit {
                    room: room(r, &ctx)?,
                    direction: *direction,
                    to: room(to, &ctx)?,
                },
                RawEffect::MoveObject { object: o, to } => {
                    let obj = object(o, &ctx)?;
                    let to = location(to, &ctx)?;
                    if to == Loc::Inside(obj) {
                        return invalid(format!("{ctx}: object '{o}' moved into itself"));
                    }
                    Effect::MoveObject { object: obj, to }
                }
                RawEffect::Reward(r) => {
                    if *r < 0 {
                        return invalid(format!("{ctx}: negative reward {r}"));
                    }
                    Effect::Reward(*r)
                }
                RawEffect::EndEpisode => Effect::EndEpisode,
                RawEffect::KillPlayer => Effect::KillPlayer,
            });
        }
        let def = TriggerDef {
            id: t.id.clone(),
            verb_phrase,
            room: trigger_room,
            requires,
            effects,
            once: t.once,
            message: t.message.clone(),
        };
        if def.effects.contains(&Effect::KillPlayer) && def.total_reward() > 0 {
            return invalid(format!("{ctx}: a fatal trigger cannot award points"));
        }
        if def.total_reward() > 0 && !def.once {
            return invalid(format!("{ctx}: rewarding triggers must be once-only"));
        }
        triggers.push(def);
    }

    let best_single = triggers
        .iter()
        .map(TriggerDef::total_reward)
        .max()
        .unwrap_or(0);
    let total: i64 = triggers.iter().map(TriggerDef::total_reward).sum();
    let max_score = raw.meta.max_score;
    if max_score < best_single || max_score > total {
        return invalid(format!(
            "max_score {max_score} must lie between the largest trigger reward ({best_single}) and the sum of all rewards ({total})"
        ));
    }

    Ok(GameDef {
        name: raw.meta.name.clone(),
        max_score,
        start_room,
        rooms,
        objects,
        triggers,
        game_id,
        room_index,
    })
}
