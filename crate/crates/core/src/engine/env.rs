use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::sync::Arc;

use super::def::{Condition, Direction, Effect, GameDef, Loc};
use super::{
    normalize_command, CARRYING, DARKNESS, DIED, DROPPED, EMPTY_HANDED, NOTHING_HAPPENS, TAKEN,
};
use crate::error::{Error, Result};
use crate::hashrep::str_hash;

/// The mutable runtime state of a game.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WorldState {
    pub player_room: usize,
    /// Indexed like `GameDef::objects`.
    pub object_locations: Vec<Loc>,
    pub object_on: Vec<bool>,
    pub flags: BTreeSet<String>,
    pub fired_triggers: BTreeSet<usize>,
    pub revealed_exits: BTreeMap<(usize, Direction), usize>,
    pub score: i64,
    pub done: bool,
}

impl WorldState {
    pub fn initial(game: &GameDef) -> Self {
        Self {
            player_room: game.start_room,
            object_locations: game.objects.iter().map(|o| o.initial_location).collect(),
            object_on: game.objects.iter().map(|o| o.initially_on).collect(),
            flags: BTreeSet::new(),
            fired_triggers: BTreeSet::new(),
            revealed_exits: BTreeMap::new(),
            score: 0,
            done: false,
        }
    }

    /// Canonical serialization: identifiers only, sorted, fixed delimiters.
    /// Identifiers are restricted to `[a-z0-9_-]` so no escaping is needed.
    pub fn canonical(&self, game: &GameDef) -> String {
        let loc = |l: Loc| match l {
            Loc::Room(r) => game.rooms[r].id.clone(),
            Loc::Inventory => "inventory".to_string(),
            Loc::Inside(o) => format!("in:{}", game.objects[o].id),
            Loc::Nowhere => "nowhere".to_string(),
        };
        let mut objects: Vec<(String, String)> = game
            .objects
            .iter()
            .zip(&self.object_locations)
            .map(|(o, &l)| (o.id.clone(), loc(l)))
            .collect();
        objects.sort();
        let mut on: Vec<&str> = game
            .objects
            .iter()
            .zip(&self.object_on)
            .filter(|(_, &on)| on)
            .map(|(o, _)| o.id.as_str())
            .collect();
        on.sort_unstable();
        let mut fired: Vec<&str> = self
            .fired_triggers
            .iter()
            .map(|&t| game.triggers[t].id.as_str())
            .collect();
        fired.sort_unstable();
        let mut exits: Vec<String> = self
            .revealed_exits
            .iter()
            .map(|(&(r, d), &to)| format!("{}.{}>{}", game.rooms[r].id, d, game.rooms[to].id))
            .collect();
        exits.sort();

        let mut s = String::with_capacity(128);
        let _ = write!(s, "room={};objects=", game.rooms[self.player_room].id);
        for (i, (id, l)) in objects.iter().enumerate() {
            if i > 0 {
                s.push(',');
            }
            let _ = write!(s, "{id}@{l}");
        }
        let flags: Vec<&str> = self.flags.iter().map(String::as_str).collect();
        let _ = write!(
            s,
            ";on={};flags={};fired={};exits={};score={};done={}",
            on.join(","),
            flags.join(","),
            fired.join(","),
            exits.join(","),
            self.score,
            u8::from(self.done)
        );
        s
    }
}

/// The observation triple: action response, inventory text, look text.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Observation {
    pub response: String,
    pub inventory_text: String,
    pub look_text: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StepResult {
    pub observation: Observation,
    pub reward: i64,
    pub done: bool,
    pub world_changed: bool,
}

/// An opaque copy of an environment's state.
#[derive(Debug, Clone)]
pub struct Snapshot {
    game_id: u64,
    state: WorldState,
    last_response: String,
}

impl Snapshot {
    pub fn game_id(&self) -> u64 {
        self.game_id
    }
}

/// A running game. Single-threaded; distinct handles are independent.
#[derive(Debug, Clone)]
pub struct Env {
    game: Arc<GameDef>,
    state: WorldState,
    last_response: String,
}

/// Creates an environment in its initial configuration.
pub fn reset(game: Arc<GameDef>) -> (Env, Observation) {
    let mut env = Env {
        state: WorldState::initial(&game),
        game,
        last_response: String::new(),
    };
    let obs = env.reset();
    (env, obs)
}

impl Env {
    pub fn new(game: Arc<GameDef>) -> Self {
        reset(game).0
    }

    pub fn game(&self) -> &Arc<GameDef> {
        &self.game
    }

    pub fn state(&self) -> &WorldState {
        &self.state
    }

    pub fn reset(&mut self) -> Observation {
        self.state = WorldState::initial(&self.game);
        self.last_response = self.look_text();
        self.observation()
    }

    pub fn is_done(&self) -> bool {
        self.state.done
    }

    pub fn score(&self) -> i64 {
        self.state.score
    }

    /// The current observation, with the most recent response.
    pub fn observation(&self) -> Observation {
        Observation {
            response: self.last_response.clone(),
            inventory_text: self.inventory_text(),
            look_text: self.look_text(),
        }
    }

    pub fn canonical_state(&self) -> String {
        self.state.canonical(&self.game)
    }

    pub fn gt_state_hash(&self) -> u64 {
        str_hash(&self.canonical_state())
    }

    pub fn gt_room_id(&self) -> &str {
        &self.game.rooms[self.state.player_room].id
    }

    pub fn room_name(&self) -> &str {
        &self.game.rooms[self.state.player_room].name
    }

    pub fn snapshot(&self) -> Snapshot {
        Snapshot {
            game_id: self.game.game_id,
            state: self.state.clone(),
            last_response: self.last_response.clone(),
        }
    }

    pub fn restore(&mut self, snap: &Snapshot) -> Result<()> {
        if snap.game_id != self.game.game_id {
            return Err(Error::SnapshotMismatch {
                snapshot: snap.game_id,
                env: self.game.game_id,
            });
        }
        self.state.clone_from(&snap.state);
        self.last_response.clone_from(&snap.last_response);
        Ok(())
    }

    pub fn step(&mut self, action: &str) -> Result<StepResult> {
        if self.state.done {
            return Err(Error::EnvDone);
        }
        let before = self.canonical_state();
        let cmd = normalize_command(action);
        let (response, reward) = self.apply(&cmd);
        let world_changed = self.canonical_state() != before;
        self.last_response = response;
        Ok(StepResult {
            observation: self.observation(),
            reward,
            done: self.state.done,
            world_changed,
        })
    }

    /// All actions that would change the world, plus `look` and `inventory`,
    /// sorted. Derived from the rules rather than by trial stepping.
    pub fn valid_actions(&self) -> Result<Vec<String>> {
        if self.state.done {
            return Err(Error::EnvDone);
        }
        let game = &*self.game;
        let st = &self.state;
        let mut out = BTreeSet::new();
        out.insert("look".to_string());
        out.insert("inventory".to_string());

        // verbs captured by an applicable trigger; the first one decides
        let mut captured = BTreeSet::new();
        for t in self.applicable_triggers() {
            let trig = &game.triggers[t];
            if !captured.insert(trig.verb_phrase.as_str()) {
                continue;
            }
            if trig.once || self.trigger_changes_world(t) {
                out.insert(trig.verb_phrase.clone());
            }
        }
        let free = |cmd: &str| !captured.contains(cmd);

        for d in Direction::ALL {
            if let Some(to) = self.exit(st.player_room, d) {
                if to != st.player_room && free(d.as_str()) {
                    out.insert(d.as_str().to_string());
                }
            }
        }
        for (i, obj) in game.objects.iter().enumerate() {
            let loc = st.object_locations[i];
            let mut candidates = Vec::new();
            if loc == Loc::Room(st.player_room) && obj.portable {
                candidates.push(format!("take {}", obj.name));
            }
            if loc == Loc::Inventory {
                candidates.push(format!("drop {}", obj.name));
                if obj.switchable {
                    let verb = if st.object_on[i] {
                        "turn off"
                    } else {
                        "turn on"
                    };
                    candidates.push(format!("{verb} {}", obj.name));
                }
            }
            out.extend(candidates.into_iter().filter(|c| free(c)));
        }
        Ok(out.into_iter().collect())
    }

    // -----------------------------------------------------------------------

    fn exit(&self, room: usize, dir: Direction) -> Option<usize> {
        self.state
            .revealed_exits
            .get(&(room, dir))
            .or_else(|| self.game.rooms[room].exits.get(&dir))
            .copied()
    }

    fn has_light(&self) -> bool {
        let here = Loc::Room(self.state.player_room);
        self.game.objects.iter().enumerate().any(|(i, o)| {
            let loc = self.state.object_locations[i];
            o.light_source && self.state.object_on[i] && (loc == Loc::Inventory || loc == here)
        })
    }

    fn holds(&self, c: &Condition) -> bool {
        let st = &self.state;
        match c {
            Condition::Flag(f) => st.flags.contains(f),
            Condition::NotFlag(f) => !st.flags.contains(f),
            Condition::Carrying(o) => st.object_locations[*o] == Loc::Inventory,
            Condition::NotCarrying(o) => st.object_locations[*o] != Loc::Inventory,
            Condition::On(o) => st.object_on[*o],
            Condition::Off(o) => !st.object_on[*o],
            Condition::Lit(b) => self.has_light() == *b,
        }
    }

    fn applicable_triggers(&self) -> impl Iterator<Item = usize> + '_ {
        self.game.triggers.iter().enumerate().filter_map(|(i, t)| {
            let room_ok = t.room.map_or(true, |r| r == self.state.player_room);
            let spent = t.once && self.state.fired_triggers.contains(&i);
            (room_ok && !spent && t.requires.iter().all(|c| self.holds(c))).then_some(i)
        })
    }

    fn trigger_changes_world(&self, t: usize) -> bool {
        let mut probe = self.clone();
        let before = probe.state.clone();
        probe.fire(t);
        probe.state != before
    }

    pub fn look_text(&self) -> String {
        let room = &self.game.rooms[self.state.player_room];
        if room.dark && !self.has_light() {
            return DARKNESS.to_string();
        }
        let mut s = format!("{}\n{}", room.name, room.desc);
        for (when, text) in &room.details {
            if when.iter().all(|c| self.holds(c)) {
                s.push(' ');
                s.push_str(text);
            }
        }
        let here = Loc::Room(self.state.player_room);
        let mut visible: Vec<String> = self
            .game
            .objects
            .iter()
            .enumerate()
            .filter(|(i, _)| self.state.object_locations[*i] == here)
            .map(|(i, _)| self.object_label(i))
            .collect();
        visible.sort();
        for v in visible {
            let _ = write!(s, " There is a {v} here.");
        }
        s
    }

    pub fn inventory_text(&self) -> String {
        let mut held: Vec<String> = (0..self.game.objects.len())
            .filter(|&i| self.state.object_locations[i] == Loc::Inventory)
            .map(|i| format!("a {}", self.object_label(i)))
            .collect();
        if held.is_empty() {
            return EMPTY_HANDED.to_string();
        }
        held.sort();
        format!("{CARRYING} {}.", held.join(", "))
    }

    fn object_label(&self, i: usize) -> String {
        let o = &self.game.objects[i];
        if o.switchable && self.state.object_on[i] {
            format!("{} (on)", o.name)
        } else {
            o.name.clone()
        }
    }

    /// Applies a normalized command; returns the response and step reward.
    fn apply(&mut self, cmd: &str) -> (String, i64) {
        let matched = self
            .applicable_triggers()
            .find(|&t| self.game.triggers[t].verb_phrase == cmd);
        if let Some(t) = matched {
            return self.fire(t);
        }
        if let Some(dir) = Direction::parse_command(cmd) {
            return match self.exit(self.state.player_room, dir) {
                Some(to) => {
                    self.state.player_room = to;
                    (self.look_text(), 0)
                }
                None => (NOTHING_HAPPENS.to_string(), 0),
            };
        }
        match cmd {
            "look" | "l" => return (self.look_text(), 0),
            "inventory" | "i" => return (self.inventory_text(), 0),
            _ => {}
        }
        let here = Loc::Room(self.state.player_room);
        if let Some(name) = cmd.strip_prefix("take ") {
            if let Some(o) = self.game.object_by_name(name) {
                if self.game.objects[o].portable && self.state.object_locations[o] == here {
                    self.state.object_locations[o] = Loc::Inventory;
                    return (TAKEN.to_string(), 0);
                }
            }
        } else if let Some(name) = cmd.strip_prefix("drop ") {
            if let Some(o) = self.game.object_by_name(name) {
                if self.state.object_locations[o] == Loc::Inventory {
                    self.state.object_locations[o] = here;
                    return (DROPPED.to_string(), 0);
                }
            }
        } else if let Some((name, on)) = cmd
            .strip_prefix("turn on ")
            .map(|n| (n, true))
            .or_else(|| cmd.strip_prefix("turn off ").map(|n| (n, false)))
        {
            if let Some(o) = self.game.object_by_name(name) {
                let obj = &self.game.objects[o];
                if obj.switchable
                    && self.state.object_locations[o] == Loc::Inventory
                    && self.state.object_on[o] != on
                {
                    self.state.object_on[o] = on;
                    let word = if on { "on" } else { "off" };
                    return (format!("The {} is now {word}.", obj.name), 0);
                }
            }
        }
        (NOTHING_HAPPENS.to_string(), 0)
    }

    fn fire(&mut self, t: usize) -> (String, i64) {
        let game = Arc::clone(&self.game);
        let trig = &game.triggers[t];
        if trig.once {
            self.state.fired_triggers.insert(t);
        }
        let start_room = self.state.player_room;
        let mut reward = 0;
        let mut died = false;
        for e in &trig.effects {
            match e {
                Effect::SetFlag(f) => {
                    self.state.flags.insert(f.clone());
                }
                Effect::MovePlayer(r) => self.state.player_room = *r,
                Effect::RevealExit {
                    room,
                    direction,
                    to,
                } => {
                    self.state.revealed_exits.insert((*room, *direction), *to);
                }
                Effect::MoveObject { object, to } => self.state.object_locations[*object] = *to,
                Effect::Reward(r) => reward += r,
                Effect::EndEpisode => self.state.done = true,
                Effect::KillPlayer => {
                    self.state.done = true;
                    died = true;
                }
            }
        }
        let mut response = if trig.message.is_empty() {
            "Done.".to_string()
        } else {
            trig.message.clone()
        };
        if died {
            response.push(' ');
            response.push_str(DIED);
            return (response, 0);
        }
        self.state.score += reward;
        if self.state.player_room != start_room && !self.state.done {
            response.push('\n');
            response.push_str(&self.look_text());
        }
        (response, reward)
    }
}
