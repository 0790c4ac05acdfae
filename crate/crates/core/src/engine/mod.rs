//! Deterministic synthetic text-adventure engine.
//!
//! Besides the normal `step` interface the engine exposes the privileged
//! information that tooling needs: the exact state hash, the current room
//! id, the set of world-changing actions, and snapshot/restore.

mod def;
mod env;
pub mod games;

pub use def::{
    compile, load_game, load_game_file, normalize_command, Condition, Direction, Effect, GameDef,
    Loc, ObjectDef, RawGame, RoomDef, TriggerDef,
};
pub use env::{reset, Env, Observation, Snapshot, StepResult, WorldState};

pub const DARKNESS: &str = "It is pitch black. You are likely to be eaten by a grue.";
pub const NOTHING_HAPPENS: &str = "Nothing happens.";
pub const EMPTY_HANDED: &str = "You are empty-handed.";
pub const CARRYING: &str = "You are carrying:";
pub const TAKEN: &str = "Taken.";
pub const DROPPED: &str = "Dropped.";
pub const DIED: &str = "You have died.";

/// Fixed strings the engine can produce regardless of the game.
pub(crate) const FIXED_TEXTS: &[&str] = &[
    DARKNESS,
    NOTHING_HAPPENS,
    EMPTY_HANDED,
    CARRYING,
    TAKEN,
    DROPPED,
    DIED,
    "Done.",
    "look inventory take drop turn on off go",
    "There is a here. The is now on. The is now off.",
];
