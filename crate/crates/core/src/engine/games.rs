//! Games shipped with the crate.

use std::sync::Arc;

use super::{load_game, GameDef};
use crate::error::{Error, Result};

pub const LANTERN: &str = include_str!("../../games/lantern.game");
pub const MAZE: &str = include_str!("../../games/maze.game");
pub const TWINS: &str = include_str!("../../games/twins.game");
pub const MEMORY: &str = include_str!("../../games/memory.game");
pub const LEVER: &str = include_str!("../../games/lever.game");
pub const PASSAGES: &str = include_str!("../../games/passages.game");

pub const ALL: &[(&str, &str)] = &[
    ("lantern", LANTERN),
    ("maze", MAZE),
    ("twins", TWINS),
    ("memory", MEMORY),
    ("lever", LEVER),
    ("passages", PASSAGES),
];

pub fn source(name: &str) -> Option<&'static str> {
    let name = name.strip_suffix(".game").unwrap_or(name);
    ALL.iter().find(|(n, _)| *n == name).map(|(_, s)| *s)
}

/// Loads a bundled game by name (with or without the `.game` suffix).
pub fn load(name: &str) -> Result<Arc<GameDef>> {
    let text = source(name).ok_or_else(|| Error::Config(format!("no bundled game '{name}'")))?;
    load_game(text).map(Arc::new)
}

/// Resolves a path on disk first, then falls back to a bundled game name.
pub fn load_path_or_bundled(spec: &str) -> Result<Arc<GameDef>> {
    let path = std::path::Path::new(spec);
    if path.exists() {
        return super::load_game_file(path).map(Arc::new);
    }
    load(spec)
}
