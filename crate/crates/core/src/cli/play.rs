use std::io::{BufRead, Write};
use std::sync::Arc;

use crate::engine::{Env, GameDef, Observation};
use crate::error::Result;
use crate::locgraph::{locate, LocationKey};

fn show(out: &mut impl Write, obs: &Observation, score: i64, max: i64) -> Result<()> {
    writeln!(out, "{}", obs.response)?;
    writeln!(out, "[score {score}/{max} | {}]", obs.inventory_text)?;
    Ok(())
}

fn show_state(out: &mut impl Write, env: &mut Env) -> Result<()> {
    let key = LocationKey::from_profile(&locate(env, 1)?);
    writeln!(out, "[room {} | key {}]", env.gt_room_id(), key.as_str())?;
    Ok(())
}

/// Reads commands line by line until `quit`, end of input or the end of
/// the episode. Returns the final score.
pub fn play(
    game: Arc<GameDef>,
    show_handicaps: bool,
    input: impl BufRead,
    mut out: impl Write,
) -> Result<i64> {
    let mut env = Env::new(game.clone());
    let obs = env.reset();
    show(&mut out, &obs, 0, game.max_score)?;
    if show_handicaps {
        show_state(&mut out, &mut env)?;
    }
    let mut lines = input.lines();
    loop {
        write!(out, "> ")?;
        out.flush()?;
        let Some(line) = lines.next() else { break };
        let cmd = line?;
        let cmd = cmd.trim();
        if cmd.is_empty() {
            continue;
        }
        if cmd == "quit" {
            break;
        }
        let res = env.step(cmd)?;
        show(&mut out, &res.observation, env.score(), game.max_score)?;
        if res.reward > 0 {
            writeln!(out, "[+{} points]", res.reward)?;
        }
        if res.done {
            break;
        }
        if show_handicaps {
            show_state(&mut out, &mut env)?;
            writeln!(out, "[valid: {}]", env.valid_actions()?.join(", "))?;
        }
    }
    let score = env.score();
    writeln!(out, "Final score: {score}/{}", game.max_score)?;
    Ok(score)
}
