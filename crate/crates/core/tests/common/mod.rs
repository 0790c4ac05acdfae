//! Test-only oracles shared by the integration suites.
#![allow(dead_code)]

use std::collections::{BTreeSet, HashSet, VecDeque};
use std::sync::Arc;

use tgrl::engine::{Direction, Env, GameDef, Snapshot};

/// Every action string the fixed grammar can produce for `game`, plus junk.
pub fn grammar_actions(game: &GameDef) -> Vec<String> {
    let mut out: BTreeSet<String> = Direction::ALL.iter().map(|d| d.to_string()).collect();
    out.insert("look".into());
    out.insert("inventory".into());
    for o in &game.objects {
        for verb in ["take", "drop", "turn on", "turn off"] {
            out.insert(format!("{verb} {}", o.name));
        }
    }
    for t in &game.triggers {
        out.insert(t.verb_phrase.clone());
    }
    for junk in ["xyzzy", "take", "open", "go", "turn on"] {
        out.insert(junk.into());
    }
    out.into_iter().collect()
}

/// Brute force: step every grammar action from a snapshot, keep the ones
/// that changed the world, always add look/inventory.
pub fn valid_actions_oracle(env: &mut Env) -> Vec<String> {
    let snap = env.snapshot();
    let mut out = BTreeSet::new();
    out.insert("look".to_string());
    out.insert("inventory".to_string());
    for a in grammar_actions(env.game()) {
        let before = env.canonical_state();
        let res = env.step(&a).unwrap();
        if res.world_changed {
            assert_ne!(env.canonical_state(), before);
            out.insert(a);
        }
        env.restore(&snap).unwrap();
    }
    out.into_iter().collect()
}

/// Breadth-first enumeration of reachable non-terminal states.
pub fn bfs_states(game: &Arc<GameDef>, limit: usize) -> Vec<Snapshot> {
    let out = bfs_prefix(game, limit + 1);
    assert!(out.len() <= limit, "state space exceeds {limit}");
    out
}

/// The first `cap` states of the breadth-first enumeration.
pub fn bfs_prefix(game: &Arc<GameDef>, cap: usize) -> Vec<Snapshot> {
    let mut env = Env::new(Arc::clone(game));
    let actions = grammar_actions(game);
    let mut seen = HashSet::new();
    let mut queue = VecDeque::new();
    let mut out = Vec::new();
    seen.insert(env.canonical_state());
    queue.push_back(env.snapshot());
    while let Some(snap) = queue.pop_front() {
        if out.len() == cap {
            break;
        }
        out.push(snap.clone());
        for a in &actions {
            env.restore(&snap).unwrap();
            env.step(a).unwrap();
            if !env.is_done() && seen.insert(env.canonical_state()) {
                queue.push_back(env.snapshot());
            }
        }
    }
    out
}

/// Tiny deterministic generator for test-side randomness.
pub struct Lcg(pub u64);

impl Lcg {
    pub fn next(&mut self) -> u64 {
        self.0 = self
            .0
            .wrapping_mul(6364136223846793005)
            .wrapping_add(1442695040888963407);
        self.0 >> 33
    }

    pub fn below(&mut self, n: usize) -> usize {
        (self.next() % n as u64) as usize
    }
}
