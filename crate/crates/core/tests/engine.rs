mod common;

use std::sync::Arc;

use common::{bfs_prefix, bfs_states, grammar_actions, valid_actions_oracle, Lcg};
use tgrl::engine::{games, load_game, reset, Env, DARKNESS, EMPTY_HANDED, NOTHING_HAPPENS};
use tgrl::Error;

#[test]
fn lantern_loads_as_designed() {
    let g = games::load("lantern").unwrap();
    assert_eq!(g.rooms.len(), 4);
    assert_eq!(g.objects.len(), 1);
    assert_eq!(g.max_score, 30);
    let rewards: Vec<i64> = g
        .triggers
        .iter()
        .map(|t| t.total_reward())
        .filter(|&r| r > 0)
        .collect();
    assert_eq!(rewards, vec![10, 20]);
    assert!(g.rooms[g.room_by_id("cellar").unwrap()].dark);
}

#[test]
fn all_bundled_games_load() {
    for (name, _) in games::ALL {
        games::load(name).unwrap_or_else(|e| panic!("{name}: {e}"));
    }
}

#[test]
fn reset_observation() {
    let (env, obs) = reset(games::load("lantern").unwrap());
    assert!(obs.response.contains("Field"));
    assert_eq!(obs.inventory_text, EMPTY_HANDED);
    assert!(obs
        .look_text
        .starts_with("Field\nYou are standing in an open field"));
    assert!(obs.look_text.contains("There is a lantern here."));
    assert_eq!(obs.response, obs.look_text);
    assert_eq!(env.gt_room_id(), "field");
}

#[test]
fn reset_is_deterministic() {
    let g = games::load("lantern").unwrap();
    let (mut env, first) = reset(Arc::clone(&g));
    let h0 = env.gt_state_hash();
    let (_, second) = reset(Arc::clone(&g));
    assert_eq!(first, second);

    for a in ["take lantern", "east", "down"] {
        env.step(a).unwrap();
    }
    assert!(env.is_done());
    let again = env.reset();
    assert_eq!(again, first);
    assert_eq!(env.gt_state_hash(), h0);
}

#[test]
fn step_east_moves_player() {
    let mut env = Env::new(games::load("lantern").unwrap());
    let res = env.step("east").unwrap();
    assert_eq!(env.gt_room_id(), "cellar-entrance");
    assert!(res.world_changed);
    assert_eq!(res.reward, 0);
    assert!(!res.done);
    assert!(res.observation.response.starts_with("Cellar entrance"));
}

#[test]
fn unknown_action_is_noop() {
    let mut env = Env::new(games::load("lantern").unwrap());
    let h = env.gt_state_hash();
    let res = env.step("xyzzy-unknown").unwrap();
    assert_eq!(res.observation.response, NOTHING_HAPPENS);
    assert!(!res.world_changed);
    assert_eq!(res.reward, 0);
    assert_eq!(env.gt_state_hash(), h);
}

#[test]
fn take_lantern() {
    let mut env = Env::new(games::load("lantern").unwrap());
    let res = env.step("Take  Lantern").unwrap();
    assert!(res.world_changed);
    assert_eq!(
        res.observation.inventory_text,
        "You are carrying: a lantern."
    );
    assert!(!res.observation.look_text.contains("lantern"));
}

#[test]
fn lantern_walkthrough_scores_30() {
    let mut env = Env::new(games::load("lantern").unwrap());
    let mut total = 0;
    for a in [
        "take lantern",
        "turn on lantern",
        "east",
        "down",
        "north",
        "take idol",
    ] {
        let r = env.step(a).unwrap();
        total += r.reward;
        assert_eq!(total, env.score());
    }
    assert_eq!(total, 30);
    assert!(env.is_done());
    assert!(matches!(env.step("look"), Err(Error::EnvDone)));
}

#[test]
fn unlit_descent_kills_without_reward() {
    let mut env = Env::new(games::load("lantern").unwrap());
    env.step("take lantern").unwrap();
    env.step("east").unwrap();
    let r = env.step("d").unwrap();
    assert!(r.done);
    assert_eq!(r.reward, 0);
    assert!(r.observation.response.contains("You have died."));
}

#[test]
fn darkness_rule() {
    let mut env = Env::new(games::load("lantern").unwrap());
    for a in ["take lantern", "turn on lantern", "east", "down"] {
        env.step(a).unwrap();
    }
    assert!(env.observation().look_text.starts_with("Cellar\n"));
    let r = env.step("turn off lantern").unwrap();
    assert_eq!(r.observation.look_text, DARKNESS);
    let r = env.step("turn on lantern").unwrap();
    assert!(r.observation.look_text.starts_with("Cellar\n"));
    // a lit lantern left on the floor still lights the room
    let r = env.step("drop lantern").unwrap();
    assert!(r
        .observation
        .look_text
        .contains("There is a lantern (on) here."));
}

#[test]
fn valid_actions_initial_lantern() {
    let env = Env::new(games::load("lantern").unwrap());
    assert_eq!(
        env.valid_actions().unwrap(),
        vec!["east", "inventory", "look", "take lantern"]
    );
}

#[test]
fn sealed_room_has_only_look_and_inventory() {
    let g = load_game(
        r#"{"meta": {"name": "sealed", "max_score": 0, "start_room": "a"},
            "rooms": [{"id": "a", "name": "Cell", "desc": "Four blank walls."}]}"#,
    )
    .unwrap();
    let env = Env::new(Arc::new(g));
    assert_eq!(env.valid_actions().unwrap(), vec!["inventory", "look"]);
}

#[test]
fn valid_actions_match_oracle_on_every_bfs_state() {
    for name in ["lantern", "maze", "twins", "memory", "lever"] {
        let g = games::load(name).unwrap();
        let mut env = Env::new(Arc::clone(&g));
        for snap in bfs_states(&g, 1000) {
            env.restore(&snap).unwrap();
            let fast = env.valid_actions().unwrap();
            assert_eq!(
                fast,
                valid_actions_oracle(&mut env),
                "{name}: {}",
                env.canonical_state()
            );
        }
    }
}

#[test]
fn passages_has_at_least_200_states() {
    let g = games::load("passages").unwrap();
    assert_eq!(bfs_prefix(&g, 200).len(), 200);
    let actions = grammar_actions(&g);
    let mut env = Env::new(g);
    let mut rooms = std::collections::BTreeSet::from([env.gt_room_id().to_string()]);
    let mut queue = std::collections::VecDeque::from([env.snapshot()]);
    while let Some(snap) = queue.pop_front() {
        for a in &actions {
            env.restore(&snap).unwrap();
            env.step(a).unwrap();
            if !env.is_done() && rooms.insert(env.gt_room_id().to_string()) {
                queue.push_back(env.snapshot());
            }
        }
    }
    assert!(rooms.len() >= 200, "{}", rooms.len());
}

#[test]
fn gt_hash_round_trip_without_side_effects() {
    let mut env = Env::new(games::load("lantern").unwrap());
    let h0 = env.gt_state_hash();
    env.step("east").unwrap();
    assert_ne!(env.gt_state_hash(), h0);
    env.step("west").unwrap();
    assert_eq!(env.gt_state_hash(), h0);
}

#[test]
fn gt_room_ids_differ_for_same_named_rooms() {
    let mut env = Env::new(games::load("maze").unwrap());
    assert_eq!(env.gt_room_id(), "forest");
    env.step("north").unwrap();
    assert_eq!(env.gt_room_id(), "m1");
    let name1 = env.room_name().to_string();
    env.step("east").unwrap();
    assert_eq!(env.gt_room_id(), "m3");
    assert_eq!(env.room_name(), name1);
}

#[test]
fn snapshot_restore() {
    let g = games::load("lantern").unwrap();
    let mut env = Env::new(Arc::clone(&g));
    let snap = env.snapshot();
    let h = env.gt_state_hash();
    env.step("east").unwrap();
    env.restore(&snap).unwrap();
    assert_eq!(env.gt_state_hash(), h);

    let script = [
        "take lantern",
        "look",
        "east",
        "west",
        "turn on lantern",
        "east",
        "down",
        "up",
        "inventory",
        "north",
    ];
    let run = |env: &mut Env| -> Vec<_> {
        env.restore(&snap).unwrap();
        script.iter().map_while(|a| env.step(a).ok()).collect()
    };
    let a = run(&mut env);
    let b = run(&mut env);
    assert_eq!(a.len(), script.len());
    assert_eq!(a, b);

    let mut other = Env::new(games::load("maze").unwrap());
    assert!(matches!(
        other.restore(&snap),
        Err(Error::SnapshotMismatch { .. })
    ));
}

#[test]
fn random_rollouts_keep_contracts() {
    let mut rng = Lcg(7);
    for (name, _) in games::ALL {
        let g = games::load(name).unwrap();
        let actions = grammar_actions(&g);
        let (mut env, _) = reset(Arc::clone(&g));
        let mut twin = Env::new(Arc::clone(&g));
        let mut total = 0;
        for _ in 0..2_000 {
            if env.is_done() {
                assert_eq!(total, env.score());
                env.reset();
                twin.reset();
                total = 0;
            }
            let a = &actions[rng.below(actions.len())];
            let before = env.canonical_state();
            let score_before = env.score();
            let r = env.step(a).unwrap();
            assert_eq!(
                r.world_changed,
                env.canonical_state() != before,
                "{name}: {a}"
            );
            assert!(env.score() >= score_before);
            assert!(r.reward >= 0);
            total += r.reward;
            assert_eq!(total, env.score());
            // determinism: a second handle fed the same actions agrees
            assert_eq!(twin.step(a).unwrap(), r);
        }
    }
}
