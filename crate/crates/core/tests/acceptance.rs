//! End-to-end acceptance suite. Runs every criterion in order, prints one
//! PASS/FAIL line per criterion and exits nonzero if any failed.

mod common;

use std::collections::{BTreeMap, HashMap, HashSet};
use std::time::Instant;

use common::{bfs_states, grammar_actions, valid_actions_oracle, Lcg};
use tgrl::agent::{run_training, Dims, RunLog, TrainConfig, Variant, VariantKind};
use tgrl::cli::{check_gradients, parse_summary, ScoreTable, TABLE1_FIXTURE};
use tgrl::engine::{games, Env};
use tgrl::hashrep::{check_golden, hash_vec, parse_golden, str_hash, HashConfig, GOLDEN_FILE};
use tgrl::locgraph::{
    locate, serialize_map, serialize_profile, update_and_get_state, KeyMode, LocationKey,
    LocationMap,
};

const AVG_NORM_TARGET: f64 = 0.36;
const AVG_NORM_TOL: f64 = 0.005;
const STATE_LIMIT: usize = 1000;
const WORLD_CHANGED_STEPS: usize = 10_000;
const LOCATE_TRIALS: usize = 10_000;
const GOLDEN_STRINGS: usize = 20;
const COLLISION_STEPS: usize = 100_000;
const MOMENT_SAMPLES: usize = 1_000_000;
const MOMENT_TOL: f64 = 0.01;
const GRAD_TRIALS: usize = 100;
const GRAD_RTOL: f64 = 1e-4;
const SEEDS: [u64; 3] = [1, 2, 3];
const LEVER_EPISODES: usize = 300;
const LEVER_WINDOW: usize = 50;
const LEVER_THRESHOLD: f64 = 9.5;
const MEMORY_EPISODES: usize = 1000;
const MEMORY_WINDOW: usize = 100;
const MEMORY_ORACLE_RTOL: f64 = 0.10;
const NUM_ENVS: usize = 8;
const PASSAGES_EPISODES: usize = 1000;
const PASSAGES_WINDOW: usize = 100;
const PASSAGES_LR: f64 = 3e-3;

type Outcome = Result<String, String>;

fn small_dims() -> Dims {
    Dims {
        emb: 16,
        hidden: 32,
        mlp: 64,
        hash: 32,
    }
}

fn config(episodes: usize) -> TrainConfig {
    TrainConfig {
        episodes,
        num_envs: NUM_ENVS,
        dims: small_dims(),
        ..TrainConfig::default()
    }
}

fn train(game: &str, variant: Variant, cfg: &TrainConfig, seed: u64) -> RunLog {
    let g = games::load(game).unwrap();
    let t = Instant::now();
    let log = run_training(g, variant, cfg, seed).unwrap().log;
    eprintln!(
        "  {game} {} seed {seed}: final avg {:.3} max {} ({:.1}s)",
        variant.label(),
        log.avg_score(PASSAGES_WINDOW.max(MEMORY_WINDOW)),
        log.max_score(),
        t.elapsed().as_secs_f64()
    );
    log
}

fn metric_reproduction() -> Outcome {
    let table =
        ScoreTable::from_summaries(&parse_summary(TABLE1_FIXTURE).map_err(|e| e.to_string())?)
            .map_err(|e| e.to_string())?;
    let norm = table.avg_norm("LOG").ok_or("no LOG row")?;
    let msg = format!("LOG avg norm {norm:.4} (target {AVG_NORM_TARGET} ± {AVG_NORM_TOL})");
    if (norm - AVG_NORM_TARGET).abs() <= AVG_NORM_TOL {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn engine_oracle() -> Outcome {
    let mut total_states = 0;
    for name in ["lantern", "maze"] {
        let game = games::load(name).unwrap();
        let states = bfs_states(&game, STATE_LIMIT);
        let mut env = Env::new(game);
        for snap in &states {
            env.restore(snap).unwrap();
            let fast = env.valid_actions().unwrap();
            if fast != valid_actions_oracle(&mut env) {
                return Err(format!(
                    "{name}: valid actions differ at {}",
                    env.canonical_state()
                ));
            }
        }
        total_states += states.len();
    }
    let mut rng = Lcg(17);
    let (mut changed, mut unchanged) = (0, 0);
    for i in 0..WORLD_CHANGED_STEPS {
        let name = if i % 2 == 0 { "lantern" } else { "maze" };
        let mut env = Env::new(games::load(name).unwrap());
        let actions = grammar_actions(env.game());
        for _ in 0..rng.below(12) {
            if env.is_done() {
                break;
            }
            let a = &actions[rng.below(actions.len())];
            env.step(a).unwrap();
        }
        if env.is_done() {
            env.reset();
        }
        let before = env.canonical_state();
        let a = &actions[rng.below(actions.len())];
        let res = env.step(a).unwrap();
        let serial = env.canonical_state() != before;
        if res.world_changed != serial {
            return Err(format!(
                "world_changed {} vs serialization {serial} for '{a}'",
                res.world_changed
            ));
        }
        if serial {
            changed += 1;
        } else {
            unchanged += 1;
        }
    }
    Ok(format!(
        "{total_states} BFS states match brute force; {WORLD_CHANGED_STEPS} steps agree ({changed} changed, {unchanged} unchanged)"
    ))
}

fn conflated_pairs(name: &str, depth: usize) -> (usize, usize, Vec<(String, String)>) {
    let game = games::load(name).unwrap();
    let states = bfs_states(&game, STATE_LIMIT);
    let mut env = Env::new(game);
    let mut keyed = Vec::new();
    for snap in &states {
        env.restore(snap).unwrap();
        let key = LocationKey::from_profile(&locate(&mut env, depth).unwrap());
        keyed.push((key.as_str().to_string(), env.gt_room_id().to_string()));
    }
    let (mut agree, mut split) = (0, 0);
    let mut conflated = Vec::new();
    for i in 0..keyed.len() {
        for j in i + 1..keyed.len() {
            let same_key = keyed[i].0 == keyed[j].0;
            let same_room = keyed[i].1 == keyed[j].1;
            if same_key == same_room {
                agree += 1;
            } else {
                split += 1;
                if same_key {
                    let pair = if keyed[i].1 < keyed[j].1 {
                        (keyed[i].1.clone(), keyed[j].1.clone())
                    } else {
                        (keyed[j].1.clone(), keyed[i].1.clone())
                    };
                    conflated.push(pair);
                }
            }
        }
    }
    conflated.sort();
    conflated.dedup();
    (agree, split, conflated)
}

fn locate_correctness() -> Outcome {
    let (agree, split, _) = conflated_pairs("maze", 1);
    if split != 0 {
        return Err(format!(
            "maze depth 1: {split} state pairs where key and room disagree"
        ));
    }
    let (_, _, twins1) = conflated_pairs("twins", 1);
    if twins1.is_empty() {
        return Err("twins depth 1: no conflated room pair".into());
    }
    let (_, _, twins2) = conflated_pairs("twins", 2);
    if let Some(p) = twins1.iter().find(|p| twins2.contains(p)) {
        return Err(format!("twins depth 2 still conflates {p:?}"));
    }
    let mut rng = Lcg(23);
    let names: Vec<&str> = games::ALL.iter().map(|(n, _)| *n).collect();
    let mut clean = 0;
    let mut envs: Vec<Env> = names
        .iter()
        .map(|n| Env::new(games::load(n).unwrap()))
        .collect();
    for t in 0..LOCATE_TRIALS {
        let env = &mut envs[t % names.len()];
        if env.is_done() {
            env.reset();
        }
        let before = (env.gt_state_hash(), env.observation());
        locate(env, 1 + t % 2).unwrap();
        if (env.gt_state_hash(), env.observation()) != before {
            return Err(format!("locate changed state in {}", env.canonical_state()));
        }
        clean += 1;
        let acts = env.valid_actions().unwrap();
        let a = acts[rng.below(acts.len())].clone();
        env.step(&a).unwrap();
    }
    Ok(format!(
        "maze depth 1 key ⇔ room on {agree} pairs; twins conflates {:?} at depth 1, resolved at depth 2; {clean}/{LOCATE_TRIALS} probes leave the state hash unchanged",
        twins1[0]
    ))
}

fn hash_layer() -> Outcome {
    let entries = parse_golden(GOLDEN_FILE)?;
    if entries.len() != GOLDEN_STRINGS {
        return Err(format!(
            "golden file has {} strings, expected {GOLDEN_STRINGS}",
            entries.len()
        ));
    }
    let bad = check_golden(&entries);
    if !bad.is_empty() {
        return Err(bad.join("; "));
    }
    let mut strings: HashSet<String> = HashSet::new();
    let mut rng = Lcg(31);
    let names: Vec<&str> = games::ALL.iter().map(|(n, _)| *n).collect();
    let mut envs: Vec<Env> = names
        .iter()
        .map(|n| Env::new(games::load(n).unwrap()))
        .collect();
    let mut maps = vec![LocationMap::new(); names.len()];
    for t in 0..COLLISION_STEPS {
        let env = &mut envs[t % names.len()];
        let map = &mut maps[t % names.len()];
        if env.is_done() {
            env.reset();
            *map = LocationMap::new();
        }
        let up = update_and_get_state(env, map, KeyMode::Locate(1)).unwrap();
        strings.insert(serialize_profile(&up.profile.unwrap()));
        strings.insert(serialize_map(map));
        let acts = env.valid_actions().unwrap();
        let a = acts[rng.below(acts.len())].clone();
        let res = env.step(&a).unwrap();
        let o = res.observation;
        strings.insert(o.response);
        strings.insert(o.inventory_text);
        strings.insert(o.look_text);
        strings.insert(env.canonical_state());
        strings.insert(a);
    }
    let mut seen: HashMap<u64, &str> = HashMap::new();
    for s in &strings {
        if let Some(prev) = seen.insert(str_hash(s), s) {
            return Err(format!("collision between {prev:?} and {s:?}"));
        }
    }
    let cfg = HashConfig::new(32);
    let (mut n, mut sum, mut sq) = (0usize, 0.0, 0.0);
    let mut i = 0u64;
    while n < MOMENT_SAMPLES {
        for x in hash_vec(&format!("sample-{i}"), &cfg).values {
            sum += x;
            sq += x * x;
            n += 1;
        }
        i += 1;
    }
    let mean = sum / n as f64;
    let var = sq / n as f64 - mean * mean;
    let msg = format!(
        "{GOLDEN_STRINGS} golden strings match; {} distinct rollout strings, 0 collisions; mean {mean:.5} variance {var:.5} over {n} entries",
        strings.len()
    );
    if mean.abs() <= MOMENT_TOL && (var - 1.0).abs() <= MOMENT_TOL {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn gradient_checks() -> Outcome {
    let r = check_gradients(GRAD_TRIALS, GRAD_RTOL, 2024);
    if r.passed {
        Ok(r.detail)
    } else {
        Err(r.detail)
    }
}

fn learning_sanity(logs: &mut BTreeMap<u64, RunLog>) -> Outcome {
    let cfg = config(LEVER_EPISODES);
    let mut avgs = Vec::new();
    for seed in SEEDS {
        let log = train("lever", Variant::new(VariantKind::Drrn), &cfg, seed);
        avgs.push(log.avg_score(LEVER_WINDOW));
        logs.insert(seed, log);
    }
    let passing = avgs.iter().filter(|&&a| a >= LEVER_THRESHOLD).count();
    let msg =
        format!("last-{LEVER_WINDOW} averages {avgs:.3?}, {passing}/3 seeds ≥ {LEVER_THRESHOLD}");
    if passing == SEEDS.len() {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

fn partial_observability() -> Outcome {
    let cfg = config(MEMORY_EPISODES);
    let mut means = BTreeMap::new();
    for kind in [VariantKind::Drrn, VariantKind::Log, VariantKind::GtState] {
        let finals: Vec<f64> = SEEDS
            .iter()
            .map(|&s| train("memory", Variant::new(kind), &cfg, s).avg_score(MEMORY_WINDOW))
            .collect();
        means.insert(kind.as_str(), (mean(&finals), finals));
    }
    let (log, drrn, gt) = (means["LOG"].0, means["DRRN"].0, means["GT_STATE"].0);
    let rel = (log - gt).abs() / gt.abs().max(f64::MIN_POSITIVE);
    let msg = format!(
        "final-{MEMORY_WINDOW} means LOG {log:.3} {:.2?}, DRRN {drrn:.3} {:.2?}, GT_STATE {gt:.3} {:.2?}; LOG vs oracle {:.1}% (limit {:.0}%)",
        means["LOG"].1,
        means["DRRN"].1,
        means["GT_STATE"].1,
        100.0 * rel,
        100.0 * MEMORY_ORACLE_RTOL
    );
    if log > drrn && rel <= MEMORY_ORACLE_RTOL {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn semantics_matter() -> Outcome {
    let cfg = TrainConfig {
        lr: PASSAGES_LR,
        ..config(PASSAGES_EPISODES)
    };
    let finals = |v: Variant| -> Vec<f64> {
        SEEDS
            .iter()
            .map(|&s| train("passages", v, &cfg, s).avg_score(PASSAGES_WINDOW))
            .collect()
    };
    let full = finals(Variant::new(VariantKind::Log));
    let blind = finals(Variant::new(VariantKind::Log).with_text_enc(false));
    let lo = full.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = blind.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let msg = format!(
        "final-{PASSAGES_WINDOW} LOG {full:.2?} vs LOG without text encoder {blind:.2?}; min {lo:.2} vs max {hi:.2}"
    );
    if lo > hi {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn determinism(first: &BTreeMap<u64, RunLog>) -> Outcome {
    let cfg = config(LEVER_EPISODES);
    let seed = SEEDS[0];
    let again = train("lever", Variant::new(VariantKind::Drrn), &cfg, seed);
    let a = first
        .get(&seed)
        .ok_or("no earlier run to compare")?
        .to_jsonl();
    let b = again.to_jsonl();
    if a == b {
        Ok(format!(
            "lever DRRN seed {seed} rerun reproduces {} log bytes exactly",
            a.len()
        ))
    } else {
        let line = a
            .lines()
            .zip(b.lines())
            .position(|(x, y)| x != y)
            .unwrap_or(0);
        Err(format!("run logs differ first at record {line}"))
    }
}

fn main() {
    let filter: Vec<String> = std::env::args()
        .skip(1)
        .filter(|a| !a.starts_with('-'))
        .collect();
    if std::env::args().any(|a| a == "--list") {
        for i in 1..=9 {
            println!("criterion_{i}: test");
        }
        return;
    }
    let wanted = |n: usize| {
        filter.is_empty()
            || filter
                .iter()
                .any(|f| format!("criterion_{n}").contains(f.as_str()))
    };

    let mut lever_logs = BTreeMap::new();
    let mut failed = 0;
    let mut report = |n: usize, name: &str, run: &mut dyn FnMut() -> Outcome| {
        if !wanted(n) {
            return;
        }
        let t = Instant::now();
        let outcome = run();
        let secs = t.elapsed().as_secs_f64();
        match outcome {
            Ok(m) => println!("PASS criterion {n} {name}: {m} [{secs:.1}s]"),
            Err(m) => {
                failed += 1;
                println!("FAIL criterion {n} {name}: {m} [{secs:.1}s]");
            }
        }
    };
    report(1, "metric reproduction", &mut metric_reproduction);
    report(2, "engine oracle equivalence", &mut engine_oracle);
    report(3, "locate correctness", &mut locate_correctness);
    report(4, "hash layer", &mut hash_layer);
    report(5, "gradient checks", &mut gradient_checks);
    report(6, "learning sanity", &mut || {
        learning_sanity(&mut lever_logs)
    });
    report(7, "partial observability", &mut partial_observability);
    report(8, "semantics matter", &mut semantics_matter);
    report(9, "determinism", &mut || {
        if lever_logs.is_empty() {
            let cfg = config(LEVER_EPISODES);
            let seed = SEEDS[0];
            lever_logs.insert(
                seed,
                train("lever", Variant::new(VariantKind::Drrn), &cfg, seed),
            );
        }
        determinism(&lever_logs)
    });
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
