use std::collections::{BTreeSet, HashSet, VecDeque};
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::engine::{games, Direction, Env, GameDef};
use crate::error::Result;
use crate::hashrep::{check_golden, parse_golden};
use crate::locgraph::locate;
use crate::neural::{
    bidaf, grad_check, gru_encode, inv_dyn_loss, new_bidaf, new_gru, new_mlp, q_value, ParamStore,
    GRAD_CHECK_EPS,
};

#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl CheckResult {
    fn new(name: &str, failures: Vec<String>, ok_detail: String) -> Self {
        Self {
            name: name.to_string(),
            passed: failures.is_empty(),
            detail: if failures.is_empty() {
                ok_detail
            } else {
                failures.join("; ")
            },
        }
    }

    pub fn line(&self) -> String {
        let tag = if self.passed { "PASS" } else { "FAIL" };
        format!("{tag} {}: {}", self.name, self.detail)
    }
}

pub fn check_golden_text(text: &str) -> CheckResult {
    match parse_golden(text) {
        Err(e) => CheckResult::new("golden hashes", vec![e], String::new()),
        Ok(entries) => {
            let n = entries.len();
            CheckResult::new(
                "golden hashes",
                check_golden(&entries),
                format!("{n} strings match"),
            )
        }
    }
}

fn rand_vec(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()
}

/// Finite-difference checks of the GRU, BiDAF, Q-head and inverse-dynamics
/// loss on `trials` random instances each.
pub fn check_gradients(trials: usize, rtol: f64, seed: u64) -> CheckResult {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut failures = Vec::new();
    let mut worst = [0.0f64; 4];
    let (mut kinks, mut compared) = (0, 0);
    for trial in 0..trials {
        let mut store = ParamStore::new();
        let ids = new_gru(&mut store, "g", 2, 3, &mut rng);
        let len = rng.gen_range(1..4);
        let mut xs: Vec<Vec<f64>> = (0..len).map(|_| rand_vec(&mut rng, 2)).collect();
        let p = rand_vec(&mut rng, 3);
        let r = grad_check(&mut store, &mut xs, GRAD_CHECK_EPS, |t, n| {
            let out = gru_encode(t, ids, n).expect("gru shapes");
            let pn = t.input(p.clone());
            t.dot(out.last, pn)
        });
        worst[0] = worst[0].max(r.max_rel_error);

        let mut store = ParamStore::new();
        let ids = new_bidaf(&mut store, 2, &mut rng);
        let (no, na) = (rng.gen_range(1..4), rng.gen_range(1..4));
        let mut xs: Vec<Vec<f64>> = (0..no + na).map(|_| rand_vec(&mut rng, 2)).collect();
        let p = rand_vec(&mut rng, 2);
        let r2 = grad_check(&mut store, &mut xs, GRAD_CHECK_EPS, |t, n| {
            let out = bidaf(t, ids, &n[..no], &n[no..]).expect("bidaf shapes");
            let pn = t.input(p.clone());
            t.dot(out, pn)
        });
        worst[1] = worst[1].max(r2.max_rel_error);

        let mut store = ParamStore::new();
        let head = new_mlp(&mut store, "q", 5, 4, &mut rng);
        let mut xs = vec![rand_vec(&mut rng, 3), rand_vec(&mut rng, 2)];
        let y = rng.gen_range(-1.0..1.0);
        let r3 = grad_check(&mut store, &mut xs, GRAD_CHECK_EPS, |t, n| {
            let q = q_value(t, head, n[0], n[1]).expect("q shapes");
            t.sq_err(q, y)
        });
        worst[2] = worst[2].max(r3.max_rel_error);

        let mut store = ParamStore::new();
        let head = new_mlp(&mut store, "inv", 6, 4, &mut rng);
        let k = rng.gen_range(1..4);
        let mut xs = vec![rand_vec(&mut rng, 2), rand_vec(&mut rng, 2)];
        xs.extend((0..k).map(|_| rand_vec(&mut rng, 2)));
        let taken = rng.gen_range(0..k);
        let r4 = grad_check(&mut store, &mut xs, GRAD_CHECK_EPS, |t, n| {
            inv_dyn_loss(t, head, n[0], n[1], &n[2..], taken).expect("inv shapes")
        });
        worst[3] = worst[3].max(r4.max_rel_error);

        kinks += r.kinks + r2.kinks + r3.kinks + r4.kinks;
        compared += r.checked + r2.checked + r3.checked + r4.checked;
        for (name, r) in [
            ("gru", &r),
            ("bidaf", &r2),
            ("q_head", &r3),
            ("inv_dyn", &r4),
        ] {
            if r.max_rel_error >= rtol {
                failures.push(format!(
                    "{name} trial {trial}: {} off by {:e}",
                    r.worst, r.max_rel_error
                ));
            }
        }
    }
    CheckResult::new(
        "gradient checks",
        failures,
        format!(
            "{trials} trials, worst relative errors gru {:.1e} bidaf {:.1e} q_head {:.1e} inv_dyn {:.1e} over {compared} entries, {kinks} at activation kinks skipped",
            worst[0], worst[1], worst[2], worst[3]
        ),
    )
}

fn grammar(game: &GameDef) -> Vec<String> {
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
    out.into_iter().collect()
}

/// Compares `valid_actions` with trial stepping over every reachable
/// non-terminal state (up to `limit` states).
pub fn check_valid_actions(game: &Arc<GameDef>, limit: usize) -> Result<CheckResult> {
    let actions = grammar(game);
    let mut env = Env::new(game.clone());
    let mut seen = HashSet::new();
    let mut queue = VecDeque::new();
    let mut failures = Vec::new();
    seen.insert(env.canonical_state());
    queue.push_back(env.snapshot());
    let mut visited = 0;
    while let Some(snap) = queue.pop_front() {
        if visited >= limit {
            break;
        }
        visited += 1;
        env.restore(&snap)?;
        let analytic = env.valid_actions()?;
        let mut brute = BTreeSet::from(["look".to_string(), "inventory".to_string()]);
        for a in &actions {
            env.restore(&snap)?;
            let res = env.step(a)?;
            if res.world_changed {
                brute.insert(a.clone());
                if !env.is_done() && seen.insert(env.canonical_state()) {
                    queue.push_back(env.snapshot());
                }
            }
        }
        let brute: Vec<String> = brute.into_iter().collect();
        if analytic != brute && failures.len() < 3 {
            env.restore(&snap)?;
            failures.push(format!(
                "state {}: analytic {analytic:?} vs trial {brute:?}",
                env.canonical_state()
            ));
        }
    }
    Ok(CheckResult::new(
        &format!("valid actions {}", game.name),
        failures,
        format!("{visited} states agree"),
    ))
}

/// Random rollouts checking that locating leaves the state untouched.
pub fn check_locate_side_effects(
    game: &Arc<GameDef>,
    steps: usize,
    seed: u64,
) -> Result<CheckResult> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut env = Env::new(game.clone());
    let mut failures = Vec::new();
    let mut probes = 0;
    for _ in 0..steps {
        if env.is_done() {
            env.reset();
        }
        let (hash, obs) = (env.gt_state_hash(), env.observation());
        for depth in [1, 2] {
            locate(&mut env, depth)?;
            probes += 1;
            if env.gt_state_hash() != hash || env.observation() != obs {
                if failures.len() < 3 {
                    failures.push(format!("depth {depth} changed {}", env.canonical_state()));
                }
            }
        }
        let acts = env.valid_actions()?;
        let a = &acts[rng.gen_range(0..acts.len())];
        env.step(a)?;
    }
    Ok(CheckResult::new(
        &format!("locate side effects {}", game.name),
        failures,
        format!("{probes} probes clean"),
    ))
}

/// The full release gate.
pub fn run_all(golden_text: &str) -> Result<Vec<CheckResult>> {
    let mut out = vec![check_golden_text(golden_text), check_gradients(25, 1e-4, 7)];
    for (name, _) in games::ALL {
        let game = games::load(name)?;
        out.push(check_valid_actions(&game, 5000)?);
        out.push(check_locate_side_effects(&game, 300, 11)?);
    }
    Ok(out)
}
