use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::network::{ActionSet, Dims, Network, StateInputs};
use super::policy::{greedy_action, select_action, td_target};
use super::replay::ReplayBuffer;
use super::runlog::{Losses, RunLog};
use super::variant::Variant;
use crate::engine::{Env, GameDef};
use crate::error::{Error, Result};
use crate::locgraph::LocationMap;
use crate::neural::{Adam, Tape, Vocab};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub gamma: f64,
    pub tau: f64,
    pub lr: f64,
    pub batch_size: usize,
    pub buffer_capacity: usize,
    pub max_episode_steps: usize,
    pub num_envs: usize,
    pub episodes: usize,
    pub invdy_lambda: f64,
    pub grad_clip: f64,
    /// Training starts once the buffer holds this many transitions.
    pub learning_starts: usize,
    /// Gradient updates after each round of stepping every env once.
    /// Setting this to `num_envs` gives one update per env step.
    pub updates_per_round: usize,
    pub dims: Dims,
    pub locate_depth: usize,
    pub reset_map_each_episode: bool,
    /// Evaluate every this many finished episodes; 0 disables.
    pub eval_every: usize,
    pub eval_episodes: usize,
    pub eval_greedy: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            gamma: 0.9,
            tau: 1.0,
            lr: 1e-3,
            batch_size: 32,
            buffer_capacity: 100_000,
            max_episode_steps: 100,
            num_envs: 8,
            episodes: 1000,
            invdy_lambda: 1.0,
            grad_clip: 5.0,
            learning_starts: 32,
            updates_per_round: 1,
            dims: Dims::default(),
            locate_depth: 1,
            reset_map_each_episode: true,
            eval_every: 0,
            eval_episodes: 10,
            eval_greedy: false,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(m.to_string()));
        if !(self.gamma > 0.0 && self.gamma <= 1.0) {
            return bad("gamma must lie in (0, 1]");
        }
        if !(self.tau > 0.0) {
            return bad("tau must be positive");
        }
        if !(self.lr > 0.0) || !(self.grad_clip > 0.0) || self.invdy_lambda < 0.0 {
            return bad("lr and grad_clip must be positive and invdy_lambda non-negative");
        }
        if self.batch_size == 0
            || self.buffer_capacity == 0
            || self.num_envs == 0
            || self.updates_per_round == 0
        {
            return bad(
                "batch_size, buffer_capacity, num_envs and updates_per_round must be positive",
            );
        }
        if self.max_episode_steps == 0 || self.locate_depth == 0 {
            return bad("max_episode_steps and locate_depth must be positive");
        }
        let d = self.dims;
        if d.emb == 0 || d.hidden == 0 || d.mlp == 0 || d.hash == 0 {
            return bad("dimensions must be positive");
        }
        Ok(())
    }
}

/// One stored step. Inputs are raw so that encoder updates apply to old
/// transitions too.
#[derive(Debug, Clone)]
pub struct Transition {
    pub state: Arc<StateInputs>,
    pub actions: ActionSet,
    pub taken: usize,
    pub reward: f64,
    pub next_state: Arc<StateInputs>,
    pub next_actions: ActionSet,
    pub done: bool,
}

/// Network plus optimizer state.
#[derive(Debug, Clone)]
pub struct Learner {
    pub net: Network,
    pub adam: Adam,
    pub cfg: TrainConfig,
}

impl Learner {
    pub fn new(net: Network, cfg: TrainConfig) -> Self {
        let adam = Adam::new(cfg.lr);
        Self { net, adam, cfg }
    }

    /// TD targets under the current parameters.
    pub fn td_targets(&self, batch: &[&Transition]) -> Result<Vec<f64>> {
        batch
            .iter()
            .map(|t| {
                if t.done {
                    return Ok(t.reward);
                }
                let q = self.net.q_values(&t.next_state, &t.next_actions)?;
                td_target(t.reward, false, self.cfg.gamma, &q)
            })
            .collect()
    }

    /// One gradient update on `batch`. Targets are computed before the
    /// update.
    pub fn train_step(&mut self, batch: &[&Transition]) -> Result<Losses> {
        if batch.is_empty() {
            return Err(Error::Empty("training batch"));
        }
        let targets = self.td_targets(batch)?;
        let net = &self.net;
        let scale = 1.0 / batch.len() as f64;
        let (losses, grads) = {
            let mut tape = Tape::new(&net.params.store);
            let mut td_terms = Vec::with_capacity(batch.len());
            let mut inv_terms = Vec::new();
            for (t, y) in batch.iter().zip(&targets) {
                let (td, inv) = net.transition_losses(
                    &mut tape,
                    &t.state,
                    &t.next_state,
                    &t.actions,
                    t.taken,
                    *y,
                )?;
                td_terms.push(td);
                inv_terms.extend(inv);
            }
            let td_sum = tape.sum(&td_terms);
            let td = tape.scale(td_sum, scale);
            let mut total = td;
            let mut invdy = 0.0;
            if !inv_terms.is_empty() {
                let s = tape.sum(&inv_terms);
                let inv = tape.scale(s, scale);
                invdy = tape.scalar(inv);
                if self.cfg.invdy_lambda != 0.0 {
                    let w = tape.scale(inv, self.cfg.invdy_lambda);
                    total = tape.add(td, w);
                }
            }
            let losses = Losses {
                td: tape.scalar(td),
                invdy,
                total: tape.scalar(total),
            };
            if !(losses.td.is_finite() && losses.invdy.is_finite() && losses.total.is_finite()) {
                return Err(Error::NonFinite(format!(
                    "loss td={} invdy={} total={} after {} updates",
                    losses.td,
                    losses.invdy,
                    losses.total,
                    self.adam.steps()
                )));
            }
            (losses, tape.backward(total))
        };
        let store = &mut self.net.params.store;
        store.zero_grad();
        grads.accumulate_into(store);
        let norm = store.clip_grad_norm(self.cfg.grad_clip);
        if !norm.is_finite() {
            return Err(Error::NonFinite(format!(
                "gradient norm {norm} after {} updates",
                self.adam.steps()
            )));
        }
        self.adam.step(store);
        Ok(losses)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalRecord {
    pub after_episode: usize,
    pub mean_score: f64,
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub log: RunLog,
    pub evals: Vec<EvalRecord>,
    pub learner: Learner,
}

struct Slot {
    env: Env,
    map: LocationMap,
    state: Arc<StateInputs>,
    action_text: Vec<String>,
    actions: ActionSet,
    steps: usize,
    active: bool,
}

fn begin_episode(slot: &mut Slot, net: &mut Network, reset_map: bool) -> Result<()> {
    let obs = slot.env.reset();
    if reset_map {
        slot.map = LocationMap::new();
    }
    slot.state = Arc::new(net.build_state_inputs(&obs, &mut slot.env, &mut slot.map)?);
    slot.action_text = slot.env.valid_actions()?;
    slot.actions = net.action_set(&slot.action_text);
    slot.steps = 0;
    slot.active = true;
    Ok(())
}

/// Trains a fresh agent on `game`, stepping `num_envs` environments round
/// robin with one training update per round, until `episodes` episodes
/// have finished.
pub fn run_training(
    game: Arc<GameDef>,
    variant: Variant,
    cfg: &TrainConfig,
    seed: u64,
) -> Result<TrainOutcome> {
    cfg.validate()?;
    variant.validate()?;
    let vocab = Vocab::build(game.text_corpus());
    let net = Network::new(variant, cfg.dims, vocab, cfg.locate_depth, seed)?;
    let mut learner = Learner::new(net, cfg.clone());
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(0x9e37_79b9_7f4a_7c15));
    let mut buffer: ReplayBuffer<Transition> = ReplayBuffer::new(cfg.buffer_capacity);
    let mut log = RunLog::default();
    let mut evals = Vec::new();

    let mut slots = Vec::with_capacity(cfg.num_envs);
    let mut started = 0;
    for _ in 0..cfg.num_envs {
        let mut slot = Slot {
            env: Env::new(game.clone()),
            map: LocationMap::new(),
            state: Arc::default(),
            action_text: Vec::new(),
            actions: Arc::default(),
            steps: 0,
            active: false,
        };
        if started < cfg.episodes {
            begin_episode(&mut slot, &mut learner.net, true)?;
            started += 1;
        }
        slots.push(slot);
    }

    let (mut loss_sum, mut updates) = (Losses::default(), 0usize);
    while log.len() < cfg.episodes {
        for slot in slots.iter_mut().filter(|s| s.active) {
            let q = learner.net.q_values(&slot.state, &slot.actions)?;
            let idx = select_action(&q, cfg.tau, &mut rng)?;
            let res = slot.env.step(&slot.action_text[idx])?;
            slot.steps += 1;
            let (next_state, next_text, next_actions) = if res.done {
                let s = learner.net.terminal_inputs(&res.observation);
                (Arc::new(s), Vec::new(), Arc::default())
            } else {
                let s = learner.net.build_state_inputs(
                    &res.observation,
                    &mut slot.env,
                    &mut slot.map,
                )?;
                let text = slot.env.valid_actions()?;
                let set = learner.net.action_set(&text);
                (Arc::new(s), text, set)
            };
            buffer.push(Transition {
                state: slot.state.clone(),
                actions: slot.actions.clone(),
                taken: idx,
                reward: res.reward as f64,
                next_state: next_state.clone(),
                next_actions: next_actions.clone(),
                done: res.done,
            });
            if res.done || slot.steps >= cfg.max_episode_steps {
                let mean = if updates == 0 {
                    Losses::default()
                } else {
                    let k = updates as f64;
                    Losses {
                        td: loss_sum.td / k,
                        invdy: loss_sum.invdy / k,
                        total: loss_sum.total / k,
                    }
                };
                log.push(slot.env.score(), slot.steps, updates, mean);
                loss_sum = Losses::default();
                updates = 0;
                if cfg.eval_every > 0 && log.len() % cfg.eval_every == 0 {
                    let tau = (!cfg.eval_greedy).then_some(cfg.tau);
                    let eval_seed = rng.gen();
                    let scores = evaluate(
                        &mut learner.net,
                        &game,
                        cfg.eval_episodes,
                        cfg.max_episode_steps,
                        tau,
                        eval_seed,
                    )?;
                    evals.push(EvalRecord {
                        after_episode: log.len(),
                        mean_score: scores.iter().sum::<i64>() as f64 / scores.len().max(1) as f64,
                    });
                }
                if started < cfg.episodes {
                    begin_episode(slot, &mut learner.net, cfg.reset_map_each_episode)?;
                    started += 1;
                } else {
                    slot.active = false;
                }
            } else {
                slot.state = next_state;
                slot.action_text = next_text;
                slot.actions = next_actions;
            }
        }
        if buffer.len() >= cfg.learning_starts.max(1) {
            for _ in 0..cfg.updates_per_round {
                let batch = buffer.sample(cfg.batch_size, &mut rng);
                let l = learner.train_step(&batch)?;
                loss_sum.td += l.td;
                loss_sum.invdy += l.invdy;
                loss_sum.total += l.total;
                updates += 1;
            }
        }
        if slots.iter().all(|s| !s.active) {
            break;
        }
    }
    Ok(TrainOutcome {
        log,
        evals,
        learner,
    })
}

/// Plays `episodes` episodes with the Boltzmann policy at temperature
/// `tau`, or greedily when `tau` is `None`, and returns the final scores.
pub fn evaluate(
    net: &mut Network,
    game: &Arc<GameDef>,
    episodes: usize,
    max_steps: usize,
    tau: Option<f64>,
    seed: u64,
) -> Result<Vec<i64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut scores = Vec::with_capacity(episodes);
    let mut env = Env::new(game.clone());
    for _ in 0..episodes {
        let mut obs = env.reset();
        let mut map = LocationMap::new();
        for _ in 0..max_steps {
            let state = net.build_state_inputs(&obs, &mut env, &mut map)?;
            let text = env.valid_actions()?;
            let actions = net.action_set(&text);
            let q = net.q_values(&state, &actions)?;
            let idx = match tau {
                Some(t) => select_action(&q, t, &mut rng)?,
                None => greedy_action(&q)?,
            };
            let res = env.step(&text[idx])?;
            obs = res.observation;
            if res.done {
                break;
            }
        }
        scores.push(env.score());
    }
    Ok(scores)
}
