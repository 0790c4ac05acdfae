use std::collections::HashMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::variant::{Variant, VariantKind};
use crate::engine::{Env, Observation};
use crate::error::{Error, Result};
use crate::hashrep::{hash_vec, obs_hash_rep, HashConfig};
use crate::locgraph::{locate, serialize_map, update_and_get_state, KeyMode, LocationMap};
use crate::neural::{
    bidaf, embed, gru_encode, inv_dyn_loss, q_value, EncoderParams, NetConfig, NodeId, Tape, Vocab,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Dims {
    pub emb: usize,
    pub hidden: usize,
    pub mlp: usize,
    pub hash: usize,
}

impl Default for Dims {
    fn default() -> Self {
        Self {
            emb: 64,
            hidden: 128,
            mlp: 256,
            hash: 128,
        }
    }
}

/// Raw inputs for one state: token sequences of the observation triple
/// and the concatenated hash vectors.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct StateInputs {
    pub obs: Vec<usize>,
    pub inv: Vec<usize>,
    pub look: Vec<usize>,
    pub hash: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ActionInputs {
    pub text: String,
    pub tokens: Vec<usize>,
    pub hash: Vec<f64>,
}

pub type ActionSet = Arc<Vec<Arc<ActionInputs>>>;

struct EncState {
    finals: Option<[NodeId; 3]>,
    states: Option<[Vec<NodeId>; 3]>,
    hash: Option<NodeId>,
}

struct EncAction {
    last: NodeId,
    states: Vec<NodeId>,
}

/// A variant's encoder and heads together with its vocabulary.
#[derive(Debug, Clone)]
pub struct Network {
    pub variant: Variant,
    pub params: EncoderParams,
    pub vocab: Vocab,
    pub hash_cfg: HashConfig,
    pub locate_depth: usize,
    action_cache: HashMap<String, Arc<ActionInputs>>,
}

impl Network {
    pub fn new(
        variant: Variant,
        dims: Dims,
        vocab: Vocab,
        locate_depth: usize,
        seed: u64,
    ) -> Result<Self> {
        variant.validate()?;
        let config = net_config(&variant, dims, vocab.len());
        let params = EncoderParams::new(config, seed)?;
        Ok(Self::from_parts(
            variant,
            params,
            vocab,
            dims.hash,
            locate_depth,
        ))
    }

    pub fn from_parts(
        variant: Variant,
        params: EncoderParams,
        vocab: Vocab,
        hash_dim: usize,
        locate_depth: usize,
    ) -> Self {
        Self {
            variant,
            params,
            vocab,
            hash_cfg: HashConfig::new(hash_dim),
            locate_depth,
            action_cache: HashMap::new(),
        }
    }

    /// Length of the state representation.
    pub fn state_dim(&self) -> usize {
        self.params.config.state_dim
    }

    pub fn hash_len(&self) -> usize {
        self.variant.hash_parts() * self.hash_cfg.dim
    }

    pub fn action_inputs(&mut self, action: &str) -> Arc<ActionInputs> {
        if let Some(a) = self.action_cache.get(action) {
            return a.clone();
        }
        let a = Arc::new(ActionInputs {
            text: action.to_string(),
            tokens: if self.variant.text_enc {
                self.vocab.encode(action)
            } else {
                Vec::new()
            },
            hash: if self.variant.text_enc {
                Vec::new()
            } else {
                hash_vec(action, &self.hash_cfg).values
            },
        });
        self.action_cache.insert(action.to_string(), a.clone());
        a
    }

    pub fn action_set(&mut self, actions: &[String]) -> ActionSet {
        Arc::new(actions.iter().map(|a| self.action_inputs(a)).collect())
    }

    fn text_inputs(&self, obs: &Observation) -> StateInputs {
        let mut s = StateInputs::default();
        if self.variant.text_enc {
            s.obs = self.vocab.encode(&obs.response);
            s.inv = self.vocab.encode(&obs.inventory_text);
            s.look = self.vocab.encode(&obs.look_text);
        }
        s
    }

    /// Inputs for a terminal state: text only, hash parts zeroed.
    pub fn terminal_inputs(&self, obs: &Observation) -> StateInputs {
        let mut s = self.text_inputs(obs);
        s.hash = if self.variant.kind == VariantKind::ObsHash {
            obs_hash_rep(
                &obs.response,
                &obs.inventory_text,
                &obs.look_text,
                &self.hash_cfg,
            )
        } else {
            vec![0.0; self.hash_len()]
        };
        s
    }

    /// Builds the state inputs for the current step. For variants with a
    /// location map this records the current look in `map` first.
    pub fn build_state_inputs(
        &self,
        obs: &Observation,
        env: &mut Env,
        map: &mut LocationMap,
    ) -> Result<StateInputs> {
        let mut s = self.text_inputs(obs);
        let v = self.variant;
        let cfg = &self.hash_cfg;
        match v.kind {
            VariantKind::Drrn | VariantKind::DrrnInvdy => {}
            VariantKind::ObsHash => {
                s.hash = obs_hash_rep(&obs.response, &obs.inventory_text, &obs.look_text, cfg);
            }
            VariantKind::GtState => {
                s.hash = hash_vec(&env.gt_state_hash().to_string(), cfg).values;
            }
            VariantKind::Log => {
                let profile = if v.use_po2 {
                    update_and_get_state(env, map, KeyMode::Locate(self.locate_depth))?.profile
                } else {
                    None
                };
                if v.use_po1 {
                    let p = match profile {
                        Some(p) => p,
                        None => locate(env, self.locate_depth)?,
                    };
                    s.hash
                        .extend(hash_vec(&crate::locgraph::serialize_profile(&p), cfg).values);
                }
                if v.use_po2 {
                    s.hash.extend(hash_vec(&serialize_map(map), cfg).values);
                }
            }
            VariantKind::GtRoom => {
                if v.use_po2 {
                    update_and_get_state(env, map, KeyMode::GtRoom)?;
                }
                if v.use_po1 {
                    s.hash.extend(hash_vec(env.gt_room_id(), cfg).values);
                }
                if v.use_po2 {
                    s.hash.extend(hash_vec(&serialize_map(map), cfg).values);
                }
            }
        }
        Ok(s)
    }

    fn encode_state(&self, tape: &mut Tape, s: &StateInputs) -> Result<EncState> {
        let (mut finals, mut states) = (None, None);
        if let (Some(emb), Some(grus)) = (self.params.embedding, self.params.grus) {
            let mut f = Vec::with_capacity(3);
            let mut st = Vec::with_capacity(3);
            for (tokens, gru) in [&s.obs, &s.inv, &s.look].into_iter().zip(grus) {
                let xs = embed(tape, emb, tokens)?;
                let out = gru_encode(tape, gru, &xs)?;
                f.push(out.last);
                st.push(out.states);
            }
            finals = Some([f[0], f[1], f[2]]);
            let mut it = st.into_iter();
            states = Some([it.next().unwrap(), it.next().unwrap(), it.next().unwrap()]);
        }
        let hash = if s.hash.is_empty() {
            None
        } else {
            if s.hash.len() != self.hash_len() {
                return Err(Error::Shape(format!(
                    "state hash part has {} entries, expected {}",
                    s.hash.len(),
                    self.hash_len()
                )));
            }
            Some(tape.input(s.hash.clone()))
        };
        Ok(EncState {
            finals,
            states,
            hash,
        })
    }

    fn encode_action(&self, tape: &mut Tape, a: &ActionInputs) -> Result<EncAction> {
        match (self.params.embedding, self.params.grus) {
            (Some(emb), Some(grus)) => {
                let xs = embed(tape, emb, &a.tokens)?;
                let out = gru_encode(tape, grus[3], &xs)?;
                Ok(EncAction {
                    last: out.last,
                    states: out.states,
                })
            }
            _ => {
                let last = tape.input(a.hash.clone());
                Ok(EncAction {
                    last,
                    states: Vec::new(),
                })
            }
        }
    }

    /// State representation for scoring `a`; with attention each text
    /// component is the action-attended encoding.
    fn state_rep(&self, tape: &mut Tape, s: &EncState, a: &EncAction) -> Result<NodeId> {
        let mut parts = Vec::with_capacity(4);
        match (self.params.bidaf, &s.states) {
            (Some(ids), Some(states)) if !a.states.is_empty() => {
                for st in states {
                    parts.push(bidaf(tape, ids, st, &a.states)?);
                }
            }
            _ => {
                if let Some(f) = s.finals {
                    parts.extend(f);
                }
            }
        }
        if let Some(h) = s.hash {
            parts.push(h);
        }
        Ok(tape.concat(&parts))
    }

    /// Action-independent state representation used by inverse dynamics.
    fn plain_state_rep(&self, tape: &mut Tape, s: &EncState) -> NodeId {
        let mut parts = Vec::with_capacity(4);
        if let Some(f) = s.finals {
            parts.extend(f);
        }
        if let Some(h) = s.hash {
            parts.push(h);
        }
        tape.concat(&parts)
    }

    /// The state representation vector used to score `a`.
    pub fn state_rep_vector(&self, s: &StateInputs, a: &ActionInputs) -> Result<Vec<f64>> {
        let mut tape = Tape::new(&self.params.store);
        let es = self.encode_state(&mut tape, s)?;
        let ea = self.encode_action(&mut tape, a)?;
        let sr = self.state_rep(&mut tape, &es, &ea)?;
        Ok(tape.value(sr).to_vec())
    }

    /// Q-values of every action in `actions`.
    pub fn q_values(&self, s: &StateInputs, actions: &[Arc<ActionInputs>]) -> Result<Vec<f64>> {
        let mut tape = Tape::new(&self.params.store);
        let es = self.encode_state(&mut tape, s)?;
        let mut out = Vec::with_capacity(actions.len());
        for a in actions {
            let ea = self.encode_action(&mut tape, a)?;
            let sr = self.state_rep(&mut tape, &es, &ea)?;
            let q = q_value(&mut tape, self.params.q_head, sr, ea.last)?;
            out.push(tape.scalar(q));
        }
        Ok(out)
    }

    /// Adds the TD loss of one transition against `target` and, when the
    /// variant has inverse dynamics, its inverse-dynamics loss.
    pub(crate) fn transition_losses(
        &self,
        tape: &mut Tape,
        s: &StateInputs,
        next: &StateInputs,
        actions: &[Arc<ActionInputs>],
        taken: usize,
        target: f64,
    ) -> Result<(NodeId, Option<NodeId>)> {
        let es = self.encode_state(tape, s)?;
        let taken_enc = self.encode_action(tape, &actions[taken])?;
        let sr = self.state_rep(tape, &es, &taken_enc)?;
        let q = q_value(tape, self.params.q_head, sr, taken_enc.last)?;
        let td = tape.sq_err(q, target);
        let Some(head) = self.params.inv_dyn else {
            return Ok((td, None));
        };
        let en = self.encode_state(tape, next)?;
        let sr_t = self.plain_state_rep(tape, &es);
        let sr_n = self.plain_state_rep(tape, &en);
        let mut cands = Vec::with_capacity(actions.len());
        for (i, a) in actions.iter().enumerate() {
            if i == taken {
                cands.push(taken_enc.last);
            } else {
                cands.push(self.encode_action(tape, a)?.last);
            }
        }
        let inv = inv_dyn_loss(tape, head, sr_t, sr_n, &cands, taken)?;
        Ok((td, Some(inv)))
    }
}

/// Parameter layout for a variant.
pub fn net_config(variant: &Variant, dims: Dims, vocab_size: usize) -> NetConfig {
    let text = if variant.text_enc { 3 * dims.hidden } else { 0 };
    NetConfig {
        vocab_size,
        emb_dim: dims.emb,
        hidden_dim: dims.hidden,
        mlp_hidden: dims.mlp,
        text_enc: variant.text_enc,
        att: variant.att,
        invdy: variant.invdy,
        state_dim: text + variant.hash_parts() * dims.hash,
        action_dim: if variant.text_enc {
            dims.hidden
        } else {
            dims.hash
        },
    }
}
