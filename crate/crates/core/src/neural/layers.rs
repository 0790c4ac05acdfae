use rand::Rng;

use super::tape::{GruIds, NodeId, Tape};
use super::tensor::{ParamId, ParamStore};
use crate::error::{Error, Result};

pub const LEAKY_SLOPE: f64 = 0.01;

pub fn new_gru<R: Rng>(
    store: &mut ParamStore,
    name: &str,
    input: usize,
    hidden: usize,
    rng: &mut R,
) -> GruIds {
    let mut w = |g: &str| store.add_uniform(format!("{name}.w_{g}"), hidden, input, input, rng);
    let (w_z, w_r, w_h) = (w("z"), w("r"), w("h"));
    let mut u = |g: &str| store.add_uniform(format!("{name}.u_{g}"), hidden, hidden, hidden, rng);
    let (u_z, u_r, u_h) = (u("z"), u("r"), u("h"));
    let mut b = |g: &str| store.add_uniform(format!("{name}.b_{g}"), hidden, 1, hidden, rng);
    let (b_z, b_r, b_h) = (b("z"), b("r"), b("h"));
    GruIds {
        w_z,
        u_z,
        b_z,
        w_r,
        u_r,
        b_r,
        w_h,
        u_h,
        b_h,
    }
}

/// Hidden dimension of a GRU.
pub fn gru_hidden(store: &ParamStore, ids: GruIds) -> usize {
    store.get(ids.b_z).rows
}

pub struct GruOutput {
    pub last: NodeId,
    pub states: Vec<NodeId>,
}

/// Runs the GRU from `h₀ = 0` over `inputs`. An empty sequence yields the
/// zero vector and no states.
pub fn gru_encode(tape: &mut Tape, ids: GruIds, inputs: &[NodeId]) -> Result<GruOutput> {
    let store = tape.params();
    let hidden = gru_hidden(store, ids);
    let in_dim = store.get(ids.w_z).cols;
    let mut h = tape.zeros(hidden);
    let mut states = Vec::with_capacity(inputs.len());
    for &x in inputs {
        if tape.value(x).len() != in_dim {
            return Err(Error::Shape(format!(
                "gru input has {} entries, expected {in_dim}",
                tape.value(x).len()
            )));
        }
        h = tape.gru_cell(ids, x, h);
        states.push(h);
    }
    Ok(GruOutput { last: h, states })
}

/// Embedding lookups for a token index sequence.
pub fn embed(tape: &mut Tape, table: ParamId, tokens: &[usize]) -> Result<Vec<NodeId>> {
    let rows = tape.params().get(table).rows;
    tokens
        .iter()
        .map(|&t| {
            if t >= rows {
                Err(Error::Shape(format!(
                    "token {t} outside vocabulary of {rows}"
                )))
            } else {
                Ok(tape.row(table, t))
            }
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BidafIds {
    pub w: ParamId,
    pub b: ParamId,
}

pub fn new_bidaf<R: Rng>(store: &mut ParamStore, hidden: usize, rng: &mut R) -> BidafIds {
    BidafIds {
        w: store.add_uniform("bidaf.w", hidden, 4 * hidden, 4 * hidden, rng),
        b: store.add_uniform("bidaf.b", hidden, 1, 4 * hidden, rng),
    }
}

/// Action-attended observation encoding: each observation state `o_i`
/// attends over the action states, `[o_i, c_i, o_i ⊙ c_i, |o_i - c_i|]` is
/// projected with a leaky ReLU, and the results are mean-pooled. An empty
/// observation yields the zero vector.
pub fn bidaf(tape: &mut Tape, ids: BidafIds, obs: &[NodeId], act: &[NodeId]) -> Result<NodeId> {
    if act.is_empty() {
        return Err(Error::Empty("bidaf action sequence"));
    }
    let hidden = tape.params().get(ids.b).rows;
    let dims_ok = obs
        .iter()
        .chain(act)
        .all(|n| tape.value(*n).len() == hidden);
    if !dims_ok {
        return Err(Error::Shape(format!(
            "bidaf inputs must have {hidden} entries"
        )));
    }
    if obs.is_empty() {
        return Ok(tape.zeros(hidden));
    }
    let mut outs = Vec::with_capacity(obs.len());
    for &o in obs {
        let c = tape.attend(o, act);
        let prod = tape.mul(o, c);
        let diff = tape.sub(o, c);
        let adiff = tape.abs(diff);
        let feat = tape.concat(&[o, c, prod, adiff]);
        let y = tape.linear(ids.w, Some(ids.b), feat);
        outs.push(tape.leaky_relu(y, LEAKY_SLOPE));
    }
    Ok(tape.mean(&outs))
}

/// A one-hidden-layer MLP with a scalar output.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MlpIds {
    pub w1: ParamId,
    pub b1: ParamId,
    pub w2: ParamId,
    pub b2: ParamId,
}

pub fn new_mlp<R: Rng>(
    store: &mut ParamStore,
    name: &str,
    input: usize,
    hidden: usize,
    rng: &mut R,
) -> MlpIds {
    MlpIds {
        w1: store.add_uniform(format!("{name}.w1"), hidden, input, input, rng),
        b1: store.add_uniform(format!("{name}.b1"), hidden, 1, input, rng),
        w2: store.add_uniform(format!("{name}.w2"), 1, hidden, hidden, rng),
        b2: store.add_uniform(format!("{name}.b2"), 1, 1, hidden, rng),
    }
}

pub fn mlp(tape: &mut Tape, ids: MlpIds, x: NodeId) -> Result<NodeId> {
    let want = tape.params().get(ids.w1).cols;
    let got = tape.value(x).len();
    if want != got {
        return Err(Error::Shape(format!(
            "mlp input has {got} entries, expected {want}"
        )));
    }
    let h = tape.linear(ids.w1, Some(ids.b1), x);
    let h = tape.leaky_relu(h, LEAKY_SLOPE);
    Ok(tape.linear(ids.w2, Some(ids.b2), h))
}

/// `Q(sr, ar) = MLP([sr, ar])`.
pub fn q_value(tape: &mut Tape, head: MlpIds, sr: NodeId, ar: NodeId) -> Result<NodeId> {
    let x = tape.concat(&[sr, ar]);
    mlp(tape, head, x)
}

/// Cross-entropy of the taken action among `candidates`, each scored by
/// `MLP([sr_t, sr_next, ar])`.
pub fn inv_dyn_loss(
    tape: &mut Tape,
    head: MlpIds,
    sr_t: NodeId,
    sr_next: NodeId,
    candidates: &[NodeId],
    taken: usize,
) -> Result<NodeId> {
    if candidates.is_empty() {
        return Err(Error::Empty("inverse dynamics candidate set"));
    }
    if taken >= candidates.len() {
        return Err(Error::Validation(format!(
            "taken index {taken} out of {} candidates",
            candidates.len()
        )));
    }
    let mut scores = Vec::with_capacity(candidates.len());
    for &ar in candidates {
        let x = tape.concat(&[sr_t, sr_next, ar]);
        scores.push(mlp(tape, head, x)?);
    }
    let logits = tape.concat(&scores);
    Ok(tape.softmax_xent(logits, taken))
}
