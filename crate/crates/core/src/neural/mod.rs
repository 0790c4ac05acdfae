//! Differentiable encoder stack: embeddings, GRU encoders, BiDAF attention,
//! the Q-head and the inverse-dynamics head, on a small reverse-mode tape.

mod gradcheck;
mod layers;
mod model;
mod optim;
mod tape;
mod tensor;
mod vocab;

pub use gradcheck::{grad_check, GradCheckReport, GRAD_CHECK_EPS};
pub use layers::{
    bidaf, embed, gru_encode, gru_hidden, inv_dyn_loss, mlp, new_bidaf, new_gru, new_mlp, q_value,
    BidafIds, GruOutput, MlpIds, LEAKY_SLOPE,
};
pub use model::{EncoderParams, NetConfig};
pub use optim::Adam;
pub use tape::{attend, sigmoid, softmax, Gradients, GruIds, NodeId, Tape};
pub use tensor::{ParamId, ParamStore, Tensor};
pub use vocab::{tokenize, Vocab, PAD, PAD_TOKEN, UNK, UNK_TOKEN};
