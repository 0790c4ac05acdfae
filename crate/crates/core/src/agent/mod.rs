//! DRRN agent with pluggable state representations, replay, Boltzmann
//! exploration and TD training.

mod network;
mod policy;
mod replay;
mod runlog;
mod train;
mod variant;

pub use network::{net_config, ActionInputs, ActionSet, Dims, Network, StateInputs};
pub use policy::{boltzmann_probs, greedy_action, select_action, td_target};
pub use replay::ReplayBuffer;
pub use runlog::{EpisodeRecord, Losses, RunLog};
pub use train::{
    evaluate, run_training, EvalRecord, Learner, TrainConfig, TrainOutcome, Transition,
};
pub use variant::{Variant, VariantKind};
