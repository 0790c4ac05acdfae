//! Text-game reinforcement learning with semantic encoders and approximate
//! state hashing.
//!
//! * [`engine`]: a deterministic text-adventure engine with privileged
//!   access (state hash, room id, valid actions, snapshots).
//! * [`hashrep`]: portable string hashes and hash-seeded normal vectors.
//! * [`locgraph`]: location identification by bounded exploration, and the
//!   per-location memory of the most recent look.
//! * [`neural`]: a small reverse-mode autodiff tape with GRU, BiDAF and MLP
//!   heads.
//! * [`agent`]: the DRRN learner and all representation variants.
//! * [`cli`]: train / eval / report / play / verify.

pub mod agent;
pub mod cli;
pub mod engine;
pub mod error;
pub mod hashrep;
pub mod locgraph;
pub mod neural;

pub use error::{Error, Result};
