use std::io::{Read, Write};
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::layers::{new_bidaf, new_gru, new_mlp, BidafIds, MlpIds};
use super::tape::GruIds;
use super::tensor::{ParamId, ParamStore};
use super::vocab::Vocab;
use crate::error::{Error, Result};

/// Layout of the parameter set. `state_dim` and `action_dim` are the lengths
/// of the state and action representations fed to the heads.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetConfig {
    pub vocab_size: usize,
    pub emb_dim: usize,
    pub hidden_dim: usize,
    pub mlp_hidden: usize,
    pub text_enc: bool,
    pub att: bool,
    pub invdy: bool,
    pub state_dim: usize,
    pub action_dim: usize,
}

/// Embedding table, GRU₁..GRU₄ (observation, inventory, look, action),
/// BiDAF projection, Q-head and inverse-dynamics head.
#[derive(Debug, Clone, PartialEq)]
pub struct EncoderParams {
    pub config: NetConfig,
    pub store: ParamStore,
    pub embedding: Option<ParamId>,
    pub grus: Option<[GruIds; 4]>,
    pub bidaf: Option<BidafIds>,
    pub q_head: MlpIds,
    pub inv_dyn: Option<MlpIds>,
}

const MAGIC: &[u8; 8] = b"TGRLCKPT";
const VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct Header {
    config: NetConfig,
    vocab_hash: String,
    vocab: Vec<String>,
    tensors: Vec<TensorHeader>,
}

#[derive(Serialize, Deserialize)]
struct TensorHeader {
    name: String,
    rows: usize,
    cols: usize,
}

impl EncoderParams {
    pub fn new(config: NetConfig, seed: u64) -> Result<Self> {
        if config.att && !config.text_enc {
            return Err(Error::Config("attention requires the text encoder".into()));
        }
        if config.state_dim == 0 || config.action_dim == 0 || config.mlp_hidden == 0 {
            return Err(Error::Config("network dimensions must be positive".into()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut store = ParamStore::new();
        let (embedding, grus, bidaf) = if config.text_enc {
            let emb = store.add_uniform(
                "embedding",
                config.vocab_size,
                config.emb_dim,
                config.emb_dim,
                &mut rng,
            );
            let names = ["gru_obs", "gru_inv", "gru_look", "gru_act"];
            let grus =
                names.map(|n| new_gru(&mut store, n, config.emb_dim, config.hidden_dim, &mut rng));
            let bidaf = config
                .att
                .then(|| new_bidaf(&mut store, config.hidden_dim, &mut rng));
            (Some(emb), Some(grus), bidaf)
        } else {
            (None, None, None)
        };
        let q_head = new_mlp(
            &mut store,
            "q_head",
            config.state_dim + config.action_dim,
            config.mlp_hidden,
            &mut rng,
        );
        let inv_dyn = config.invdy.then(|| {
            new_mlp(
                &mut store,
                "inv_dyn",
                2 * config.state_dim + config.action_dim,
                config.mlp_hidden,
                &mut rng,
            )
        });
        Ok(Self {
            config,
            store,
            embedding,
            grus,
            bidaf,
            q_head,
            inv_dyn,
        })
    }

    pub fn num_params(&self) -> usize {
        self.store.num_params()
    }

    /// Writes the checkpoint: the 8-byte magic `TGRLCKPT`, a little-endian
    /// `u32` version, a little-endian `u64` header length, the JSON header
    /// (config, vocabulary and its hash, tensor names and shapes), then every
    /// tensor's values as little-endian `f64` in header order.
    pub fn save<W: Write>(&self, vocab: &Vocab, mut w: W) -> Result<()> {
        let header = Header {
            config: self.config.clone(),
            vocab_hash: format!("{:016x}", vocab.hash()),
            vocab: vocab.tokens().to_vec(),
            tensors: self
                .store
                .tensors()
                .iter()
                .map(|t| TensorHeader {
                    name: t.name.clone(),
                    rows: t.rows,
                    cols: t.cols,
                })
                .collect(),
        };
        let json = serde_json::to_vec(&header)?;
        w.write_all(MAGIC)?;
        w.write_all(&VERSION.to_le_bytes())?;
        w.write_all(&(json.len() as u64).to_le_bytes())?;
        w.write_all(&json)?;
        let mut buf = Vec::with_capacity(self.num_params() * 8);
        for t in self.store.tensors() {
            for v in &t.values {
                buf.extend_from_slice(&v.to_le_bytes());
            }
        }
        w.write_all(&buf)?;
        Ok(())
    }

    pub fn load<R: Read>(mut r: R) -> Result<(Self, Vocab)> {
        let bad = |m: &str| Error::Checkpoint(m.to_string());
        let mut magic = [0u8; 8];
        r.read_exact(&mut magic)?;
        if &magic != MAGIC {
            return Err(bad("bad magic"));
        }
        let mut b4 = [0u8; 4];
        r.read_exact(&mut b4)?;
        if u32::from_le_bytes(b4) != VERSION {
            return Err(bad("unsupported version"));
        }
        let mut b8 = [0u8; 8];
        r.read_exact(&mut b8)?;
        let len = u64::from_le_bytes(b8) as usize;
        let mut json = vec![0u8; len];
        r.read_exact(&mut json)?;
        let header: Header = serde_json::from_slice(&json)?;
        let vocab = Vocab::from_tokens(header.vocab)?;
        if format!("{:016x}", vocab.hash()) != header.vocab_hash {
            return Err(bad("vocabulary hash mismatch"));
        }
        let mut params = Self::new(header.config, 0)?;
        if params.store.len() != header.tensors.len() {
            return Err(bad("tensor count does not match configuration"));
        }
        for (t, h) in params.store.tensors_mut().iter_mut().zip(&header.tensors) {
            if t.name != h.name || t.rows != h.rows || t.cols != h.cols {
                return Err(Error::Checkpoint(format!(
                    "tensor {} does not match configuration",
                    h.name
                )));
            }
            for v in &mut t.values {
                r.read_exact(&mut b8)?;
                *v = f64::from_le_bytes(b8);
            }
        }
        let mut rest = Vec::new();
        r.read_to_end(&mut rest)?;
        if !rest.is_empty() {
            return Err(bad("trailing bytes"));
        }
        Ok((params, vocab))
    }

    pub fn save_file(&self, vocab: &Vocab, path: &Path) -> Result<()> {
        let f = std::fs::File::create(path)?;
        let mut w = std::io::BufWriter::new(f);
        self.save(vocab, &mut w)?;
        w.flush()?;
        Ok(())
    }

    pub fn load_file(path: &Path) -> Result<(Self, Vocab)> {
        let f = std::fs::File::open(path)?;
        Self::load(std::io::BufReader::new(f))
    }
}
