use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::agent::{TrainConfig, Variant, VariantKind};
use crate::error::{Error, Result};

/// Environment variable naming the root directory for relative output paths.
pub const OUT_ROOT_VAR: &str = "TGRL_OUT_ROOT";

/// Everything that determines a training run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunSpec {
    /// Path to a game file or the name of a bundled game.
    pub game: String,
    pub variant: VariantKind,
    pub text_enc: Option<bool>,
    pub att: Option<bool>,
    pub invdy: Option<bool>,
    pub use_po1: Option<bool>,
    pub use_po2: Option<bool>,
    pub train: TrainConfig,
    pub seeds: Vec<u64>,
    pub out: PathBuf,
}

impl Default for RunSpec {
    fn default() -> Self {
        Self {
            game: "lantern".into(),
            variant: VariantKind::Log,
            text_enc: None,
            att: None,
            invdy: None,
            use_po1: None,
            use_po2: None,
            train: TrainConfig::default(),
            seeds: vec![1, 2, 3],
            out: PathBuf::from("runs"),
        }
    }
}

impl RunSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(format!("run spec: {e}")))
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    /// The variant's defaults overridden by any explicit flags.
    pub fn resolve_variant(&self) -> Result<Variant> {
        let mut v = Variant::new(self.variant);
        if let Some(t) = self.text_enc {
            v = v.with_text_enc(t);
        }
        if let Some(a) = self.att {
            v.att = a;
        }
        if let Some(i) = self.invdy {
            v.invdy = i;
        }
        if let Some(p) = self.use_po1 {
            v.use_po1 = p;
        }
        if let Some(p) = self.use_po2 {
            v.use_po2 = p;
        }
        v.validate()?;
        Ok(v)
    }

    pub fn validate(&self) -> Result<Variant> {
        let v = self.resolve_variant()?;
        self.train.validate()?;
        if self.seeds.is_empty() {
            return Err(Error::Config("at least one seed is required".into()));
        }
        let mut seen = self.seeds.clone();
        seen.sort_unstable();
        seen.dedup();
        if seen.len() != self.seeds.len() {
            return Err(Error::Config("seeds must be distinct".into()));
        }
        Ok(v)
    }

    /// The output directory, placed under the output root when relative.
    pub fn out_dir(&self, root: Option<&Path>) -> PathBuf {
        match root {
            Some(r) if self.out.is_relative() => r.join(&self.out),
            _ => self.out.clone(),
        }
    }
}
