use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::hashrep::str_hash;

pub const PAD: usize = 0;
pub const UNK: usize = 1;
pub const PAD_TOKEN: &str = "<pad>";
pub const UNK_TOKEN: &str = "<unk>";

/// Lower-cases `text` and splits it into alphanumeric word tokens.
pub fn tokenize(text: &str) -> Vec<String> {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|w| !w.is_empty())
        .map(str::to_lowercase)
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vocab {
    tokens: Vec<String>,
    index: HashMap<String, usize>,
}

impl Vocab {
    /// Builds a vocabulary from every token in `texts`, sorted, after the
    /// reserved pad and unknown entries.
    pub fn build<I, S>(texts: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut words: Vec<String> = texts
            .into_iter()
            .flat_map(|t| tokenize(t.as_ref()))
            .collect();
        words.sort();
        words.dedup();
        let mut tokens = vec![PAD_TOKEN.to_string(), UNK_TOKEN.to_string()];
        tokens.extend(words);
        Self::from_tokens(tokens).expect("built vocabulary is well formed")
    }

    pub fn from_tokens(tokens: Vec<String>) -> Result<Self> {
        if tokens.len() < 2 || tokens[PAD] != PAD_TOKEN || tokens[UNK] != UNK_TOKEN {
            return Err(Error::Validation(
                "vocabulary must start with <pad> and <unk>".into(),
            ));
        }
        let mut index = HashMap::with_capacity(tokens.len());
        for (i, t) in tokens.iter().enumerate() {
            if index.insert(t.clone(), i).is_some() {
                return Err(Error::Validation(format!(
                    "duplicate vocabulary token {t:?}"
                )));
            }
        }
        Ok(Self { tokens, index })
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn id(&self, token: &str) -> usize {
        self.index.get(token).copied().unwrap_or(UNK)
    }

    pub fn encode(&self, text: &str) -> Vec<usize> {
        tokenize(text).iter().map(|t| self.id(t)).collect()
    }

    /// FNV-1a hash of the newline-joined token list.
    pub fn hash(&self) -> u64 {
        str_hash(&self.tokens.join("\n"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tokenize_examples() {
        assert!(tokenize("").is_empty());
        assert_eq!(tokenize("Take the lantern."), ["take", "the", "lantern"]);
        assert_eq!(tokenize("It's  dark!"), ["it", "s", "dark"]);
    }

    #[test]
    fn unknown_maps_to_unk() {
        let v = Vocab::build(["take the lantern"]);
        assert_eq!(v.len(), 5);
        assert_eq!(v.encode("take grue"), vec![v.id("take"), UNK]);
        assert_ne!(v.id("lantern"), UNK);
    }

    #[test]
    fn round_trip_tokens() {
        let v = Vocab::build(["a b c", "c d"]);
        let w = Vocab::from_tokens(v.tokens().to_vec()).unwrap();
        assert_eq!(v, w);
        assert_eq!(v.hash(), w.hash());
        assert!(Vocab::from_tokens(vec!["x".into()]).is_err());
    }
}
