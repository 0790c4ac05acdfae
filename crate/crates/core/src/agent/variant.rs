use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum VariantKind {
    Drrn,
    ObsHash,
    DrrnInvdy,
    Log,
    GtState,
    GtRoom,
}

impl VariantKind {
    pub const ALL: [VariantKind; 6] = [
        VariantKind::Drrn,
        VariantKind::ObsHash,
        VariantKind::DrrnInvdy,
        VariantKind::Log,
        VariantKind::GtState,
        VariantKind::GtRoom,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            VariantKind::Drrn => "DRRN",
            VariantKind::ObsHash => "OBS_HASH",
            VariantKind::DrrnInvdy => "DRRN_INVDY",
            VariantKind::Log => "LOG",
            VariantKind::GtState => "GT_STATE",
            VariantKind::GtRoom => "GT_ROOM",
        }
    }
}

impl fmt::Display for VariantKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for VariantKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let up = s.trim().to_ascii_uppercase().replace('-', "_");
        VariantKind::ALL
            .into_iter()
            .find(|k| k.as_str() == up)
            .ok_or_else(|| Error::Config(format!("unknown variant {s:?}")))
    }
}

/// An agent variant: which state representation it builds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Variant {
    pub kind: VariantKind,
    pub text_enc: bool,
    pub att: bool,
    pub invdy: bool,
    pub use_po1: bool,
    pub use_po2: bool,
}

impl Variant {
    pub fn new(kind: VariantKind) -> Self {
        let (text_enc, att, invdy, po) = match kind {
            VariantKind::Drrn => (true, false, false, false),
            VariantKind::ObsHash => (false, false, false, false),
            VariantKind::DrrnInvdy => (true, false, true, false),
            VariantKind::Log | VariantKind::GtRoom => (true, true, true, true),
            VariantKind::GtState => (true, true, true, false),
        };
        Self {
            kind,
            text_enc,
            att,
            invdy,
            use_po1: po,
            use_po2: po,
        }
    }

    /// Turning the text encoder off also turns attention and inverse
    /// dynamics off.
    pub fn with_text_enc(mut self, on: bool) -> Self {
        self.text_enc = on;
        if !on {
            self.att = false;
            self.invdy = false;
        }
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(format!("{}: {m}", self.kind)));
        if !self.text_enc && (self.att || self.invdy) {
            return bad("attention and inverse dynamics need the text encoder");
        }
        match self.kind {
            VariantKind::Drrn
            | VariantKind::DrrnInvdy
            | VariantKind::ObsHash
            | VariantKind::GtState => {
                if self.use_po1 || self.use_po2 {
                    return bad("does not use location profiles");
                }
            }
            VariantKind::Log | VariantKind::GtRoom => {}
        }
        if self.kind == VariantKind::ObsHash && self.text_enc {
            return bad("encodes observations by hashing only");
        }
        if self.hash_parts() == 0 && !self.text_enc {
            return bad("state representation would be empty");
        }
        Ok(())
    }

    /// Number of hash vectors in the state representation.
    pub fn hash_parts(&self) -> usize {
        match self.kind {
            VariantKind::Drrn | VariantKind::DrrnInvdy => 0,
            VariantKind::ObsHash => 3,
            VariantKind::GtState => 1,
            VariantKind::Log | VariantKind::GtRoom => {
                usize::from(self.use_po1) + usize::from(self.use_po2)
            }
        }
    }

    /// Whether a location map is maintained.
    pub fn uses_map(&self) -> bool {
        matches!(self.kind, VariantKind::Log | VariantKind::GtRoom) && self.use_po2
    }

    /// The kind name followed by every flag switched off relative to the
    /// kind's defaults, e.g. `LOG-text_enc`.
    pub fn label(&self) -> String {
        let base = Variant::new(self.kind);
        let mut s = self.kind.as_str().to_string();
        let flags = [
            ("text_enc", base.text_enc, self.text_enc),
            ("att", base.att, self.att),
            ("invdy", base.invdy, self.invdy),
            ("po1", base.use_po1, self.use_po1),
            ("po2", base.use_po2, self.use_po2),
        ];
        let forced = base.text_enc && !self.text_enc;
        for (name, def, cur) in flags {
            if forced && (name == "att" || name == "invdy") {
                continue;
            }
            if def && !cur {
                s.push('-');
                s.push_str(name);
            } else if !def && cur {
                s.push('+');
                s.push_str(name);
            }
        }
        s
    }
}
