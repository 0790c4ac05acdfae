use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Losses {
    pub td: f64,
    pub invdy: f64,
    pub total: f64,
}

/// One finished episode. `max_score` is the best episode score so far and
/// `losses` is the mean over the training updates since the previous record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeRecord {
    pub episode: usize,
    pub score: i64,
    pub max_score: i64,
    pub steps: usize,
    pub updates: usize,
    pub losses: Losses,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunLog {
    pub records: Vec<EpisodeRecord>,
}

impl RunLog {
    pub fn push(&mut self, score: i64, steps: usize, updates: usize, losses: Losses) {
        let prev = self.records.last().map_or(i64::MIN, |r| r.max_score);
        self.records.push(EpisodeRecord {
            episode: self.records.len(),
            score,
            max_score: prev.max(score),
            steps,
            updates,
            losses,
        });
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Mean episode score over the last `window` episodes.
    pub fn avg_score(&self, window: usize) -> f64 {
        let n = window.min(self.records.len());
        if n == 0 {
            return 0.0;
        }
        let tail = &self.records[self.records.len() - n..];
        tail.iter().map(|r| r.score as f64).sum::<f64>() / n as f64
    }

    pub fn max_score(&self) -> i64 {
        self.records.last().map_or(0, |r| r.max_score)
    }

    /// One JSON object per line.
    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for r in &self.records {
            out.push_str(&serde_json::to_string(r).expect("records serialize"));
            out.push('\n');
        }
        out
    }

    pub fn from_jsonl(text: &str) -> Result<Self> {
        let mut records = Vec::new();
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let r: EpisodeRecord = serde_json::from_str(line).map_err(|e| Error::Parse {
                line: i + 1,
                column: e.column(),
                message: e.to_string(),
            })?;
            records.push(r);
        }
        Ok(Self { records })
    }
}
