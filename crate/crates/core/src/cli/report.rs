use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::RunMeta;
use crate::agent::RunLog;
use crate::error::{Error, Result};

/// Window for the final average episodic score.
pub const AVG_WINDOW: usize = 100;

/// Published per-game scores of the four DRRN-family agents.
pub const TABLE1_FIXTURE: &str = include_str!("../../data/table1.scores.json");

/// One precomputed table cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CellSummary {
    pub game: String,
    pub variant: String,
    pub avg: f64,
    pub max: f64,
    pub max_score: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SummaryFile {
    pub cells: Vec<CellSummary>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ScoreCell {
    /// Mean over runs of the final average episodic score.
    pub avg: Option<f64>,
    /// Best episode score over runs.
    pub max: Option<f64>,
    pub runs: usize,
    pub flags: Vec<String>,
    #[serde(skip)]
    avgs: Vec<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ScoreTable {
    pub games: Vec<String>,
    pub variants: Vec<String>,
    pub max_scores: BTreeMap<String, f64>,
    pub cells: BTreeMap<String, BTreeMap<String, ScoreCell>>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NormRow {
    pub variant: String,
    pub avg_norm: Option<f64>,
    pub max_norm: Option<f64>,
    pub complete: bool,
}

impl ScoreTable {
    fn cell_mut(&mut self, game: &str, variant: &str, max_score: f64) -> Result<&mut ScoreCell> {
        if !self.games.iter().any(|g| g == game) {
            self.games.push(game.to_string());
        }
        if !self.variants.iter().any(|v| v == variant) {
            self.variants.push(variant.to_string());
        }
        match self.max_scores.get(game) {
            Some(m) if *m != max_score => {
                return Err(Error::Validation(format!(
                    "game {game} has conflicting max scores {m} and {max_score}"
                )))
            }
            _ => {
                self.max_scores.insert(game.to_string(), max_score);
            }
        }
        Ok(self
            .cells
            .entry(game.to_string())
            .or_default()
            .entry(variant.to_string())
            .or_default())
    }

    pub fn add_summary(&mut self, s: &CellSummary) -> Result<()> {
        if !(s.max_score > 0.0) {
            return Err(Error::Validation(format!(
                "game {} needs a positive max score",
                s.game
            )));
        }
        let cell = self.cell_mut(&s.game, &s.variant, s.max_score)?;
        cell.avgs.push(s.avg);
        cell.avg = Some(cell.avgs.iter().sum::<f64>() / cell.avgs.len() as f64);
        cell.max = Some(cell.max.map_or(s.max, |m| m.max(s.max)));
        cell.runs += 1;
        Ok(())
    }

    pub fn from_summaries(cells: &[CellSummary]) -> Result<Self> {
        let mut t = Self::default();
        for c in cells {
            t.add_summary(c)?;
        }
        Ok(t)
    }

    /// Adds one training run (all of its seeds).
    pub fn add_run(&mut self, dir: &Path, meta: &RunMeta) -> Result<()> {
        let mut found = Vec::new();
        let mut flags = Vec::new();
        for seed in &meta.seeds {
            let path = dir.join(super::seed_dir(*seed)).join(super::RUNLOG_FILE);
            match std::fs::read_to_string(&path) {
                Err(_) => flags.push(format!("seed {seed}: missing log")),
                Ok(text) => {
                    let log = RunLog::from_jsonl(&text)?;
                    if log.len() < meta.episodes {
                        flags.push(format!(
                            "seed {seed}: partial log {}/{}",
                            log.len(),
                            meta.episodes
                        ));
                    }
                    if !log.is_empty() {
                        found.push(log);
                    }
                }
            }
        }
        let cell = self.cell_mut(&meta.game, &meta.variant, meta.max_score as f64)?;
        cell.flags.extend(flags);
        for log in &found {
            cell.avgs.push(log.avg_score(AVG_WINDOW));
            let m = log.max_score() as f64;
            cell.max = Some(cell.max.map_or(m, |x| x.max(m)));
            cell.runs += 1;
        }
        if !cell.avgs.is_empty() {
            cell.avg = Some(cell.avgs.iter().sum::<f64>() / cell.avgs.len() as f64);
        }
        Ok(())
    }

    pub fn cell(&self, game: &str, variant: &str) -> Option<&ScoreCell> {
        self.cells.get(game).and_then(|m| m.get(variant))
    }

    /// Model score divided by the game's maximum score, averaged across the
    /// games that have a score for `variant`.
    pub fn norm_row(&self, variant: &str) -> NormRow {
        let (mut a, mut m, mut na, mut nm) = (0.0, 0.0, 0usize, 0usize);
        for g in &self.games {
            let max_score = self.max_scores[g];
            if let Some(c) = self.cell(g, variant) {
                if let Some(v) = c.avg {
                    a += v / max_score;
                    na += 1;
                }
                if let Some(v) = c.max {
                    m += v / max_score;
                    nm += 1;
                }
            }
        }
        NormRow {
            variant: variant.to_string(),
            avg_norm: (na > 0).then(|| a / na as f64),
            max_norm: (nm > 0).then(|| m / nm as f64),
            complete: na == self.games.len(),
        }
    }

    pub fn avg_norm(&self, variant: &str) -> Option<f64> {
        self.norm_row(variant).avg_norm
    }

    pub fn norm_rows(&self) -> Vec<NormRow> {
        self.variants.iter().map(|v| self.norm_row(v)).collect()
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "games": self.games,
            "variants": self.variants,
            "max_scores": self.max_scores,
            "cells": self.cells,
            "avg_norm": self.norm_rows(),
        })
    }

    /// Rows are games, columns are variants, each cell is `avg/max`.
    pub fn render_text(&self) -> String {
        let fmt = |v: Option<f64>| v.map_or("--".to_string(), |x| format!("{:.2}", x));
        let mut rows: Vec<Vec<String>> = Vec::new();
        let mut header = vec!["game".to_string()];
        header.extend(self.variants.iter().cloned());
        header.push("max".into());
        rows.push(header);
        let mut notes = Vec::new();
        for g in &self.games {
            let mut r = vec![g.clone()];
            for v in &self.variants {
                match self.cell(g, v) {
                    Some(c) => {
                        let mark = if c.flags.is_empty() { "" } else { "*" };
                        r.push(format!("{}/{}{mark}", fmt(c.avg), fmt(c.max)));
                        for f in &c.flags {
                            notes.push(format!("* {g} {v}: {f}"));
                        }
                    }
                    None => r.push("--".into()),
                }
            }
            r.push(format!("{}", self.max_scores[g]));
            rows.push(r);
        }
        let mut norm = vec!["avg norm".to_string()];
        for n in self.norm_rows() {
            let mark = if n.complete { "" } else { "*" };
            norm.push(format!("{}/{}{mark}", fmt(n.avg_norm), fmt(n.max_norm)));
        }
        norm.push(String::new());
        rows.push(norm);

        let cols = rows[0].len();
        let widths: Vec<usize> = (0..cols)
            .map(|c| rows.iter().map(|r| r[c].len()).max().unwrap_or(0))
            .collect();
        let mut out = String::new();
        for r in &rows {
            let line: Vec<String> = r
                .iter()
                .zip(&widths)
                .map(|(s, w)| format!("{s:<w$}"))
                .collect();
            let _ = writeln!(out, "{}", line.join("  ").trim_end());
        }
        for n in notes {
            let _ = writeln!(out, "{n}");
        }
        out
    }
}

pub fn parse_summary(text: &str) -> Result<Vec<CellSummary>> {
    let f: SummaryFile =
        serde_json::from_str(text).map_err(|e| Error::Config(format!("score summary: {e}")))?;
    Ok(f.cells)
}

fn walk(path: &Path, runs: &mut Vec<PathBuf>, summaries: &mut Vec<PathBuf>) -> Result<()> {
    if path.is_file() {
        summaries.push(path.to_path_buf());
        return Ok(());
    }
    if path.join(super::RUN_META_FILE).is_file() {
        runs.push(path.to_path_buf());
    }
    let mut entries: Vec<PathBuf> = std::fs::read_dir(path)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .collect();
    entries.sort();
    for p in entries {
        if p.is_dir() {
            walk(&p, runs, summaries)?;
        } else if p.to_string_lossy().ends_with(".scores.json") {
            summaries.push(p);
        }
    }
    Ok(())
}

/// Builds a table from run directories and `*.scores.json` summaries found
/// under `paths`.
pub fn collect(paths: &[PathBuf]) -> Result<ScoreTable> {
    let (mut runs, mut summaries) = (Vec::new(), Vec::new());
    for p in paths {
        if !p.exists() {
            return Err(Error::Config(format!("{} does not exist", p.display())));
        }
        walk(p, &mut runs, &mut summaries)?;
    }
    if runs.is_empty() && summaries.is_empty() {
        return Err(Error::Config("no runs or score summaries found".into()));
    }
    let mut table = ScoreTable::default();
    for s in &summaries {
        for c in parse_summary(&std::fs::read_to_string(s)?)? {
            table.add_summary(&c)?;
        }
    }
    for r in &runs {
        let meta = super::read_meta(r)?;
        table.add_run(r, &meta)?;
    }
    Ok(table)
}
