//! Command-line harness: `train`, `eval`, `report`, `play` and `verify`.

mod play;
mod report;
mod spec;
mod verify;

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use crate::agent::{evaluate, run_training, Network, VariantKind};
use crate::engine::games;
use crate::error::{Error, Result};
use crate::hashrep::GOLDEN_FILE;
use crate::neural::EncoderParams;

pub use play::play;
pub use report::{
    collect, parse_summary, CellSummary, NormRow, ScoreCell, ScoreTable, SummaryFile, AVG_WINDOW,
    TABLE1_FIXTURE,
};
pub use spec::{RunSpec, OUT_ROOT_VAR};
pub use verify::{
    check_golden_text, check_gradients, check_locate_side_effects, check_valid_actions, run_all,
    CheckResult,
};

pub const RUN_META_FILE: &str = "run.json";
pub const RUNLOG_FILE: &str = "runlog.jsonl";
pub const CHECKPOINT_FILE: &str = "params.ckpt";
pub const SUMMARY_FILE: &str = "summary.json";

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_RUNTIME: i32 = 2;
pub const EXIT_VERIFY: i32 = 3;

pub fn seed_dir(seed: u64) -> String {
    format!("seed-{seed}")
}

/// Written at the top of every training output directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunMeta {
    pub game: String,
    pub max_score: i64,
    pub variant: String,
    pub episodes: usize,
    pub seeds: Vec<u64>,
    pub spec: RunSpec,
}

pub fn read_meta(dir: &Path) -> Result<RunMeta> {
    let text = std::fs::read_to_string(dir.join(RUN_META_FILE))?;
    serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", dir.display())))
}

/// Per-seed result written next to the run log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeedSummary {
    pub seed: u64,
    pub episodes: usize,
    pub avg_score: f64,
    pub max_score: i64,
    pub num_params: usize,
    pub wall_clock_secs: f64,
    pub evals: Vec<crate::agent::EvalRecord>,
}

#[derive(Debug, Parser)]
#[command(
    name = "tgrl",
    version,
    about = "Text-game RL agents with approximate state hashing"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Train one variant on one game for each seed.
    Train(TrainArgs),
    /// Evaluate a trained checkpoint.
    Eval(EvalArgs),
    /// Build a score table from run directories and score summaries.
    Report(ReportArgs),
    /// Play a game interactively.
    Play(PlayArgs),
    /// Run the built-in correctness checks.
    Verify(VerifyArgs),
}

#[derive(Debug, Args, Default)]
pub struct TrainArgs {
    /// JSON run spec; flags override its fields.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Game file path or bundled game name.
    #[arg(long)]
    pub game: Option<String>,
    /// DRRN, OBS_HASH, DRRN_INVDY, LOG, GT_STATE or GT_ROOM.
    #[arg(long)]
    pub variant: Option<String>,
    #[arg(long)]
    pub no_text_enc: bool,
    #[arg(long)]
    pub no_att: bool,
    #[arg(long)]
    pub no_invdy: bool,
    #[arg(long)]
    pub no_po1: bool,
    #[arg(long)]
    pub no_po2: bool,
    /// Comma-separated list; one independent run per seed.
    #[arg(long, value_delimiter = ',')]
    pub seeds: Option<Vec<u64>>,
    #[arg(long)]
    pub episodes: Option<usize>,
    /// Output directory. Relative paths resolve under $TGRL_OUT_ROOT when set.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Interleaved environments per run.
    #[arg(long)]
    pub envs: Option<usize>,
    /// Episode step limit.
    #[arg(long)]
    pub max_steps: Option<usize>,
    #[arg(long)]
    pub lr: Option<f64>,
    #[arg(long)]
    pub gamma: Option<f64>,
    /// Boltzmann exploration temperature.
    #[arg(long)]
    pub tau: Option<f64>,
    #[arg(long)]
    pub batch_size: Option<usize>,
    /// Gradient updates after each round of env steps.
    #[arg(long)]
    pub updates_per_round: Option<usize>,
    #[arg(long)]
    pub emb_dim: Option<usize>,
    #[arg(long)]
    pub hidden_dim: Option<usize>,
    #[arg(long)]
    pub mlp_dim: Option<usize>,
    #[arg(long)]
    pub hash_dim: Option<usize>,
    /// Print the resolved run spec and exit.
    #[arg(long)]
    pub dry_run: bool,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    /// Training output directory.
    #[arg(long)]
    pub run: PathBuf,
    /// Seed whose checkpoint to load; defaults to the first.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, default_value_t = 10)]
    pub episodes: usize,
    /// Take the highest-valued action instead of sampling.
    #[arg(long)]
    pub greedy: bool,
    #[arg(long, default_value_t = 0)]
    pub eval_seed: u64,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    /// Run directories or `*.scores.json` files.
    #[arg(required = true)]
    pub paths: Vec<PathBuf>,
    /// Also write the table as JSON.
    #[arg(long)]
    pub json: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PlayArgs {
    #[arg(long)]
    pub game: String,
    /// Print room id, location key and valid actions after each step.
    #[arg(long)]
    pub show_state: bool,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// Golden hash file to check instead of the bundled one.
    #[arg(long)]
    pub golden: Option<PathBuf>,
}

impl TrainArgs {
    /// Defaults, then the config file, then flags.
    pub fn resolve(&self, out_root: Option<&Path>) -> Result<(RunSpec, PathBuf)> {
        let mut spec = match &self.config {
            Some(p) => RunSpec::from_file(p)?,
            None => RunSpec::default(),
        };
        if let Some(g) = &self.game {
            spec.game = g.clone();
        }
        if let Some(v) = &self.variant {
            spec.variant = v.parse::<VariantKind>()?;
        }
        let off = |flag: bool, slot: &mut Option<bool>| {
            if flag {
                *slot = Some(false);
            }
        };
        off(self.no_text_enc, &mut spec.text_enc);
        off(self.no_att, &mut spec.att);
        off(self.no_invdy, &mut spec.invdy);
        off(self.no_po1, &mut spec.use_po1);
        off(self.no_po2, &mut spec.use_po2);
        if let Some(s) = &self.seeds {
            spec.seeds = s.clone();
        }
        if let Some(o) = &self.out {
            spec.out = o.clone();
        }
        let t = &mut spec.train;
        macro_rules! set {
            ($src:expr, $dst:expr) => {
                if let Some(v) = $src {
                    $dst = v;
                }
            };
        }
        set!(self.episodes, t.episodes);
        set!(self.envs, t.num_envs);
        set!(self.max_steps, t.max_episode_steps);
        set!(self.lr, t.lr);
        set!(self.gamma, t.gamma);
        set!(self.tau, t.tau);
        set!(self.batch_size, t.batch_size);
        set!(self.updates_per_round, t.updates_per_round);
        set!(self.emb_dim, t.dims.emb);
        set!(self.hidden_dim, t.dims.hidden);
        set!(self.mlp_dim, t.dims.mlp);
        set!(self.hash_dim, t.dims.hash);
        spec.validate()?;
        let out = spec.out_dir(out_root);
        Ok((spec, out))
    }
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Config(_) | Error::Validation(_) | Error::Parse { .. } => EXIT_CONFIG,
        _ => EXIT_RUNTIME,
    }
}

fn out_root() -> Option<PathBuf> {
    std::env::var_os(OUT_ROOT_VAR).map(PathBuf::from)
}

/// Trains every seed of `spec`, writing logs, checkpoints and summaries
/// under `out`.
pub fn cmd_train(spec: &RunSpec, out: &Path, log: &mut impl Write) -> Result<Vec<SeedSummary>> {
    let variant = spec.validate()?;
    let game = games::load_path_or_bundled(&spec.game)?;
    std::fs::create_dir_all(out)?;
    let meta = RunMeta {
        game: game.name.clone(),
        max_score: game.max_score,
        variant: variant.label(),
        episodes: spec.train.episodes,
        seeds: spec.seeds.clone(),
        spec: spec.clone(),
    };
    std::fs::write(
        out.join(RUN_META_FILE),
        serde_json::to_string_pretty(&meta)?,
    )?;
    let mut summaries = Vec::new();
    for &seed in &spec.seeds {
        let start = Instant::now();
        let outcome = run_training(game.clone(), variant, &spec.train, seed)?;
        let dir = out.join(seed_dir(seed));
        std::fs::create_dir_all(&dir)?;
        std::fs::write(dir.join(RUNLOG_FILE), outcome.log.to_jsonl())?;
        let net = &outcome.learner.net;
        net.params
            .save_file(&net.vocab, &dir.join(CHECKPOINT_FILE))?;
        let summary = SeedSummary {
            seed,
            episodes: outcome.log.len(),
            avg_score: outcome.log.avg_score(AVG_WINDOW),
            max_score: outcome.log.max_score(),
            num_params: net.params.num_params(),
            wall_clock_secs: start.elapsed().as_secs_f64(),
            evals: outcome.evals,
        };
        std::fs::write(
            dir.join(SUMMARY_FILE),
            serde_json::to_string_pretty(&summary)?,
        )?;
        writeln!(
            log,
            "{} {} seed {seed}: avg {:.3} max {} over {} episodes ({} parameters, {:.1}s)",
            meta.game,
            meta.variant,
            summary.avg_score,
            summary.max_score,
            summary.episodes,
            summary.num_params,
            summary.wall_clock_secs
        )?;
        summaries.push(summary);
    }
    Ok(summaries)
}

/// Loads a trained seed's checkpoint and plays `episodes` episodes.
pub fn cmd_eval(args: &EvalArgs) -> Result<Vec<i64>> {
    let meta = read_meta(&args.run)?;
    let seed = args.seed.unwrap_or(meta.seeds[0]);
    if !meta.seeds.contains(&seed) {
        return Err(Error::Config(format!("run has no seed {seed}")));
    }
    let variant = meta.spec.resolve_variant()?;
    let game = games::load_path_or_bundled(&meta.spec.game)?;
    let (params, vocab) =
        EncoderParams::load_file(&args.run.join(seed_dir(seed)).join(CHECKPOINT_FILE))?;
    let t = &meta.spec.train;
    let mut net = Network::from_parts(variant, params, vocab, t.dims.hash, t.locate_depth);
    let tau = (!args.greedy).then_some(t.tau);
    evaluate(
        &mut net,
        &game,
        args.episodes,
        t.max_episode_steps,
        tau,
        args.eval_seed,
    )
}

fn dispatch(cli: Cli, stdout: &mut impl Write) -> Result<i32> {
    match cli.command {
        Command::Train(args) => {
            let (spec, out) = args.resolve(out_root().as_deref())?;
            if args.dry_run {
                writeln!(stdout, "{}", serde_json::to_string_pretty(&spec)?)?;
                return Ok(EXIT_OK);
            }
            cmd_train(&spec, &out, stdout)?;
            writeln!(stdout, "wrote {}", out.display())?;
            Ok(EXIT_OK)
        }
        Command::Eval(args) => {
            let scores = cmd_eval(&args)?;
            let mean = scores.iter().sum::<i64>() as f64 / scores.len().max(1) as f64;
            writeln!(
                stdout,
                "mean {mean:.3} max {} over {} episodes",
                scores.iter().max().copied().unwrap_or(0),
                scores.len()
            )?;
            Ok(EXIT_OK)
        }
        Command::Report(args) => {
            let table = collect(&args.paths)?;
            write!(stdout, "{}", table.render_text())?;
            if let Some(p) = &args.json {
                std::fs::write(p, serde_json::to_string_pretty(&table.to_json())?)?;
            }
            Ok(EXIT_OK)
        }
        Command::Play(args) => {
            let game = games::load_path_or_bundled(&args.game)?;
            let stdin = std::io::stdin();
            play(game, args.show_state, stdin.lock(), &mut *stdout)?;
            Ok(EXIT_OK)
        }
        Command::Verify(args) => {
            let golden = match &args.golden {
                Some(p) => std::fs::read_to_string(p)?,
                None => GOLDEN_FILE.to_string(),
            };
            let results = run_all(&golden)?;
            for r in &results {
                writeln!(stdout, "{}", r.line())?;
            }
            Ok(if results.iter().all(|r| r.passed) {
                EXIT_OK
            } else {
                EXIT_VERIFY
            })
        }
    }
}

/// Parses `args`, runs the command and returns the process exit code.
pub fn run<I, T>(args: I, stdout: &mut impl Write, stderr: &mut impl Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let _ = write!(
                if code == EXIT_OK {
                    &mut *stdout as &mut dyn Write
                } else {
                    stderr
                },
                "{e}"
            );
            return code;
        }
    };
    match dispatch(cli, stdout) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            exit_code(&e)
        }
    }
}
