use std::io::Write;
use std::path::Path;
use std::process::{Command, Stdio};

use tgrl::agent::RunLog;
use tgrl::cli::{
    collect, parse_summary, read_meta, run, seed_dir, CellSummary, RunSpec, ScoreTable,
    CHECKPOINT_FILE, EXIT_CONFIG, EXIT_OK, EXIT_VERIFY, RUNLOG_FILE, TABLE1_FIXTURE,
};
use tgrl::hashrep::GOLDEN_FILE;

fn tgrl(args: &[&str]) -> (i32, String, String) {
    let mut argv = vec!["tgrl"];
    argv.extend_from_slice(args);
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let code = run(argv, &mut out, &mut err);
    (
        code,
        String::from_utf8(out).unwrap(),
        String::from_utf8(err).unwrap(),
    )
}

fn bin(args: &[&str], stdin: &str) -> (i32, String) {
    let mut child = Command::new(env!("CARGO_BIN_EXE_tgrl"))
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    child
        .stdin
        .take()
        .unwrap()
        .write_all(stdin.as_bytes())
        .unwrap();
    let out = child.wait_with_output().unwrap();
    (
        out.status.code().unwrap(),
        String::from_utf8(out.stdout).unwrap(),
    )
}

fn train_small(out: &Path, seeds: &str) -> i32 {
    let out = out.to_str().unwrap();
    let args = [
        "train",
        "--game",
        "lever",
        "--variant",
        "DRRN",
        "--seeds",
        seeds,
        "--episodes",
        "12",
        "--emb-dim",
        "8",
        "--hidden-dim",
        "8",
        "--mlp-dim",
        "16",
        "--hash-dim",
        "8",
        "--out",
        out,
    ];
    tgrl(&args).0
}

#[test]
fn report_fixture_reproduces_published_avg_norm() {
    let cells = parse_summary(TABLE1_FIXTURE).unwrap();
    let table = ScoreTable::from_summaries(&cells).unwrap();
    let norm = table.avg_norm("LOG").unwrap();
    assert!((norm - 0.36).abs() <= 0.005, "{norm}");
    assert_eq!(table.games.len(), 6);
}

#[test]
fn report_norm_edge_cases() {
    let cell = |avg: f64| CellSummary {
        game: "g".into(),
        variant: "V".into(),
        avg,
        max: avg,
        max_score: 10.0,
    };
    let t = ScoreTable::from_summaries(&[cell(10.0)]).unwrap();
    assert_eq!(t.avg_norm("V"), Some(1.0));
    let t = ScoreTable::from_summaries(&[cell(0.0)]).unwrap();
    assert_eq!(t.avg_norm("V"), Some(0.0));
}

#[test]
fn report_command_prints_table() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("t1.scores.json");
    std::fs::write(&path, TABLE1_FIXTURE).unwrap();
    let json = dir.path().join("table.json");
    let (code, out, _) = tgrl(&[
        "report",
        path.to_str().unwrap(),
        "--json",
        json.to_str().unwrap(),
    ]);
    assert_eq!(code, EXIT_OK);
    assert!(out.contains("zork1"), "{out}");
    assert!(out.contains("0.36"), "{out}");
    let v: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(json).unwrap()).unwrap();
    assert!(v.is_object());
}

#[test]
fn report_missing_path_is_config_error() {
    let (code, _, err) = tgrl(&["report", "/nonexistent/run/dir"]);
    assert_eq!(code, EXIT_CONFIG);
    assert!(err.contains("does not exist"));
}

#[test]
fn train_three_seeds_writes_three_logs_and_reruns_identically() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    assert_eq!(train_small(&a, "1,2,3"), EXIT_OK);
    assert_eq!(train_small(&b, "1,2,3"), EXIT_OK);
    let meta = read_meta(&a).unwrap();
    assert_eq!(meta.seeds, vec![1, 2, 3]);
    assert_eq!(meta.max_score, 10);
    for seed in 1..=3 {
        let la = std::fs::read(a.join(seed_dir(seed)).join(RUNLOG_FILE)).unwrap();
        let lb = std::fs::read(b.join(seed_dir(seed)).join(RUNLOG_FILE)).unwrap();
        assert_eq!(la, lb, "seed {seed}");
        let log = RunLog::from_jsonl(std::str::from_utf8(&la).unwrap()).unwrap();
        assert_eq!(log.len(), 12);
        assert!(a.join(seed_dir(seed)).join(CHECKPOINT_FILE).is_file());
    }
    let la1 = std::fs::read(a.join(seed_dir(1)).join(RUNLOG_FILE)).unwrap();
    let la2 = std::fs::read(a.join(seed_dir(2)).join(RUNLOG_FILE)).unwrap();
    assert_ne!(la1, la2);

    let table = collect(&[a.clone()]).unwrap();
    let cell = table.cell("lever", "DRRN").unwrap();
    assert_eq!(cell.runs, 3);
    assert!(cell.flags.is_empty(), "{:?}", cell.flags);

    let (code, out, _) = tgrl(&[
        "eval",
        "--run",
        a.to_str().unwrap(),
        "--seed",
        "2",
        "--episodes",
        "3",
    ]);
    assert_eq!(code, EXIT_OK);
    assert!(out.contains("over 3 episodes"), "{out}");
}

#[test]
fn report_flags_partial_runs() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a");
    assert_eq!(train_small(&a, "1,2"), EXIT_OK);
    std::fs::remove_file(a.join(seed_dir(2)).join(RUNLOG_FILE)).unwrap();
    let table = collect(&[a]).unwrap();
    let cell = table.cell("lever", "DRRN").unwrap();
    assert_eq!(cell.runs, 1);
    assert!(!cell.flags.is_empty());
}

#[test]
fn invalid_flag_combination_fails_before_training() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("bad");
    let (code, _, err) = tgrl(&[
        "train",
        "--game",
        "lever",
        "--variant",
        "LOG",
        "--no-text-enc",
        "--no-po1",
        "--no-po2",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code, EXIT_CONFIG, "{err}");
    assert!(!out.exists());

    let (code, _, _) = tgrl(&["train", "--game", "lever", "--variant", "NOPE"]);
    assert_eq!(code, EXIT_CONFIG);
    let (code, _, _) = tgrl(&[
        "train",
        "--game",
        "no-such-game",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code, EXIT_CONFIG);
    assert!(!out.exists());
    let (code, _, _) = tgrl(&["train", "--bogus-flag"]);
    assert_eq!(code, EXIT_CONFIG);
}

#[test]
fn config_file_is_overridden_by_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    std::fs::write(
        &cfg,
        r#"{"game": "memory", "variant": "DRRN", "seeds": [4, 5], "train": {"episodes": 7, "lr": 0.01}}"#,
    )
    .unwrap();
    let (code, out, _) = tgrl(&[
        "train",
        "--config",
        cfg.to_str().unwrap(),
        "--episodes",
        "9",
        "--dry-run",
    ]);
    assert_eq!(code, EXIT_OK);
    let spec = RunSpec::from_json(&out).unwrap();
    assert_eq!(spec.game, "memory");
    assert_eq!(spec.seeds, vec![4, 5]);
    assert_eq!(spec.train.episodes, 9);
    assert_eq!(spec.train.lr, 0.01);

    std::fs::write(&cfg, r#"{"game": "memory", "unknown": 1}"#).unwrap();
    let (code, _, _) = tgrl(&["train", "--config", cfg.to_str().unwrap(), "--dry-run"]);
    assert_eq!(code, EXIT_CONFIG);
}

#[test]
fn play_look_echoes_look_text_and_quit_prints_score() {
    let (code, out) = bin(&["play", "--game", "lantern"], "look\nquit\n");
    assert_eq!(code, 0);
    let game = tgrl::engine::games::load("lantern").unwrap();
    let mut env = tgrl::engine::Env::new(game);
    env.reset();
    let look = env.look_text();
    assert!(out.matches(look.as_str()).count() >= 2, "{out}");
    assert!(out.trim_end().ends_with("Final score: 0/30"), "{out}");
}

#[test]
fn play_show_state_prints_room_and_key() {
    let (code, out) = bin(&["play", "--game", "maze", "--show-state"], "look\n");
    assert_eq!(code, 0);
    let game = tgrl::engine::games::load("maze").unwrap();
    let mut env = tgrl::engine::Env::new(game);
    env.reset();
    let key =
        tgrl::locgraph::LocationKey::from_profile(&tgrl::locgraph::locate(&mut env, 1).unwrap());
    let line = format!("[room {} | key {}]", env.gt_room_id(), key.as_str());
    assert!(out.contains(&line), "{out}");
    assert!(out.contains("[valid: "), "{out}");
    assert!(out.contains("Final score"), "{out}");
}

#[test]
fn verify_passes_on_bundled_data() {
    let (code, out, _) = tgrl(&["verify"]);
    assert_eq!(code, EXIT_OK, "{out}");
    assert!(out.lines().all(|l| l.starts_with("PASS")), "{out}");
}

#[test]
fn verify_names_corrupted_golden_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("golden.txt");
    let mut lines: Vec<String> = GOLDEN_FILE.lines().map(String::from).collect();
    let i = lines
        .iter()
        .position(|l| !l.trim().is_empty() && !l.starts_with('#'))
        .unwrap();
    let mut chars: Vec<char> = lines[i].chars().collect();
    let last = chars.len() - 1;
    chars[last] = if chars[last] == '0' { '1' } else { '0' };
    lines[i] = chars.into_iter().collect();
    std::fs::write(&path, lines.join("\n")).unwrap();
    let (code, out, _) = tgrl(&["verify", "--golden", path.to_str().unwrap()]);
    assert_eq!(code, EXIT_VERIFY, "{out}");
    let fail = out.lines().find(|l| l.starts_with("FAIL")).unwrap();
    assert!(fail.contains("golden"), "{fail}");
}
