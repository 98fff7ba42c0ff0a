use std::path::Path;
use std::process::{Command, Output};

use morpion_r2::model::{save_checkpoint, ModelConfig, PolicyValueModel};
use morpion_r2::playout::random_playout;
use morpion_r2::{SolutionRecord, Variant};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn morpion(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_morpion"))
        .args(args)
        .env_remove("MORPION_SEED")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn data(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(name).display().to_string()
}

fn small_checkpoint(dir: &Path, size: usize) -> String {
    let cfg = ModelConfig { channels: 4, blocks: 1, ..ModelConfig::default() };
    let net = PolicyValueModel::for_board(size, cfg, &mut ChaCha8Rng::seed_from_u64(1));
    let path = dir.join(format!("m{size}.ckpt"));
    save_checkpoint(&net, &path).unwrap();
    path.display().to_string()
}

#[test]
fn verify_reports_score_of_valid_record() {
    let o = morpion(&["verify", &data("valid_10.rec")]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "OK 10\n");
}

#[test]
fn verify_reports_first_illegal_step() {
    let o = morpion(&["verify", &data("illegal_point_reuse_se_step7.rec")]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(stdout(&o), "ILLEGAL step 7: point reuse in direction SE\n");
}

#[test]
fn verify_rejects_unparsable_files() {
    let dir = tempfile::tempdir().unwrap();
    let empty = dir.path().join("empty.rec");
    std::fs::write(&empty, "").unwrap();
    let o = morpion(&["verify", empty.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("parse error"));
    let o = morpion(&["verify", dir.path().join("missing.rec").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn render_writes_svg_and_honours_step() {
    let dir = tempfile::tempdir().unwrap();
    let svg = dir.path().join("out.svg");
    let o = morpion(&["render", &data("valid_10.rec"), "--svg", svg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(std::fs::read_to_string(&svg).unwrap().starts_with("<svg"));
    assert!(stdout(&o).contains("score 10"));

    let o = morpion(&["render", &data("valid_10.rec"), "--step", "4", "--svg", svg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("score 4"));
    assert!(!stdout(&o).contains("  5"));

    let o = morpion(&["render", &data("valid_10.rec"), "--step", "11", "--svg", svg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn bench_is_reproducible_and_validates_games() {
    let args = ["bench", "--board", "16", "--games", "30", "--seed", "7"];
    let a = morpion(&args);
    let b = morpion(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(stdout(&a), stdout(&b));
    assert!(stdout(&a).contains("games 30"));
    let rate: f64 = stderr(&a)
        .lines()
        .find_map(|l| l.strip_prefix("moves/sec "))
        .unwrap()
        .parse()
        .unwrap();
    assert!(rate > 0.0);
    assert_eq!(morpion(&["bench", "--games", "0"]).status.code(), Some(2));
}

#[test]
fn seed_can_come_from_the_environment() {
    let run = |env: Option<&str>, flag: Option<&str>| {
        let mut c = Command::new(env!("CARGO_BIN_EXE_morpion"));
        c.args(["bench", "--board", "16", "--games", "5"]);
        if let Some(f) = flag {
            c.args(["--seed", f]);
        }
        match env {
            Some(v) => c.env("MORPION_SEED", v),
            None => c.env_remove("MORPION_SEED"),
        };
        stdout(&c.output().unwrap())
    };
    assert!(run(Some("11"), None).contains("seed 11"));
    assert!(run(Some("11"), Some("12")).contains("seed 12"));
    assert!(run(None, None).contains("seed 0"));
}

#[test]
fn train_rejects_bad_values_and_unknown_flags() {
    let o = morpion(&["train", "--alpha", "1.5"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("--alpha"));
    assert_eq!(morpion(&["train", "--no-such-flag"]).status.code(), Some(2));

    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.cfg");
    std::fs::write(&cfg, "episodes = 0\n").unwrap();
    let o = morpion(&["train", "--config", cfg.to_str().unwrap(), "--out", dir.path().join("run").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn train_help_shows_defaults() {
    let o = morpion(&["train", "--help"]);
    assert_eq!(o.status.code(), Some(0));
    let help = stdout(&o);
    for d in ["[default: 100]", "[default: 50]", "[default: 41]", "[default: 0.75]", "[default: 200]", "MORPION_SEED"] {
        assert!(help.contains(d), "missing {d}");
    }
}

#[test]
fn train_odd_board_runs_and_writes_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "# tiny run\nepisodes = 2\nchannels = 4\nblocks = 1\nepochs = 1\nsimulations = 5\n").unwrap();
    let o = morpion(&[
        "train", "--config", cfg.to_str().unwrap(), "--board", "13", "--iterations", "1", "--workers", "1",
        "--out", out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = stdout(&o);
    assert!(text.contains("iter,mean_score,median_score,max_score,r_alpha,loss"));
    assert!(text.contains("board=13"));
    let rec = SolutionRecord::read(out.join("best.rec")).unwrap();
    assert_eq!(rec.size, 13);
    rec.verify().unwrap();
    let echo = std::fs::read_to_string(out.join("config.txt")).unwrap();
    assert!(echo.contains("episodes = 2"));
    assert!(echo.contains("record_simulations = 5"));

    let v = morpion(&["verify", out.join("best.rec").to_str().unwrap()]);
    assert_eq!(v.status.code(), Some(0));
    assert_eq!(stdout(&v), format!("OK {}\n", rec.len()));
}

#[test]
fn train_reports_io_failures() {
    let dir = tempfile::tempdir().unwrap();
    let blocker = dir.path().join("file");
    std::fs::write(&blocker, "x").unwrap();
    let o = morpion(&[
        "train", "--board", "12", "--iterations", "1", "--episodes", "1", "--channels", "4", "--blocks", "1",
        "--epochs", "1", "--simulations", "2", "--out", blocker.join("run").to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
}

#[test]
fn search_is_deterministic_and_echoes_simulations() {
    let dir = tempfile::tempdir().unwrap();
    let ckpt = small_checkpoint(dir.path(), 16);
    let run = |name: &str| {
        let out = dir.path().join(name);
        let o = morpion(&["search", "--checkpoint", &ckpt, "--simulations", "100", "--threshold", "30", "--seed", "3",
            "--out", out.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
        assert!(stdout(&o).contains("simulations=100"));
        assert!(out.with_extension("svg").exists());
        std::fs::read(out).unwrap()
    };
    assert_eq!(run("a.rec"), run("b.rec"));
}

#[test]
fn search_rejects_mismatched_checkpoint_and_terminal_start() {
    let dir = tempfile::tempdir().unwrap();
    let ckpt = small_checkpoint(dir.path(), 16);
    let out = dir.path().join("x.rec");
    let o = morpion(&["search", "--checkpoint", &ckpt, "--board", "22", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(4));

    let garbage = dir.path().join("garbage.ckpt");
    std::fs::write(&garbage, "not a model").unwrap();
    let o = morpion(&["search", "--checkpoint", garbage.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(4));

    let finished = random_playout(16, Variant::FiveD, &mut ChaCha8Rng::seed_from_u64(2)).unwrap();
    let rec_path = dir.path().join("done.rec");
    SolutionRecord::from_board(&finished).write(&rec_path).unwrap();
    let o = morpion(&["search", "--checkpoint", &ckpt, "--from", rec_path.to_str().unwrap(), "--simulations", "5",
        "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1), "{}", stderr(&o));
}
