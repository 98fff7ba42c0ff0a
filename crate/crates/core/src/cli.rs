//! Command-line front end: `train`, `search`, `verify`, `render` and `bench`.
//!
//! Exit codes:
//!
//! | code | meaning |
//! |------|---------|
//! | 0 | success |
//! | 1 | invalid record, terminal start position, step out of range |
//! | 2 | bad flags, bad config file, unparsable record |
//! | 3 | I/O failure while training |
//! | 4 | checkpoint does not match the requested board |

use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::board::{Board, Variant};
use crate::mcts::{best_line, SearchError, SearchParams};
use crate::model::{load_checkpoint, ModelError, PolicyValueModel};
use crate::playout::random_playout;
use crate::ranked::{RankedRewardConfig, RewardList, RewardSnapshot};
use crate::record::{RecordError, SolutionRecord};
use crate::render::{svg, text_grid};
use crate::selfplay::{train_loop, SelfPlayError, SelfPlayMode, TrainLoopConfig, METRICS_HEADER};

/// Environment variable read when `--seed` is absent.
pub const SEED_ENV: &str = "MORPION_SEED";

pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_IO: i32 = 3;
pub const EXIT_CHECKPOINT: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "morpion", version, about = "Morpion Solitaire engine with ranked-reward self-play")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the self-play training loop.
    Train(TrainArgs),
    /// Play one full game with tree search from a trained model.
    Search(SearchArgs),
    /// Check a solution record and print its score.
    Verify(VerifyArgs),
    /// Draw a solution record as a text grid and an SVG file.
    Render(RenderArgs),
    /// Measure move generation and random playout speed.
    Bench(BenchArgs),
}

fn parse_alpha(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|e| format!("{e}"))?;
    RankedRewardConfig::new(v).map(|c| c.alpha).map_err(|e| e.to_string())
}

fn parse_board(s: &str) -> Result<usize, String> {
    let v: usize = s.parse().map_err(|e| format!("{e}"))?;
    if v < crate::board::MIN_BOARD_SIZE {
        return Err(format!("board must be at least {}", crate::board::MIN_BOARD_SIZE));
    }
    Ok(v)
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    /// `key = value` file with any of the settings below; flags win over it.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output directory for checkpoints, metrics and the best record.
    #[arg(long, default_value = "morpion-run")]
    pub out: PathBuf,
    /// Continue the checkpoint in --out instead of starting over.
    #[arg(long)]
    pub resume: bool,
    /// Board side length [default: 22]
    #[arg(long, value_parser = parse_board)]
    pub board: Option<usize>,
    /// Rule variant, 5D or 5T [default: 5D]
    #[arg(long)]
    pub variant: Option<Variant>,
    /// Training iterations [default: 100]
    #[arg(long)]
    pub iterations: Option<usize>,
    /// Self-play episodes per iteration [default: 50]
    #[arg(long)]
    pub episodes: Option<usize>,
    /// Moves up to this number are sampled, later ones greedy [default: 41]
    #[arg(long)]
    pub step_threshold: Option<usize>,
    /// Iterations of games kept for retraining [default: 10]
    #[arg(long)]
    pub replay_window: Option<usize>,
    /// Self-play move source, direct or mcts [default: direct]
    #[arg(long)]
    pub mode: Option<SelfPlayMode>,
    /// Search simulations per self-play move in mcts mode [default: 100]
    #[arg(long)]
    pub selfplay_simulations: Option<usize>,
    /// Search simulations per move of the record attempt [default: 20000]
    #[arg(long)]
    pub simulations: Option<usize>,
    /// Exploration weight [default: 1]
    #[arg(long)]
    pub c_puct: Option<f32>,
    /// Reward threshold percentile, strictly between 0 and 1 [default: 0.75]
    #[arg(long, value_parser = parse_alpha)]
    pub alpha: Option<f64>,
    /// Scores kept in the reward list [default: 200]
    #[arg(long)]
    pub reward_capacity: Option<usize>,
    /// Leave record-attempt scores out of the reward list.
    #[arg(long)]
    pub exclude_record_score: bool,
    /// Training epochs per iteration [default: 5]
    #[arg(long)]
    pub epochs: Option<usize>,
    /// Minibatch size [default: 64]
    #[arg(long)]
    pub batch_size: Option<usize>,
    /// SGD learning rate [default: 0.005]
    #[arg(long)]
    pub learning_rate: Option<f64>,
    /// Dropout probability [default: 0.3]
    #[arg(long)]
    pub dropout: Option<f64>,
    /// Residual tower width [default: 32]
    #[arg(long)]
    pub channels: Option<usize>,
    /// Residual blocks [default: 4]
    #[arg(long)]
    pub blocks: Option<usize>,
    /// Weight penalty coefficient [default: 0.0001]
    #[arg(long)]
    pub l2: Option<f64>,
    /// Random seed, also read from MORPION_SEED [default: 0]
    #[arg(long, env = SEED_ENV)]
    pub seed: Option<u64>,
    /// Episode worker threads, 0 for all cores [default: 0]
    #[arg(long)]
    pub workers: Option<usize>,
}

#[derive(Debug, Args)]
pub struct SearchArgs {
    /// Model checkpoint file, or a training output directory.
    #[arg(long)]
    pub checkpoint: PathBuf,
    /// Expected board size; must match the checkpoint.
    #[arg(long, value_parser = parse_board)]
    pub board: Option<usize>,
    /// Rule variant, 5D or 5T.
    #[arg(long, default_value = "5D")]
    pub variant: Variant,
    /// Simulations per move.
    #[arg(long, default_value_t = SearchParams::RECORD_SIMULATIONS)]
    pub simulations: usize,
    /// Exploration weight.
    #[arg(long, default_value_t = 1.0)]
    pub c_puct: f32,
    /// Score threshold for finished games inside the search. Taken from the
    /// training directory's reward list when absent.
    #[arg(long)]
    pub threshold: Option<u32>,
    /// Start from the final position of this record.
    #[arg(long)]
    pub from: Option<PathBuf>,
    /// Record output path.
    #[arg(long, default_value = "search.rec")]
    pub out: PathBuf,
    /// SVG output path [default: record path with .svg]
    #[arg(long)]
    pub svg: Option<PathBuf>,
    /// Random seed, also read from MORPION_SEED.
    #[arg(long, env = SEED_ENV, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    pub record: PathBuf,
}

#[derive(Debug, Args)]
pub struct RenderArgs {
    pub record: PathBuf,
    /// Draw only the first k moves.
    #[arg(long)]
    pub step: Option<usize>,
    /// SVG output path [default: record path with .svg]
    #[arg(long)]
    pub svg: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[arg(long, default_value_t = 22, value_parser = parse_board)]
    pub board: usize,
    #[arg(long, default_value = "5D")]
    pub variant: Variant,
    /// Random games to play.
    #[arg(long, default_value_t = 1000)]
    pub games: usize,
    /// Random seed, also read from MORPION_SEED.
    #[arg(long, env = SEED_ENV, default_value_t = 0)]
    pub seed: u64,
}

/// A failed command: its exit code and message.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    fn new(code: i32, message: impl Into<String>) -> Self {
        Self { code, message: message.into() }
    }
}

type CmdResult = Result<(), CliError>;

fn set<T: std::str::FromStr>(slot: &mut T, key: &str, value: &str) -> Result<(), String>
where
    T::Err: std::fmt::Display,
{
    *slot = value.parse().map_err(|e| format!("bad value `{value}` for `{key}`: {e}"))?;
    Ok(())
}

/// Applies `key = value` lines to `cfg`. Blank lines and `#` comments are
/// skipped; unknown keys are errors.
pub fn apply_config_text(cfg: &mut TrainLoopConfig, text: &str) -> Result<(), String> {
    for (no, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| format!("line {}: expected `key = value`", no + 1))?;
        let (key, value) = (key.trim(), value.trim());
        let m = &mut cfg.model;
        let r = match key {
            "iterations" => set(&mut cfg.iterations, key, value),
            "episodes" => set(&mut cfg.episodes, key, value),
            "step_threshold" => set(&mut cfg.step_threshold, key, value),
            "replay_window" => set(&mut cfg.replay_window, key, value),
            "mode" => set(&mut cfg.mode, key, value),
            "selfplay_simulations" => set(&mut cfg.selfplay_simulations, key, value),
            "record_simulations" | "simulations" => set(&mut cfg.record_simulations, key, value),
            "c_puct" => set(&mut cfg.c_puct, key, value),
            "board" => set(&mut cfg.board, key, value),
            "variant" => set(&mut cfg.variant, key, value),
            "seed" => set(&mut cfg.seed, key, value),
            "workers" => set(&mut cfg.workers, key, value),
            "record_score_in_rewards" => set(&mut cfg.record_score_in_rewards, key, value),
            "reward_capacity" => set(&mut cfg.reward_capacity, key, value),
            "alpha" => set(&mut cfg.ranked.alpha, key, value),
            "epochs" => set(&mut m.epochs, key, value),
            "batch_size" => set(&mut m.batch_size, key, value),
            "learning_rate" => set(&mut m.learning_rate, key, value),
            "dropout" => set(&mut m.dropout, key, value),
            "channels" => set(&mut m.channels, key, value),
            "blocks" => set(&mut m.blocks, key, value),
            "l2" => set(&mut m.l2, key, value),
            "policy_channels" => set(&mut m.policy_channels, key, value),
            "value_hidden" => set(&mut m.value_hidden, key, value),
            other => Err(format!("unknown key `{other}`")),
        };
        r.map_err(|e| format!("line {}: {e}", no + 1))?;
    }
    Ok(())
}

impl TrainArgs {
    /// Built-in defaults, then the config file, then flags.
    pub fn to_config(&self) -> Result<TrainLoopConfig, CliError> {
        let mut cfg = TrainLoopConfig::default();
        if let Some(path) = &self.config {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::new(EXIT_USAGE, format!("cannot read config {}: {e}", path.display())))?;
            apply_config_text(&mut cfg, &text)
                .map_err(|e| CliError::new(EXIT_USAGE, format!("config {}: {e}", path.display())))?;
        }
        macro_rules! over {
            ($($flag:ident => $field:expr),* $(,)?) => {
                $(if let Some(v) = self.$flag { $field = v; })*
            };
        }
        over!(
            board => cfg.board,
            variant => cfg.variant,
            iterations => cfg.iterations,
            episodes => cfg.episodes,
            step_threshold => cfg.step_threshold,
            replay_window => cfg.replay_window,
            mode => cfg.mode,
            selfplay_simulations => cfg.selfplay_simulations,
            simulations => cfg.record_simulations,
            c_puct => cfg.c_puct,
            alpha => cfg.ranked.alpha,
            reward_capacity => cfg.reward_capacity,
            epochs => cfg.model.epochs,
            batch_size => cfg.model.batch_size,
            learning_rate => cfg.model.learning_rate,
            dropout => cfg.model.dropout,
            channels => cfg.model.channels,
            blocks => cfg.model.blocks,
            l2 => cfg.model.l2,
            seed => cfg.seed,
            workers => cfg.workers,
        );
        if self.exclude_record_score {
            cfg.record_score_in_rewards = false;
        }
        cfg.validate().map_err(|e| CliError::new(EXIT_USAGE, e.to_string()))?;
        Ok(cfg)
    }
}

fn train_error(e: SelfPlayError) -> CliError {
    let code = match &e {
        SelfPlayError::InvalidConfig(_) | SelfPlayError::ConfigMismatch(_) | SelfPlayError::Ranked(_) => EXIT_USAGE,
        SelfPlayError::Model(ModelError::InvalidConfig(_)) => EXIT_USAGE,
        SelfPlayError::CheckpointWrite { .. } | SelfPlayError::CheckpointRead { .. } => EXIT_IO,
        SelfPlayError::Model(ModelError::Io(_)) => EXIT_IO,
        _ => EXIT_FAILURE,
    };
    CliError::new(code, e.to_string())
}

fn cmd_train(args: &TrainArgs, out: &mut dyn Write) -> CmdResult {
    let cfg = args.to_config()?;
    let io = |e: std::io::Error| CliError::new(EXIT_IO, e.to_string());
    writeln!(out, "# board={} variant={} iterations={} episodes={} step_threshold={} reward_capacity={} alpha={} seed={}",
        cfg.board, cfg.variant, cfg.iterations, cfg.episodes, cfg.step_threshold, cfg.reward_capacity, cfg.ranked.alpha, cfg.seed)
        .map_err(io)?;
    writeln!(out, "{METRICS_HEADER}").map_err(io)?;
    let mut write_err = None;
    let outcome = train_loop(&cfg, Some(&args.out), args.resume, |m| {
        if let Err(e) = writeln!(out, "{}", m.csv_row()).and_then(|_| out.flush()) {
            write_err.get_or_insert(e);
        }
    })
    .map_err(train_error)?;
    if let Some(e) = write_err {
        return Err(io(e));
    }
    let best = outcome.best.as_ref().map_or(0, SolutionRecord::len);
    writeln!(out, "best score {best}, written to {}", args.out.join("best.rec").display()).map_err(io)?;
    Ok(())
}

fn svg_path(record: &Path, explicit: &Option<PathBuf>) -> PathBuf {
    explicit.clone().unwrap_or_else(|| record.with_extension("svg"))
}

fn load_model(path: &Path) -> Result<(PolicyValueModel, Option<RewardList>), CliError> {
    let mismatch = |e: &dyn std::fmt::Display| CliError::new(EXIT_CHECKPOINT, format!("checkpoint {}: {e}", path.display()));
    if path.is_dir() {
        let model = load_checkpoint(path.join("model.ckpt")).map_err(|e| mismatch(&e))?;
        let rewards = std::fs::read_to_string(path.join("rewards.json"))
            .ok()
            .and_then(|t| serde_json::from_str::<serde_json::Value>(&t).ok())
            .and_then(|v| serde_json::from_value::<RewardList>(v.get("data")?.clone()).ok());
        Ok((model, rewards))
    } else {
        Ok((load_checkpoint(path).map_err(|e| mismatch(&e))?, None))
    }
}

fn cmd_search(args: &SearchArgs, out: &mut dyn Write) -> CmdResult {
    let (model, rewards) = load_model(&args.checkpoint)?;
    let size = model.arch().size;
    if let Some(b) = args.board {
        if b != size {
            return Err(CliError::new(EXIT_CHECKPOINT, format!("checkpoint is for board {size}, not {b}")));
        }
    }
    let root = match &args.from {
        Some(path) => {
            let rec = read_record(path)?;
            if rec.size != size {
                return Err(CliError::new(EXIT_CHECKPOINT, format!("record is for board {}, checkpoint for {size}", rec.size)));
            }
            rec.replay(None).map_err(|e| CliError::new(EXIT_FAILURE, e.to_string()))?
        }
        None => Board::new(size, args.variant).map_err(|e| CliError::new(EXIT_USAGE, e.to_string()))?,
    };
    if args.simulations == 0 {
        return Err(CliError::new(EXIT_USAGE, "--simulations must be at least 1"));
    }
    if !(args.c_puct >= 0.0) {
        return Err(CliError::new(EXIT_USAGE, "--c-puct must be non-negative"));
    }
    let snapshot = match (args.threshold, rewards) {
        (Some(t), _) => RewardSnapshot::with_threshold(t),
        (None, Some(list)) => list.snapshot(&RankedRewardConfig::default()),
        (None, None) => RewardSnapshot::default(),
    };
    let io = |e: std::io::Error| CliError::new(EXIT_IO, e.to_string());
    let threshold = snapshot.threshold.map_or("none".to_string(), |t| t.to_string());
    writeln!(
        out,
        "# search board={size} variant={} simulations={} c_puct={} threshold={threshold} seed={}",
        root.variant(),
        args.simulations,
        args.c_puct,
        args.seed
    )
    .map_err(io)?;
    let params = SearchParams { simulations: args.simulations, c_puct: args.c_puct, ..SearchParams::default() };
    let record = best_line(&root, &model, &params, &snapshot, &mut ChaCha8Rng::seed_from_u64(args.seed)).map_err(|e| match e {
        SearchError::TerminalRoot => CliError::new(EXIT_FAILURE, "start position has no legal moves"),
        other => CliError::new(EXIT_FAILURE, other.to_string()),
    })?;
    let score = record.verify().map_err(|e| CliError::new(EXIT_FAILURE, e.to_string()))?;
    record.write(&args.out).map_err(|e| CliError::new(EXIT_IO, e.to_string()))?;
    let svg_out = svg_path(&args.out, &args.svg);
    let board = record.replay(None).map_err(|e| CliError::new(EXIT_FAILURE, e.to_string()))?;
    std::fs::write(&svg_out, svg(&board)).map_err(io)?;
    writeln!(out, "score {score}").map_err(io)?;
    writeln!(out, "record {}", args.out.display()).map_err(io)?;
    writeln!(out, "svg {}", svg_out.display()).map_err(io)?;
    Ok(())
}

fn read_record(path: &Path) -> Result<SolutionRecord, CliError> {
    SolutionRecord::read(path).map_err(|e| CliError::new(EXIT_USAGE, format!("{}: {e}", path.display())))
}

fn cmd_verify(args: &VerifyArgs, out: &mut dyn Write) -> CmdResult {
    let record = read_record(&args.record)?;
    let io = |e: std::io::Error| CliError::new(EXIT_IO, e.to_string());
    match record.verify() {
        Ok(score) => writeln!(out, "OK {score}").map_err(io),
        Err(RecordError::IllegalRecordMove { step, reason }) => {
            writeln!(out, "ILLEGAL step {step}: {reason}").map_err(io)?;
            Err(CliError::new(EXIT_FAILURE, String::new()))
        }
        Err(e) => Err(CliError::new(EXIT_USAGE, e.to_string())),
    }
}

fn cmd_render(args: &RenderArgs, out: &mut dyn Write) -> CmdResult {
    let record = read_record(&args.record)?;
    if let Some(k) = args.step {
        if k > record.len() {
            return Err(CliError::new(EXIT_FAILURE, format!("--step {k} is beyond the record's {} moves", record.len())));
        }
    }
    let board = record.replay(args.step).map_err(|e| match e {
        RecordError::IllegalRecordMove { step, reason } => CliError::new(EXIT_FAILURE, format!("ILLEGAL step {step}: {reason}")),
        other => CliError::new(EXIT_USAGE, other.to_string()),
    })?;
    let svg_out = svg_path(&args.record, &args.svg);
    std::fs::write(&svg_out, svg(&board)).map_err(|e| CliError::new(EXIT_FAILURE, format!("{}: {e}", svg_out.display())))?;
    let io = |e: std::io::Error| CliError::new(EXIT_IO, e.to_string());
    write!(out, "{}", text_grid(&board)).map_err(io)?;
    writeln!(out, "score {} svg {}", board.score(), svg_out.display()).map_err(io)?;
    Ok(())
}

fn cmd_bench(args: &BenchArgs, out: &mut dyn Write, err: &mut dyn Write) -> CmdResult {
    if args.games == 0 {
        return Err(CliError::new(EXIT_USAGE, "--games must be at least 1"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
    let start = Instant::now();
    let mut scores = Vec::with_capacity(args.games);
    for _ in 0..args.games {
        let board = random_playout(args.board, args.variant, &mut rng).map_err(|e| CliError::new(EXIT_USAGE, e.to_string()))?;
        scores.push(board.score());
    }
    let playout_secs = start.elapsed().as_secs_f64();
    let moves: usize = scores.iter().sum();
    let calls = moves + args.games;

    let probe = random_playout(args.board, args.variant, &mut ChaCha8Rng::seed_from_u64(args.seed))
        .map_err(|e| CliError::new(EXIT_USAGE, e.to_string()))?;
    let mut positions = Vec::new();
    let mut b = Board::new(args.board, args.variant).expect("board validated above");
    for &m in probe.history() {
        positions.push(b.clone());
        b.apply(m).expect("replayed move");
    }
    positions.push(b);
    let mut buf = Vec::new();
    let mut generated = 0usize;
    let reps = (20_000 / positions.len()).max(1);
    let gen_start = Instant::now();
    for _ in 0..reps {
        for p in &positions {
            p.legal_moves_into(&mut buf);
            generated += buf.len();
        }
    }
    let gen_secs = gen_start.elapsed().as_secs_f64().max(1e-9);
    let gen_calls = reps * positions.len();

    let io = |e: std::io::Error| CliError::new(EXIT_IO, e.to_string());
    let mean = moves as f64 / args.games as f64;
    writeln!(out, "board {} variant {} seed {}", args.board, args.variant, args.seed).map_err(io)?;
    writeln!(out, "games {}", args.games).map_err(io)?;
    writeln!(out, "moves {moves}").map_err(io)?;
    writeln!(out, "mean_score {mean:.3}").map_err(io)?;
    writeln!(out, "max_score {}", scores.iter().max().unwrap()).map_err(io)?;
    writeln!(out, "legal_moves_calls {calls}").map_err(io)?;
    let playout_secs = playout_secs.max(1e-9);
    writeln!(err, "playouts/sec {:.1}", args.games as f64 / playout_secs).map_err(io)?;
    writeln!(err, "moves/sec {:.1}", moves as f64 / playout_secs).map_err(io)?;
    writeln!(err, "legal_moves calls/sec {:.1}", gen_calls as f64 / gen_secs).map_err(io)?;
    writeln!(err, "generated moves/call {:.2}", generated as f64 / gen_calls as f64).map_err(io)?;
    Ok(())
}

/// Parses `args` (program name first) and runs the command, writing normal
/// output to `out` and diagnostics to `err`. Returns the exit code.
pub fn run_with<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let rendered = e.render().to_string();
            let _ = if e.use_stderr() { write!(err, "{rendered}") } else { write!(out, "{rendered}") };
            return e.exit_code();
        }
    };
    let result = match &cli.command {
        Command::Train(a) => cmd_train(a, out),
        Command::Search(a) => cmd_search(a, out),
        Command::Verify(a) => cmd_verify(a, out),
        Command::Render(a) => cmd_render(a, out),
        Command::Bench(a) => cmd_bench(a, out, err),
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            if !e.message.is_empty() {
                let _ = writeln!(err, "error: {}", e.message);
            }
            e.code
        }
    }
}

/// Entry point used by the `morpion` binary.
pub fn main() -> i32 {
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).try_init();
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run_with(std::env::args_os(), &mut stdout.lock(), &mut stderr.lock())
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn clap_definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn help_lists_the_defaults() {
        let d = TrainLoopConfig::default();
        let m = d.model;
        let mut cmd = Cli::command();
        let help = cmd.find_subcommand_mut("train").unwrap().render_long_help().to_string();
        for v in [
            d.board.to_string(),
            d.variant.to_string(),
            d.iterations.to_string(),
            d.episodes.to_string(),
            d.step_threshold.to_string(),
            d.replay_window.to_string(),
            d.mode.to_string(),
            d.selfplay_simulations.to_string(),
            d.record_simulations.to_string(),
            d.c_puct.to_string(),
            d.ranked.alpha.to_string(),
            d.reward_capacity.to_string(),
            m.epochs.to_string(),
            m.batch_size.to_string(),
            m.learning_rate.to_string(),
            m.dropout.to_string(),
            m.channels.to_string(),
            m.blocks.to_string(),
            m.l2.to_string(),
            d.seed.to_string(),
            d.workers.to_string(),
        ] {
            assert!(help.contains(&format!("[default: {v}]")), "help lacks default {v}");
        }
        assert!(help.contains(SEED_ENV));
    }

    #[test]
    fn config_text_round_trips() {
        let cfg = TrainLoopConfig { board: 16, seed: 9, mode: SelfPlayMode::Mcts, ..TrainLoopConfig::default() };
        let mut back = TrainLoopConfig::default();
        apply_config_text(&mut back, &cfg.to_text()).unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn config_text_rejects_unknown_keys_and_bad_values() {
        let mut cfg = TrainLoopConfig::default();
        assert!(apply_config_text(&mut cfg, "# comment\n\nboard = 16  # trailing\n").is_ok());
        assert_eq!(cfg.board, 16);
        assert!(apply_config_text(&mut cfg, "bogus = 1").unwrap_err().contains("bogus"));
        assert!(apply_config_text(&mut cfg, "board = x").unwrap_err().contains("board"));
        assert!(apply_config_text(&mut cfg, "board 16").is_err());
    }
}
