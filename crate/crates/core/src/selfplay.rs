//! The self-play training loop.
//!
//! One iteration has three stages:
//!
//! 1. play `episodes` games with the current model, rank each final score
//!    against the reward list and store every step under that single label;
//! 2. train a copy of the model on everything in the replay window;
//! 3. play one full-strength search game with the new model as a record
//!    attempt, then replace the model unconditionally.
//!
//! All randomness comes from streams derived from `(seed, iteration,
//! episode, stage)`, so a run is reproducible, parallel episode generation
//! matches serial generation, and a resumed run continues exactly.

use std::collections::VecDeque;
use std::fmt;
use std::path::{Path, PathBuf};

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::action::action_count;
use crate::board::{Board, Variant, MIN_BOARD_SIZE};
use crate::mcts::{self, action_to_move, Evaluator, SearchError, SearchParams};
use crate::model::{
    encode, load_checkpoint_for_board, masked_policy, save_checkpoint, ModelConfig, ModelError, PolicyValueModel,
    TrainingExample,
};
use crate::ranked::{rank, RankedError, RankedRewardConfig, RewardList, RewardSnapshot, DEFAULT_CAPACITY};
use crate::record::{RecordError, SolutionRecord};

pub const METRICS_HEADER: &str = "iter,mean_score,median_score,max_score,r_alpha,loss";
/// Iterations of unchanged best score (with a collapsed reward list) before a
/// local-optimum warning.
pub const STUCK_WINDOW: usize = 20;

const MODEL_FILE: &str = "model.ckpt";
const STATE_FILE: &str = "state.json";
const REWARDS_FILE: &str = "rewards.json";
const REPLAY_FILE: &str = "replay.json";
const CONFIG_FILE: &str = "config.txt";
const METRICS_FILE: &str = "metrics.csv";
const BEST_FILE: &str = "best.rec";
const STATE_VERSION: u32 = 1;

#[derive(Debug, thiserror::Error)]
pub enum SelfPlayError {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("resume config differs from checkpoint in `{0}`")]
    ConfigMismatch(String),
    #[error("failed to write checkpoint {path}: {source}")]
    CheckpointWrite { path: PathBuf, source: std::io::Error },
    #[error("failed to read checkpoint {path}: {reason}")]
    CheckpointRead { path: PathBuf, reason: String },
    #[error(transparent)]
    Search(#[from] SearchError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Record(#[from] RecordError),
    #[error(transparent)]
    Ranked(#[from] RankedError),
}

/// How a self-play move distribution is produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SelfPlayMode {
    /// The model's masked policy, no search.
    Direct,
    /// Visit counts of a search with `selfplay_simulations` simulations.
    Mcts,
}

impl fmt::Display for SelfPlayMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SelfPlayMode::Direct => "direct",
            SelfPlayMode::Mcts => "mcts",
        })
    }
}

impl std::str::FromStr for SelfPlayMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "direct" => Ok(SelfPlayMode::Direct),
            "mcts" => Ok(SelfPlayMode::Mcts),
            other => Err(format!("unknown self-play mode `{other}` (expected direct or mcts)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainLoopConfig {
    pub iterations: usize,
    pub episodes: usize,
    /// Moves numbered `1..=step_threshold` are sampled; later ones are argmax.
    pub step_threshold: usize,
    /// Replay window length, in iterations.
    pub replay_window: usize,
    pub mode: SelfPlayMode,
    pub selfplay_simulations: usize,
    /// Simulations per move of the record attempt.
    pub record_simulations: usize,
    pub c_puct: f32,
    pub board: usize,
    pub variant: Variant,
    pub seed: u64,
    /// Episode worker threads; 0 uses every core.
    pub workers: usize,
    /// Whether the record attempt's score is added to the reward list.
    pub record_score_in_rewards: bool,
    pub reward_capacity: usize,
    pub ranked: RankedRewardConfig,
    pub model: ModelConfig,
}

impl Default for TrainLoopConfig {
    fn default() -> Self {
        Self {
            iterations: 100,
            episodes: 50,
            step_threshold: 41,
            replay_window: 10,
            mode: SelfPlayMode::Direct,
            selfplay_simulations: SearchParams::SELFPLAY_SIMULATIONS,
            record_simulations: SearchParams::RECORD_SIMULATIONS,
            c_puct: 1.0,
            board: 22,
            variant: Variant::FiveD,
            seed: 0,
            workers: 0,
            record_score_in_rewards: true,
            reward_capacity: DEFAULT_CAPACITY,
            ranked: RankedRewardConfig::default(),
            model: ModelConfig::default(),
        }
    }
}

impl TrainLoopConfig {
    pub fn validate(&self) -> Result<(), SelfPlayError> {
        let bad = |msg: String| Err(SelfPlayError::InvalidConfig(msg));
        if self.iterations == 0 {
            return bad("iterations must be at least 1".into());
        }
        if self.episodes == 0 {
            return bad("episodes must be at least 1".into());
        }
        if self.replay_window == 0 {
            return bad("replay window must be at least 1".into());
        }
        if self.selfplay_simulations == 0 || self.record_simulations == 0 {
            return bad("simulation counts must be at least 1".into());
        }
        if !(self.c_puct >= 0.0 && self.c_puct.is_finite()) {
            return bad(format!("c_puct must be finite and non-negative, got {}", self.c_puct));
        }
        if self.board < MIN_BOARD_SIZE {
            return bad(format!("board must be at least {MIN_BOARD_SIZE}, got {}", self.board));
        }
        if self.reward_capacity == 0 {
            return bad("reward list capacity must be at least 1".into());
        }
        RankedRewardConfig::new(self.ranked.alpha)?;
        self.model.validate()?;
        Ok(())
    }

    fn search_params(&self, simulations: usize) -> SearchParams {
        SearchParams { simulations, c_puct: self.c_puct, ..SearchParams::default() }
    }

    /// `key = value` lines describing every field.
    pub fn to_text(&self) -> String {
        let m = &self.model;
        let rows: Vec<(&str, String)> = vec![
            ("iterations", self.iterations.to_string()),
            ("episodes", self.episodes.to_string()),
            ("step_threshold", self.step_threshold.to_string()),
            ("replay_window", self.replay_window.to_string()),
            ("mode", self.mode.to_string()),
            ("selfplay_simulations", self.selfplay_simulations.to_string()),
            ("record_simulations", self.record_simulations.to_string()),
            ("c_puct", self.c_puct.to_string()),
            ("board", self.board.to_string()),
            ("variant", self.variant.to_string()),
            ("seed", self.seed.to_string()),
            ("workers", self.workers.to_string()),
            ("record_score_in_rewards", self.record_score_in_rewards.to_string()),
            ("reward_capacity", self.reward_capacity.to_string()),
            ("alpha", self.ranked.alpha.to_string()),
            ("epochs", m.epochs.to_string()),
            ("batch_size", m.batch_size.to_string()),
            ("learning_rate", m.learning_rate.to_string()),
            ("dropout", m.dropout.to_string()),
            ("channels", m.channels.to_string()),
            ("blocks", m.blocks.to_string()),
            ("l2", m.l2.to_string()),
            ("policy_channels", m.policy_channels.to_string()),
            ("value_hidden", m.value_hidden.to_string()),
        ];
        rows.into_iter().map(|(k, v)| format!("{k} = {v}\n")).collect()
    }
}

/// Independent generator for one `(iteration, episode, stage)` slot.
pub fn stream_rng(seed: u64, iteration: usize, episode: usize, stage: u64) -> ChaCha8Rng {
    fn mix(mut z: u64) -> u64 {
        z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }
    let h = mix(mix(mix(seed) ^ iteration as u64) ^ episode as u64);
    let mut rng = ChaCha8Rng::seed_from_u64(h);
    rng.set_stream(stage);
    rng
}

const STAGE_INIT: u64 = 0;
const STAGE_EPISODE: u64 = 1;
const STAGE_RANK: u64 = 2;
const STAGE_TRAIN: u64 = 3;
const STAGE_RECORD: u64 = 4;

/// One move of a self-play game and the distribution it was chosen from.
#[derive(Debug, Clone, PartialEq)]
pub struct Step {
    pub action: u32,
    /// Sparse `(action, probability)` pairs over the legal moves.
    pub policy: Vec<(u32, f32)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Episode {
    pub steps: Vec<Step>,
    pub board: Board,
}

impl Episode {
    pub fn score(&self) -> u32 {
        self.board.score() as u32
    }
}

fn sparse(policy: &[f32]) -> Vec<(u32, f32)> {
    policy
        .iter()
        .enumerate()
        .filter(|(_, &p)| p > 0.0)
        .map(|(a, &p)| (a as u32, p))
        .collect()
}

/// Plays one game from the initial cross.
pub fn run_episode<E: Evaluator + ?Sized>(
    model: &E,
    rewards: &RewardSnapshot,
    cfg: &TrainLoopConfig,
    rng: &mut ChaCha8Rng,
) -> Result<Episode, SelfPlayError> {
    let mut board = Board::new(cfg.board, cfg.variant).map_err(|e| SelfPlayError::InvalidConfig(e.to_string()))?;
    let n = board.size();
    let mut steps = Vec::new();
    let mut mask = vec![false; action_count(n)];
    loop {
        let moves = board.legal_moves();
        if moves.is_empty() {
            break;
        }
        let policy = match cfg.mode {
            SelfPlayMode::Direct => {
                mask.iter_mut().for_each(|m| *m = false);
                for m in &moves {
                    mask[crate::action::action_index(m, n)] = true;
                }
                let (raw, _) = model.evaluate(&board)?;
                masked_policy(&raw, &mask)?
            }
            SelfPlayMode::Mcts => {
                let params = cfg.search_params(cfg.selfplay_simulations);
                mcts::search(&board, model, &params, rewards, rng)?.policy
            }
        };
        let policy = sparse(&policy);
        let t = steps.len() + 1;
        let pick = if t <= cfg.step_threshold {
            let dist = WeightedIndex::new(policy.iter().map(|&(_, p)| p)).expect("policy has positive mass");
            dist.sample(rng)
        } else {
            let mut best = 0;
            for (i, &(_, p)) in policy.iter().enumerate() {
                if p > policy[best].1 {
                    best = i;
                }
            }
            best
        };
        let action = policy[pick].0;
        let m = action_to_move(&board, action as usize).expect("policy is supported on legal moves");
        board.apply(m).expect("legal move");
        steps.push(Step { action, policy });
    }
    Ok(Episode { steps, board })
}

/// Policy target for one direct-mode step. Steps of a won game point at
/// the move taken; steps of a lost game keep the distribution they were
/// sampled from.
fn direct_target(step: &Step, z: i8) -> Vec<(u32, f32)> {
    if z > 0 {
        vec![(step.action, 1.0)]
    } else {
        step.policy.clone()
    }
}

/// A finished game as kept in the replay buffer: its actions, one sparse
/// policy target per step (probabilities stored as `f32` bit patterns) and
/// the game's ranked reward.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StoredGame {
    pub actions: Vec<u32>,
    pub targets: Vec<Vec<(u32, u32)>>,
    pub z: i8,
}

impl StoredGame {
    pub fn len(&self) -> usize {
        self.actions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.actions.is_empty()
    }

    /// One training example per step, re-encoding each visited position.
    pub fn examples(&self, size: usize, variant: Variant) -> Result<Vec<TrainingExample>, SelfPlayError> {
        let mut board = Board::new(size, variant).map_err(|e| SelfPlayError::InvalidConfig(e.to_string()))?;
        let a = action_count(size);
        let mut out = Vec::with_capacity(self.len());
        for (&action, target) in self.actions.iter().zip(&self.targets) {
            let mut pi = vec![0.0; a];
            for &(i, bits) in target {
                pi[i as usize] = f32::from_bits(bits);
            }
            out.push(TrainingExample { encoding: encode(&board), pi, z: self.z });
            let m = action_to_move(&board, action as usize).ok_or_else(|| SelfPlayError::CheckpointRead {
                path: PathBuf::from(REPLAY_FILE),
                reason: format!("stored action {action} is not legal"),
            })?;
            board.apply(m).expect("legal move");
        }
        Ok(out)
    }
}

/// Games grouped by the iteration that produced them, limited to the most
/// recent `window` iterations.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReplayBuffer {
    window: usize,
    iterations: VecDeque<(usize, Vec<StoredGame>)>,
}

impl ReplayBuffer {
    pub fn new(window: usize) -> Self {
        Self { window: window.max(1), iterations: VecDeque::new() }
    }

    pub fn window(&self) -> usize {
        self.window
    }

    pub fn push(&mut self, iteration: usize, game: StoredGame) {
        match self.iterations.back_mut() {
            Some((i, games)) if *i == iteration => games.push(game),
            _ => self.iterations.push_back((iteration, vec![game])),
        }
    }

    /// Drops every iteration older than the window ending at `current`.
    pub fn trim(&mut self, current: usize) {
        while let Some(&(i, _)) = self.iterations.front() {
            if i + self.window <= current {
                self.iterations.pop_front();
            } else {
                break;
            }
        }
    }

    pub fn iterations(&self) -> impl Iterator<Item = usize> + '_ {
        self.iterations.iter().map(|(i, _)| *i)
    }

    pub fn games(&self) -> impl Iterator<Item = &StoredGame> {
        self.iterations.iter().flat_map(|(_, g)| g)
    }

    /// Number of stored positions.
    pub fn len(&self) -> usize {
        self.games().map(StoredGame::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn examples(&self, size: usize, variant: Variant) -> Result<Vec<TrainingExample>, SelfPlayError> {
        let mut out = Vec::with_capacity(self.len());
        for g in self.games() {
            out.extend(g.examples(size, variant)?);
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationMetrics {
    pub iter: usize,
    pub mean_score: f64,
    pub median_score: f64,
    pub max_score: u32,
    /// Threshold after the iteration's episodes were ranked.
    pub r_alpha: u32,
    pub loss: f64,
    pub record_score: u32,
    pub best_score: u32,
    /// Final score of every episode, in episode order.
    pub scores: Vec<u32>,
}

impl IterationMetrics {
    pub fn csv_row(&self) -> String {
        format!(
            "{},{:.3},{:.1},{},{},{:.6}",
            self.iter, self.mean_score, self.median_score, self.max_score, self.r_alpha, self.loss
        )
    }
}

pub fn metrics_csv(rows: &[IterationMetrics]) -> String {
    let mut out = String::from(METRICS_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&r.csv_row());
        out.push('\n');
    }
    out
}

/// Everything the loop carries between iterations.
#[derive(Debug, Clone)]
pub struct TrainState {
    pub model: PolicyValueModel,
    pub rewards: RewardList,
    pub replay: ReplayBuffer,
    /// Completed iterations.
    pub iteration: usize,
    pub best: Option<SolutionRecord>,
    pub metrics: Vec<IterationMetrics>,
}

impl TrainState {
    pub fn new(cfg: &TrainLoopConfig) -> Result<Self, SelfPlayError> {
        cfg.validate()?;
        let model = PolicyValueModel::for_board(cfg.board, cfg.model, &mut stream_rng(cfg.seed, 0, 0, STAGE_INIT));
        Ok(Self {
            model,
            rewards: RewardList::new(cfg.reward_capacity)?,
            replay: ReplayBuffer::new(cfg.replay_window),
            iteration: 0,
            best: None,
            metrics: Vec::new(),
        })
    }

    pub fn best_score(&self) -> u32 {
        self.best.as_ref().map_or(0, |r| r.len() as u32)
    }

    /// True once the best score has not moved for [`STUCK_WINDOW`]
    /// iterations and every score in the reward list is the same.
    pub fn is_stuck(&self) -> bool {
        if self.metrics.len() < STUCK_WINDOW {
            return false;
        }
        let recent = &self.metrics[self.metrics.len() - STUCK_WINDOW..];
        let flat = recent.iter().all(|m| m.max_score == recent[0].max_score);
        flat && matches!(self.rewards.min_max(), Some((lo, hi)) if lo == hi)
    }
}

/// Scores the episode, records the score in the reward list, labels every
/// step with the resulting ranked reward and stores the game under
/// `iteration`. Returns the new training examples.
pub fn finish_episode(
    state: &mut TrainState,
    cfg: &TrainLoopConfig,
    iteration: usize,
    episode: &Episode,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<TrainingExample>, SelfPlayError> {
    let score = episode.score();
    state.rewards.record_score(score);
    let threshold = state.rewards.threshold(&cfg.ranked)?;
    let z = rank(score, threshold, rng);
    let targets = episode
        .steps
        .iter()
        .map(|s| {
            let t = match cfg.mode {
                SelfPlayMode::Direct => direct_target(s, z),
                SelfPlayMode::Mcts => s.policy.clone(),
            };
            t.into_iter().map(|(a, p)| (a, p.to_bits())).collect()
        })
        .collect();
    let game = StoredGame { actions: episode.steps.iter().map(|s| s.action).collect(), targets, z };
    let examples = game.examples(cfg.board, cfg.variant)?;
    state.replay.push(iteration, game);
    Ok(examples)
}

fn median(sorted: &[u32]) -> f64 {
    let n = sorted.len();
    if n % 2 == 1 {
        sorted[n / 2] as f64
    } else {
        (sorted[n / 2 - 1] as f64 + sorted[n / 2] as f64) / 2.0
    }
}

/// Runs one full iteration. Episodes are generated on the current rayon
/// pool.
pub fn run_iteration(state: &mut TrainState, cfg: &TrainLoopConfig) -> Result<IterationMetrics, SelfPlayError> {
    let iter = state.iteration + 1;
    let snapshot = state.rewards.snapshot(&cfg.ranked);
    let model = &state.model;
    let episodes: Vec<Episode> = (0..cfg.episodes)
        .into_par_iter()
        .map(|e| run_episode(model, &snapshot, cfg, &mut stream_rng(cfg.seed, iter, e, STAGE_EPISODE)))
        .collect::<Result<_, _>>()?;

    let mut scores = Vec::with_capacity(episodes.len());
    for (e, ep) in episodes.iter().enumerate() {
        finish_episode(state, cfg, iter, ep, &mut stream_rng(cfg.seed, iter, e, STAGE_RANK))?;
        scores.push(ep.score());
    }
    let r_alpha = state.rewards.threshold(&cfg.ranked)?;
    state.replay.trim(iter);

    let examples = state.replay.examples(cfg.board, cfg.variant)?;
    let mut candidate = state.model.clone();
    let report = candidate.train(&examples, &cfg.model, &mut stream_rng(cfg.seed, iter, 0, STAGE_TRAIN));

    let root = Board::new(cfg.board, cfg.variant).map_err(|e| SelfPlayError::InvalidConfig(e.to_string()))?;
    let record = mcts::best_line(
        &root,
        &candidate,
        &cfg.search_params(cfg.record_simulations),
        &state.rewards.snapshot(&cfg.ranked),
        &mut stream_rng(cfg.seed, iter, 0, STAGE_RECORD),
    )?;
    let record_score = record.verify()? as u32;
    if record_score > state.best_score() {
        state.best = Some(record);
    }
    if cfg.record_score_in_rewards {
        state.rewards.record_score(record_score);
    }
    state.model = candidate;
    state.iteration = iter;

    let mut sorted = scores.clone();
    sorted.sort_unstable();
    let metrics = IterationMetrics {
        iter,
        mean_score: sorted.iter().map(|&s| s as f64).sum::<f64>() / sorted.len() as f64,
        median_score: median(&sorted),
        max_score: *sorted.last().expect("at least one episode"),
        r_alpha,
        loss: report.final_loss(),
        record_score,
        best_score: state.best_score(),
        scores,
    };
    state.metrics.push(metrics.clone());
    if state.is_stuck() {
        log::warn!(
            "iteration {iter}: best episode score {} unchanged for {STUCK_WINDOW} iterations and reward list collapsed; likely stuck in a local optimum",
            metrics.max_score
        );
    }
    Ok(metrics)
}

#[derive(Serialize, Deserialize)]
struct StateFile {
    version: u32,
    iteration: usize,
    config: TrainLoopConfig,
    best: Option<String>,
    metrics: Vec<IterationMetrics>,
}

#[derive(Serialize, Deserialize)]
struct Snapshot<T> {
    iteration: usize,
    data: T,
}

fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), SelfPlayError> {
    let wrap = |source| SelfPlayError::CheckpointWrite { path: path.to_path_buf(), source };
    let tmp = path.with_extension("tmp");
    std::fs::write(&tmp, bytes).map_err(wrap)?;
    std::fs::rename(&tmp, path).map_err(wrap)
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, SelfPlayError> {
    let fail = |reason: String| SelfPlayError::CheckpointRead { path: path.to_path_buf(), reason };
    let text = std::fs::read_to_string(path).map_err(|e| fail(e.to_string()))?;
    serde_json::from_str(&text).map_err(|e| fail(e.to_string()))
}

fn to_json<T: Serialize>(value: &T) -> Vec<u8> {
    serde_json::to_vec(value).expect("state serialises")
}

/// Writes the whole training state into `dir`. The state file goes last, so
/// a directory whose state file names iteration `k` holds a complete
/// iteration-`k` checkpoint.
pub fn save_state(dir: &Path, cfg: &TrainLoopConfig, state: &TrainState) -> Result<(), SelfPlayError> {
    std::fs::create_dir_all(dir).map_err(|source| SelfPlayError::CheckpointWrite { path: dir.to_path_buf(), source })?;
    let model_path = dir.join(MODEL_FILE);
    save_checkpoint(&state.model, &model_path).map_err(|e| match e {
        ModelError::Io(source) => SelfPlayError::CheckpointWrite { path: model_path.clone(), source },
        other => other.into(),
    })?;
    let iteration = state.iteration;
    write_atomic(&dir.join(REWARDS_FILE), &to_json(&Snapshot { iteration, data: &state.rewards }))?;
    write_atomic(&dir.join(REPLAY_FILE), &to_json(&Snapshot { iteration, data: &state.replay }))?;
    write_atomic(&dir.join(CONFIG_FILE), cfg.to_text().as_bytes())?;
    write_atomic(&dir.join(METRICS_FILE), metrics_csv(&state.metrics).as_bytes())?;
    if let Some(best) = &state.best {
        write_atomic(&dir.join(BEST_FILE), best.to_text().as_bytes())?;
    }
    let file = StateFile {
        version: STATE_VERSION,
        iteration,
        config: *cfg,
        best: state.best.as_ref().map(SolutionRecord::to_text),
        metrics: state.metrics.clone(),
    };
    write_atomic(&dir.join(STATE_FILE), &serde_json::to_vec_pretty(&file).expect("state serialises"))
}

/// First field whose value differs, ignoring the iteration budget and the
/// worker count.
fn config_difference(stored: &TrainLoopConfig, requested: &TrainLoopConfig) -> Option<String> {
    let norm = |c: &TrainLoopConfig| {
        let mut v = serde_json::to_value(TrainLoopConfig { iterations: 1, workers: 0, ..*c }).expect("config serialises");
        if let Some(model) = v.get_mut("model").and_then(|m| m.as_object_mut()).map(std::mem::take) {
            let obj = v.as_object_mut().expect("object");
            obj.remove("model");
            obj.extend(model);
        }
        v
    };
    let (a, b) = (norm(stored), norm(requested));
    let (a, b) = (a.as_object()?, b.as_object()?);
    a.iter().find(|(k, v)| b.get(*k) != Some(*v)).map(|(k, _)| k.clone())
}

pub fn has_state(dir: &Path) -> bool {
    dir.join(STATE_FILE).is_file()
}

/// Restores a state written by [`save_state`], refusing it when it was made
/// under a different configuration.
pub fn load_state(dir: &Path, cfg: &TrainLoopConfig) -> Result<TrainState, SelfPlayError> {
    let state_path = dir.join(STATE_FILE);
    let file: StateFile = read_json(&state_path)?;
    if file.version != STATE_VERSION {
        return Err(SelfPlayError::CheckpointRead {
            path: state_path,
            reason: format!("unsupported state version {}", file.version),
        });
    }
    if let Some(field) = config_difference(&file.config, cfg) {
        return Err(SelfPlayError::ConfigMismatch(field));
    }
    let model_path = dir.join(MODEL_FILE);
    let model = load_checkpoint_for_board(&model_path, cfg.board)
        .map_err(|e| SelfPlayError::CheckpointRead { path: model_path.clone(), reason: e.to_string() })?;
    if *model.config() != cfg.model {
        return Err(SelfPlayError::ConfigMismatch("model".into()));
    }
    let rewards: Snapshot<RewardList> = read_json(&dir.join(REWARDS_FILE))?;
    let replay: Snapshot<ReplayBuffer> = read_json(&dir.join(REPLAY_FILE))?;
    for (name, it) in [(REWARDS_FILE, rewards.iteration), (REPLAY_FILE, replay.iteration)] {
        if it != file.iteration {
            return Err(SelfPlayError::CheckpointRead {
                path: dir.join(name),
                reason: format!("holds iteration {it}, state file says {}", file.iteration),
            });
        }
    }
    let best = match file.best {
        Some(text) => {
            let record = SolutionRecord::parse(&text)?;
            record.verify()?;
            Some(record)
        }
        None => None,
    };
    Ok(TrainState {
        model,
        rewards: rewards.data,
        replay: replay.data,
        iteration: file.iteration,
        best,
        metrics: file.metrics,
    })
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub model: PolicyValueModel,
    pub best: Option<SolutionRecord>,
    pub metrics: Vec<IterationMetrics>,
}

/// Runs iterations until `cfg.iterations` are complete. With `dir`, the state
/// is checkpointed there after every iteration, and when `resume` is set an
/// existing checkpoint in `dir` is continued instead of starting over.
/// `on_iteration` sees each iteration's metrics as they are produced.
pub fn train_loop(
    cfg: &TrainLoopConfig,
    dir: Option<&Path>,
    resume: bool,
    mut on_iteration: impl FnMut(&IterationMetrics),
) -> Result<TrainOutcome, SelfPlayError> {
    cfg.validate()?;
    let mut state = match dir {
        Some(d) if resume && has_state(d) => load_state(d, cfg)?,
        _ => TrainState::new(cfg)?,
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers)
        .build()
        .map_err(|e| SelfPlayError::InvalidConfig(format!("cannot start worker pool: {e}")))?;
    while state.iteration < cfg.iterations {
        let metrics = pool.install(|| run_iteration(&mut state, cfg))?;
        if let Some(d) = dir {
            save_state(d, cfg, &state)?;
        }
        on_iteration(&metrics);
    }
    Ok(TrainOutcome { model: state.model, best: state.best, metrics: state.metrics })
}
