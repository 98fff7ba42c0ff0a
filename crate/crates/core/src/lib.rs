//! Morpion Solitaire engine with ranked-reward self-play.
//!
//! The crate is layered bottom-up:
//!
//! * [`board`], [`geometry`], [`action`]: rules, move generation and the fixed
//!   action-space addressing used by policy vectors;
//! * [`record`], [`render`]: solution files, verification and drawings;
//! * [`ranked`]: the recent-score list and the ranked reward;
//! * [`model`]: the policy-value network, its training and checkpoints;
//! * [`mcts`]: PUCT search guided by an [`mcts::Evaluator`];
//! * [`selfplay`]: the iterated self-play / retrain / record-attempt loop;
//! * [`cli`]: the `morpion` command-line front end.

pub mod action;
pub mod board;
pub mod cli;
pub mod geometry;
pub mod mcts;
pub mod model;
pub mod playout;
pub mod ranked;
pub mod record;
pub mod render;
pub mod selfplay;

pub use action::{action_count, action_index, index_to_line};
pub use board::{Board, BoardError, IllegalReason, Move, Variant};
pub use geometry::{Coord, Direction, Line};
pub use ranked::{rank, RankedRewardConfig, RewardList, RewardSnapshot};
pub use record::{RecordError, SolutionRecord};
